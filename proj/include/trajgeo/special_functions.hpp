// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace trajgeo {

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
///
/// `y` must equal 1 - x; passing it separately keeps full precision when x
/// is close to 1. Evaluated with the Lentz continued fraction on whichever
/// side of the mean converges fastest, to a relative target of 1e-15.
double regularized_incomplete_beta(double a, double b, double x, double y);
double regularized_incomplete_beta(double a, double b, double x);

/// Upper tail 1 - F(t) of Student's t with `dof` degrees of freedom.
double student_t_sf(double t, double dof);

}  // namespace trajgeo
