// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace trajgeo {

/// Arguments are mutually inconsistent (mismatched ids, shapes, sample counts).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The computation is undefined for the given data (e.g. rank-deficient PCA).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trajgeo
