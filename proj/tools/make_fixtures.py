#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the synthetic regression bundles under tests/fixtures/.

The bundles have the shape of a 12-block, 768-wide encoder (13 points per
trajectory: embeddings plus every block output). Hidden states are synthetic:
each trajectory oscillates along a private direction with a few repeated
steps, on top of isotropic noise, so turning angles cluster away from 90
degrees in both tails and trajectories fold back on themselves.

This writer is independent of the C++ reader on purpose; the test suite
checks that the two agree byte for byte.
"""

import argparse
import json
import struct
from pathlib import Path

import numpy as np

DIM = 768
POINTS = 13
MODEL = "synthetic-encoder-12x768 (fixture generator v1)"

SENTENCE_WORDS = [
    "bank", "river", "court", "light", "plant", "match", "spring", "bark", "pitch", "seal",
    "crane", "mouse", "bat", "bow", "fair", "letter", "organ", "palm", "ring", "scale",
]

# Original text, one trajectory per whitespace-separated word.
PARAGRAPH = (
    "On long winter evenings the old library stayed open late. Lamps glowed above long oak tables "
    "where neighbours read newspapers, traded recipes and argued about chess. Children crowded "
    "the corner with picture books while a retired teacher helped them sound out difficult words. "
    "Nobody checked cards at the door. The building belonged to the whole street, and every "
    "visitor left a little warmer than they arrived that cold night."
)


def write_emtj(path, model_name, records):
    """records: list of (id, token_text, sentence_id, word_index, array[POINTS, DIM])."""
    meta = []
    payload = bytearray()
    for rid, text, sid, widx, arr in records:
        arr = np.ascontiguousarray(arr, dtype="<f4")
        meta.append({"id": rid, "token_text": text, "sentence_id": sid, "word_index": widx,
                     "dim": int(arr.shape[1]), "points": int(arr.shape[0])})
        payload += arr.tobytes()
    header = {
        "model_name": model_name,
        "dim": DIM,
        "points_per_trajectory": POINTS,
        "num_trajectories": len(records),
        "payload_bytes": len(payload),
        "trajectories": meta,
    }
    text = json.dumps(header, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as f:
        f.write(b"EMTJ")
        f.write(struct.pack("<HI", 1, len(text)))
        f.write(text)
        f.write(payload)


def unit(rng, d=DIM):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def folding_trajectory(rng, amplitude, context=None):
    """Steps alternate along one direction with one or two repeats, plus noise."""
    axis = unit(rng)
    repeats = set(rng.choice(np.arange(1, POINTS - 1), size=rng.integers(1, 3), replace=False).tolist())
    signs = [1.0]
    for i in range(1, POINTS - 1):
        signs.append(signs[-1] if i in repeats else -signs[-1])
    x = [0.5 * rng.standard_normal(DIM) + (context if context is not None else 0.0)]
    for i in range(POINTS - 1):
        scale = 1.0 + 0.1 * i
        step = amplitude * signs[i] * axis * scale + rng.standard_normal(DIM) * scale / np.sqrt(DIM)
        x.append(x[-1] + step)
    return np.array(x)


def sentence_bundle(rng):
    records = []
    for s in range(100):
        word = SENTENCE_WORDS[(3 * s + 9) % len(SENTENCE_WORDS)]
        traj = folding_trajectory(rng, rng.uniform(0.35, 0.8))
        records.append((f"sent_{s:03d}_tok_{word}", word, f"sent_{s:03d}", int(rng.integers(0, 12)), traj))
    return records


def paragraph_bundle(rng):
    words = PARAGRAPH.split()
    context = 2.0 * unit(rng)
    records = []
    for i, w in enumerate(words):
        token = w.strip(".,").lower()
        traj = folding_trajectory(rng, rng.uniform(0.2, 0.8), context=context)
        records.append((f"para_w{i:02d}_{token}", token, "para_000", i, traj))
    return records


def lensing_bundles(rng):
    with_r, without_r, base_r = [], [], []
    for t in range(50):
        word = SENTENCE_WORDS[(3 * t + 9) % len(SENTENCE_WORDS)]
        tid = f"{word}_{SENTENCE_WORDS[(7 * t + 2) % len(SENTENCE_WORDS)]}_{t:03d}"
        without = folding_trajectory(rng, rng.uniform(0.35, 0.8))
        # The context token bends the trajectory from layer 3 on.
        deflection = np.zeros_like(without)
        drift = np.zeros(DIM)
        for i in range(3, POINTS):
            drift = drift + rng.uniform(0.6, 1.2) * unit(rng) * (1.0 + 0.1 * i)
            deflection[i] = drift
        with_traj = without + deflection
        base = with_traj + 0.02 * rng.standard_normal(without.shape)
        sid = f"triple_{t:03d}"
        with_r.append((tid, word, sid, 4, with_traj))
        without_r.append((tid, word, sid, 4, without))
        base_r.append((tid, word, sid, 4, base))
    return with_r, without_r, base_r


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    ap.add_argument("--seed", type=int, default=20240517)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    write_emtj(out / "sentences.emtj", MODEL, sentence_bundle(rng))
    write_emtj(out / "paragraph.emtj", MODEL, paragraph_bundle(rng))
    w, wo, b = lensing_bundles(rng)
    write_emtj(out / "lensing_with.emtj", MODEL, w)
    write_emtj(out / "lensing_without.emtj", MODEL, wo)
    write_emtj(out / "lensing_base.emtj", MODEL, b)


if __name__ == "__main__":
    main()
