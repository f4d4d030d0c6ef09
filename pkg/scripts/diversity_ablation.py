#!/usr/bin/env python3
"""Paired training runs with and without the diversity term.

Runs gradient descent twice per seed with identical configuration except for
the diversity weight, projection disabled so the measured quantity is the
loss-shaping effect, and prints the maximum intra-class prototype cosine of
each run.
"""

import argparse

import numpy as np

from proto_tqtl.prototypes import PrototypeBank, TrainConfig, train
from proto_tqtl.synth import SynthSpec, generate_dataset
from proto_tqtl.trace import Label


def max_intra_class_cosine(bank: PrototypeBank) -> float:
    worst = -1.0
    norms = np.linalg.norm(bank.vectors, axis=1)
    for label in Label:
        ids = bank.class_ids(label)
        for a in ids:
            for b in ids:
                if a < b:
                    cos = float(bank.vectors[a] @ bank.vectors[b]) / (norms[a] * norms[b])
                    worst = max(worst, cos)
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    ap.add_argument("--lambda-div", type=float, default=0.1)
    ap.add_argument("--lr", type=float, default=0.05)
    ap.add_argument("--epochs", type=int, default=200)
    args = ap.parse_args()

    clips = generate_dataset(SynthSpec())
    print(f"{'seed':>4} {'without':>10} {'with':>10} {'reduction':>10}")
    for seed in args.seeds:
        shared = dict(lr_proto=args.lr, lr_fc=args.lr, epochs=args.epochs,
                      projection_period=10**9, seed=seed)
        plain = train(clips, TrainConfig(lambda_div=0.0, **shared)).bank
        diverse = train(clips, TrainConfig(lambda_div=args.lambda_div, **shared)).bank
        a, b = max_intra_class_cosine(plain), max_intra_class_cosine(diverse)
        print(f"{seed:>4} {a:>10.4f} {b:>10.4f} {a - b:>10.4f}")


if __name__ == "__main__":
    main()
