#!/usr/bin/env python3
"""Sample trajectories of a cavity protocol and compare with exact event probabilities."""

import argparse
import math

from cfc_lab.zeno import ProtocolParams, run_protocol, simulate_trajectories


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--protocol", choices=("jozsa", "hosten"), default="jozsa")
    parser.add_argument("--N", type=int, default=20)
    parser.add_argument("--outcome", type=int, choices=(0, 1), default=1)
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--shards", type=int, default=1)
    args = parser.parse_args()

    params = ProtocolParams(args.N, outcome=args.outcome)
    exact = run_protocol(params, args.protocol).event_probabilities()
    hist = simulate_trajectories(params, args.protocol, args.trials, args.seed, shards=args.shards)
    print(f"{'event':>14} {'count':>9} {'expected':>11} {'z':>7}")
    for event, p in exact.items():
        n = hist.counts.get(event, 0)
        sigma = math.sqrt(args.trials * p * max(0.0, 1 - p))
        z = (n - args.trials * p) / sigma if sigma > 0 else 0.0
        print(f"{event:>14} {n:>9} {args.trials * p:>11.2f} {z:>+7.2f}")


if __name__ == "__main__":
    main()
