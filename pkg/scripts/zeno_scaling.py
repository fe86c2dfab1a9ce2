#!/usr/bin/env python3
"""Failure probability of both cavity protocols versus the number of rounds N.

Prints a table of exact failure probabilities next to the leading-order
estimates and, for the chained scheme, the tuned bounce angle.
"""

import argparse
import math

from cfc_lab.zeno import ProtocolParams, jozsa_failure_asymptote, run_hosten, run_jozsa, tune_alpha


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--N", type=int, nargs="+", default=[5, 10, 20, 50, 100, 200])
    args = parser.parse_args()

    print(f"{'N':>6} {'jozsa p_abs':>14} {'pi^2/4N':>14} {'hosten p_fail(0)':>17} "
          f"{'alpha*·2N/pi':>13} {'hosten p_fail(1,tuned)':>23}")
    for N in args.N:
        jozsa = run_jozsa(ProtocolParams(N, outcome=1)).p_absorbed
        h0 = run_hosten(ProtocolParams(N, outcome=0))
        fail0 = 1 - h0.p_outcome_A
        if N >= 2:
            alpha = tune_alpha(N)
            h1 = run_hosten(ProtocolParams(N, alpha, outcome=1))
            ratio, fail1 = alpha * 2 * N / math.pi, 1 - h1.p_outcome_B
        else:
            ratio = fail1 = float("nan")
        print(f"{N:>6} {jozsa:>14.6e} {jozsa_failure_asymptote(N):>14.6e} {fail0:>17.6e} "
              f"{ratio:>13.6f} {fail1:>23.6e}")


if __name__ == "__main__":
    main()
