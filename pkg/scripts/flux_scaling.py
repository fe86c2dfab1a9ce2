#!/usr/bin/env python3
"""Expected photons leaking into F when N photons are weakly measured in arm B.

Couplings c/sqrt(N) give a flux that stays of order one photon; couplings
c/N make it vanish as 1/N.
"""

import argparse

from cfc_lab.tsvf import flux_scaling


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--N", type=int, nargs="+", default=[1, 10, 100, 1000, 10_000, 100_000])
    parser.add_argument("--c", type=float, default=1.0)
    args = parser.parse_args()
    print(f"{'N':>8} {'per_photon':>14} {'collective':>14}")
    for N in args.N:
        pp = flux_scaling(N, "per_photon", c=args.c).expected_flux
        co = flux_scaling(N, "collective", c=args.c).expected_flux
        print(f"{N:>8} {pp:>14.6e} {co:>14.6e}")


if __name__ == "__main__":
    main()
