#!/usr/bin/env python3
"""Weak values, ABL probabilities and pointer shifts in the nested interferometer."""

from cfc_lab.interferometer import build_nested_mzi, detection_probability, extract_two_state_vector
from cfc_lab.qstate import projector
from cfc_lab.tsvf import PointerConfig, abl_probability, pointer_measurement, weak_value


def main():
    net = build_nested_mzi(0)
    print("detector probabilities:",
          {d: round(detection_probability(net, d), 12) for d in net.detectors})
    print(f"{'probe':>5} {'weak value':>22} {'ABL':>8} {'shift/g (g=0.01)':>17} {'shift/g (g=0.5)':>16}")
    for probe in "ABCEF":
        tsv = extract_two_state_vector(net, "D1", at=probe)
        wv = weak_value(tsv, projector({probe}))
        try:
            abl = f"{abl_probability(tsv, projector({probe})):.6f}"
        except Exception:
            abl = "n/a"
        ratios = [pointer_measurement(net, probe, PointerConfig(g)).mean_shift / g for g in (0.01, 0.5)]
        print(f"{probe:>5} {wv.real:>+11.6f}{wv.imag:>+10.2e}i {abl:>8} {ratios[0]:>17.6f} {ratios[1]:>16.6f}")


if __name__ == "__main__":
    main()
