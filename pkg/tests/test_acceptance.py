"""Acceptance gate: one marked group of checks per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints a
PASS/FAIL line per criterion.
"""

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from scipy import stats

from cfc_lab.cli import main, report_json, run
from cfc_lab.interferometer import (
    build_nested_mzi,
    extract_two_state_vector,
    propagate_backward,
    propagate_forward,
)
from cfc_lab.qstate import StateVector, make_state, projector
from cfc_lab.scenario import ScenarioError, format_scenario, parse_scenario
from cfc_lab.tsvf import (
    PointerConfig,
    abl_probability,
    flux_scaling,
    pointer_measurement,
    strong_measurement_disturbance,
    weak_value,
)
from cfc_lab.zeno import (
    ProtocolParams,
    hosten_subroutine,
    run_hosten,
    run_jozsa,
    simulate_trajectories,
    tune_alpha,
)
from scenario_strategies import scenarios

S3 = 1 / math.sqrt(3)
criterion = pytest.mark.criterion


def jozsa_ratio_deviation(N):
    p = run_jozsa(ProtocolParams(N, outcome=1)).p_absorbed
    return abs(p * 4 * N / math.pi**2 - 1)


def global_phase_distance(amps, reference):
    a, b = np.asarray(amps, complex), np.asarray(reference, complex)
    ov = np.vdot(b, a)
    return float(np.max(np.abs(a * np.conj(ov / abs(ov)) - b)))


# -- 1 ------------------------------------------------------------------------


@criterion(1, "two-cavity failure probability")
def test_c1_exact_failure_n50():
    p = run_jozsa(ProtocolParams(50, outcome=1)).p_absorbed
    assert abs(p - (1 - math.cos(math.pi / 100) ** 100)) < 1e-12


@criterion(1, "two-cavity failure probability")
def test_c1_asymptotic_ratio_n50():
    assert jozsa_ratio_deviation(50) < 0.03


@criterion(1, "two-cavity failure probability")
def test_c1_deviation_shrinks_per_decade():
    devs = [jozsa_ratio_deviation(N) for N in (50, 500, 5000)]
    for big, small in zip(devs, devs[1:]):
        assert 8 < big / small < 12


# -- 2 ------------------------------------------------------------------------


@criterion(2, "two-cavity unconditional state")
def test_c2_unconditional_state_n50():
    N = 50
    a = math.pi / (2 * N)
    expected = {"L": math.cos(a) ** N}
    expected.update({f"abs:{n}": math.cos(a) ** (n - 1) * math.sin(a) for n in range(1, N + 1)})
    state = run_jozsa(ProtocolParams(N, outcome=1)).unconditional_state
    assert set(state.labels) <= set(expected)
    assert state.distance(StateVector(expected)) < 1e-12


# -- 3 ------------------------------------------------------------------------


@criterion(3, "chained subroutine")
def test_c3_transparent_pre_test_state():
    N = 50
    a = math.pi / (2 * N)
    out = hosten_subroutine(StateVector.basis("A"), ProtocolParams(N, outcome=0))
    assert out.pre_test_state.distance(make_state([("A", math.cos(a)), ("C", math.sin(a))])) < 1e-12


@criterion(3, "chained subroutine")
def test_c3_absorbing_pre_test_state():
    N = 50
    a = math.pi / (2 * N)
    out = hosten_subroutine(StateVector.basis("A"), ProtocolParams(N, outcome=1))
    expected = {"A": math.cos(a), "B": math.sin(a) * math.cos(a) ** N}
    expected.update({f"abs:{n}": math.sin(a) ** 2 * math.cos(a) ** (n - 1) for n in range(1, N + 1)})
    assert out.pre_test_state.distance(StateVector(expected)) < 1e-12


@criterion(3, "chained subroutine")
def test_c3_c_detect_scaling():
    N = 50
    out = hosten_subroutine(StateVector.basis("A"), ProtocolParams(N, outcome=0))
    assert abs(out.p_c_detect * 4 * N**2 / math.pi**2 - 1) < 0.05


# -- 4 ------------------------------------------------------------------------


@criterion(4, "full chained protocol and tuning")
def test_c4_transparent_final_state_is_a():
    final = run_hosten(ProtocolParams(50, outcome=0)).final_state
    assert final.infidelity("A") < 1e-18


@criterion(4, "full chained protocol and tuning")
def test_c4_tuned_absorbing_final_state_is_b():
    alpha = tune_alpha(50)
    final = run_hosten(ProtocolParams(50, alpha, outcome=1)).final_state
    assert abs(final["A"]) < 1e-10


@criterion(4, "full chained protocol and tuning")
def test_c4_tuned_angle_near_quarter_turn():
    alpha = tune_alpha(50)
    assert abs(alpha * 2 * 50 / math.pi - 1) < 0.05


# -- 5 ------------------------------------------------------------------------


@criterion(5, "nested interferometer nulls")
def test_c5_blocked_d1_dark():
    assert abs(propagate_forward(build_nested_mzi(1))["D1"]) ** 2 < 1e-24


@criterion(5, "nested interferometer nulls")
def test_c5_transparent_f_dark():
    assert abs(propagate_forward(build_nested_mzi(0))["F"]) ** 2 < 1e-24


@criterion(5, "nested interferometer nulls")
def test_c5_transparent_d1_probability():
    pre = make_state([("A", S3), ("B", S3), ("C", S3)])
    post = make_state([("A", S3), ("B", S3), ("C", -S3)])
    oracle = abs(sum(post[k].conjugate() * pre[k] for k in "ABC")) ** 2
    assert abs(abs(propagate_forward(build_nested_mzi(0))["D1"]) ** 2 - oracle) < 1e-12


# -- 6 ------------------------------------------------------------------------

NET = build_nested_mzi(0)


@criterion(6, "three-box correspondence")
def test_c6_forward_amplitudes():
    fwd = propagate_forward(NET)
    assert global_phase_distance([fwd[b] for b in "ABC"], [S3] * 3) < 1e-12


@criterion(6, "three-box correspondence")
def test_c6_backward_amplitudes():
    bwd = propagate_backward(NET, "D1")
    assert global_phase_distance([bwd[b] for b in "ABC"], [S3, S3, -S3]) < 1e-12


@criterion(6, "three-box correspondence")
@pytest.mark.parametrize("box", ["A", "B"])
def test_c6_abl_certainty(box):
    tsv = extract_two_state_vector(NET, "D1", at=box)
    assert abs(abl_probability(tsv, projector({box})) - 1) < 1e-12


@criterion(6, "three-box correspondence")
@pytest.mark.parametrize("probe, expected", [("A", 1), ("B", 1), ("C", -1), ("E", 0), ("F", 0)])
def test_c6_weak_values(probe, expected):
    wv = weak_value(extract_two_state_vector(NET, "D1", at=probe), projector({probe}))
    assert abs(wv - expected) < 1e-12


# -- 7 ------------------------------------------------------------------------


@criterion(7, "pointer model and flux scaling")
def test_c7_richardson_ratio():
    # probe C: weak value -1 with a nonzero O(g^2) bias
    err = [pointer_measurement(NET, "C", PointerConfig(g)).mean_shift / g + 1 for g in (1e-2, 5e-3, 2.5e-3)]
    assert 3.5 <= err[0] / err[1] <= 4.5
    assert 3.5 <= err[1] / err[2] <= 4.5


@criterion(7, "pointer model and flux scaling")
def test_c7_computer_arm_converges():
    for g in (1e-2, 5e-3, 2.5e-3):
        assert abs(pointer_measurement(NET, "B", PointerConfig(g)).mean_shift / g - 1) < 1e-10


@criterion(7, "pointer model and flux scaling")
def test_c7_collective_flux_decreases():
    flux = [flux_scaling(N, "collective").expected_flux for N in (100, 1000, 10_000)]
    assert flux[0] > flux[1] > flux[2]


@criterion(7, "pointer model and flux scaling")
def test_c7_per_photon_flux_bounded():
    flux = [flux_scaling(N, "per_photon").expected_flux for N in (100, 1000, 10_000)]
    assert max(flux) / min(flux) < 2


# -- 8 ------------------------------------------------------------------------


@criterion(8, "strong measurement disturbance")
def test_c8_f_measurement_nulls_b():
    assert abs(strong_measurement_disturbance(NET, "F", "B").weak_value) < 1e-12


# -- 9 ------------------------------------------------------------------------

TRIALS = 100_000


@criterion(9, "Monte Carlo trajectories")
@pytest.mark.parametrize("protocol", ["jozsa", "hosten"])
@pytest.mark.parametrize("outcome", [0, 1])
def test_c9_event_counts_within_4_sigma(protocol, outcome):
    params = ProtocolParams(50, outcome=outcome)
    exact = (run_jozsa(params) if protocol == "jozsa" else run_hosten(params)).event_probabilities()
    hist = simulate_trajectories(params, protocol, TRIALS, seed=20240601)
    checked = 0
    for event, p in exact.items():
        if TRIALS * p < 10:
            continue
        p = min(p, 1.0)
        sigma = math.sqrt(TRIALS * p * (1 - p))
        # certain events must match exactly, up to rounding of TRIALS * p
        assert abs(hist.counts.get(event, 0) - TRIALS * p) <= 4 * sigma + 1e-6, event
        checked += 1
    assert checked > 0


@criterion(9, "Monte Carlo trajectories")
def test_c9_per_round_chi_square():
    N = 50
    a = math.pi / (2 * N)
    hist = simulate_trajectories(ProtocolParams(N, outcome=1), "jozsa", TRIALS, seed=20240601)
    probs = [math.cos(a) ** (2 * (n - 1)) * math.sin(a) ** 2 for n in range(1, N + 1)]
    probs.append(math.cos(a) ** (2 * N))
    observed = [hist.counts.get(f"absorbed:{n}", 0) for n in range(1, N + 1)] + [hist.counts["found:L"]]
    assert stats.chisquare(observed, np.array(probs) * TRIALS).pvalue > 1e-3


# -- 10 -----------------------------------------------------------------------


@criterion(10, "command line robustness")
@settings(max_examples=500, suppress_health_check=[HealthCheck.too_slow])
@given(scenarios())
def test_c10_round_trip(sc):
    assert parse_scenario(format_scenario(sc)) == sc


@criterion(10, "command line robustness")
def test_c10_byte_identical_reports(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("kind = hosten\nN = 30\nalpha = auto\noutcome = 1\ntrials = 20000\n")
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    for out in outs:
        assert main(["run", "--scenario", str(path), "--seed", "77", "--out", str(out)]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()
    sc = parse_scenario(path.read_text())
    assert report_json(run(sc, seed=77)).encode() == outs[0].read_bytes()


SEEDS = [
    b"kind = hosten\nN = 50\nalpha = auto\noutcome = 1\n",
    b"kind = nested_mzi\noutcome = 0\ndetector = D1\n",
    b"kind = pointer\nprobe = C\ng = 0.01\n",
    b"kind = flux_scaling\nN_photons = 100\nregime = collective\n",
]


def fuzz_inputs(count, seed=31337):
    rng = np.random.default_rng(seed)
    alphabet = np.frombuffer(b"=#\n\r \t.-+eE0123456789abcdefghijklmnopqrstuvwxyzNABCDF_,\xff\xc3", np.uint8)
    for i in range(count):
        mode = i % 3
        if mode == 0:
            yield rng.integers(0, 256, size=int(rng.integers(0, 80)), dtype=np.uint8).tobytes()
        elif mode == 1:
            yield rng.choice(alphabet, size=int(rng.integers(0, 80))).tobytes()
        else:
            base = bytearray(SEEDS[int(rng.integers(len(SEEDS)))])
            for _ in range(int(rng.integers(1, 4))):
                pos = int(rng.integers(len(base)))
                base[pos] = int(rng.choice(alphabet))
            yield bytes(base)


@criterion(10, "command line robustness")
def test_c10_fuzz_located_errors():
    errors = 0
    for blob in fuzz_inputs(10_000):
        try:
            parse_scenario(blob)
        except ScenarioError as exc:
            assert exc.line >= 1 and exc.column >= 1 and exc.code
            errors += 1
    assert errors > 0
