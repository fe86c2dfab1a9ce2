"""Pre- and post-selected analyses: weak values, ABL probabilities, pointers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GridTooNarrow, InvalidParameter, UndefinedConditional, ZeroPostSelection
from .interferometer import (
    Network,
    backward_states,
    build_nested_mzi,
    forward_states,
    insert_veto,
    locate,
)
from .qstate import LinearOperator, StateVector, apply, default_tolerance, inner, make_state, projector


@dataclass(frozen=True)
class TwoStateVector:
    """Forward state |psi> and the post-selection <phi| stored as the ket |phi>."""

    forward: StateVector
    backward: StateVector

    def overlap(self) -> complex:
        return inner(self.backward, self.forward)


def three_box() -> TwoStateVector:
    k = 1 / math.sqrt(3)
    return TwoStateVector(
        make_state([("A", k), ("B", k), ("C", k)]),
        make_state([("A", k), ("B", k), ("C", -k)]),
    )


def weak_value(tsv: TwoStateVector, op: LinearOperator) -> complex:
    den = tsv.overlap()
    if abs(den) <= default_tolerance():
        raise ZeroPostSelection(f"post-selection overlap {abs(den):.3g} vanishes")
    return inner(tsv.backward, apply(op, tsv.forward)) / den


def abl_probability(tsv: TwoStateVector, proj: LinearOperator) -> float:
    """Probability that an ideal intermediate test of ``proj`` succeeds, given both selections."""
    tol = default_tolerance()
    if not proj.is_projector(tol):
        raise InvalidParameter("ABL probability needs a projector")
    inside = apply(proj, tsv.forward)
    found = abs(inner(tsv.backward, inside)) ** 2
    missed = abs(inner(tsv.backward, tsv.forward - inside)) ** 2
    if found + missed <= tol**2:
        raise UndefinedConditional("both intermediate outcomes are incompatible with post-selection")
    return found / (found + missed)


# ---------------------------------------------------------------------------
# von Neumann pointer


@dataclass(frozen=True)
class PointerConfig:
    g: float
    sigma: float = 1.0
    half_width: float = 8.0
    points: int = 256

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameter(f"sigma must be positive, got {self.sigma}")
        if self.points < 64:
            raise GridTooNarrow(f"need at least 64 grid points, got {self.points}")
        if self.half_width < 6 * self.sigma + abs(self.g):
            raise GridTooNarrow(
                f"half-width {self.half_width} < 6*sigma + |g| = {6 * self.sigma + abs(self.g)}"
            )

    def grid(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points)

    def wavefunction(self, q: np.ndarray, shift: float = 0.0) -> np.ndarray:
        # |psi(q)|^2 is a normal density with standard deviation sigma
        s = self.sigma
        return (2 * np.pi * s * s) ** -0.25 * np.exp(-((q - shift) ** 2) / (4 * s * s))


@dataclass(frozen=True)
class PointerResult:
    mean_shift: float
    p_postselect: float
    leaked_flux: float | None
    g: float


def _joint_step(op: LinearOperator, joint: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out = dict(joint)
    for col in op.domain:
        out.pop(col, None)
    for col in sorted(op.domain):
        arr = joint.get(col)
        if arr is None:
            continue
        for row, v in op.column(col):
            out[row] = out[row] + v * arr if row in out else v * arr
    return out


def _moments(q: np.ndarray, amp: np.ndarray) -> tuple[float, float]:
    dens = np.abs(amp) ** 2
    p = float(np.trapezoid(dens, q))
    if p <= 0.0:
        raise ZeroPostSelection("post-selected pointer state vanishes")
    return float(np.trapezoid(q * dens, q)) / p, p


def pointer_measurement(
    scenario: Network | TwoStateVector,
    probe: str,
    cfg: PointerConfig,
    detector: str = "D1",
    flux_probe: str = "F",
) -> PointerResult:
    """Couple a Gaussian pointer to the projector on ``probe`` and post-select.

    The interaction translates the pointer by ``g`` when the photon occupies
    the probe mode.  For a network the joint photon-pointer state is carried
    through the remaining elements; ``leaked_flux`` is the probability that an
    ideal test at ``flux_probe`` finds the photon (no post-selection).  For a
    bare two-state vector there is no flux probe and ``leaked_flux`` is None.
    """
    q = cfg.grid()
    if isinstance(scenario, TwoStateVector):
        psi, phi = scenario.forward, scenario.backward
        pointer = np.zeros_like(q, dtype=complex)
        for label, amp in psi.items():
            shift = cfg.g if label == probe else 0.0
            pointer = pointer + phi[label].conjugate() * amp * cfg.wavefunction(q, shift)
        mean, p = _moments(q, pointer)
        return PointerResult(mean, p, None, cfg.g)

    net = scenario
    cut, label = locate(net, probe)
    flux_cut, flux_label = locate(net, flux_probe)
    states = forward_states(net)
    joint = {
        m: amp * cfg.wavefunction(q, cfg.g if m == label else 0.0)
        for m, amp in states[cut].items()
    }
    leaked = abs(states[flux_cut][flux_label]) ** 2 if flux_cut <= cut else None
    for s in range(cut, len(net.elements)):
        joint = _joint_step(net.operators[s], joint)
        if s + 1 == flux_cut:
            leaked = float(np.trapezoid(np.abs(joint.get(flux_label, 0 * q)) ** 2, q))
    mean, p = _moments(q, joint.get(detector, np.zeros_like(q, dtype=complex)))
    return PointerResult(mean, p, leaked, cfg.g)


class FluxScaling(NamedTuple):
    expected_flux: float
    g: float


def flux_scaling(N_photons: int, regime: str, c: float = 1.0, probe: str = "B") -> FluxScaling:
    """Expected number of photons seen at F when N photons are weakly measured at ``probe``.

    ``per_photon`` uses coupling c/sqrt(N), ``collective`` uses c/N.
    """
    if N_photons < 1:
        raise InvalidParameter(f"N_photons must be >= 1, got {N_photons}")
    if regime == "per_photon":
        g = c / math.sqrt(N_photons)
    elif regime == "collective":
        g = c / N_photons
    else:
        raise InvalidParameter(f"unknown regime {regime!r}")
    res = pointer_measurement(build_nested_mzi(0), probe, PointerConfig(g))
    return FluxScaling(N_photons * res.leaked_flux, g)


class Disturbance(NamedTuple):
    weak_value: complex
    p_found: float
    p_postselect: float


def strong_measurement_disturbance(
    net: Network, measure_at: str, then_weak_at: str, detector: str = "D1"
) -> Disturbance:
    """Weak value at ``then_weak_at`` after an ideal test at ``measure_at`` found nothing."""
    cut, label = locate(net, measure_at)
    p_found = abs(forward_states(net)[cut][label]) ** 2
    vetoed = insert_veto(net, measure_at)
    wcut, wlabel = locate(vetoed, then_weak_at)
    fwd = forward_states(vetoed)
    bwd = backward_states(vetoed, detector)
    amp = fwd[-1][detector]
    if abs(amp) <= default_tolerance():
        raise ZeroPostSelection(f"detector {detector!r} unreachable after the test at {measure_at!r}")
    tsv = TwoStateVector(fwd[wcut], bwd[wcut])
    return Disturbance(weak_value(tsv, projector({wlabel})), p_found, abs(amp) ** 2)
