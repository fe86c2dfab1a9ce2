"""Cavity-based counterfactual computation.

Two protocols are simulated with exact amplitudes:

* the two-cavity scheme, where a photon starting in cavity ``L`` leaks into
  cavity ``R`` by a rotation of ``alpha`` per period and a computer sitting in
  ``R`` absorbs it when the outcome is 1;
* the chained three-cavity scheme, where each round is one ``A``/``B`` bounce
  followed by ``N`` periods of the two-cavity evolution between ``B`` and
  ``C`` and a projective test of ``C``.

Absorption moves amplitude into orthogonal sink modes ``abs:n`` so that the
unconditional state stays pure; conditional states are renormalized copies
with the sinks (and the tested cavity) projected out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Mapping

import numpy as np

from .errors import InvalidParameter, NoRootInBracket, NotNormalized, SinkCollision
from .qstate import (
    StateVector,
    apply,
    default_tolerance,
    relabel,
    rotation,
    sink_label,
)

Protocol = Literal["jozsa", "hosten"]


@dataclass(frozen=True)
class ProtocolParams:
    """Parameters shared by both protocols.

    ``alpha`` is the per-period rotation of the two-cavity scheme and the
    ``A``/``B`` bounce angle of the chained scheme.  ``inner_alpha`` is the
    per-period ``B``/``C`` rotation of the chained scheme; it defaults to
    ``pi/(2N)`` so the ``N`` internal periods always make a quarter turn.
    """

    N: int
    alpha: float | None = None
    outcome: int = 1
    inner_alpha: float | None = None

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, (int, np.integer)):
            raise InvalidParameter(f"N must be an integer, got {self.N!r}")
        if self.N < 1:
            raise InvalidParameter(f"N must be >= 1, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if self.outcome not in (0, 1):
            raise InvalidParameter(f"outcome must be 0 or 1, got {self.outcome!r}")
        quarter = math.pi / (2 * self.N)
        for name in ("alpha", "inner_alpha"):
            value = getattr(self, name)
            value = quarter if value is None else float(value)
            # alpha = pi/2 is needed for N = 1
            if not 0.0 < value <= math.pi / 2:
                raise InvalidParameter(f"{name} must lie in (0, pi/2], got {value!r}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    p_absorbed: float
    p_c_detect: float


@dataclass(frozen=True)
class ProtocolResult:
    """Outcome of an exact protocol run.

    All probabilities are unconditional.  ``terminal`` holds the final
    measurement outcomes: ``{"L", "R"}`` for the two-cavity scheme and
    ``{"A", "B"}`` for the chained scheme.
    """

    protocol: str
    params: ProtocolParams
    final_state: StateVector
    p_absorbed: float
    p_c_detect: float
    terminal: Mapping[str, float]
    round_log: tuple[RoundRecord, ...]
    unconditional_state: StateVector | None = None

    @property
    def p_found_L(self) -> float:
        return self.terminal.get("L", 0.0)

    @property
    def p_outcome_A(self) -> float:
        return self.terminal.get("A", 0.0)

    @property
    def p_outcome_B(self) -> float:
        return self.terminal.get("B", 0.0)

    def total_probability(self) -> float:
        return math.fsum([self.p_absorbed, self.p_c_detect, *self.terminal.values()])

    def event_probabilities(self) -> dict[str, float]:
        """Exact probability of every terminal event, keyed like trajectory histograms."""
        events: dict[str, float] = {}
        for rec in self.round_log:
            if self.params.outcome == 1:
                events[f"absorbed:{rec.round}"] = rec.p_absorbed
            if self.protocol == "hosten":
                events[f"c_detect:{rec.round}"] = rec.p_c_detect
        if self.protocol == "jozsa":
            events["found:L"] = self.terminal["L"]
            events["not_found"] = self.terminal["R"]
        else:
            events["found:A"] = self.terminal["A"]
            events["found:B"] = self.terminal["B"]
        return events


def _sinks(state: StateVector) -> list[str]:
    return [k for k in state if k.startswith("abs:")]


# ---------------------------------------------------------------------------
# two-cavity scheme


def jozsa_step(state: StateVector, alpha: float, outcome: int, round_n: int) -> StateVector:
    """One oscillation period: rotate L/R, then let the computer absorb R if outcome is 1."""
    for k in state:
        if k not in ("L", "R") and not k.startswith("abs:"):
            raise InvalidParameter(f"unexpected mode {k!r} in two-cavity state")
    sink = sink_label(round_n)
    if sink in state:
        raise SinkCollision(f"sink {sink!r} already present")
    out = apply(rotation(alpha, "L", "R"), state)
    if outcome == 1:
        out = apply(relabel({"R": sink}), out)
    return out


def run_jozsa(params: ProtocolParams) -> ProtocolResult:
    state = StateVector.basis("L")
    log = []
    for n in range(1, params.N + 1):
        state = jozsa_step(state, params.alpha, params.outcome, n)
        log.append(RoundRecord(n, abs(state[sink_label(n)]) ** 2, 0.0))
    survivors = state.restricted(("L", "R"))
    p_survive = survivors.norm2()
    return ProtocolResult(
        protocol="jozsa",
        params=params,
        final_state=survivors.normalized() if p_survive > 0 else StateVector(),
        p_absorbed=state.probability(_sinks(state)),
        p_c_detect=0.0,
        terminal={"L": abs(state["L"]) ** 2, "R": abs(state["R"]) ** 2},
        round_log=tuple(log),
        unconditional_state=state,
    )


def jozsa_failure_asymptote(N: int) -> float:
    if N < 1:
        raise InvalidParameter(f"N must be >= 1, got {N}")
    return math.pi**2 / (4 * N)


# ---------------------------------------------------------------------------
# chained three-cavity scheme


@dataclass(frozen=True)
class SubroutineOutcome:
    pre_test_state: StateVector
    conditional_state: StateVector
    p_c_detect: float
    p_absorbed: float
    p_survive: float


def hosten_subroutine(state: StateVector, params: ProtocolParams) -> SubroutineOutcome:
    """One round: A/B bounce, N internal B/C periods, then the C test.

    Probabilities are conditional on the (normalized) input state.
    """
    tol = default_tolerance()
    for k in state:
        if k not in ("A", "B"):
            raise InvalidParameter(f"round input must live on A and B, found {k!r}")
    if not state.is_normalized(tol):
        raise NotNormalized(f"round input has squared norm {state.norm2()!r}")

    s = apply(rotation(params.alpha, "A", "B"), state)
    inner_rot = rotation(params.inner_alpha, "B", "C")
    for n in range(1, params.N + 1):
        s = apply(inner_rot, s)
        if params.outcome == 1:
            s = apply(relabel({"C": sink_label(n)}), s)

    survivors = s.restricted(("A", "B"))
    p_survive = survivors.norm2()
    return SubroutineOutcome(
        pre_test_state=s,
        conditional_state=survivors.normalized() if p_survive > 0 else StateVector(),
        p_c_detect=abs(s["C"]) ** 2,
        p_absorbed=s.probability(_sinks(s)),
        p_survive=p_survive,
    )


def run_hosten(params: ProtocolParams) -> ProtocolResult:
    state = StateVector.basis("A")
    survive = 1.0
    p_abs: list[float] = []
    p_c: list[float] = []
    log = []
    for k in range(1, params.N + 1):
        if survive == 0.0:
            log.append(RoundRecord(k, 0.0, 0.0))
            continue
        out = hosten_subroutine(state, params)
        pa, pc = survive * out.p_absorbed, survive * out.p_c_detect
        p_abs.append(pa)
        p_c.append(pc)
        log.append(RoundRecord(k, pa, pc))
        survive *= out.p_survive
        state = out.conditional_state
    return ProtocolResult(
        protocol="hosten",
        params=params,
        final_state=state if survive > 0 else StateVector(),
        p_absorbed=math.fsum(p_abs),
        p_c_detect=math.fsum(p_c),
        terminal={"A": survive * abs(state["A"]) ** 2, "B": survive * abs(state["B"]) ** 2},
        round_log=tuple(log),
    )


def run_protocol(params: ProtocolParams, protocol: Protocol) -> ProtocolResult:
    if protocol == "jozsa":
        return run_jozsa(params)
    if protocol == "hosten":
        return run_hosten(params)
    raise InvalidParameter(f"unknown protocol {protocol!r}")


def _final_a_amplitude(N: int, alpha: float) -> float:
    final = run_hosten(ProtocolParams(N, alpha, outcome=1)).final_state
    # every amplitude in this protocol is real
    return final["A"].real


def tune_alpha(
    N: int,
    outcome_target: int = 1,
    tol: float = 1e-10,
    max_expansions: int = 10,
    growth: float = 3.0,
) -> float:
    """Bounce angle for which N chained rounds end exactly in cavity B.

    Bisection on alpha -> <A|final(alpha)>.  The search starts from the
    bracket pi/(2N) * (1 -+ 1/N); its relative half-width is multiplied by
    ``growth`` (at most ``max_expansions`` times) until the end points have
    opposite signs.
    """
    if outcome_target != 1:
        raise InvalidParameter("only outcome 1 needs tuning; outcome 0 ends in A for any alpha")
    if N < 2:
        raise InvalidParameter(f"tuning needs N >= 2, got {N}")

    center = math.pi / (2 * N)
    width = 1.0 / N
    for _ in range(max_expansions + 1):
        lo = max(center * (1 - width), 1e-9)
        hi = min(center * (1 + width), math.pi / 2)
        f_lo, f_hi = _final_a_amplitude(N, lo), _final_a_amplitude(N, hi)
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if (f_lo > 0) != (f_hi > 0):
            break
        width *= growth
    else:
        raise NoRootInBracket(
            f"no sign change of the final A amplitude for N={N} "
            f"after {max_expansions} bracket expansions"
        )

    f_mid = f_lo
    while hi - lo > 4 * np.finfo(float).eps * hi:
        mid = 0.5 * (lo + hi)
        f_mid = _final_a_amplitude(N, mid)
        if abs(f_mid) < tol:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    raise NoRootInBracket(f"bisection stalled at |<A|final>| = {abs(f_mid):.3g}")


# ---------------------------------------------------------------------------
# stochastic collapse


@dataclass(frozen=True)
class TrajectoryHistogram:
    protocol: str
    counts: Mapping[str, int]
    trials: int
    seed: int

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.trials for k, v in self.counts.items()}

    def merged(self, other: "TrajectoryHistogram") -> "TrajectoryHistogram":
        counts = dict(self.counts)
        for k, v in other.counts.items():
            counts[k] = counts.get(k, 0) + v
        return TrajectoryHistogram(self.protocol, counts, self.trials + other.trials, self.seed)


def _round_tables(params: ProtocolParams, protocol: Protocol):
    """Per-round conditional probabilities seen by a surviving trajectory."""
    rounds = []  # (p_absorb, p_c) conditional on surviving so far
    if protocol == "jozsa":
        cond = StateVector.basis("L")
        for n in range(1, params.N + 1):
            s = jozsa_step(cond, params.alpha, params.outcome, n)
            q = abs(s[sink_label(n)]) ** 2
            rounds.append((q, 0.0))
            survivors = s.restricted(("L", "R"))
            if survivors.norm2() == 0:
                break
            # collapse onto the not-absorbed branch
            cond = survivors.normalized()
        final = {"found:L": abs(cond["L"]) ** 2}
    elif protocol == "hosten":
        cond = StateVector.basis("A")
        for _ in range(params.N):
            out = hosten_subroutine(cond, params)
            rounds.append((out.p_absorbed, out.p_c_detect))
            if out.p_survive == 0:
                break
            cond = out.conditional_state
        final = {"found:A": abs(cond["A"]) ** 2}
    else:
        raise InvalidParameter(f"unknown protocol {protocol!r}")
    return rounds, final


def _shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(shard,))))


def _sample(rounds, final, protocol, absorbing, trials, rng) -> dict[str, int]:
    counts: dict[str, int] = {}
    alive = np.ones(trials, dtype=bool)
    for n, (qa, qc) in enumerate(rounds, start=1):
        u = rng.random(trials)
        detected = alive & (u < qc)
        absorbed = alive & (u >= qc) & (u < qc + qa)
        if protocol == "hosten":
            counts[f"c_detect:{n}"] = int(detected.sum())
        if absorbing:
            counts[f"absorbed:{n}"] = int(absorbed.sum())
        alive &= ~(detected | absorbed)
    u = rng.random(trials)
    (first_key, p_first), = final.items()
    second_key = "not_found" if protocol == "jozsa" else "found:B"
    hit = alive & (u < p_first)
    counts[first_key] = int(hit.sum())
    counts[second_key] = int((alive & ~hit).sum())
    return counts


def simulate_trajectories(
    params: ProtocolParams,
    protocol: Protocol,
    trials: int,
    seed: int,
    shards: int = 1,
) -> TrajectoryHistogram:
    """Sample collapse histories with a PCG64 stream per shard.

    Shard ``i`` draws from ``SeedSequence(seed, spawn_key=(i,))``; shard
    histograms are merged by addition.
    """
    if trials < 1:
        raise InvalidParameter(f"trials must be >= 1, got {trials}")
    if shards < 1:
        raise InvalidParameter(f"shards must be >= 1, got {shards}")
    rounds, final = _round_tables(params, protocol)
    base, extra = divmod(trials, shards)
    hist = None
    for shard in range(shards):
        m = base + (1 if shard < extra else 0)
        if m == 0:
            continue
        part = TrajectoryHistogram(
            protocol, _sample(rounds, final, protocol, params.outcome == 1, m, _shard_rng(seed, shard)), m, seed
        )
        hist = part if hist is None else hist.merged(part)
    return hist
