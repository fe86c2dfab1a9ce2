"""Single-photon state vectors over named modes.

States are sparse maps from mode labels (``"L"``, ``"B"``, ``"abs:3"``, ...)
to complex amplitudes; a label that is absent has amplitude zero.  Operators
are sparse matrices between a *domain* (input labels) and a *codomain*
(output labels).  Optical elements leave modes outside their domain untouched,
observables such as projectors annihilate them; the ``passthrough`` flag picks
which.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import DuplicateLabel, EmptyModeSet

DEFAULT_TOLERANCE = 1e-12
TOLERANCE_ENV = "CFC_LAB_TOLERANCE"


def default_tolerance() -> float:
    """Comparison tolerance, overridable through ``CFC_LAB_TOLERANCE``."""
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_TOLERANCE
    value = float(raw)
    if not value > 0 or not math.isfinite(value):
        raise ValueError(f"{TOLERANCE_ENV} must be a positive finite number, got {raw!r}")
    return value


def sink_label(n: int) -> str:
    if n < 1:
        raise ValueError(f"sink index must be positive, got {n}")
    return f"abs:{n}"


@dataclass(frozen=True)
class StateVector:
    amplitudes: Mapping[str, complex] = field(default_factory=dict)

    def __post_init__(self):
        amps = {str(k): complex(v) for k, v in self.amplitudes.items()}
        object.__setattr__(self, "amplitudes", MappingProxyType(amps))

    @classmethod
    def _trusted(cls, amps: dict) -> "StateVector":
        # amps already maps str -> complex and is not shared
        obj = object.__new__(cls)
        object.__setattr__(obj, "amplitudes", MappingProxyType(amps))
        return obj

    @classmethod
    def basis(cls, label: str) -> "StateVector":
        return cls({label: 1.0})

    def __getitem__(self, label: str) -> complex:
        return self.amplitudes.get(label, 0j)

    def __contains__(self, label: str) -> bool:
        return label in self.amplitudes

    def __iter__(self):
        return iter(self.amplitudes)

    def __len__(self) -> int:
        return len(self.amplitudes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.amplitudes)

    def items(self):
        return self.amplitudes.items()

    def norm2(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def is_normalized(self, tol: float | None = None) -> bool:
        tol = default_tolerance() if tol is None else tol
        return abs(self.norm2() - 1.0) <= tol

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return StateVector({k: a / n for k, a in self.amplitudes.items()})

    def probability(self, labels: Iterable[str] | str) -> float:
        if isinstance(labels, str):
            labels = (labels,)
        return math.fsum(abs(self[k]) ** 2 for k in set(labels))

    def restricted(self, labels: Iterable[str]) -> "StateVector":
        keep = set(labels)
        return StateVector({k: a for k, a in self.amplitudes.items() if k in keep})

    def without(self, labels: Iterable[str]) -> "StateVector":
        drop = set(labels)
        return StateVector({k: a for k, a in self.amplitudes.items() if k not in drop})

    def conj(self) -> "StateVector":
        return StateVector({k: a.conjugate() for k, a in self.amplitudes.items()})

    def __mul__(self, scalar: complex) -> "StateVector":
        return StateVector({k: scalar * a for k, a in self.amplitudes.items()})

    __rmul__ = __mul__

    def __add__(self, other: "StateVector") -> "StateVector":
        out = dict(self.amplitudes)
        for k, a in other.items():
            out[k] = out.get(k, 0j) + a
        return StateVector(out)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + (-1.0) * other

    def distance(self, other: "StateVector") -> float:
        """Largest entrywise amplitude difference (phase sensitive)."""
        keys = set(self.amplitudes) | set(other.amplitudes)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    def allclose(self, other: "StateVector", tol: float | None = None) -> bool:
        tol = default_tolerance() if tol is None else tol
        return self.distance(other) <= tol

    def phase_distance(self, other: "StateVector") -> float:
        """Entrywise distance after removing the best global phase."""
        overlap = inner(other, self)
        phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
        return (self * phase.conjugate()).distance(other)

    def infidelity(self, label: str) -> float:
        """1 - |<label|psi>|^2 / <psi|psi>, summed from the complementary weight."""
        rest = math.fsum(abs(a) ** 2 for k, a in self.amplitudes.items() if k != label)
        total = rest + abs(self[label]) ** 2
        return rest / total

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.6g})|{k}>" for k, a in self.amplitudes.items())
        return f"StateVector({terms or '0'})"


def make_state(entries: Iterable[tuple[str, complex]]) -> StateVector:
    amps: dict[str, complex] = {}
    for label, amp in entries:
        if label in amps:
            raise DuplicateLabel(label)
        amps[label] = complex(amp)
    return StateVector(amps)


def inner(bra: StateVector, ket: StateVector) -> complex:
    """<bra|ket> summed over the union of both mode sets."""
    small, large = (bra, ket) if len(bra) <= len(ket) else (ket, bra)
    total = 0j
    for k in small:
        if k in large:
            total += bra[k].conjugate() * ket[k]
    return total


@dataclass(frozen=True)
class LinearOperator:
    """Sparse operator with entries ``(row, col) -> value``.

    ``domain`` lists the input labels the operator acts on and ``codomain``
    the labels it may write to.  With ``passthrough=True`` every other mode
    is carried through unchanged; with ``passthrough=False`` it is dropped.
    """

    entries: Mapping[tuple[str, str], complex]
    domain: frozenset[str]
    codomain: frozenset[str]
    passthrough: bool = True
    _columns: Mapping[str, tuple[tuple[str, complex], ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        entries = {(str(r), str(c)): complex(v) for (r, c), v in self.entries.items()}
        domain = frozenset(self.domain) | {c for _, c in entries}
        codomain = frozenset(self.codomain) | {r for r, _ in entries}
        # sorted so that accumulation order (hence rounding) ignores hash seeds
        cols: dict[str, list[tuple[str, complex]]] = {c: [] for c in sorted(domain)}
        for (r, c), v in entries.items():
            cols[c].append((r, v))
        object.__setattr__(self, "entries", MappingProxyType(entries))
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(
            self, "_columns", MappingProxyType({c: tuple(v) for c, v in cols.items()})
        )

    @classmethod
    def from_matrix(cls, rows, cols, matrix, passthrough: bool = True) -> "LinearOperator":
        matrix = np.asarray(matrix, dtype=complex)
        entries = {
            (r, c): matrix[i, j]
            for i, r in enumerate(rows)
            for j, c in enumerate(cols)
            if matrix[i, j] != 0
        }
        return cls(entries, frozenset(cols), frozenset(rows), passthrough)

    def column(self, label: str) -> tuple[tuple[str, complex], ...]:
        return self._columns.get(label, ())

    def matrix(self, rows=None, cols=None) -> np.ndarray:
        rows = sorted(self.codomain) if rows is None else list(rows)
        cols = sorted(self.domain) if cols is None else list(cols)
        ri = {r: i for i, r in enumerate(rows)}
        ci = {c: j for j, c in enumerate(cols)}
        m = np.zeros((len(rows), len(cols)), dtype=complex)
        for (r, c), v in self.entries.items():
            if r in ri and c in ci:
                m[ri[r], ci[c]] = v
        return m

    def adjoint(self) -> "LinearOperator":
        entries = {(c, r): v.conjugate() for (r, c), v in self.entries.items()}
        return LinearOperator(entries, self.codomain, self.domain, self.passthrough)

    def is_unitary(self, tol: float | None = None) -> bool:
        """U^dagger U = I on the domain (an isometry onto the codomain)."""
        tol = default_tolerance() if tol is None else tol
        m = self.matrix()
        gram = m.conj().T @ m
        return bool(np.max(np.abs(gram - np.eye(len(self.domain))), initial=0.0) <= tol)

    def is_projector(self, tol: float | None = None) -> bool:
        tol = default_tolerance() if tol is None else tol
        labels = sorted(self.domain | self.codomain)
        m = self.matrix(labels, labels)
        return bool(
            np.max(np.abs(m @ m - m), initial=0.0) <= tol
            and np.max(np.abs(m.conj().T - m), initial=0.0) <= tol
        )


def apply(op: LinearOperator, state: StateVector) -> StateVector:
    src = state.amplitudes
    if op.passthrough:
        out = dict(src)
        for col in op.domain:
            out.pop(col, None)
    else:
        out = {}
    for col in op._columns:
        amp = src.get(col, 0j)
        if amp == 0:
            continue
        for row, v in op.column(col):
            out[row] = out.get(row, 0j) + v * amp
    return StateVector._trusted(out)


def identity(modes: Iterable[str]) -> LinearOperator:
    modes = frozenset(modes)
    return LinearOperator({(m, m): 1.0 for m in modes}, modes, modes, passthrough=False)


def projector(modes: Iterable[str]) -> LinearOperator:
    modes = frozenset(modes)
    if not modes:
        raise EmptyModeSet("projector needs at least one mode")
    return LinearOperator({(m, m): 1.0 for m in modes}, modes, modes, passthrough=False)


def mixer(
    in_h: str, in_v: str, out_h: str, out_v: str, c: float, s: float
) -> LinearOperator:
    """Two-mode real rotation |H> -> c|H> + s|V>, |V> -> -s|H> + c|V>.

    Input and output labels may coincide (in-place rotation) or differ
    (a beamsplitter feeding new paths).
    """
    entries: dict[tuple[str, str], complex] = {}
    for (r, col), v in (
        ((out_h, in_h), c),
        ((out_v, in_h), s),
        ((out_h, in_v), -s),
        ((out_v, in_v), c),
    ):
        if v != 0:
            entries[(r, col)] = v
    return LinearOperator(entries, frozenset((in_h, in_v)), frozenset((out_h, out_v)))


def rotation(alpha: float, a: str = "L", b: str = "R") -> LinearOperator:
    """|a> -> cos(alpha)|a> + sin(alpha)|b>, |b> -> -sin(alpha)|a> + cos(alpha)|b>."""
    return mixer(a, b, a, b, math.cos(alpha), math.sin(alpha))


def relabel(mapping: Mapping[str, str], phases: Mapping[str, complex] | None = None):
    """Move amplitude from each key mode to its target, optionally with a factor."""
    phases = phases or {}
    entries = {(dst, src): phases.get(src, 1.0) for src, dst in mapping.items()}
    return LinearOperator(entries, frozenset(mapping), frozenset(mapping.values()))
