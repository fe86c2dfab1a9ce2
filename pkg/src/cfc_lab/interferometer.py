"""Staged single-photon optical networks and the nested Mach-Zehnder device.

A network is an ordered list of elements.  Each element consumes one or two
path labels and produces new ones, so every label lives on a contiguous range
of *cuts* (cut ``s`` sits between element ``s-1`` and element ``s``).  Forward
states are read at cuts; backward states are obtained by pulling a detector's
indicator state back through the adjoint elements.

Port names of the nested device::

    in  --BS1(2/3)--+-- E --BS2(1/2)--+-- B --[computer]-- B_out --+
                    |                 +-- C --[phase pi]-- C_out --+--BS3(1/2)-- F, dump
                    +-- A ----------------------------------------------------+
                                                               A, F --BS4(2/3)-- D1, D2

Vacuum input ports are ``in_v`` (BS1) and ``e_v`` (BS2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidParameter, ZeroPostSelection
from .qstate import (
    LinearOperator,
    StateVector,
    apply,
    default_tolerance,
    inner,
    mixer,
    relabel,
)

SINK = "absorbed"


@dataclass(frozen=True)
class BeamSplitter:
    """|H> -> t|H> + r|V>, |V> -> -r|H> + t|V> with t**2 = ``transmittance``."""

    in_h: str
    in_v: str
    out_h: str
    out_v: str
    transmittance: float

    kind = "beamsplitter"

    def __post_init__(self):
        if not 0.0 <= self.transmittance <= 1.0:
            raise InvalidParameter(f"transmittance must be in [0, 1], got {self.transmittance}")

    @property
    def inputs(self):
        return (self.in_h, self.in_v)

    @property
    def outputs(self):
        return (self.out_h, self.out_v)

    def operator(self) -> LinearOperator:
        t = math.sqrt(self.transmittance)
        r = math.sqrt(1.0 - self.transmittance)
        return mixer(self.in_h, self.in_v, self.out_h, self.out_v, t, r)


@dataclass(frozen=True)
class PhaseShifter:
    port: str
    out: str
    phi: float

    kind = "phase_shifter"

    @property
    def inputs(self):
        return (self.port,)

    @property
    def outputs(self):
        return (self.out,)

    def operator(self) -> LinearOperator:
        return relabel({self.port: self.out}, {self.port: complex(np.exp(1j * self.phi))})


@dataclass(frozen=True)
class Computer:
    """Transparent for outcome 0; absorbs the photon for outcome 1."""

    port: str
    out: str
    outcome: int
    sink: str = SINK

    kind = "computer"

    def __post_init__(self):
        if self.outcome not in (0, 1):
            raise InvalidParameter(f"outcome must be 0 or 1, got {self.outcome!r}")

    @property
    def inputs(self):
        return (self.port,)

    @property
    def outputs(self):
        return (self.out,) if self.outcome == 0 else (self.sink,)

    def operator(self) -> LinearOperator:
        return relabel({self.port: self.outputs[0]})


@dataclass(frozen=True)
class Absorber:
    port: str
    sink: str = SINK

    kind = "absorber"

    @property
    def inputs(self):
        return (self.port,)

    @property
    def outputs(self):
        return (self.sink,)

    def operator(self) -> LinearOperator:
        return relabel({self.port: self.sink})


@dataclass(frozen=True)
class Veto:
    """Ideal nondemolition test of ``port`` that found nothing (not unitary)."""

    port: str

    kind = "veto"

    @property
    def inputs(self):
        return (self.port,)

    @property
    def outputs(self):
        return (self.port,)

    def operator(self) -> LinearOperator:
        return LinearOperator({}, frozenset((self.port,)), frozenset((self.port,)))


Element = BeamSplitter | PhaseShifter | Computer | Absorber | Veto


@dataclass(frozen=True)
class Network:
    elements: tuple[Element, ...]
    probes: Mapping[str, tuple[int, str]]
    input: str = "in"
    detectors: tuple[str, ...] = ("D1", "D2", "dump")
    _ops: tuple[LinearOperator, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "probes", dict(self.probes))
        object.__setattr__(self, "_ops", tuple(el.operator() for el in self.elements))

    @property
    def operators(self) -> tuple[LinearOperator, ...]:
        return self._ops

    @property
    def n_cuts(self) -> int:
        return len(self.elements) + 1

    def input_ports(self) -> list[str]:
        produced: set[str] = set()
        ports: list[str] = []
        for el in self.elements:
            for p in el.inputs:
                if p not in produced and p not in ports:
                    ports.append(p)
            produced.update(el.outputs)
        return ports

    def output_ports(self) -> list[str]:
        alive = list(self.input_ports())
        for el in self.elements:
            alive = [p for p in alive if p not in el.inputs or p in el.outputs]
            alive += [p for p in el.outputs if p not in alive]
        return alive


def birth_cut(elements: Sequence[Element], label: str) -> int:
    """First cut at which ``label`` exists (0 for network inputs)."""
    for i, el in enumerate(elements):
        if label in el.outputs:
            return i + 1
    return 0


def locate(net: Network, name: str) -> tuple[int, str]:
    """Resolve a probe name, or a raw port label, to ``(cut, label)``."""
    if name in net.probes:
        return net.probes[name]
    if name in net.detectors or name == SINK:
        return net.n_cuts - 1, name
    known = set(net.input_ports())
    for el in net.elements:
        known.update(el.outputs)
    if name not in known:
        raise InvalidParameter(f"unknown probe or port {name!r}")
    return birth_cut(net.elements, name), name


def build_nested_mzi(
    outcome: int,
    shifter_phase: float = math.pi,
    input_phase: float = 0.0,
) -> Network:
    """The nested interferometer with the computer in arm B of the inner MZI.

    With the default pi shifter on arm C the inner MZI sends nothing into F
    when the computer is transparent, and the outer MZI sends nothing to D1
    when the computer blocks arm B.
    """
    elements: list[Element] = []
    if input_phase:
        elements.append(PhaseShifter("in", "in", input_phase))
    elements += [
        BeamSplitter("in", "in_v", "E", "A", 2 / 3),
        BeamSplitter("E", "e_v", "B", "C", 1 / 2),
        Computer("B", "B_out", outcome),
        PhaseShifter("C", "C_out", shifter_phase),
        BeamSplitter("B_out", "C_out", "dump", "F", 1 / 2),
        BeamSplitter("A", "F", "D2", "D1", 2 / 3),
    ]
    boxes = birth_cut(elements, "B")
    probes = {
        "A": (boxes, "A"),
        "B": (boxes, "B"),
        "C": (boxes, "C"),
        "E": (birth_cut(elements, "E"), "E"),
        "F": (birth_cut(elements, "F"), "F"),
    }
    return Network(tuple(elements), probes)


def forward_states(net: Network, initial: StateVector | None = None) -> list[StateVector]:
    state = StateVector.basis(net.input) if initial is None else initial
    states = [state]
    for op in net.operators:
        state = apply(op, state)
        states.append(state)
    return states


def backward_states(net: Network, detector: str) -> list[StateVector]:
    """Kets b_s with <b_s|psi_s> = <detector|psi_final> at every cut s."""
    state = StateVector.basis(detector)
    states = [state]
    for op in reversed(net.operators):
        state = apply(op.adjoint(), state)
        states.append(state)
    return states[::-1]


def propagate_forward(net: Network) -> dict[str, complex]:
    """Forward amplitudes at every probe, detector and the absorber sink."""
    states = forward_states(net)
    out = {name: states[cut][label] for name, (cut, label) in net.probes.items()}
    for det in (*net.detectors, SINK):
        out[det] = states[-1][det]
    return out


def propagate_backward(net: Network, detector: str) -> dict[str, complex]:
    """Backward-evolving coefficients <detector|U|probe> at every probe.

    These are the bra coefficients; the stored backward ket is their
    complex conjugate.
    """
    states = backward_states(net, detector)
    return {name: states[cut][label].conjugate() for name, (cut, label) in net.probes.items()}


def detection_probability(net: Network, detector: str) -> float:
    return abs(forward_states(net)[-1][detector]) ** 2


def network_operator(net: Network) -> LinearOperator:
    """Composite map from every input port to every output port."""
    ins = net.input_ports()
    outs = net.output_ports()
    m = np.zeros((len(outs), len(ins)), dtype=complex)
    for j, port in enumerate(ins):
        final = forward_states(net, StateVector.basis(port))[-1]
        for i, o in enumerate(outs):
            m[i, j] = final[o]
    return LinearOperator.from_matrix(outs, ins, m, passthrough=False)


def insert_veto(net: Network, name: str) -> Network:
    """Network with an ideal not-found test of ``name`` placed at its cut."""
    cut, label = locate(net, name)
    elements = net.elements[:cut] + (Veto(label),) + net.elements[cut:]
    probes = {k: (c + 1 if c > cut else c, lab) for k, (c, lab) in net.probes.items()}
    return replace(net, elements=elements, probes=probes)


def extract_two_state_vector(net: Network, detector: str = "D1", at: str = "B"):
    """Forward state and backward ket at the cut of probe ``at``, both normalized."""
    from .tsvf import TwoStateVector

    tol = default_tolerance()
    fwd = forward_states(net)
    if abs(fwd[-1][detector]) <= tol:
        raise ZeroPostSelection(f"detector {detector!r} is never reached")
    cut, _ = locate(net, at)
    bwd = backward_states(net, detector)
    return TwoStateVector(fwd[cut].normalized(), bwd[cut].normalized())


def duality_overlaps(net: Network, detector: str) -> list[complex]:
    """<b_s|psi_s> at every cut; all equal the detector amplitude."""
    return [inner(b, f) for b, f in zip(backward_states(net, detector), forward_states(net))]
