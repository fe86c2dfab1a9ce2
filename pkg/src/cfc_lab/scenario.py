"""Line-oriented scenario files.

Format: one ``key = value`` pair per line, ``#`` starts a comment, blank
lines are ignored.  ``kind`` selects the experiment and fixes which other keys
are legal::

    # chained scheme with a tuned bounce angle
    kind = hosten
    N = 50
    alpha = auto
    outcome = 1
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping

U64_MAX = 2**64 - 1
AUTO = "auto"

_KEY_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"[+-]?[0-9]+\Z")


class ScenarioError(ValueError):
    """Malformed scenario text; always carries a 1-based line and column."""

    def __init__(self, code: str, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {code}: {message}")
        self.code = code
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class KeySpec:
    type: str  # int | float | choice
    required: bool = False
    default: Any = None
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    choices: tuple[str, ...] = ()
    allow_auto: bool = False

    @property
    def numeric(self) -> bool:
        return self.type in ("int", "float")


_HALF_PI = math.pi / 2
_OUTCOME = KeySpec("int", default=1, lo=0, hi=1)
_PROTOCOL_KEYS = {
    "N": KeySpec("int", required=True, lo=1, hi=10**6),
    "alpha": KeySpec("float", lo=0.0, hi=_HALF_PI, lo_open=True),
    "outcome": _OUTCOME,
    "trials": KeySpec("int", lo=1, hi=10**8),
    "seed": KeySpec("int", default=0, lo=0, hi=U64_MAX),
}

SCHEMAS: dict[str, dict[str, KeySpec]] = {
    "jozsa": dict(_PROTOCOL_KEYS),
    "hosten": {**_PROTOCOL_KEYS, "alpha": KeySpec("float", lo=0.0, hi=_HALF_PI, lo_open=True, allow_auto=True)},
    "nested_mzi": {
        "outcome": KeySpec("int", default=0, lo=0, hi=1),
        "detector": KeySpec("choice", default="D1", choices=("D1", "D2", "dump")),
    },
    "three_box": {},
    "pointer": {
        "probe": KeySpec("choice", default="B", choices=("A", "B", "C", "E", "F")),
        "g": KeySpec("float", required=True, lo=-2.0, hi=2.0),
        "detector": KeySpec("choice", default="D1", choices=("D1", "D2")),
    },
    "flux_scaling": {
        "N_photons": KeySpec("int", required=True, lo=1, hi=10**12),
        "regime": KeySpec("choice", required=True, choices=("per_photon", "collective")),
    },
}

# report fields that ``outputs`` may select, per kind
OUTPUT_FIELDS: dict[str, tuple[str, ...]] = {
    "jozsa": ("alpha", "p_absorbed", "p_absorbed_asymptote", "p_found_L", "p_not_found",
              "final_state", "round_log", "histogram"),
    "hosten": ("alpha", "alpha_tuned", "p_c_detect", "p_absorbed", "p_outcome_A", "p_outcome_B",
               "fidelity_A", "fidelity_B", "final_state", "round_log", "histogram"),
    "nested_mzi": ("p_D1", "p_D2", "p_dump", "p_absorbed", "forward_amplitudes",
                   "backward_amplitudes", "weak_values"),
    "three_box": ("overlap", "weak_values", "weak_value_sum", "abl"),
    "pointer": ("g", "mean_shift", "shift_ratio", "p_postselect", "leaked_flux", "weak_value"),
    "flux_scaling": ("g", "expected_flux"),
}

KEY_ORDER = ("N", "N_photons", "alpha", "outcome", "detector", "probe", "g", "regime", "trials", "seed")


@dataclass(frozen=True)
class Scenario:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    outputs: tuple[str, ...] = ()

    def get(self, key: str) -> Any:
        if key in self.params:
            return self.params[key]
        return SCHEMAS[self.kind][key].default

    def with_param(self, key: str, value: Any) -> "Scenario":
        params = dict(self.params)
        params[key] = value
        return Scenario(self.kind, params, self.outputs)

    def echo(self) -> dict[str, Any]:
        out = {"kind": self.kind, **{k: self.get(k) for k in SCHEMAS[self.kind]}}
        if self.outputs:
            out["outputs"] = list(self.outputs)
        return out


def _convert(spec: KeySpec, key: str, raw: str, line: int, col: int, kind: str) -> Any:
    if raw == AUTO:
        if spec.allow_auto:
            return AUTO
        raise ScenarioError("TypeMismatch", line, col, f"{key} = auto is only legal for kind = hosten"
                            if key == "alpha" else f"{key} does not accept 'auto'")
    if spec.type == "choice":
        if raw not in spec.choices:
            raise ScenarioError("OutOfRange", line, col, f"{key} must be one of {', '.join(spec.choices)}")
        return raw
    if spec.type == "int":
        if not _INT_RE.match(raw):
            raise ScenarioError("TypeMismatch", line, col, f"{key} expects an integer, got {raw!r}")
        if len(raw) > 40:
            raise ScenarioError("OutOfRange", line, col, f"{key} is out of range")
        value: Any = int(raw)
    else:
        try:
            value = float(raw)
        except ValueError:
            raise ScenarioError("TypeMismatch", line, col, f"{key} expects a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ScenarioError("OutOfRange", line, col, f"{key} must be finite")
    low_ok = spec.lo is None or (value > spec.lo if spec.lo_open else value >= spec.lo)
    high_ok = spec.hi is None or value <= spec.hi
    if not (low_ok and high_ok):
        lo_br = "(" if spec.lo_open else "["
        raise ScenarioError("OutOfRange", line, col, f"{key} = {raw} outside {lo_br}{spec.lo}, {spec.hi}]")
    return value


def parse_value(kind: str, key: str, raw: str, line: int = 1, col: int = 1) -> Any:
    """Convert one textual value using the schema of ``kind``."""
    schema = SCHEMAS[kind]
    if key not in schema:
        raise ScenarioError("UnknownKey", line, col, f"unknown key {key!r} for kind {kind}")
    return _convert(schema[key], key, raw, line, col, kind)


def parse_scenario(text: str | bytes) -> Scenario:
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            head = bytes(text[: exc.start])
            line = head.count(b"\n") + 1
            col = exc.start - (head.rfind(b"\n") + 1) + 1
            raise ScenarioError("Encoding", line, col, "invalid UTF-8") from None

    entries: list[tuple[str, str, int, int, int]] = []
    seen: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.split("\n"), start=1):
        body = raw_line.split("#", 1)[0].rstrip("\r")
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ScenarioError("SyntaxError", lineno, col, "expected 'key = value'")
        left, right = body.split("=", 1)
        key = left.strip()
        key_col = len(left) - len(left.lstrip()) + 1
        if not _KEY_RE.match(key):
            raise ScenarioError("SyntaxError", lineno, key_col, f"invalid key {key!r}")
        value = right.strip()
        val_col = len(left) + 2 + (len(right) - len(right.lstrip()))
        if not value:
            raise ScenarioError("SyntaxError", lineno, val_col, f"missing value for {key!r}")
        if key in seen:
            raise ScenarioError("DuplicateKey", lineno, key_col, f"{key!r} already set on line {seen[key]}")
        seen[key] = lineno
        entries.append((key, value, lineno, key_col, val_col))

    kinds = [e for e in entries if e[0] == "kind"]
    if not kinds:
        raise ScenarioError("MissingKey", 1, 1, "missing 'kind'")
    _, kind, kline, _, kcol = kinds[0]
    if kind not in SCHEMAS:
        raise ScenarioError("OutOfRange", kline, kcol, f"unknown kind {kind!r}")

    schema = SCHEMAS[kind]
    params: dict[str, Any] = {}
    outputs: tuple[str, ...] = ()
    for key, raw, line, key_col, val_col in entries:
        if key == "kind":
            continue
        if key == "outputs":
            names = tuple(n.strip() for n in raw.split(","))
            for n in names:
                if n not in OUTPUT_FIELDS[kind]:
                    raise ScenarioError("OutOfRange", line, val_col, f"unknown output {n!r} for kind {kind}")
            outputs = names
            continue
        if key not in schema:
            raise ScenarioError("UnknownKey", line, key_col, f"unknown key {key!r} for kind {kind}")
        params[key] = _convert(schema[key], key, raw, line, val_col, kind)

    for key, spec in schema.items():
        if spec.required and key not in params:
            raise ScenarioError("MissingKey", kline, 1, f"kind {kind} requires {key!r}")
    return Scenario(kind, params, outputs)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_scenario(scenario: Scenario) -> str:
    lines = [f"kind = {scenario.kind}"]
    order = [k for k in KEY_ORDER if k in scenario.params]
    order += sorted(k for k in scenario.params if k not in order)
    lines += [f"{k} = {_format_value(scenario.params[k])}" for k in order]
    if scenario.outputs:
        lines.append("outputs = " + ", ".join(scenario.outputs))
    return "\n".join(lines) + "\n"
