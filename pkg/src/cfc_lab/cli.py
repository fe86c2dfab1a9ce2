"""``cfc-lab`` command line: run scenarios, sweep a parameter, tune alpha.

Exit codes: 0 success, 2 parse error, 3 domain error, 4 internal invariant
breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Sequence

from . import __version__
from .errors import CFCLabError, InvariantBreach
from .interferometer import (
    build_nested_mzi,
    detection_probability,
    extract_two_state_vector,
    propagate_backward,
    propagate_forward,
)
from .qstate import StateVector, default_tolerance, projector
from .scenario import AUTO, SCHEMAS, Scenario, ScenarioError, parse_scenario, parse_value
from .tsvf import (
    PointerConfig,
    abl_probability,
    flux_scaling,
    pointer_measurement,
    three_box,
    weak_value,
)
from .zeno import (
    ProtocolParams,
    jozsa_failure_asymptote,
    run_hosten,
    run_jozsa,
    simulate_trajectories,
    tune_alpha,
)

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_INTERNAL = 0, 2, 3, 4
PROBES = ("A", "B", "C", "E", "F")


class ScenarioRunError(CFCLabError):
    """A domain error with the scenario that triggered it attached."""

    def __init__(self, scenario: Scenario, cause: Exception):
        super().__init__(f"{scenario.kind} scenario failed: {cause}")
        self.scenario = scenario
        self.cause = cause


# ---------------------------------------------------------------------------
# deterministic serialization


def _cplx(z: complex) -> dict[str, float]:
    return {"re": float(z.real), "im": float(z.imag)}


def _state(state: StateVector) -> dict[str, dict[str, float]]:
    return {k: _cplx(a) for k, a in sorted(state.items())}


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise InvariantBreach(f"non-finite number {x!r} in report")
    text = f"{x:.17g}"
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and floats printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# scenario execution


def _protocol_params(sc: Scenario) -> tuple[ProtocolParams, bool]:
    alpha = sc.get("alpha")
    tuned = alpha == AUTO
    if tuned:
        alpha = tune_alpha(sc.get("N"))
    return ProtocolParams(sc.get("N"), alpha, sc.get("outcome")), tuned


def _round_table(result) -> list[dict[str, Any]]:
    return [
        {"round": r.round, "p_absorbed": r.p_absorbed, "p_c_detect": r.p_c_detect}
        for r in result.round_log
    ]


def _check_sum(result) -> None:
    total = result.total_probability()
    if abs(total - 1.0) > 1e-9:
        raise InvariantBreach(f"event probabilities sum to {total!r}")


def _run_protocol(sc: Scenario, protocol: str) -> tuple[dict, dict]:
    params, tuned = _protocol_params(sc)
    result = run_jozsa(params) if protocol == "jozsa" else run_hosten(params)
    _check_sum(result)
    res: dict[str, Any] = {
        "alpha": params.alpha,
        "p_absorbed": result.p_absorbed,
        "final_state": _state(result.final_state),
    }
    if protocol == "jozsa":
        res["p_found_L"] = result.terminal["L"]
        res["p_not_found"] = result.terminal["R"]
        res["p_absorbed_asymptote"] = jozsa_failure_asymptote(params.N)
    else:
        final = result.final_state
        res["alpha_tuned"] = tuned
        res["p_c_detect"] = result.p_c_detect
        res["p_outcome_A"] = result.p_outcome_A
        res["p_outcome_B"] = result.p_outcome_B
        res["fidelity_A"] = 1.0 - final.infidelity("A") if len(final) else 0.0
        res["fidelity_B"] = 1.0 - final.infidelity("B") if len(final) else 0.0
    tables: dict[str, Any] = {"round_log": _round_table(result)}
    if sc.get("trials") is not None:
        hist = simulate_trajectories(params, protocol, sc.get("trials"), sc.get("seed"))
        tables["histogram"] = {"trials": hist.trials, "seed": hist.seed, "counts": dict(hist.counts)}
    return res, tables


def _run_mzi(sc: Scenario) -> tuple[dict, dict]:
    net = build_nested_mzi(sc.get("outcome"))
    fwd = propagate_forward(net)
    res: dict[str, Any] = {
        "p_D1": abs(fwd["D1"]) ** 2,
        "p_D2": abs(fwd["D2"]) ** 2,
        "p_dump": abs(fwd["dump"]) ** 2,
        "p_absorbed": abs(fwd["absorbed"]) ** 2,
        "forward_amplitudes": {p: _cplx(fwd[p]) for p in PROBES},
    }
    det = sc.get("detector")
    if abs(fwd[det]) > default_tolerance():
        bwd = propagate_backward(net, det)
        res["backward_amplitudes"] = {p: _cplx(bwd[p]) for p in PROBES}
        res["weak_values"] = {
            p: _cplx(weak_value(extract_two_state_vector(net, det, at=p), projector({p})))
            for p in PROBES
        }
    else:
        res["backward_amplitudes"] = None
        res["weak_values"] = None
    return res, {}


def _run_three_box(sc: Scenario) -> tuple[dict, dict]:
    tsv = three_box()
    wv = {b: weak_value(tsv, projector({b})) for b in "ABC"}
    res = {
        "overlap": _cplx(tsv.overlap()),
        "weak_values": {b: _cplx(v) for b, v in wv.items()},
        "weak_value_sum": _cplx(sum(wv.values())),
        "abl": {b: abl_probability(tsv, projector({b})) for b in "ABC"},
    }
    return res, {}


def _run_pointer(sc: Scenario) -> tuple[dict, dict]:
    net = build_nested_mzi(0)
    probe, det, g = sc.get("probe"), sc.get("detector"), sc.get("g")
    r = pointer_measurement(net, probe, PointerConfig(g), detector=det)
    wv = weak_value(extract_two_state_vector(net, det, at=probe), projector({probe}))
    res = {
        "g": g,
        "mean_shift": r.mean_shift,
        "shift_ratio": r.mean_shift / g if g != 0 else None,
        "p_postselect": r.p_postselect,
        "leaked_flux": r.leaked_flux,
        "weak_value": _cplx(wv),
    }
    return res, {}


def _run_flux(sc: Scenario) -> tuple[dict, dict]:
    out = flux_scaling(sc.get("N_photons"), sc.get("regime"))
    return {"g": out.g, "expected_flux": out.expected_flux}, {}


_RUNNERS = {
    "jozsa": lambda sc: _run_protocol(sc, "jozsa"),
    "hosten": lambda sc: _run_protocol(sc, "hosten"),
    "nested_mzi": _run_mzi,
    "three_box": _run_three_box,
    "pointer": _run_pointer,
    "flux_scaling": _run_flux,
}


def _check_probabilities(obj: Any, path: str = "") -> None:
    tol = default_tolerance()
    if isinstance(obj, dict):
        for k, v in obj.items():
            name = f"{path}.{k}" if path else str(k)
            if (str(k).startswith("p_") or path.endswith("abl")) and isinstance(v, float):
                if not -tol <= v <= 1 + tol:
                    raise InvariantBreach(f"probability {name} = {v!r} outside [0, 1]")
            _check_probabilities(v, name)
    elif isinstance(obj, list):
        for v in obj:
            _check_probabilities(v, path)


def run(scenario: Scenario, seed: int | None = None) -> dict[str, Any]:
    """Execute a scenario and return the report as plain data."""
    if seed is not None:
        scenario = scenario.with_param("seed", seed)
    try:
        results, tables = _RUNNERS[scenario.kind](scenario)
    except InvariantBreach:
        raise
    except CFCLabError as exc:
        raise ScenarioRunError(scenario, exc) from exc
    if scenario.outputs:
        keep = set(scenario.outputs)
        results = {k: v for k, v in results.items() if k in keep}
        tables = {k: v for k, v in tables.items() if k in keep}
    report = {
        "scenario": scenario.echo(),
        "results": results,
        "tables": tables,
        "provenance": {
            "artifact": "cfc_lab",
            "version": __version__,
            "seed": scenario.get("seed") if "seed" in SCHEMAS[scenario.kind] else None,
            "tolerance": default_tolerance(),
        },
    }
    _check_probabilities(report["results"])
    _check_probabilities(report["tables"])
    return report


def report_json(report: dict[str, Any]) -> str:
    return dumps(report) + "\n"


# ---------------------------------------------------------------------------
# sweeps


def _flatten(obj: Any, prefix: str = "") -> dict[str, Any]:
    out: dict[str, Any] = {}
    if isinstance(obj, dict):
        for k in sorted(obj):
            out.update(_flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, (int, float, bool)) or obj is None:
        out[prefix] = obj
    return out


def _sweep_row(args):
    scenario, key, value = args
    report = run(scenario.with_param(key, value))
    return {key: value, **_flatten(report["results"])}


def sweep(
    scenario: Scenario, key: str, values: Sequence[Any], workers: int = 1
) -> tuple[list[str], list[dict[str, Any]]]:
    """One report row per value; rows keep the order of ``values``."""
    spec = SCHEMAS[scenario.kind].get(key)
    if spec is None or not spec.numeric:
        raise ScenarioError("TypeMismatch", 1, 1, f"{key!r} is not a numeric parameter of {scenario.kind}")
    values = [parse_value(scenario.kind, key, str(v)) if isinstance(v, str) else v for v in values]
    jobs = [(scenario, key, v) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    if rows:
        columns = list(rows[0])
    else:
        columns = [key, *_flatten(run(scenario)["results"])] if _has_required(scenario) else [key]
    return columns, rows


def _has_required(scenario: Scenario) -> bool:
    return all(k in scenario.params for k, s in SCHEMAS[scenario.kind].items() if s.required)


def sweep_csv(columns: list[str], rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        cells = []
        for c in columns:
            v = row.get(c)
            if isinstance(v, bool):
                cells.append(str(v).lower())
            elif isinstance(v, float):
                cells.append(format_float(v))
            elif v is None:
                cells.append("")
            else:
                cells.append(str(v))
        writer.writerow(cells)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# entry point


def _read_scenario(path: str) -> Scenario:
    with open(path, "rb") as fh:
        return parse_scenario(fh.read())


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfc-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cfc-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--seed", type=_u64)
    p_run.add_argument("--out")
    p_run.add_argument("--format", choices=("json",), default="json")

    p_sweep = sub.add_parser("sweep", help="vary one numeric key")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--key", required=True)
    p_sweep.add_argument("--values", required=True, help='comma separated, e.g. "10,100,1000"')
    p_sweep.add_argument("--format", choices=("csv",), default="csv")
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--workers", type=int, default=1)

    p_tune = sub.add_parser("tune", help="tune the bounce angle of the chained scheme")
    p_tune.add_argument("--N", type=int, required=True)
    p_tune.add_argument("--out")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            report = run(_read_scenario(args.scenario), seed=args.seed)
            _emit(report_json(report), args.out)
        elif args.command == "sweep":
            sc = _read_scenario(args.scenario)
            raw = [v.strip() for v in args.values.split(",") if v.strip()]
            columns, rows = sweep(sc, args.key, raw, workers=args.workers)
            _emit(sweep_csv(columns, rows), args.out)
        else:
            alpha = tune_alpha(args.N)
            final = run_hosten(ProtocolParams(args.N, alpha, 1)).final_state
            report = {
                "N": args.N,
                "alpha": alpha,
                "alpha_over_quarter_turn": alpha * 2 * args.N / math.pi,
                "final_A_amplitude": _cplx(final["A"]),
                "provenance": {"artifact": "cfc_lab", "version": __version__},
            }
            _emit(report_json(report), args.out)
    except ScenarioError as exc:
        print(f"cfc-lab: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cfc-lab: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantBreach as exc:
        print(f"cfc-lab: invariant breach: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except CFCLabError as exc:
        print(f"cfc-lab: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
