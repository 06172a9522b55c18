"""Scenario runner: parse a config file, dispatch a study, emit reports.

Scenario files are JSON with optional leading comment lines starting with
``#`` (typically a units header). Every number in a report comes from a
library operation; the runner only orchestrates, formats and asserts.

Subcommands::

    cavityqc run <scenario.json> -o <output-dir>
    cavityqc describe <kind>
    cavityqc list

Exit codes: 0 ok, 2 parse error, 3 validation error, 4 assertion failure,
5 internal error. ``report.json`` and the per-table CSV files are
byte-identical across repeated runs with the same scenario and seed; wall
time goes to a separate ``run_meta.json``.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import circuits, dynamics, gates
from .basis import NodeSpec
from .errors import (
    ParseError,
    SimulationError,
    UnknownKind,
    ValidationError,
)
from .hamiltonian import CouplingSet, DetuningSet, EffectiveRates, transistor_rate
from .state import fidelity

SCENARIO_KINDS = (
    "pair-evolution",
    "blockade",
    "transistor",
    "effective-error-sweep",
    "verify-gates",
    "verify-circuits",
)


@dataclass(frozen=True)
class Field:
    name: str
    kind: str  # int | float | complex | list[float] | list[int] | bool
    required: bool = False
    default: object = None
    help: str = ""


SCHEMAS: dict[str, tuple[Field, ...]] = {
    "pair-evolution": (
        Field("n_atoms", "int", True, help="atoms per node (equal nodes)"),
        Field("swap_rate", "float", True, help="inter-node exchange rate [rad/time]"),
        Field("alpha1", "complex", True, help="node-1 ground amplitude [re, im]"),
        Field("beta1", "complex", True, help="node-1 excited amplitude [re, im]"),
        Field("alpha2", "complex", True, help="node-2 ground amplitude [re, im]"),
        Field("beta2", "complex", True, help="node-2 excited amplitude [re, im]"),
        Field("t_max", "float", False, None, "time window; default two swap periods"),
        Field("points", "int", False, 100, "time grid size"),
        Field("tolerance", "float", False, 1e-9, "closed-form agreement bound"),
    ),
    "blockade": (
        Field("n_1", "int", True, help="atoms in node 1"),
        Field("n_2", "int", True, help="atoms in node 2"),
        Field("n_photons", "int", True, help="real cavity photons"),
        Field("shift_rate_1", "float", True, help="|g1|^2/Delta1 [rad/time]"),
        Field("shift_rate_2", "float", True, help="|g2|^2/Delta2 [rad/time]"),
        Field("swap_rate", "float", True, help="inter-node exchange rate [rad/time]"),
        Field("freq_1", "float", False, 0.0, "bare transition frequency, node 1"),
        Field(
            "freq_2",
            "float",
            False,
            None,
            "bare transition frequency, node 2; default satisfies the "
            "resonance freq_2 - freq_1 + N2 shift_2 - N1 shift_1 = 0",
        ),
        Field("t_max", "float", False, None, "time window; default two transfer periods"),
        Field("points", "int", False, 200, "time grid size"),
        Field("max_c3_sq_below", "float", False, None, "optional blocking bound"),
    ),
    "transistor": (
        Field("n_atoms", "int", True, help="atoms per node"),
        Field("g21", "float", True, help="lower-transition coupling"),
        Field("g32", "float", True, help="upper-transition coupling"),
        Field("delta_control", "float", True, help="control lower-transition detuning"),
        Field("delta_target", "float", True, help="target upper-transition detuning"),
        Field("alpha", "complex", True, help="target |01> amplitude [re, im]"),
        Field("beta", "complex", True, help="target |10> amplitude [re, im]"),
        Field("periods", "float", False, 1.0, "transfer periods to cover"),
        Field("points", "int", False, 100, "time grid size"),
        Field("tolerance", "float", False, 1e-9, "closed-form agreement bound"),
    ),
    "effective-error-sweep": (
        Field("n_atoms", "int", True, help="atoms per node (equal nodes)"),
        Field("coupling", "float", True, help="atom-mode coupling g"),
        Field(
            "delta_factors",
            "list[float]",
            True,
            help="detunings in units of sqrt(n_atoms) * coupling",
        ),
        Field("periods", "float", False, 1.0, "swap periods per point"),
        Field("points", "int", False, 200, "time grid size"),
        Field("assert_factor", "float", False, 30.0, "factor carrying the error bound"),
        Field("assert_below", "float", False, 1e-3, "infidelity bound at that factor"),
        Field("check_monotone", "bool", False, True, "assert envelope decrease"),
    ),
    "verify-gates": (
        Field("seed", "int", True, help="random seed (mandatory)"),
        Field("samples", "int", False, 10, "random unitaries for synthesis checks"),
        Field("tolerance", "float", False, 1e-10, "deviation bound"),
    ),
    "verify-circuits": (
        Field("seed", "int", True, help="random seed (mandatory)"),
        Field("t_values", "list[int]", False, [2, 3, 4], "control counts to verify"),
        Field("samples", "int", False, 10, "random unitaries per control count"),
        Field("tolerance", "float", False, 1e-9, "equivalence bound"),
    ),
}


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------


def load_scenario(path) -> tuple[str, dict]:
    """Read a scenario file: '#' comment lines, then one JSON object."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read scenario file {path}: {exc}") from exc
    body = "\n".join(
        line for line in text.splitlines() if not line.lstrip().startswith("#")
    )
    try:
        raw = json.loads(body or "null")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: scenario must be a JSON object")
    kind = raw.pop("kind", None)
    if kind is None:
        raise ValidationError("missing required field 'kind'")
    if kind not in SCENARIO_KINDS:
        raise UnknownKind(f"unknown scenario kind {kind!r}")
    return kind, validate_params(kind, raw)


def _coerce(field: Field, value):
    try:
        if field.kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError
            return int(value)
        if field.kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError
            return float(value)
        if field.kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if field.kind == "complex":
            re_part, im_part = value
            return complex(float(re_part), float(im_part))
        if field.kind == "list[float]":
            return [float(v) for v in value]
        if field.kind == "list[int]":
            return [int(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ValidationError(
            f"field {field.name!r} expects {field.kind}, got {value!r}"
        ) from exc
    raise ValidationError(f"unhandled field kind {field.kind!r}")


def validate_params(kind: str, raw: dict) -> dict:
    schema = SCHEMAS[kind]
    known = {f.name for f in schema}
    for key in raw:
        if key not in known:
            raise ValidationError(f"unknown field {key!r} for scenario {kind!r}")
    params = {}
    for f in schema:
        if f.name in raw and raw[f.name] is not None:
            params[f.name] = _coerce(f, raw[f.name])
        elif f.required:
            raise ValidationError(f"missing required field {f.name!r}")
        else:
            params[f.name] = f.default
    return params


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------


def _cpx(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def _default_window(rate_scale: float, periods: float = 2.0) -> float:
    """Time window of a few natural periods; unit window for zero rates."""
    if rate_scale <= 0.0:
        return 1.0
    return periods * np.pi / rate_scale


def _run_pair_evolution(p: dict):
    n = p["n_atoms"]
    rate = p["swap_rate"]
    nodes = (NodeSpec(n), NodeSpec(n))
    from .hamiltonian import two_level_swap_hamiltonian

    h = two_level_swap_hamiltonian(nodes, rate, rotating_frame=True)
    a1, b1, a2, b2 = p["alpha1"], p["beta1"], p["alpha2"], p["beta2"]
    t_max = p["t_max"]
    if t_max is None:
        t_max = _default_window(abs(rate) * n)
    times = np.linspace(0.0, t_max, p["points"])
    psi0 = dynamics.analytic_pair_evolution(a1, b1, a2, b2, rate, n, 0.0, basis=h.basis)

    rows = []
    worst = 1.0
    for t in times:
        numeric = dynamics.propagate(h, psi0, float(t))
        closed = dynamics.analytic_pair_evolution(
            a1, b1, a2, b2, rate, n, float(t), basis=h.basis
        )
        f = fidelity(numeric, closed)
        worst = min(worst, f)
        probs = np.abs(numeric.amplitudes) ** 2
        rows.append(
            {
                "t": float(t),
                "p_00": float(probs[0]),
                "p_10": float(probs[1]),
                "p_01": float(probs[2]),
                "p_11": float(probs[3]),
                "p_2plus": float(probs[4]),
                "closed_form_fidelity": float(f),
            }
        )
    assertions = [
        {
            "name": "closed-form-agreement",
            "passed": bool(worst >= 1.0 - p["tolerance"]),
            "detail": f"min fidelity {worst:.12e} over {p['points']} points",
        }
    ]
    return {"evolution": rows}, assertions


def _run_blockade(p: dict):
    n1, n2, n_ph = p["n_1"], p["n_2"], p["n_photons"]
    freq_1 = p["freq_1"]
    freq_2 = p["freq_2"]
    if freq_2 is None:
        freq_2 = freq_1 + n1 * p["shift_rate_1"] - n2 * p["shift_rate_2"]
    rates = EffectiveRates(
        swap_rate=p["swap_rate"],
        shift_rate_1=p["shift_rate_1"],
        shift_rate_2=p["shift_rate_2"],
        transition_freq_1=freq_1,
        transition_freq_2=freq_2,
    )
    sol = dynamics.blockade_solution(rates, n1, n2, n_ph)
    exchange = np.sqrt(n1 * n2) * abs(p["swap_rate"])
    t_max = p["t_max"]
    if t_max is None:
        t_max = _default_window(exchange)
    times = np.linspace(0.0, t_max, p["points"])
    c2 = sol.c2(times)
    c3 = sol.c3(times)
    rows = [
        {
            "t": float(t),
            "abs_c2_sq": float(abs(a) ** 2),
            "abs_c3_sq": float(abs(b) ** 2),
            "total": float(abs(a) ** 2 + abs(b) ** 2),
        }
        for t, a, b in zip(times, c2, c3)
    ]
    solution_row = {
        "r_1": sol.r1,
        "r_2": sol.r2,
        "c_const_1": sol.c_const_1,
        "c_const_2": sol.c_const_2,
        "energy_2": sol.energy_2,
        "energy_3": sol.energy_3,
    }
    closure = float(np.abs(np.abs(c2) ** 2 + np.abs(c3) ** 2 - 1.0).max())
    assertions = [
        {
            "name": "norm-closure",
            "passed": bool(closure <= 1e-9),
            "detail": f"max ||c2|^2 + |c3|^2 - 1| = {closure:.3e}",
        }
    ]
    if p["max_c3_sq_below"] is not None:
        peak = float((np.abs(c3) ** 2).max())
        assertions.append(
            {
                "name": "transfer-blocked",
                "passed": bool(peak < p["max_c3_sq_below"]),
                "detail": f"max |c3|^2 = {peak:.3e}, bound {p['max_c3_sq_below']:.3e}",
            }
        )
    return {"amplitudes": rows, "solution": [solution_row]}, assertions


def _run_transistor(p: dict):
    n = p["n_atoms"]
    node = NodeSpec(n, 3, (0.0, 1.0, 2.0))
    couplings = CouplingSet(g21=p["g21"], g32=p["g32"])
    detunings = DetuningSet(
        lower=(p["delta_control"],) * 3,
        upper=(None, p["delta_target"], p["delta_target"]),
    )
    rate = transistor_rate(couplings, detunings)
    h, psi0, projector = dynamics.transistor_oracle(
        node, (node, node), couplings, detunings, p["alpha"], p["beta"]
    )
    period = np.pi / (np.sqrt(n) * rate)
    times = np.linspace(0.0, p["periods"] * period, p["points"])
    grid = dynamics.evolve_on_grid(h, psi0, times)
    projected = grid @ projector.conj().T

    rows = []
    worst = 1.0
    for t, proj in zip(times, projected):
        closed = dynamics.transistor_evolution(p["alpha"], p["beta"], n, rate, float(t))
        f = float(abs(np.vdot(closed.amplitudes, proj)) ** 2)
        worst = min(worst, f)
        rows.append(
            {
                "t": float(t),
                "control_excited": float(abs(proj[0]) ** 2 + abs(proj[1]) ** 2),
                "transferred": float(abs(proj[2]) ** 2 + abs(proj[3]) ** 2),
                "closed_form_fidelity": f,
            }
        )

    def transferred(t):
        amps = dynamics.propagate(h, psi0, float(t)).amplitudes
        proj = projector.conj() @ amps
        return abs(proj[2]) ** 2 + abs(proj[3]) ** 2

    t_star = dynamics.first_maximum_time(transferred, 0.0, period)
    expected = np.pi / (2.0 * np.sqrt(n) * rate)
    t_err = abs(t_star - expected) / expected
    assertions = [
        {
            "name": "closed-form-agreement",
            "passed": bool(worst >= 1.0 - p["tolerance"]),
            "detail": f"min fidelity {worst:.12e}",
        },
        {
            "name": "transfer-time",
            "passed": bool(t_err <= 1e-6),
            "detail": f"first maximum at {t_star:.9e}, expected {expected:.9e}",
        },
    ]
    summary = [{"rate": float(rate), "transfer_time": float(t_star)}]
    return {"evolution": rows, "summary": summary}, assertions


def _run_effective_error_sweep(p: dict):
    n = p["n_atoms"]
    g = p["coupling"]
    nodes = (NodeSpec(n), NodeSpec(n))
    couplings = CouplingSet(g21=g)
    deltas = [f * np.sqrt(n) * abs(g) for f in p["delta_factors"]]
    report = dynamics.effective_model_error(
        nodes,
        couplings,
        deltas,
        swap_periods=p["periods"],
        grid_points=p["points"],
    )
    rows = [
        {
            "delta_factor": float(f),
            "delta": float(d),
            "max_infidelity": float(i),
            "max_leakage": float(l),
        }
        for f, d, i, l in zip(
            p["delta_factors"], report.deltas, report.max_infidelity, report.max_leakage
        )
    ]
    assertions = []
    factor = p["assert_factor"]
    if factor is not None and factor in p["delta_factors"]:
        k = p["delta_factors"].index(factor)
        value = report.max_infidelity[k]
        assertions.append(
            {
                "name": f"infidelity-at-{factor:g}x",
                "passed": bool(value < p["assert_below"]),
                "detail": f"max infidelity {value:.3e}, bound {p['assert_below']:.1e}",
            }
        )
    if p["check_monotone"] and len(rows) >= 2:
        ordered = sorted(rows, key=lambda r: r["delta_factor"])
        ok = all(
            b["max_infidelity"] <= 1.1 * a["max_infidelity"]
            for a, b in zip(ordered, ordered[1:])
        )
        assertions.append(
            {
                "name": "envelope-monotone",
                "passed": bool(ok),
                "detail": "max infidelity non-increasing across the sweep "
                "(10% fringe jitter allowed)",
            }
        )
    return {"sweep": rows, "metric": [{"description": report.metric}]}, assertions


def _run_verify_gates(p: dict):
    rng = np.random.default_rng(p["seed"])
    tol = p["tolerance"]
    rows = []

    def add(name, deviation, bound):
        rows.append(
            {
                "check": name,
                "deviation": float(deviation),
                "bound": float(bound),
                "passed": bool(deviation <= bound),
            }
        )

    res = circuits.equivalence_up_to_global_phase(gates.pcet().matrix, gates.CNOT, 1e-12)
    add("pcet-equals-cnot", res.max_deviation, 1e-12)

    square = gates.pcet().matrix @ gates.pcet().matrix
    res = circuits.equivalence_up_to_global_phase(square, np.eye(4), 1e-12)
    add("pcet-involution", res.max_deviation, 1e-12)

    anti = gates.phase_gate(np.pi).matrix @ gates.et_gate(np.pi).matrix + gates.et_gate(
        np.pi
    ).matrix @ gates.phase_gate(np.pi).matrix
    add("phase-et-anticommutation", np.abs(anti).max(), 1e-12)

    worst = 0.0
    for _ in range(p["samples"]):
        t1, t2 = rng.uniform(-2 * np.pi, 2 * np.pi, size=2)
        dev = np.abs(
            gates.et_gate(t1).matrix @ gates.et_gate(t2).matrix
            - gates.et_gate(t1 + t2).matrix
        ).max()
        worst = max(worst, dev)
    add("et-group-law", worst, 1e-12)

    worst = 0.0
    for _ in range(p["samples"]):
        u = gates.haar_random_unitary(rng)
        synthesis = gates.synthesize_rotation(u, tol=tol)
        dev = np.abs(u - synthesis.global_phase * synthesis.matrix()).max()
        worst = max(worst, dev)
    add("rotation-synthesis", worst, tol)

    assertions = [
        {
            "name": "all-gate-checks",
            "passed": all(r["passed"] for r in rows),
            "detail": f"{sum(r['passed'] for r in rows)}/{len(rows)} checks passed",
        }
    ]
    return {"checks": rows}, assertions


def _run_verify_circuits(p: dict):
    rng = np.random.default_rng(p["seed"])
    tol = p["tolerance"]
    rows = []

    toffoli_circuit = circuits.encoded_toffoli(0, 1, 2, 0)
    matrix, rep = circuits.logical_matrix(toffoli_circuit, n_qubits=3, n_ancillas=1)
    res = circuits.equivalence_up_to_global_phase(matrix, gates.TOFFOLI, 1e-10)
    rows.append(
        {
            "case": "encoded-toffoli",
            "construction": "pcet",
            "deviation": res.max_deviation,
            "count_ok": True,
            "passed": bool(res.equal and rep.max_ancilla_residual <= 1e-10),
        }
    )

    margolus, _ = circuits.logical_matrix(circuits.standard_toffoli_upto_phase(), 3)
    dev = float(np.abs(np.abs(margolus) - np.abs(gates.TOFFOLI)).max())
    rows.append(
        {
            "case": "toffoli-up-to-phase",
            "construction": "rotation-ladder",
            "deviation": dev,
            "count_ok": True,
            "passed": bool(dev <= 1e-10),
        }
    )

    for t in p["t_values"]:
        for sample in range(p["samples"]):
            u = gates.haar_random_unitary(rng)
            reference = circuits.controlled_power_matrix(t, u)
            for name, builder in (
                ("standard", circuits.controlled_power_standard),
                ("improved", circuits.controlled_power_improved),
            ):
                bundle = builder(t, u)
                matrix, rep = circuits.logical_matrix(bundle)
                res = circuits.equivalence_up_to_global_phase(matrix, reference, tol)
                counts = circuits.gate_counts(bundle.circuit)
                if name == "standard":
                    count_ok = counts["TOFFOLI"] == 2 * (t - 1)
                else:
                    count_ok = counts.get("PCET", 0) == 2 * (t - 1)
                rows.append(
                    {
                        "case": f"controlled-power-t{t}-s{sample}",
                        "construction": name,
                        "deviation": res.max_deviation,
                        "count_ok": bool(count_ok),
                        "passed": bool(
                            res.equal and count_ok and rep.max_ancilla_residual <= 1e-10
                        ),
                    }
                )

    assertions = [
        {
            "name": "all-circuit-checks",
            "passed": all(r["passed"] for r in rows),
            "detail": f"{sum(r['passed'] for r in rows)}/{len(rows)} cases passed",
        }
    ]
    return {"cases": rows}, assertions


RUNNERS = {
    "pair-evolution": _run_pair_evolution,
    "blockade": _run_blockade,
    "transistor": _run_transistor,
    "effective-error-sweep": _run_effective_error_sweep,
    "verify-gates": _run_verify_gates,
    "verify-circuits": _run_verify_circuits,
}


# ---------------------------------------------------------------------------
# Report writing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunReport:
    """Deterministic result of one scenario run (wall time kept separate)."""

    kind: str
    scenario: dict
    tables: dict
    assertions: list
    wall_time_seconds: float

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def payload(self) -> dict:
        return {
            "kind": self.kind,
            "scenario": self.scenario,
            "tables": self.tables,
            "assertions": self.assertions,
            "passed": self.passed,
        }


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.12e" % value
    return str(value)


def write_report(outdir, report: RunReport) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.json").write_bytes(
        (json.dumps(report.payload(), indent=2, sort_keys=True) + "\n").encode("utf-8")
    )
    for name, rows in report.tables.items():
        if not rows:
            continue
        columns = list(rows[0].keys())
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_csv_cell(row[c]) for c in columns))
        (outdir / f"{name}.csv").write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    meta = {
        "wall_time_seconds": report.wall_time_seconds,
        "written_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    (outdir / "run_meta.json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )


def run(path, outdir) -> int:
    """Execute a scenario file; returns the process exit code."""
    kind, params = load_scenario(path)
    start = time.perf_counter()
    tables, assertions = RUNNERS[kind](params)
    elapsed = time.perf_counter() - start
    scenario_echo = {
        k: (_cpx(v) if isinstance(v, complex) else v) for k, v in params.items()
    }
    report = RunReport(
        kind=kind,
        scenario=scenario_echo,
        tables=tables,
        assertions=assertions,
        wall_time_seconds=elapsed,
    )
    write_report(outdir, report)
    for a in report.assertions:
        status = "pass" if a["passed"] else "FAIL"
        print(f"[{status}] {a['name']}: {a['detail']}")
    return 0 if report.passed else 4


def describe(kind: str) -> str:
    if kind not in SCENARIO_KINDS:
        raise UnknownKind(f"unknown scenario kind {kind!r}")
    lines = [f"scenario kind: {kind}", "fields:"]
    for f in SCHEMAS[kind]:
        req = "required" if f.required else f"default {f.default!r}"
        lines.append(f"  {f.name:<16} {f.kind:<12} {req:<22} {f.help}")
    return "\n".join(lines)


def list_scenarios() -> str:
    return "\n".join(SCENARIO_KINDS)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cavityqc",
        description="Scenario runner for the ensemble-pair cavity simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("scenario", help="path to the scenario JSON file")
    run_p.add_argument("-o", "--output", required=True, help="output directory")
    desc_p = sub.add_parser("describe", help="print the schema of a scenario kind")
    desc_p.add_argument("kind")
    sub.add_parser("list", help="list scenario kinds")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return run(args.scenario, args.output)
        if args.command == "describe":
            print(describe(args.kind))
            return 0
        if args.command == "list":
            print(list_scenarios())
            return 0
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, UnknownKind) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 3
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except Exception as exc:  # noqa: BLE001 - map anything unexpected to exit 5
        print(f"internal error: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
