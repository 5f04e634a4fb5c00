"""Command-line interface.

Subcommands cover the package surface: exact probabilities and curves,
diagnostic observables, parameter diagnosis (from observables or from count
files), synthetic runs, the brute-force cross-check, overlap-power
inference from curves, and observable-region meshes. All angles are in
radians. JSON payloads carry a stable ``schema`` tag; CSV files have fixed
headers. Identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from typing import Sequence

import numpy as np

from .decoherence import AsppTable, DecoherenceParams
from .diagnosis import (
    Identifiability,
    Observables21,
    Observables22,
    STATE_21,
    STATE_22,
    infer_aspps,
    invert_21,
    invert_22,
    observables_21,
    observables_22,
)
from .errors import DomainError, FockDiagError
from .experiment import CountRecord, diagnose_run, sample_counts
from .oracle import oracle_decohered_distribution
from .probability import (
    InputState,
    SignalCurve,
    curve_from_params,
    distribution_from_params,
    outcome_distribution,
    phase_grid,
    required_aspp_pairs,
    signal_curve,
)

__all__ = ["main", "SCHEMA"]

SCHEMA = "fockdiag/v1"


def _json_text(command: str, body: dict) -> str:
    payload = {"schema": SCHEMA, "command": command}
    payload.update(body)
    return json.dumps(payload, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def _parse_aspp_entry(text: str) -> tuple[tuple[int, int], float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise DomainError(f"--aspp expects m,k=value, got {text!r}")
    try:
        m_txt, k_txt = key.split(",")
        pair = (int(m_txt), int(k_txt))
        return pair, float(value)
    except ValueError as exc:
        raise DomainError(f"--aspp expects m,k=value, got {text!r}") from exc


def _gammas_given(args: argparse.Namespace) -> bool:
    return any(
        getattr(args, name) is not None
        for name in ("gamma_dist", "gamma_phase", "gamma_mix")
    )


def _params_from_args(args: argparse.Namespace) -> DecoherenceParams:
    return DecoherenceParams(
        gamma_dist=1.0 if args.gamma_dist is None else args.gamma_dist,
        gamma_phase=1.0 if args.gamma_phase is None else args.gamma_phase,
        gamma_mix=1.0 if args.gamma_mix is None else args.gamma_mix,
    )


def _resolve_table(args: argparse.Namespace, state: InputState) -> AsppTable:
    """Overlap-power table from either --gamma-* or repeated --aspp flags."""
    aspp_given = bool(args.aspp)
    if aspp_given and _gammas_given(args):
        raise DomainError("--aspp and --gamma-* inputs are mutually exclusive")
    if aspp_given:
        entries = dict(_parse_aspp_entry(item) for item in args.aspp)
        return AsppTable(entries)
    return AsppTable.from_params(_params_from_args(args), required_aspp_pairs(state))


def _add_state_flag(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument(
        "--state",
        required=required,
        help="input state: N:M for a superposition (e.g. 2:1), N,N for twin Fock",
    )


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gamma-dist", type=float, default=None)
    parser.add_argument("--gamma-phase", type=float, default=None)
    parser.add_argument("--gamma-mix", type=float, default=None)
    parser.add_argument(
        "--aspp",
        action="append",
        default=None,
        metavar="M,K=VALUE",
        help="explicit overlap-power entry; repeatable, excludes --gamma-*",
    )


def _add_out_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="output file (default stdout)")


def _params_dict(params: DecoherenceParams) -> dict:
    return {
        "gamma_dist": params.gamma_dist,
        "gamma_phase": params.gamma_phase,
        "gamma_mix": params.gamma_mix,
    }


def _cmd_prob(args: argparse.Namespace) -> str:
    state = InputState.parse(args.state)
    table = _resolve_table(args, state)
    dist = outcome_distribution(state, args.eta, table)
    return _json_text(
        "prob",
        {"state": state.label, "eta": args.eta, "probs": list(dist.probs)},
    )


def _cmd_curve(args: argparse.Namespace) -> str:
    state = InputState.parse(args.state)
    table = _resolve_table(args, state)
    curve = signal_curve(state, phase_grid(args.phases), table)
    if args.format == "json":
        return _json_text(
            "curve",
            {
                "state": state.label,
                "etas": [float(e) for e in curve.etas],
                "probs": [list(map(float, row)) for row in curve.probs],
            },
        )
    header = ["eta"] + [f"p_{s1}" for s1 in range(state.total + 1)]
    rows = [
        [float(eta)] + [float(p) for p in row]
        for eta, row in zip(curve.etas, curve.probs)
    ]
    return _csv_text(header, rows)


def _diagnostic_state(text: str) -> InputState:
    state = InputState.parse(text)
    if state not in (STATE_21, STATE_22):
        raise DomainError(
            f"diagnostic observables are defined for 2:1 and 2,2, got {state.label}"
        )
    return state


def _cmd_observables(args: argparse.Namespace) -> str:
    state = _diagnostic_state(args.state)
    table = _resolve_table(args, state)
    if state == STATE_21:
        obs = observables_21(table)
        body = {"v21": obs.v21, "v30": obs.v30, "p_sum": obs.p_sum}
    else:
        obs = observables_22(table)
        body = {"p13": obs.p13, "p22": obs.p22}
    return _json_text(
        "observables", {"state": state.label, "observables": body}
    )


def _read_counts_csv(path: str, state: InputState) -> list[CountRecord]:
    channels = state.total + 1
    expected = ["eta", "shots"] + [f"c_{s1}" for s1 in range(channels)]
    records: list[CountRecord] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != expected:
            raise DomainError(
                f"counts file header {header} does not match {expected}"
            )
        for row in reader:
            if not row:
                continue
            eta = float(row[0])
            shots = int(row[1])
            counts = tuple(int(v) for v in row[2:])
            records.append(CountRecord(eta, shots, counts))
    return records


def _cmd_diagnose(args: argparse.Namespace) -> str:
    state = _diagnostic_state(args.state)
    direct_given = any(
        getattr(args, name) is not None for name in ("v21", "v30", "p_sum", "p13", "p22")
    )
    if args.counts is not None and direct_given:
        raise DomainError("--counts and direct observable flags are mutually exclusive")

    if args.counts is not None:
        records = _read_counts_csv(args.counts, state)
        run = diagnose_run(records, state, region_tolerance=args.region_tolerance)
        result = run.diagnosis
        est = run.observables
        if state == STATE_21:
            observed = {
                "v21": est.values.v21,
                "v30": est.values.v30,
                "p_sum": est.values.p_sum,
            }
        else:
            observed = {"p13": est.values.p13, "p22": est.values.p22}
        body = {
            "state": state.label,
            "params": _params_dict(result.params),
            "identifiability": result.identifiability.value,
            "residual": result.residual,
            "projected": result.projected,
            "surviving_products": dict(result.surviving_products)
            if result.surviving_products
            else None,
            "observables": observed,
            "observable_std_errors": est.std_errors,
            "param_std_errors": run.std_errors,
            "unidentified": list(run.unidentified),
            "shots_total": est.shots_total,
        }
        if est.v21_sign_confidence is not None:
            body["v21_sign_confidence"] = est.v21_sign_confidence
        return _json_text("diagnose", body)

    if state == STATE_21:
        for name in ("v21", "v30", "p_sum"):
            if getattr(args, name) is None:
                raise DomainError(f"--{name.replace('_', '-')} is required for state 2:1")
        result = invert_21(
            Observables21(v21=args.v21, v30=args.v30, p_sum=args.p_sum),
            tolerance=args.tolerance,
        )
        params_body = _params_dict(result.params)
        residual = result.residual
        ident = result.identifiability
        surviving = result.surviving_products
        projected = result.projected
    else:
        for name in ("p13", "p22"):
            if getattr(args, name) is None:
                raise DomainError(f"--{name} is required for state 2,2")
        gamma_dist, gamma_mix, ident = invert_22(
            Observables22(p13=args.p13, p22=args.p22), tolerance=args.tolerance
        )
        params_body = {"gamma_dist": gamma_dist, "gamma_mix": gamma_mix}
        model_params = DecoherenceParams(gamma_dist, 1.0, gamma_mix)
        obs = observables_22(
            AsppTable.from_params(model_params, required_aspp_pairs(STATE_22))
        )
        residual = max(abs(obs.p13 - args.p13), abs(obs.p22 - args.p22))
        surviving = (
            {"gamma_dist*gamma_mix": gamma_dist * gamma_mix}
            if ident is Identifiability.DEGENERATE_FULL_DECOHERENCE
            else None
        )
        projected = False
    return _json_text(
        "diagnose",
        {
            "state": state.label,
            "params": params_body,
            "identifiability": ident.value,
            "residual": residual,
            "projected": projected,
            "surviving_products": dict(surviving) if surviving else None,
        },
    )


def _cmd_simulate(args: argparse.Namespace) -> str:
    state = InputState.parse(args.state)
    if bool(args.aspp):
        table = _resolve_table(args, state)
        curve = signal_curve(state, phase_grid(args.phases), table)
    else:
        curve = curve_from_params(state, phase_grid(args.phases), _params_from_args(args))
    records = sample_counts(curve, args.shots, args.seed)
    header = ["eta", "shots"] + [f"c_{s1}" for s1 in range(state.total + 1)]
    rows = [
        [float(rec.eta), rec.shots] + list(rec.counts) for rec in records
    ]
    return _csv_text(header, rows)


def _cmd_oracle_check(args: argparse.Namespace) -> str:
    grid = [float(v) for v in args.grid.split(",") if v != ""]
    if not grid:
        raise DomainError("--grid needs at least one value")
    states: list[InputState] = []
    for total in range(1, args.max_total + 1):
        for m in range(0, (total + 1) // 2):
            n = total - m
            if n > m:
                states.append(InputState.superposition(n, m))
        if total % 2 == 0:
            states.append(InputState.twin_fock(total // 2))
    etas = phase_grid(args.phases)
    worst = {"difference": -1.0, "state": None, "params": None, "eta": None}
    cases = 0
    started = time.perf_counter()
    for state in states:
        for g_dist in grid:
            for g_phase in grid:
                for g_mix in grid:
                    params = DecoherenceParams(g_dist, g_phase, g_mix)
                    for eta in etas:
                        analytic = distribution_from_params(state, eta, params)
                        reference = oracle_decohered_distribution(
                            state, 1.0, params, eta
                        )
                        diff = float(
                            np.max(
                                np.abs(
                                    analytic.as_array() - reference.as_array()
                                )
                            )
                        )
                        cases += 1
                        if diff > worst["difference"]:
                            worst = {
                                "difference": diff,
                                "state": state.label,
                                "params": _params_dict(params),
                                "eta": float(eta),
                            }
    elapsed = time.perf_counter() - started
    return _json_text(
        "oracle-check",
        {
            "max_total": args.max_total,
            "grid": grid,
            "phases": args.phases,
            "cases": cases,
            "max_abs_difference": worst["difference"],
            "worst_case": {
                "state": worst["state"],
                "params": worst["params"],
                "eta": worst["eta"],
            },
            "runtime_seconds": round(elapsed, 3),
        },
    )


def _read_curve_csv(path: str, state: InputState) -> SignalCurve:
    channels = state.total + 1
    expected = ["eta"] + [f"p_{s1}" for s1 in range(channels)]
    etas: list[float] = []
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != expected:
            raise DomainError(f"curve file header {header} does not match {expected}")
        for row in reader:
            if not row:
                continue
            etas.append(float(row[0]))
            rows.append([float(v) for v in row[1:]])
    if not etas:
        raise DomainError(f"curve file {path} has no data rows")
    return SignalCurve(state, np.asarray(etas), np.asarray(rows))


def _cmd_infer_aspp(args: argparse.Namespace) -> str:
    state = InputState.parse(args.state)
    curve = _read_curve_csv(args.curve, state)
    table, condition = infer_aspps(state, curve)
    entries = [
        {"m": pair[0], "k": pair[1], "value": value}
        for pair, value in sorted(table.items())
    ]
    return _json_text(
        "infer-aspp",
        {
            "state": state.label,
            "aspps": entries,
            "condition_number": condition,
        },
    )


def _cmd_region(args: argparse.Namespace) -> str:
    state = _diagnostic_state(args.state)
    axis = np.linspace(0.0, 1.0, args.grid_points)
    rows: list[list[float]] = []
    if state == STATE_22:
        header = ["gamma_dist", "gamma_mix", "p13", "p22"]
        for g_dist in axis:
            for g_mix in axis:
                params = DecoherenceParams(g_dist, 1.0, g_mix)
                table = AsppTable.from_params(params, required_aspp_pairs(state))
                obs = observables_22(table)
                rows.append([float(g_dist), float(g_mix), obs.p13, obs.p22])
    else:
        header = ["gamma_dist", "gamma_phase", "gamma_mix", "v21", "v30", "p_sum"]
        for g_dist in axis:
            for g_phase in axis:
                for g_mix in axis:
                    params = DecoherenceParams(g_dist, g_phase, g_mix)
                    table = AsppTable.from_params(params, required_aspp_pairs(state))
                    obs = observables_21(table)
                    rows.append(
                        [
                            float(g_dist),
                            float(g_phase),
                            float(g_mix),
                            obs.v21,
                            obs.v30,
                            obs.p_sum,
                        ]
                    )
    return _csv_text(header, rows)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fockdiag",
        description=(
            "Beam-splitter statistics for double-Fock superpositions and "
            "decoherence diagnosis. Angles are radians."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_prob = sub.add_parser("prob", help="outcome probabilities at one phase")
    _add_state_flag(p_prob)
    _add_model_flags(p_prob)
    p_prob.add_argument("--eta", type=float, default=0.0)
    _add_out_flag(p_prob)
    p_prob.set_defaults(handler=_cmd_prob)

    p_curve = sub.add_parser("curve", help="outcome probabilities on a phase grid")
    _add_state_flag(p_curve)
    _add_model_flags(p_curve)
    p_curve.add_argument("--phases", type=int, default=12)
    p_curve.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_out_flag(p_curve)
    p_curve.set_defaults(handler=_cmd_curve)

    p_obs = sub.add_parser(
        "observables", help="diagnostic observables of 2:1 or 2,2"
    )
    _add_state_flag(p_obs)
    _add_model_flags(p_obs)
    _add_out_flag(p_obs)
    p_obs.set_defaults(handler=_cmd_observables)

    p_diag = sub.add_parser(
        "diagnose", help="invert observables (or a counts file) to parameters"
    )
    _add_state_flag(p_diag)
    p_diag.add_argument("--v21", type=float, default=None)
    p_diag.add_argument("--v30", type=float, default=None)
    p_diag.add_argument("--p-sum", dest="p_sum", type=float, default=None)
    p_diag.add_argument("--p13", type=float, default=None)
    p_diag.add_argument("--p22", type=float, default=None)
    p_diag.add_argument("--tolerance", type=float, default=1e-9)
    p_diag.add_argument("--counts", default=None, help="counts CSV from `simulate`")
    p_diag.add_argument("--region-tolerance", type=float, default=3.0)
    _add_out_flag(p_diag)
    p_diag.set_defaults(handler=_cmd_diagnose)

    p_sim = sub.add_parser("simulate", help="sample multinomial counts on a grid")
    _add_state_flag(p_sim)
    _add_model_flags(p_sim)
    p_sim.add_argument("--phases", type=int, default=12)
    p_sim.add_argument("--shots", type=int, default=100000)
    p_sim.add_argument("--seed", type=int, default=0)
    _add_out_flag(p_sim)
    p_sim.set_defaults(handler=_cmd_simulate)

    p_oracle = sub.add_parser(
        "oracle-check", help="compare closed form against brute-force enumeration"
    )
    p_oracle.add_argument("--max-total", type=int, default=4)
    p_oracle.add_argument("--grid", default="0,0.3,0.7,1")
    p_oracle.add_argument("--phases", type=int, default=8)
    _add_out_flag(p_oracle)
    p_oracle.set_defaults(handler=_cmd_oracle_check)

    p_infer = sub.add_parser(
        "infer-aspp", help="recover overlap powers from a curve CSV"
    )
    _add_state_flag(p_infer)
    p_infer.add_argument("--curve", required=True, help="curve CSV from `curve`")
    _add_out_flag(p_infer)
    p_infer.set_defaults(handler=_cmd_infer_aspp)

    p_region = sub.add_parser(
        "region", help="mesh of diagnostic observables over the parameter cube"
    )
    _add_state_flag(p_region)
    p_region.add_argument("--grid-points", type=int, default=9)
    _add_out_flag(p_region)
    p_region.set_defaults(handler=_cmd_region)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.handler(args)
    except FockDiagError as exc:
        error = {
            "schema": SCHEMA,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        sys.stderr.write(json.dumps(error, indent=2) + "\n")
        return 1
    except OSError as exc:
        error = {
            "schema": SCHEMA,
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        sys.stderr.write(json.dumps(error, indent=2) + "\n")
        return 1
    _emit(text, args.out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
