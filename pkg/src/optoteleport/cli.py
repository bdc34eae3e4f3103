"""Command-line front end.

Runs the teleportation scenarios from flags or a JSON config file and writes
a machine-readable manifest (JSON) plus result tables (CSV).  Flags override
config-file values; every default is echoed into the manifest so a run can be
reproduced bit-identically from its own output.

Exit codes: 0 success, 2 configuration error, 3 cutoff violation,
4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .fock import CutoffError, Ensemble, ket_string
from .detection import InvariantError, OutcomeClass
from .protocol import (
    ConfigError,
    LossScenario,
    ProtocolConfig,
    TeleportReport,
    run_ideal,
    run_thermal,
    run_thermal_tms,
    run_wcs,
    run_with_loss,
)
from .analysis import (
    CLASSICAL_FIDELITY_BOUND,
    fidelity_curve,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CUTOFF = 3
EXIT_INVARIANT = 4

_OUTCOME_ORDER = (
    OutcomeClass.M_PLUS,
    OutcomeClass.M_MINUS,
    OutcomeClass.SAME_POL_DISCARD,
    OutcomeClass.NOT_HERALD,
)


def _fmt(value) -> str:
    """Deterministic 12-significant-digit formatting for CSV cells."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _jsonify(obj):
    if isinstance(obj, dict):
        return {_json_key(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, Ensemble):
        return [[w, ket_string(s, digits=12)] for w, s in obj.branches]
    if isinstance(obj, OutcomeClass):
        return obj.value
    if isinstance(obj, complex):
        return obj.real if obj.imag == 0.0 else [obj.real, obj.imag]
    if hasattr(obj, "registry") and hasattr(obj, "items"):
        return ket_string(obj, digits=12)
    return obj


def _json_key(key):
    if isinstance(key, tuple):
        return ",".join(str(k) for k in key)
    if isinstance(key, OutcomeClass):
        return key.value
    return str(key)


def _write_outputs(prefix: str, manifest: dict, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    prefix_path = Path(prefix)
    if prefix_path.parent != Path("."):
        prefix_path.parent.mkdir(parents=True, exist_ok=True)
    manifest_path = prefix_path.with_name(prefix_path.name + ".manifest.json")
    csv_path = prefix_path.with_name(prefix_path.name + ".results.csv")
    with open(manifest_path, "w", newline="\n") as fh:
        json.dump(_jsonify(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    with open(csv_path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {manifest_path} and {csv_path}")


def _outcome_rows(report: TeleportReport, lead: Sequence = ()) -> list[list]:
    rows = []
    for cls in _OUTCOME_ORDER:
        summary = report.outcomes[cls]
        conditional = None
        if summary.weight > 0.0 and summary.conditional.num_branches == 1:
            conditional = ket_string(summary.conditional.branches[0][1], digits=12)
        rows.append(
            list(lead)
            + [cls.value, summary.weight, summary.fidelity, summary.p_add, conditional]
        )
    return rows


def _results_block(report: TeleportReport) -> dict:
    out = {}
    for cls in _OUTCOME_ORDER:
        summary = report.outcomes[cls]
        out[cls.value] = {
            "weight": summary.weight,
            "fidelity": summary.fidelity,
            "p_add": summary.p_add,
            "conditional": summary.conditional,
        }
    return out


def _manifest(report: TeleportReport, command: str, cli_extras: dict) -> dict:
    return {
        "scenario": report.scenario,
        "engine_version": __version__,
        "config": report.config.to_dict(),
        "cli": {"command": command, **cli_extras},
        "results": _results_block(report),
        "details": report.details,
    }


# --------------------------------------------------------------- arg parsing

def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, help="JSON config file or a previous manifest")
    parser.add_argument("--out", type=str, default=None, help="output prefix (default: scenario name)")
    parser.add_argument("--theta", type=float, default=None)
    parser.add_argument("--phi", type=float, default=None)
    parser.add_argument("--nbar", type=float, default=None)
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--T-nd", dest="T_nd", type=float, default=None)
    parser.add_argument("--T-det", dest="T_det", type=float, default=None)
    parser.add_argument("--p-dark", dest="p_dark", type=float, default=None)
    parser.add_argument("--n-max", dest="n_max", type=int, default=None)
    parser.add_argument("--model", choices=("paper", "full_tms"), default=None)
    parser.add_argument("--thermal-order", dest="thermal_order", type=int, choices=(1, 2), default=None)
    parser.add_argument("--thermal-norm", dest="thermal_norm", choices=("paper", "renorm"), default=None)


def _load_config(args: argparse.Namespace) -> tuple[ProtocolConfig, dict]:
    """Merge defaults, config file and flags; returns (config, file CLI extras)."""
    data: dict = {}
    cli_extras: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        if "config" in raw:  # a previous manifest
            data = dict(raw["config"])
            cli_extras = dict(raw.get("cli", {}))
        else:
            data = dict(raw)
    flag_map = {
        "theta": "theta",
        "phi": "phi",
        "nbar": "nbar",
        "alpha": "alpha",
        "beta": "beta",
        "T_nd": "T_nd",
        "T_det": "T_det",
        "p_dark": "p_dark",
        "n_max": "n_max",
        "model": "model",
        "thermal_order": "thermal_order",
        "thermal_norm": "thermal_norm",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            data[key] = value
    return ProtocolConfig.from_dict(data), cli_extras


# ----------------------------------------------------------------- commands

def _cmd_ideal(args) -> int:
    config, _ = _load_config(args)
    report = run_ideal(config)
    header = ["outcome", "weight", "fidelity", "p_add", "conditional"]
    rows = _outcome_rows(report)
    _write_outputs(args.out or "ideal", _manifest(report, "ideal", {}), header, rows)
    return EXIT_OK


def _cmd_thermal(args) -> int:
    config, _ = _load_config(args)
    report = run_thermal_tms(config) if config.model == "full_tms" else run_thermal(config)
    header = [
        "nbar", "s", "thermal_order", "thermal_norm",
        "outcome", "weight", "fidelity", "p_add", "conditional",
    ]
    s = config.nbar / (config.nbar + 1.0)
    rows = _outcome_rows(report, lead=[config.nbar, s, config.thermal_order, config.thermal_norm])
    _write_outputs(args.out or "thermal", _manifest(report, "thermal", {}), header, rows)
    return EXIT_OK


def _cmd_wcs(args) -> int:
    config, _ = _load_config(args)
    report = run_wcs(config)
    header = [
        "n_blue", "n_res", "sector_weight",
        "mplus_weight", "mminus_weight", "samepol_weight", "noherald_weight",
    ]
    rows = []
    for (n_b, n_r), sector in sorted(report.details["sectors"].items()):
        cw = sector["class_weights"]
        rows.append([
            n_b, n_r, sector["weight"],
            cw[OutcomeClass.M_PLUS], cw[OutcomeClass.M_MINUS],
            cw[OutcomeClass.SAME_POL_DISCARD], cw[OutcomeClass.NOT_HERALD],
        ])
    _write_outputs(args.out or "wcs", _manifest(report, "wcs", {}), header, rows)
    return EXIT_OK


def _parse_grid(spec: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"grid must be start:stop:step, got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise ConfigError("grid needs step > 0 and stop >= start")
    values = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-12:
            break
        values.append(round(value, 12))
        k += 1
    if not values:
        raise ConfigError("empty grid")
    return values


def _cmd_loss(args) -> int:
    config, extras = _load_config(args)
    scenario = LossScenario(args.scenario or extras.get("scenario", "nondetection"))
    grid_spec = args.T_grid or extras.get("T_grid")
    single_t = args.T if args.T is not None else extras.get("T")
    ts = _parse_grid(grid_spec) if grid_spec else [single_t if single_t is not None else 0.5]

    header = ["scenario", "T", "outcome", "weight", "fidelity", "p_add", "conditional"]
    rows = []
    last_report = None
    for t in ts:
        if scenario is LossScenario.DETECTION:
            run_config = replace(config, t_det=t, t_nd=1.0)
        else:
            run_config = replace(config, t_nd=t, t_det=1.0)
        report = run_with_loss(run_config, scenario)
        last_report = report
        for row in _outcome_rows(report, lead=[scenario.value, t]):
            rows.append(row)
    extras_out = {"scenario": scenario.value}
    if grid_spec:
        extras_out["T_grid"] = grid_spec
    else:
        extras_out["T"] = ts[0]
    _write_outputs(args.out or "loss", _manifest(last_report, "loss", extras_out), header, rows)
    return EXIT_OK


def _cmd_curve(args) -> int:
    config, extras = _load_config(args)
    start = args.start if args.start is not None else float(extras.get("start", 0.0))
    stop = args.stop if args.stop is not None else float(extras.get("stop", 0.5))
    step = args.step if args.step is not None else float(extras.get("step", 0.01))
    if step <= 0 or stop < start:
        raise ConfigError("curve needs step > 0 and stop >= start")
    grid = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-12:
            break
        grid.append(round(value, 12))
        k += 1
    if not grid:
        raise ConfigError("empty curve range")

    points = fidelity_curve(grid, theta=config.theta, n_max=config.n_max)
    header = ["nbar", "F_order2", "F_order1", "Padd_order2", "Padd_order1", "F_sim", "threshold_line"]
    rows = [
        [p.nbar, p.f_order2, p.f_order1, p.p_add_order2, p.p_add_order1, p.f_sim, CLASSICAL_FIDELITY_BOUND]
        for p in points
    ]
    manifest = {
        "scenario": "curve",
        "engine_version": __version__,
        "config": config.to_dict(),
        "cli": {"command": "curve", "start": start, "stop": stop, "step": step},
        "results": {
            "rows": [dict(zip(header, row)) for row in rows],
            "threshold_line": CLASSICAL_FIDELITY_BOUND,
        },
        "details": {},
    }
    _write_outputs(args.out or "curve", manifest, header, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleport",
        description="Pulsed optomechanical teleportation scenarios on a sparse Fock-space engine.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ideal = sub.add_parser("ideal", help="single-photon sources, ground-state memories, no loss")
    _add_config_flags(p_ideal)
    p_ideal.set_defaults(func=_cmd_ideal)

    p_thermal = sub.add_parser("thermal", help="thermal initial memory occupation")
    _add_config_flags(p_thermal)
    p_thermal.set_defaults(func=_cmd_thermal)

    p_wcs = sub.add_parser("wcs", help="weak-coherent-state pump and input pulses")
    _add_config_flags(p_wcs)
    p_wcs.set_defaults(func=_cmd_wcs)

    p_loss = sub.add_parser("loss", help="propagation / detection loss scenarios")
    _add_config_flags(p_loss)
    p_loss.add_argument("--scenario", choices=[s.value for s in LossScenario], default=None)
    p_loss.add_argument("--T", type=float, default=None, help="transmittance of the lossy element")
    p_loss.add_argument("--T-grid", dest="T_grid", type=str, default=None, help="start:stop:step sweep")
    p_loss.set_defaults(func=_cmd_loss)

    p_curve = sub.add_parser("curve", help="heralded fidelity vs thermal occupation table")
    _add_config_flags(p_curve)
    p_curve.add_argument("--start", type=float, default=None)
    p_curve.add_argument("--stop", type=float, default=None)
    p_curve.add_argument("--step", type=float, default=None)
    p_curve.set_defaults(func=_cmd_curve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CutoffError as exc:
        print(f"cutoff violation: {exc}", file=sys.stderr)
        return EXIT_CUTOFF
    except InvariantError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
