"""Command-line front end for dataset generation, sweeps and beam validation.

Every flag can also be supplied through a JSON config file (``--config``);
explicit flags win over config-file values, which win over the built-in
defaults.  Flag names map to config keys with dashes replaced by
underscores, e.g. ``--snr-db`` -> ``"snr_db"``.
"""

from __future__ import annotations

import argparse
import json
import sys

from xlsim.channel import ScenarioConfig
from xlsim.harness import (
    OverheadModel,
    SweepSpec,
    evaluate_dataset,
    export_dataset,
    export_results,
    import_results,
    sweep,
    validate_beams,
    METHODS,
    RESULT_COLUMNS,
    SAMPLE_COLUMNS,
)
from xlsim.precoding import LinkBudget

_DEFAULTS = {
    "seed": 0,
    "trials": 100,
    "snr_db": 10.0,
    "nq": 32,
    "nsub": 4,
    "na": 8,
    "users": 4,
    "paths": 3,
    "carrier_hz": 100e9,
    "tc_ms": 200.0,
    "slot_ms": 0.2,
    "pt": 1.0,
    "pilots": 0,
    "count": 1000,
    "format": "csv",
    "axis": "snr_db",
}


def _add_common(parser: argparse.ArgumentParser, *names: str) -> None:
    spec = {
        "config": dict(type=str, help="JSON config file; flags override its values"),
        "seed": dict(type=int, help="master seed"),
        "trials": dict(type=int, help="trials per grid point"),
        "snr-db": dict(type=float, dest="snr_db", help="operating SNR in dB (p_t / noise power)"),
        "nq": dict(type=int, help="codebook size"),
        "nsub": dict(type=int, help="number of subarrays"),
        "na": dict(type=int, help="antennas per subarray"),
        "users": dict(type=int, help="number of users"),
        "paths": dict(type=int, help="propagation paths per user"),
        "carrier-hz": dict(type=float, dest="carrier_hz", help="carrier frequency in Hz"),
        "tc-ms": dict(type=float, dest="tc_ms", help="coherence time in ms"),
        "slot-ms": dict(type=float, dest="slot_ms", help="pilot slot duration in ms"),
        "pt": dict(type=float, help="total transmit power"),
        "pilots": dict(type=int, help="pilot slots consumed by the beam producer"),
        "count": dict(type=int, help="number of samples"),
        "format": dict(type=str, choices=["csv", "jsonl"], help="output table format"),
        "out": dict(type=str, help="output file path"),
    }
    for name in names:
        parser.add_argument(f"--{name}", default=None, **spec[name])


def _merged(args: argparse.Namespace) -> dict:
    values = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - set(values) - {"methods", "grid", "out", "axis", "dataset", "beams", "method"}
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        values.update(file_values)
    for key, val in vars(args).items():
        if val is not None and key not in ("func", "config"):
            values[key] = val
    return values


def _scenario(v: dict) -> ScenarioConfig:
    return ScenarioConfig(
        n_sub=v["nsub"],
        n_a=v["na"],
        n_users=v["users"],
        n_paths=v["paths"],
        carrier_hz=v["carrier_hz"],
    )


def _overhead(v: dict) -> OverheadModel:
    return OverheadModel(coherence_time_s=v["tc_ms"] / 1e3, pilot_slot_s=v["slot_ms"] / 1e3)


def _link(v: dict) -> LinkBudget:
    return LinkBudget.from_snr_db(v["snr_db"], p_t=v["pt"])


def _cmd_generate_dataset(args):
    v = _merged(args)
    if not v.get("out"):
        raise SystemExit("--out is required")
    export_dataset(_scenario(v), v["count"], v["seed"], v["out"])
    print(f"wrote {v['count']} channel samples to {v['out']}")


def _cmd_sweep(args):
    v = _merged(args)
    if not v.get("out"):
        raise SystemExit("--out is required")
    if not v.get("grid") or not v.get("methods"):
        raise SystemExit("--grid and --methods are required (flag or config file)")
    grid = tuple(float(x) if v["axis"] == "snr_db" else int(x) for x in str(v["grid"]).split(","))
    methods = tuple(m.strip() for m in str(v["methods"]).split(","))
    spec = SweepSpec(
        axis=v["axis"],
        grid=grid,
        methods=methods,
        trials=v["trials"],
        scenario=_scenario(v),
        n_q=v["nq"],
        snr_db=v["snr_db"],
        p_t=v["pt"],
    )
    rows = sweep(spec, _overhead(v), v["seed"])
    export_results(rows, v["out"], v["format"], fieldnames=RESULT_COLUMNS)
    print(f"wrote {len(rows)} rows to {v['out']}")


def _cmd_evaluate(args):
    v = _merged(args)
    if not v.get("out"):
        raise SystemExit("--out is required")
    dataset = getattr(args, "dataset", None)
    if not dataset:
        raise SystemExit("--dataset is required")
    rows, summary = evaluate_dataset(dataset, args.method, _link(v), _overhead(v), v["nq"], seed=v["seed"])
    export_results(rows, v["out"], v["format"], fieldnames=SAMPLE_COLUMNS)
    print(json.dumps(summary))


def _cmd_validate_beams(args):
    v = _merged(args)
    if not v.get("out"):
        raise SystemExit("--out is required")
    rows, summary = validate_beams(
        args.dataset, args.beams, _link(v), _overhead(v), v["nq"], pilot_count=v["pilots"]
    )
    export_results(rows, v["out"], v["format"], fieldnames=SAMPLE_COLUMNS)
    print(json.dumps(summary))


def _cmd_export(args):
    v = _merged(args)
    if not v.get("out"):
        raise SystemExit("--out is required")
    rows = import_results(args.infile)
    fieldnames = tuple(rows[0].keys()) if rows else RESULT_COLUMNS
    export_results(rows, v["out"], v["format"], fieldnames=fieldnames)
    print(f"wrote {len(rows)} rows to {v['out']}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xlsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-dataset", help="draw channels and write a dataset file")
    _add_common(p, "config", "seed", "count", "nsub", "na", "users", "paths", "carrier-hz", "out")
    p.set_defaults(func=_cmd_generate_dataset)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over SNR or codebook size")
    p.add_argument("--axis", choices=["snr_db", "codebook_size"], default=None)
    p.add_argument("--grid", default=None, help="comma-separated grid values")
    p.add_argument("--methods", default=None, help=f"comma-separated subset of {sorted(METHODS)}")
    _add_common(
        p, "config", "seed", "trials", "snr-db", "nq", "nsub", "na", "users", "paths",
        "carrier-hz", "tc-ms", "slot-ms", "pt", "format", "out",
    )
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("evaluate", help="run one method on every sample of a dataset")
    p.add_argument("--method", required=True, choices=sorted(METHODS))
    p.add_argument("--dataset", required=True, help="channel dataset file")
    _add_common(p, "config", "seed", "snr-db", "nq", "tc-ms", "slot-ms", "pt", "format", "out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("validate-beams", help="score an external beam-index table on a dataset")
    p.add_argument("--dataset", required=True, help="channel dataset file")
    p.add_argument("--beams", required=True, help="beam-index CSV")
    _add_common(p, "config", "snr-db", "nq", "tc-ms", "slot-ms", "pt", "pilots", "format", "out")
    p.set_defaults(func=_cmd_validate_beams)

    p = sub.add_parser("export", help="re-emit a result table as csv or jsonl")
    p.add_argument("--in", dest="infile", required=True, help="input table (csv or jsonl)")
    _add_common(p, "config", "format", "out")
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
