"""Command-line front end.

Subcommands:

``analyze``     thresholds, split-averaged model AICs and a full-data pass
``discretize``  thresholds only
``simulate``    the three-case synthetic study

Each run writes its outputs plus ``manifest.json`` to ``--out-dir``;
passing the manifest back as ``--config`` repeats the run exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .datagen import run_simulation_study
from .discretize import HISTOGRAM_ASSUMPTIONS, best_equal_width_histogram
from .ingest import InputError, RunConfig, load_csv, prepare, read_config
from .pipeline import (
    CONTINUOUS,
    AggregateResult,
    Dataset,
    final_binarize,
    full_data_scores,
    is_finite_result,
    run_analysis,
)
from .report import dumps, emit_dot, emit_report, emit_simulation_report

log = logging.getLogger("catdapbin")

DEFAULT_SIMULATION_SEED = 1

AIC_NOTES = [
    "AIC is on the CATDAP scale: the model without predictors scores 0",
    "AIC(total) adds the absolute AIC of the response marginal",
]


class InvariantViolation(RuntimeError):
    """Internal consistency check failed; exit code 2."""


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(out_dir: Path, name: str, payload: bytes | str) -> None:
    if isinstance(payload, str):
        payload = payload.encode("utf-8")
    (out_dir / name).write_bytes(payload)


def _check(result: AggregateResult, cfg: RunConfig) -> None:
    if not is_finite_result(result):
        raise InvariantViolation(f"non-finite AIC for response {result.response!r}")
    if result.aics[0] != 0.0:
        raise InvariantViolation("the no-predictor model must score exactly 0")
    for name, value in result.thresholds.items():
        rng = cfg.columns[name].range
        if name != result.response and rng and not rng[0] < value < rng[1]:
            raise InvariantViolation(f"threshold for {name!r} left its range")


def _load(args, cfg: RunConfig) -> tuple[Dataset, RunConfig]:
    data_path = Path(args.data)
    dataset = load_csv(data_path, cfg.columns)
    dataset, resolved = prepare(dataset, cfg.columns)
    return dataset, dataclasses.replace(cfg, columns=resolved)


def _config(args) -> RunConfig:
    cfg = read_config(args.config)
    overrides = {
        "seed": args.seed,
        "iterations": args.iterations,
        "grid_size": args.grid_size,
    }
    doc = cfg.to_dict()
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "aic_margin", None) is not None:
        doc["aic_margin"] = args.aic_margin
    cfg = RunConfig.from_dict(doc)
    for name in cfg.extra_responses:
        if cfg.columns[name].kind == CONTINUOUS and name not in cfg.predictors:
            raise InputError(
                f"continuous response {name!r} must also be a predictor of "
                f"{cfg.response!r} so that it has a threshold"
            )
    return cfg


def _manifest(command: str, cfg_doc: dict, inputs: dict) -> bytes:
    return dumps(
        {
            "software": "catdapbin",
            "version": __version__,
            "command": command,
            "inputs": inputs,
            "config": cfg_doc,
        }
    )


def _metadata(cfg: RunConfig) -> dict:
    return {
        "version": __version__,
        "seed": cfg.seed,
        "iterations": cfg.iterations,
        "grid_size": cfg.grid_size,
        "notes": AIC_NOTES,
    }


def cmd_analyze(args) -> int:
    cfg = _config(args)
    dataset, cfg = _load(args, cfg)
    primary = run_analysis(dataset, cfg.analysis_config(dataset, cfg.response, args.workers))
    _check(primary, cfg)
    split_results = [primary]
    for name in cfg.extra_responses:
        fixed = {}
        if dataset.kinds[name] == CONTINUOUS:
            fixed[name] = primary.thresholds[name]
        result = run_analysis(dataset, cfg.analysis_config(dataset, name, args.workers, fixed))
        _check(result, cfg)
        split_results.append(result)

    analysed = [cfg.response, *cfg.predictors]
    subset = Dataset(
        {n: dataset.columns[n] for n in analysed},
        {n: dataset.kinds[n] for n in analysed},
    )
    categorical = final_binarize(subset, primary)
    full_results = []
    for result in split_results:
        full = full_data_scores(categorical, result.response, result.predictors)
        full_results.append(dataclasses.replace(full, thresholds=dict(primary.thresholds)))

    results = split_results + full_results
    metadata = _metadata(cfg)
    text = emit_report(results, "text", metadata)
    dot_source = full_results if args.dot_source == "full-data" else split_results
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "report.txt", text)
    _write(out, "report.json", emit_report(results, "json", metadata))
    _write(out, "associations.dot", emit_dot(dot_source, cfg.aic_margin))
    _write(out, "manifest.json", _manifest(
        "analyze", cfg.to_dict(),
        {"data": str(args.data), "sha256": _sha256(Path(args.data))},
    ))
    sys.stdout.write(text.decode("utf-8"))
    return 0


def cmd_discretize(args) -> int:
    cfg = _config(args)
    dataset, cfg = _load(args, cfg)
    result = run_analysis(dataset, cfg.analysis_config(dataset, cfg.response, args.workers))
    _check(result, cfg)
    doc = {
        "format": "catdapbin.thresholds/1",
        "metadata": _metadata(cfg),
        "response": cfg.response,
        "thresholds": {k: float(v) for k, v in result.thresholds.items()},
    }
    lines = [f"{k}\t{v:.6g}" for k, v in result.thresholds.items()]
    if args.histogram:
        doc["metadata"]["histogram_assumptions"] = HISTOGRAM_ASSUMPTIONS
        doc["histogram"] = {}
        for name in result.thresholds:
            c_best, edges, _ = best_equal_width_histogram(dataset.columns[name], args.histogram)
            doc["histogram"][name] = {"sections": c_best, "edges": [float(e) for e in edges]}
            lines.append(f"{name}\thistogram sections: {c_best}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "thresholds.json", dumps(doc))
    _write(out, "manifest.json", _manifest(
        "discretize", cfg.to_dict(),
        {"data": str(args.data), "sha256": _sha256(Path(args.data))},
    ))
    print("\n".join(lines))
    return 0


def cmd_simulate(args) -> int:
    doc = read_manifest_config(args.config) if args.config else {}
    seed = _first(args.seed, doc.get("seed"), DEFAULT_SIMULATION_SEED)
    iterations = _first(args.iterations, doc.get("iterations"), 1000)
    grid_size = _first(args.grid_size, doc.get("grid_size"), 100)
    if iterations < 1 or grid_size < 1:
        raise InputError("iterations and grid size must be positive")
    study = run_simulation_study(seed, iterations, grid_size, args.workers)
    for outcome in study.cases:
        if outcome.result.aics[0] != 0.0:
            raise InvariantViolation("the no-predictor model must score exactly 0")
    metadata = {"version": __version__, "notes": AIC_NOTES}
    text = emit_simulation_report(study, "text", metadata)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out, "simulation.txt", text)
    _write(out, "simulation.json", emit_simulation_report(study, "json", metadata))
    _write(out, "manifest.json", _manifest(
        "simulate", {"seed": seed, "iterations": iterations, "grid_size": grid_size}, {},
    ))
    sys.stdout.write(text.decode("utf-8"))
    return 0


def _first(*values):
    return next(v for v in values if v is not None)


def read_manifest_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return doc.get("config", doc)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master random seed")
    common.add_argument("--iterations", type=int, help="number of random half-splits")
    common.add_argument("--grid-size", type=int, help="threshold grid points per variable")
    common.add_argument("--workers", type=int, default=1, help="threads for iterations")
    common.add_argument("--out-dir", default="results", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="catdapbin", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[common], help="full analysis of a CSV file")
    analyze.add_argument("data", help="CSV file with a header row")
    analyze.add_argument("--config", required=True, help="JSON config or a previous manifest")
    analyze.add_argument("--aic-margin", type=float, help="dashed-edge AIC margin")
    analyze.add_argument(
        "--dot-source", choices=("full-data", "split-average"), default="full-data",
        help="which AICs drive the diagram",
    )
    analyze.set_defaults(func=cmd_analyze)

    disc = sub.add_parser("discretize", parents=[common], help="optimum thresholds only")
    disc.add_argument("data")
    disc.add_argument("--config", required=True)
    disc.add_argument(
        "--histogram", type=int, metavar="C_MAX",
        help="also report the equal-width histogram baseline up to C_MAX sections",
    )
    disc.set_defaults(func=cmd_discretize)

    sim = sub.add_parser("simulate", parents=[common], help="run the synthetic study")
    sim.add_argument("--config", help="previous simulate manifest")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.workers < 1:
        parser.error("--workers must be positive")
    try:
        return args.func(args)
    except InvariantViolation as exc:
        log.error("internal check failed: %s", exc)
        return 2
    except (InputError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    except Exception:  # noqa: BLE001
        log.exception("unexpected failure")
        return 2


if __name__ == "__main__":
    sys.exit(main())
