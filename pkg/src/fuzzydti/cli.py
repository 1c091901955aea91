"""Command-line front end.

Subcommands: `pipeline` runs every stage in order; the stage names
(normalize, candidates, reduce, score, balance, train, evaluate, sweep) run
one stage against an existing run directory; `synth` writes a synthetic
benchmark dataset plus a ready config.

Exit codes: 0 ok, 2 configuration problem, 3 ingest problem (missing or
malformed input data), 4 stage runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    DependencyError,
    FormatError,
    FuzzyDtiError,
    UnknownEntity,
)
from .io import load_config
from .pipeline import STAGES, Runner

log = logging.getLogger("fuzzydti")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_STAGE = 4

RUN_ROOT_ENV = "FUZZYDTI_RUN_ROOT"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="run configuration INI file")
    parser.add_argument("--run", default=None, help="run name (default: config file stem)")
    parser.add_argument("--seed", type=int, default=None, help="override the configured seed")
    parser.add_argument("--force", action="store_true", help="rerun even if artifacts are current")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for scoring")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzydti",
        description=(
            "Drug-target interaction prediction: shared-nearest-neighbour "
            "candidate generation, fuzzy-rough scoring, threshold balancing, "
            "and native classifiers."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_all = sub.add_parser("pipeline", help="run every stage in order")
    _add_common(run_all)

    for stage in STAGES:
        stage_parser = sub.add_parser(stage, help=f"run the {stage} stage")
        _add_common(stage_parser)
        if stage == "candidates":
            stage_parser.add_argument("--k-neighbors", type=int, default=None)
        if stage == "score":
            stage_parser.add_argument(
                "--kernel", choices=["linear", "gaussian", "triangular"], default=None
            )
        if stage == "balance":
            stage_parser.add_argument("--tp", type=float, default=None)
            stage_parser.add_argument("--tq", type=float, default=None)
            stage_parser.add_argument("--beta", type=float, default=None)
            stage_parser.add_argument("--adasyn-k", type=int, default=None)
        if stage in ("train", "evaluate"):
            stage_parser.add_argument(
                "--classifier", choices=["dt", "rf", "rusboost"], default=None
            )

    sweep = sub.add_parser("sweep", help="threshold sweep experiment")
    _add_common(sweep)
    sweep.add_argument("--thresholds", default=None, help="comma-separated threshold list")
    sweep.add_argument("--sweep-param", choices=["tq", "tp"], default=None)

    synth = sub.add_parser("synth", help="write a synthetic benchmark dataset")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--seed", type=int, default=7)
    synth.add_argument("--drugs", type=int, default=200)
    synth.add_argument("--targets", type=int, default=150)
    synth.add_argument("--interactions", type=int, default=300)
    return parser


def _overrides_from_args(args) -> dict:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    mapping = {
        "k_neighbors": "k_neighbors",
        "kernel": "similarity_kernel",
        "tp": "t_p",
        "tq": "t_q",
        "beta": "adasyn_beta",
        "adasyn_k": "adasyn_k",
        "classifier": "classifier",
        "sweep_param": "sweep_param",
    }
    for arg_name, cfg_name in mapping.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[cfg_name] = value
    return overrides


def _run_dir(args) -> Path:
    root = Path(os.environ.get(RUN_ROOT_ENV, "runs"))
    name = args.run or Path(args.config).stem
    return root / name


def _dispatch(args) -> int:
    if args.command == "synth":
        from .synthdata import make_planted_data, write_planted_data

        data = make_planted_data(
            n_drugs=args.drugs,
            n_targets=args.targets,
            n_interactions=args.interactions,
            seed=args.seed,
        )
        paths = write_planted_data(data, args.out)
        print(f"wrote {len(data.interactions)} interactions under {args.out}")
        print(f"config: {paths['config']}")
        return EXIT_OK

    cfg = load_config(args.config)
    overrides = _overrides_from_args(args)
    if overrides:
        cfg = cfg.with_overrides(**overrides)
    runner = Runner(cfg, _run_dir(args), jobs=args.jobs, force=args.force)
    if args.command == "pipeline":
        runner.run_pipeline()
        print(f"pipeline complete: {runner.run_dir}")
        return EXIT_OK
    if args.command == "sweep":
        thresholds = None
        if args.thresholds:
            thresholds = [float(t) for t in args.thresholds.split(",") if t.strip()]
        ran = runner.run_stage("sweep", thresholds=thresholds)
    else:
        ran = runner.run_stage(args.command)
    print(f"stage {args.command}: {'done' if ran else 'up to date'} ({runner.run_dir})")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    stage = getattr(args, "command", "?")
    try:
        return _dispatch(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (FormatError, UnknownEntity, FileNotFoundError) as exc:
        log.error("ingest error in %s: %s", stage, exc)
        return EXIT_INGEST
    except DependencyError as exc:
        log.error("stage %s: %s", stage, exc)
        return EXIT_STAGE
    except FuzzyDtiError as exc:
        log.error("stage %s failed: %s", stage, exc)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
