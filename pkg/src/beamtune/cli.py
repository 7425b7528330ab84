"""Command-line experiment runner.

Subcommands: ``tune`` (Bayesian optimization), ``rs`` (random search),
``grad`` (finite-difference Adam), ``compare`` (paired BO-vs-RS report),
``oracle`` (grid-search ground truth) and ``report`` (re-summarize saved
histories).  With a fixed ``--seed`` every invocation writes byte-identical
files.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from .assets import default_system, load_assets
from .baselines import gradient_search, random_search
from .config import AppConfig, load_config
from .reporting import (
    compare,
    read_history_jsonl,
    run_oracle,
    summarize,
    write_comparison,
    write_history_jsonl,
    write_oracle_json,
    write_summary_csv,
)
from .synthetic import SyntheticBeamSystem
from .tuner import cbol_tune, default_objective, multi_run

__all__ = ["main"]

_SEARCHES = {"bo": cbol_tune, "rs": random_search, "grad": gradient_search}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamtune",
        description="classifier-pruned latent-space tuning on the synthetic beamline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=str, default=None, help="TOML config path")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument(
            "--iterations", type=int, default=None, help="evaluation budget per run"
        )
        p.add_argument("--runs", type=int, default=None, help="independent runs")
        p.add_argument(
            "--xi", type=float, default=None, help="expected-improvement margin"
        )
        p.add_argument(
            "--out", type=str, default="results", help="output directory"
        )

    for name, text in [
        ("tune", "run the Bayesian-optimization tuner"),
        ("rs", "run the random-search baseline"),
        ("grad", "run the gradient-search baseline"),
        ("compare", "run BO and RS at paired seeds and write the comparison"),
        ("oracle", "compute the grid-search ground-truth optimum"),
        ("report", "summarize history files already in the output directory"),
    ]:
        p = sub.add_parser(name, help=text)
        add_common(p)
        if name == "compare":
            p.add_argument(
                "--grad",
                action="store_true",
                help="include the gradient baseline in the comparison",
            )
        if name == "oracle":
            p.add_argument(
                "--resolution",
                type=int,
                default=10000,
                help="grid points per coordinate",
            )
    return parser


def _resolve_config(args) -> AppConfig:
    cfg = load_config(args.config) if args.config else AppConfig()
    return cfg.override(
        seed=args.seed, iterations=args.iterations, runs=args.runs, xi=args.xi
    )


def _resolve_system(cfg: AppConfig) -> SyntheticBeamSystem:
    if cfg.asset_path is not None:
        return SyntheticBeamSystem(load_assets(cfg.asset_path))
    return default_system()


def _run_method(cfg: AppConfig, system, method: str):
    objective = default_objective(system, cfg.weights, cfg.reference_intensity)
    if method == "bo":
        return multi_run(cfg.tuner_config(), system, objective)
    return multi_run(
        cfg.baseline_config(), system, objective, search=_SEARCHES[method]
    )


def _cmd_search(args, method: str) -> int:
    cfg = _resolve_config(args)
    system = _resolve_system(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = _run_method(cfg, system, method)
    for result in results:
        path = out / f"{method}_run{result.run_index:03d}.jsonl"
        write_history_jsonl(result, path)
        print(f"wrote {path}")
    summary_path = out / "summary.csv"
    write_summary_csv([summarize(results, method)], summary_path)
    print(f"wrote {summary_path}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _resolve_config(args)
    system = _resolve_system(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bo = summarize(_run_method(cfg, system, "bo"), "bo")
    rs = summarize(_run_method(cfg, system, "rs"), "rs")
    grad = summarize(_run_method(cfg, system, "grad"), "grad") if args.grad else None
    report = compare(bo, rs, grad)
    csv_path = out / "comparison.csv"
    text_path = out / "comparison.txt"
    write_comparison(report, csv_path, text_path)
    print(f"wrote {csv_path}")
    print(f"wrote {text_path}")
    return 0


def _cmd_oracle(args) -> int:
    cfg = _resolve_config(args)
    system = _resolve_system(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reference = cfg.reference_intensity
    if reference is None:
        reference = system.payload["objective"]["reference_intensity"]
    oracle = run_oracle(
        system, cfg.weights, cfg.bounds, reference, resolution=args.resolution
    )
    path = out / "oracle.json"
    write_oracle_json(oracle, path)
    print(f"wrote {path}")
    return 0


def _cmd_report(args) -> int:
    out = Path(args.out)
    stats = []
    for method in ("bo", "rs", "grad"):
        files = sorted(out.glob(f"{method}_run*.jsonl"))
        if not files:
            continue
        results = [read_history_jsonl(f, i) for i, f in enumerate(files)]
        stats.append(summarize(results, method))
    if not stats:
        print(f"no history files found in {out}")
        return 1
    summary_path = out / "summary.csv"
    write_summary_csv(stats, summary_path)
    print(f"wrote {summary_path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command in ("tune", "rs", "grad"):
        method = {"tune": "bo", "rs": "rs", "grad": "grad"}[args.command]
        return _cmd_search(args, method)
    if args.command == "compare":
        return _cmd_compare(args)
    if args.command == "oracle":
        return _cmd_oracle(args)
    return _cmd_report(args)


if __name__ == "__main__":
    raise SystemExit(main())
