"""Command-line entry point: run, compare, report, serve.

Exit codes: 0 success, 1 mid-run failure (partial artifacts flagged in
run_status.json), 2 invalid configuration or arguments (field-level
diagnostics on stderr).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import snapshot
from .config import RunConfig, build_run, load_run_config
from .core import ConfigError
from . import persist
from .persist import (
    ARCHIVE_FILE,
    COMPARISON_FILE,
    LINEAGE_FILE,
    METRICS_FILE,
    STATUS_FILE,
)

__all__ = ["main"]


def _print_problems(exc: ConfigError) -> None:
    print("invalid configuration:", file=sys.stderr)
    for field, msg in exc.problems:
        print(f"  {field}: {msg}", file=sys.stderr)


def _parse_axes(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("axes must be two comma-separated indices, e.g. 0,1")
    return int(parts[0]), int(parts[1])


def _parse_seeds(text: str) -> list[int]:
    """Seed lists accept commas and inclusive ranges: "1,2,5-8"."""
    seeds: list[int] = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "-" in chunk[1:]:
            lo_text, hi_text = chunk.split("-", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise ValueError(f"bad seed range: {chunk}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(chunk))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def _default_out(config: RunConfig) -> str:
    domain = config.domain.get("name", "domain")
    return f"runs/{config.engine.algorithm}_{domain}_s{config.seed}"


def _run_overrides(args) -> dict:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.budget is not None:
        overrides["budget"] = args.budget
    if args.out is not None:
        overrides["out"] = args.out
    return overrides


def _cmd_run(args) -> int:
    try:
        config = load_run_config(args.config, _run_overrides(args))
    except ConfigError as exc:
        _print_problems(exc)
        return 2
    try:
        axes = _parse_axes(args.axes)
    except ValueError as exc:
        print(f"invalid --axes: {exc}", file=sys.stderr)
        return 2

    domain, engine = build_run(config)
    dims = domain.descriptor_dims
    bad_axes = [ax for ax in axes if not 0 <= ax < dims]
    if bad_axes:
        print(
            f"invalid --axes: axis {bad_axes[0]} out of range for "
            f"{dims} descriptor dimensions",
            file=sys.stderr,
        )
        return 2
    if axes[0] == axes[1]:
        print("invalid --axes: axes must be distinct", file=sys.stderr)
        return 2

    out_dir = Path(config.out_dir or _default_out(config))
    out_dir.mkdir(parents=True, exist_ok=True)
    persist.write_meta(out_dir, config.to_dict())
    cadence = config.report_cadence

    def checkpoint(eng):
        if cadence > 0 and eng.generation % cadence == 0:
            persist.write_metrics(out_dir / METRICS_FILE, eng)
            persist.write_report_files(out_dir, snapshot(eng), axes)

    try:
        engine.run(callback=checkpoint)
    except Exception as exc:  # noqa: BLE001 - mid-run failures must flag partials
        artifacts = [persist.META_FILE]
        persist.write_archive(out_dir / ARCHIVE_FILE, engine)
        persist.write_metrics(out_dir / METRICS_FILE, engine)
        persist.write_lineage(out_dir / LINEAGE_FILE, engine)
        artifacts += [ARCHIVE_FILE, METRICS_FILE, LINEAGE_FILE]
        persist.write_status(out_dir, "failed", error=str(exc), artifacts=artifacts)
        print(f"run failed after {engine.evaluations} evaluations: {exc}", file=sys.stderr)
        print(f"partial artifacts flagged in {out_dir / STATUS_FILE}", file=sys.stderr)
        return 1

    report = snapshot(engine)
    persist.write_archive(out_dir / ARCHIVE_FILE, engine)
    persist.write_metrics(out_dir / METRICS_FILE, engine)
    persist.write_lineage(out_dir / LINEAGE_FILE, engine)
    artifacts = [persist.META_FILE, ARCHIVE_FILE, METRICS_FILE, LINEAGE_FILE]
    artifacts += persist.write_report_files(out_dir, report, axes)
    if not args.no_figures:
        from . import plots

        plots.heatmap_figure(report, out_dir / plots.HEATMAP_PNG, axes)
        plots.metrics_figure(engine.metrics, out_dir / plots.METRICS_PNG)
        artifacts += [plots.HEATMAP_PNG, plots.METRICS_PNG]
    persist.write_status(out_dir, "complete", artifacts=artifacts)
    print(
        f"run complete: algorithm={config.engine.algorithm} seed={config.seed} "
        f"generations={engine.generation} evaluations={engine.evaluations} "
        f"coverage={report.coverage:.4f} qd_score={report.qd_score:.4f} "
        f"best_fitness={report.best_fitness:.4f}"
    )
    print(f"artifacts in {out_dir}")
    return 0


def _cmd_compare(args) -> int:
    try:
        seeds = _parse_seeds(args.seeds)
    except ValueError as exc:
        print(f"invalid --seeds: {exc}", file=sys.stderr)
        return 2

    configs: list[tuple[str, RunConfig]] = []
    failed = False
    for path in args.config:
        try:
            overrides = {"budget": args.budget} if args.budget is not None else {}
            configs.append((path, load_run_config(path, overrides)))
        except ConfigError as exc:
            print(f"{path}:", file=sys.stderr)
            _print_problems(exc)
            failed = True
    if failed:
        return 2

    first_path, first = configs[0]
    for path, config in configs[1:]:
        if config.domain != first.domain:
            print(
                f"configs must share a domain: {path} differs from {first_path}",
                file=sys.stderr,
            )
            return 2
        if config.engine.budget != first.engine.budget:
            print(
                f"configs must share a budget: {path} differs from {first_path}",
                file=sys.stderr,
            )
            return 2

    results = []
    for _, config in configs:
        for seed in seeds:
            domain, engine = build_run(
                RunConfig(
                    domain=config.domain,
                    engine=config.engine,
                    seed=seed,
                    report_cadence=0,
                )
            )
            engine.run()
            results.append(
                {
                    "algorithm": config.engine.algorithm,
                    "seed": seed,
                    "coverage": engine.coverage(),
                    "qd_score": engine.qd_score(),
                    "best_fitness": engine.best_fitness,
                }
            )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    persist.write_comparison(out_dir / COMPARISON_FILE, results)
    if not args.no_figures:
        from . import plots

        plots.comparison_figure(results, out_dir / plots.COMPARISON_PNG)

    header = f"{'algorithm':<10} {'seed':>6} {'coverage':>9} {'qd_score':>10} {'best':>7}"
    print(header)
    for row in persist.comparison_rows(results):
        print(
            f"{row['algorithm']:<10} {str(row['seed']):>6} "
            f"{row['coverage']:>9.4f} {row['qd_score']:>10.3f} "
            f"{row['best_fitness']:>7.4f}"
        )
    print(f"table written to {out_dir / COMPARISON_FILE}")
    return 0


def _cmd_report(args) -> int:
    run_dir = Path(args.run)
    report_path = run_dir / persist.REPORT_FILE
    if not report_path.exists():
        print(f"no {persist.REPORT_FILE} in {run_dir}", file=sys.stderr)
        return 2
    try:
        axes = _parse_axes(args.axes)
        report = persist.load_report(report_path)
        persist.write_report_files(run_dir, report, axes)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"cannot rebuild report: {exc}", file=sys.stderr)
        return 2
    if not args.no_figures:
        from . import plots

        plots.heatmap_figure(report, run_dir / plots.HEATMAP_PNG, axes)
        metrics_path = run_dir / METRICS_FILE
        if metrics_path.exists():
            plots.metrics_figure(persist.load_jsonl(metrics_path), run_dir / plots.METRICS_PNG)
    print(
        f"report refreshed: generation={report.generation} "
        f"coverage={report.coverage:.4f} qd_score={report.qd_score:.4f} "
        f"axes={axes[0]},{axes[1]}"
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="illuminate",
        description="Quality-diversity search engines for procedural content.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("--config", required=True, help="JSON run config path")
    p_run.add_argument("--seed", type=int, default=None, help="override master seed")
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.add_argument("--budget", type=int, default=None, help="override evaluation budget")
    p_run.add_argument("--axes", default="0,1", help="heatmap axes, e.g. 0,1")
    p_run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run several configs over shared seeds")
    p_cmp.add_argument(
        "--config", action="append", required=True, help="repeatable config path"
    )
    p_cmp.add_argument("--seeds", required=True, help='seed list, e.g. "1,2,5-8"')
    p_cmp.add_argument("--out", default="compare", help="output directory")
    p_cmp.add_argument("--budget", type=int, default=None, help="override budget for all configs")
    p_cmp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_cmp.set_defaults(func=_cmd_compare)

    p_rep = sub.add_parser("report", help="re-render report artifacts for a finished run")
    p_rep.add_argument("--run", required=True, help="run directory")
    p_rep.add_argument("--axes", default="0,1", help="heatmap axes, e.g. 0,1")
    p_rep.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_rep.set_defaults(func=_cmd_report)

    p_srv = sub.add_parser("serve", help="serve the steering HTTP interface")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--ui", default=None, help="static directory to mount at /")
    p_srv.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
