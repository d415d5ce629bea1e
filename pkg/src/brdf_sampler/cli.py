"""Command line entry point: ``brdf-sampler run|ingest|strategies``.

``run`` writes ``report.json`` (schema 1), ``curves.csv`` and one
``points_<strategy>_<budget>.csv`` per strategy and budget into the output
directory. Exit status is 0 on success, 2 for an invalid config or input
file and 1 for failures while running (including inadmissible strategies).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, load
from .csvio import SampleCsvError, dumps_measurements, ingest
from .efficiency import (
    InadmissibleError,
    check_plan_admissibility,
    compare_strategies,
    curve_for,
    select_best_strategy,
)
from .sampling import list_strategies

REPORT_SCHEMA = 1
CURVE_HEADER = ("strategy", "budget", "n", "error", "stderr", "cost", "flagged", "ratio")


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        self.stage = stage
        super().__init__(f"{stage}: {exc}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def curves_csv(curves: dict) -> str:
    """Curves as CSV; ``ratio`` is each error over the last strategy's error."""
    labels = list(curves)
    ref = curves[labels[-1]]
    lines = [",".join(CURVE_HEADER)]
    for lab in labels:
        for p, r in zip(curves[lab], ref):
            ratio = p.error / r.error if r.error > 0 else None
            lines.append(",".join([lab, _fmt(p.budget), _fmt(p.n), _fmt(p.error), _fmt(p.stderr), _fmt(p.cost), _fmt(p.flagged), _fmt(ratio)]))
    return "\n".join(lines) + "\n"


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def execute(cfg: ExperimentConfig):
    """Run the configured experiment; returns ``(report dict, curves, cells)``."""
    plan = cfg.plan
    cells = {}
    if cfg.mode == "curve":
        s = plan.strategies[0]
        try:
            adm, _ = check_plan_admissibility(plan, s)
        except ValueError as exc:
            raise StageError("admissibility", exc) from None
        if not adm.admissible:
            raise InadmissibleError(f"strategy {s.label} violates the cost majorant (first violation at budget {adm.first_violation})")
        sub = []
        try:
            curve = curve_for(plan, s, sub)
        except ValueError as exc:
            raise StageError("error curve", exc) from None
        cells[0] = sub
        curves = {s.label: curve}
        report = {
            "kind": "curve",
            "strategy": s.describe(),
            "curve": [p.to_dict() for p in curve],
            "admissibility": [adm.to_dict()],
            "plan": plan.describe(),
        }
    elif cfg.mode == "compare":
        try:
            rep = compare_strategies(plan, cells)
        except ValueError as exc:
            raise StageError("comparison", exc) from None
        curves = {plan.strategies[0].label: rep.curve1, plan.strategies[1].label: rep.curve2}
        report = rep.to_dict()
    else:
        try:
            res = select_best_strategy(plan, cells)
        except ValueError as exc:
            raise StageError("selection", exc) from None
        curves = res.curves
        report = res.to_dict()
    report = {"schema": REPORT_SCHEMA, "version": __version__, **report}
    return _json_safe(report), curves, cells


def write_outputs(cfg: ExperimentConfig, report, curves, cells, out: Path) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    if "json" in cfg.formats:
        files["report.json"] = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if "csv" in cfg.formats:
        files["curves.csv"] = curves_csv(curves)
    if cfg.points:
        for k, sub in sorted(cells.items()):
            label = cfg.plan.strategies[k].label
            for cell in sub:
                files[f"points_{label}_{cell.budget}.csv"] = dumps_measurements(cell.measurements)
    for name, text in files.items():
        (out / name).write_text(text, newline="")
    return list(files)


def cmd_run(args) -> int:
    try:
        cfg = load(args.config, seed=args.seed, replicates=args.replicates, output_dir=args.out)
    except ConfigError as exc:
        print(f"brdf-sampler: invalid config: {exc}", file=sys.stderr)
        return 2
    try:
        report, curves, cells = execute(cfg)
    except InadmissibleError as exc:
        print(f"brdf-sampler: admissibility: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"brdf-sampler: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"brdf-sampler: run failed: {exc}", file=sys.stderr)
        return 1
    out = Path(cfg.output_dir)
    try:
        names = write_outputs(cfg, report, curves, cells, out)
    except OSError as exc:
        print(f"brdf-sampler: writing outputs to {out}: {exc}", file=sys.stderr)
        return 1
    summary = report.get("verdict") or report.get("winner") or "curve"
    print(f"{cfg.mode}: {summary}; wrote {len(names)} files to {out}")
    return 0


def cmd_ingest(args) -> int:
    try:
        m = ingest(args.csv)
    except SampleCsvError as exc:
        print(f"brdf-sampler: {args.csv}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"brdf-sampler: cannot read {args.csv}: {exc.strerror}", file=sys.stderr)
        return 2
    c = m.configuration
    print(f"n={c.n} P_inc={c.p_inc} P_refl={list(c.p_refl)}")
    return 0


def cmd_strategies(args) -> int:
    sys.stdout.write(list_strategies())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="brdf-sampler", description="Simulated BRDF sampling experiments.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (default ./out)")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--replicates", type=int, default=None, help="override the replicate count")
    run.set_defaults(func=cmd_run)

    ing = sub.add_parser("ingest", help="read a sample CSV and print its structure")
    ing.add_argument("csv")
    ing.set_defaults(func=cmd_ingest)

    st = sub.add_parser("strategies", help="list sampling strategy families")
    st.set_defaults(func=cmd_strategies)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("brdf-sampler: invalid config: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 2
    if getattr(args, "replicates", None) is not None and args.replicates < 1:
        print("brdf-sampler: invalid config: --replicates must be at least 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
