"""Command line: ``annularends run`` / ``annularends list`` / ``annularends sweep``.

Exit codes: 0 success, 2 invalid config, 3 numerical non-convergence,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .catalog import SCENARIOS, list_examples
from .errors import ScenarioError
from .levelset import arcs_to_csv, trace_level
from .render import render_svg
from .runner import run_scenario
from .scenario import build_scenario, load_scenario, parse_grid_override

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_INVARIANT = 0, 2, 3, 4


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="annularends", description="Harmonic functions on annular ends: numerical lab")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write its report")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", type=Path, help="scenario JSON file")
    src.add_argument("--example", help="builtin catalog scenario name")
    run.add_argument("--out", type=Path, help="report JSON path (default: stdout)")
    run.add_argument("--svg", type=Path, help="write the traced level set as SVG")
    run.add_argument("--csv", type=Path, help="write traced arcs as CSV")
    run.add_argument("--mesh", type=Path, help="write the minimal-surface mesh (Weierstrass scenarios)")
    run.add_argument("--grid", help="override grid size, NRxNA")
    run.add_argument("--seed", type=_u64, help="override the scenario seed")
    run.add_argument("--level", type=float, help="override the traced level t")
    run.add_argument("--quiet", action="store_true", help="suppress the report on stdout")

    sub.add_parser("list", help="list builtin scenarios")

    sweep = sub.add_parser("sweep", help="run every builtin scenario, one report per file")
    sweep.add_argument("--out-dir", type=Path, required=True)
    sweep.add_argument("--seed", type=_u64)
    sweep.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    return p


def _cmd_list() -> int:
    width = max(len(n) for n, _ in list_examples())
    for name, prov in list_examples():
        print(f"{name:<{width}}  {prov}")
    return EXIT_OK


def _cmd_run(args) -> int:
    overrides = {"grid_override": parse_grid_override(args.grid) if args.grid else None,
                 "seed": args.seed, "level": args.level}
    if args.scenario is not None:
        try:
            text = args.scenario.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario: {exc}") from None
        sc = load_scenario(text, **overrides)
    else:
        if args.example not in SCENARIOS:
            raise ScenarioError(f"unknown example {args.example!r}; see 'annularends list'")
        sc = build_scenario({"builtin": args.example}, **overrides)

    report = run_scenario(sc, keep_artifacts=True)
    text = report.to_json()
    if args.out:
        args.out.write_text(text)
    elif not args.quiet:
        sys.stdout.write(text)

    art = report.artifacts
    if args.svg or args.csv:
        cx = art.get("complex") or trace_level(*_field_for_trace(sc), sc.grid)
        if args.svg:
            args.svg.write_text(render_svg(cx, art.get("domain")))
        if args.csv:
            args.csv.write_text(arcs_to_csv(cx))
    if args.mesh:
        if art.get("data") is None:
            print("--mesh needs a Weierstrass scenario", file=sys.stderr)
            return EXIT_CONFIG
        from .weierstrass import immerse

        mesh = art.get("mesh") or immerse(art["data"], sc.grid)
        args.mesh.write_text(mesh.to_mesh_text())
    for w in report.warnings:
        if not args.quiet:
            print(f"warning: {w}", file=sys.stderr)
    return report.exit_code


def _field_for_trace(sc):
    from .scenario import resolve_field

    f, _ = resolve_field(sc)
    return f, sc.level


def _cmd_sweep(args) -> int:
    args.out_dir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    for name in SCENARIOS:
        sc = build_scenario({"builtin": name}, seed=args.seed)
        report = run_scenario(sc)
        (args.out_dir / f"{name}.json").write_text(report.to_json(with_timestamp=not args.no_timestamp))
        worst = max(worst, report.exit_code)
        print(f"{name}: exit {report.exit_code}")
    return worst


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_run(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
