"""Command line interface.

Subcommands: ``rho-star`` (one model -> Chernoff report as JSON), ``sweep``
(grid evaluation with CSV/heatmap artifacts), ``level-set``, ``measure``,
``simulate`` (Monte Carlo experiments), and ``verify`` (the acceptance
battery, exit code 0/1).  Every flag can also be supplied through a single
optional JSON config file (``--config``); explicit flags win over the
file.  The only environment variable honored is RHOSTAR_THREADS (sweep
worker count).
"""

from __future__ import annotations

import argparse
import json
import sys

from .chernoff import rho_star_numeric
from .errors import EmptyLevelSet, RhoStarError
from .model import validate_model
from .montecarlo import empirical_clt_check, preference_experiment
from .sweep import (
    FAMILIES,
    AxisSpec,
    Verdict,
    classify_regions,
    emit_csv,
    emit_heatmap,
    level_set,
    region_measure,
    sweep,
)


def _parse_axis(text: str) -> AxisSpec:
    try:
        name, rng = text.split("=", 1)
        start, stop, step = (float(x) for x in rng.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"axis must look like NAME=MIN:MAX:STEP, got {text!r}"
        )
    return AxisSpec(name, start, stop, step)


def _parse_fix(text: str) -> tuple[str, float]:
    try:
        name, value = text.split("=", 1)
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"fix must look like NAME=VALUE, got {text!r}")


def _parse_where(text: str | None):
    """Tiny predicate parser: 'a<b' or 'a>b' between parameter names."""
    if text is None:
        return None
    for op in ("<", ">"):
        if op in text:
            left, right = (s.strip() for s in text.split(op, 1))
            if op == "<":
                return lambda p: p[left] < p[right]
            return lambda p: p[left] > p[right]
    raise argparse.ArgumentTypeError(
        f"where must be NAME<NAME or NAME>NAME, got {text!r}"
    )


def _load_model(args):
    if args.model is not None:
        with open(args.model) as handle:
            payload = json.load(handle)
        return validate_model(payload["B"], payload["Pi"])
    if args.B is None or args.pi is None:
        raise SystemExit("provide either --model PATH or both --B and --pi")
    return validate_model(json.loads(args.B), json.loads(args.pi))


def _apply_config(args: argparse.Namespace, defaults: dict) -> argparse.Namespace:
    """Fill unset options from the config file, then from defaults."""
    config = {}
    if getattr(args, "config", None):
        with open(args.config) as handle:
            config = json.load(handle)
    for key, value in vars(args).items():
        if value is None or value is False:
            if key in config:
                setattr(args, key, config[key])
            elif value is None and key in defaults:
                setattr(args, key, defaults[key])
    return args


def _add_common(parser):
    parser.add_argument("--config", default=None,
                        help="optional JSON file supplying any flag; flags win")


def _add_grid_options(parser):
    parser.add_argument("--family", default=None, choices=sorted(FAMILIES),
                        help="sub-model family")
    parser.add_argument("--axis", action="append", type=_parse_axis, default=None,
                        metavar="NAME=MIN:MAX:STEP",
                        help="swept axis (repeatable); default per family")
    parser.add_argument("--fix", action="append", type=_parse_fix, default=None,
                        metavar="NAME=VALUE", help="fixed parameter binding (repeatable)")


def _build_grid(args):
    fixed = dict(args.fix) if args.fix else {}
    return sweep(
        args.family,
        fixed=fixed,
        grid=args.axis,
        cross_check=bool(getattr(args, "cross_check", False)),
    )


def _cmd_rho_star(args) -> int:
    report = rho_star_numeric(_load_model(args))
    json.dump(report.to_dict(), sys.stdout, indent=2)
    print()
    return 0


def _cmd_sweep(args) -> int:
    grid = _build_grid(args)
    if args.csv:
        emit_csv(grid, args.csv)
    if args.heatmap:
        emit_heatmap(grid, args.heatmap)
    summary = classify_regions(grid).to_dict()
    summary["family"] = grid.family
    summary["shape"] = list(grid.shape)
    summary["fixed"] = grid.fixed
    if grid.cross_check_max_discrepancy is not None:
        summary["cross_check_max_discrepancy"] = grid.cross_check_max_discrepancy
    json.dump(summary, sys.stdout, indent=2)
    print()
    return 0


def _cmd_level_set(args) -> int:
    grid = _build_grid(args)
    try:
        polylines = level_set(grid, args.level)
        payload = {
            "level": args.level,
            "axes": [ax.name for ax in grid.axes],
            "polylines": [line.tolist() for line in polylines],
        }
    except EmptyLevelSet as exc:
        payload = {"level": args.level, "polylines": [], "note": str(exc)}
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text + "\n")
    print(text)
    return 0


def _cmd_measure(args) -> int:
    grid = _build_grid(args)
    fraction = region_measure(grid, args.verdict, where=_parse_where(args.where))
    json.dump({"family": grid.family, "verdict": args.verdict,
               "where": args.where, "fraction": fraction}, sys.stdout, indent=2)
    print()
    return 0


def _cmd_simulate(args) -> int:
    model = _load_model(args)
    if args.kind == "preference":
        report = preference_experiment(
            model, n=args.n, reps=args.reps, seed=args.seed,
            zero_diagonal=args.zero_diagonal,
        ).to_dict()
    else:
        report = empirical_clt_check(
            model, n=args.n, reps=args.reps, seeds=args.seed,
            zero_diagonal=args.zero_diagonal,
        ).to_dict()
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text + "\n")
    print(text)
    return 0


def _cmd_verify(args) -> int:
    from . import acceptance

    numbers = None
    if args.criteria:
        numbers = [int(x) for x in args.criteria.split(",")]
    results = acceptance.run(numbers=numbers)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rhostar",
        description="Chernoff-information comparison of adjacency vs. "
                    "Laplacian spectral embedding for stochastic block models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rho-star", help="Chernoff report for one model")
    _add_common(p)
    p.add_argument("--model", default=None, help='JSON file {"B": [[...]], "Pi": [...]}')
    p.add_argument("--B", default=None, help="inline JSON block matrix")
    p.add_argument("--pi", default=None, help="inline JSON membership probabilities")
    p.set_defaults(func=_cmd_rho_star, defaults={})

    p = sub.add_parser("sweep", help="evaluate rho* over a parameter grid")
    _add_common(p)
    _add_grid_options(p)
    p.add_argument("--cross-check", dest="cross_check", action="store_true",
                   help="also run the numeric optimizer on closed-form cells")
    p.add_argument("--csv", default=None, help="write per-cell CSV here")
    p.add_argument("--heatmap", default=None, help="write SVG heatmap here")
    p.set_defaults(func=_cmd_sweep, defaults={})

    p = sub.add_parser("level-set", help="extract a rho* contour")
    _add_common(p)
    _add_grid_options(p)
    p.add_argument("--level", type=float, default=None, help="contour level (default 1.0)")
    p.add_argument("--out", default=None, help="write polylines JSON here")
    p.set_defaults(func=_cmd_level_set, defaults={"level": 1.0})

    p = sub.add_parser("measure", help="fraction of cells with a verdict")
    _add_common(p)
    _add_grid_options(p)
    p.add_argument("--verdict", default=None,
                   choices=[v.value for v in Verdict], help="region predicate")
    p.add_argument("--where", default=None,
                   help="optional restriction like 'a<b'")
    p.set_defaults(func=_cmd_measure, defaults={"verdict": "LSE_PREFERRED"})

    p = sub.add_parser("simulate", help="Monte Carlo experiments")
    _add_common(p)
    p.add_argument("--model", default=None, help="JSON model file")
    p.add_argument("--B", default=None, help="inline JSON block matrix")
    p.add_argument("--pi", default=None, help="inline JSON membership probabilities")
    p.add_argument("--kind", default=None, choices=["preference", "clt"],
                   help="experiment type (default preference)")
    p.add_argument("--n", type=int, default=None, help="vertices per graph")
    p.add_argument("--reps", type=int, default=None, help="replications")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--zero-diagonal", dest="zero_diagonal", action="store_true",
                   help="remove self-loops before embedding")
    p.add_argument("--out", default=None, help="write report JSON here")
    p.set_defaults(func=_cmd_simulate,
                   defaults={"kind": "preference", "n": 2000, "reps": 50, "seed": 1})

    p = sub.add_parser("verify", help="run the acceptance battery (exit 0/1)")
    _add_common(p)
    p.add_argument("--criteria", default=None,
                   help="comma-separated criterion numbers (default: all)")
    p.set_defaults(func=_cmd_verify, defaults={})

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(args, args.defaults)
    try:
        return args.func(args)
    except RhoStarError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
