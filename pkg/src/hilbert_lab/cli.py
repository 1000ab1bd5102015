"""Batch command-line front end.

Every subcommand writes one table, as CSV (default) or as JSON with a config
echo. Exit status is 0 on success, 2 on invalid input and 3 when a numerical
routine fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .cantor import (
    ahlfors_exponent_fit,
    build_cantor_domain,
    build_cantor_function,
    default_radii,
    derivative_measure,
    eval_cantor,
)
from .domains import load_domain
from .entropy import (
    RadiusGrid,
    SeriesParams,
    ball_volume,
    cantor_series,
    circle_length,
    fit_entropy,
    series_bounds,
)
from .errors import HilbertLabError, NumericalError, ValidationError
from .geometry import TOL_GEO
from .metric import (
    DEFAULT_QUAD_TOL,
    blowup_limit,
    blowup_ratio,
    centro_projective_area,
    finsler_sample,
    hilbert_distance,
    unit_ball_area,
)
from .tree import (
    OrderedRegularSet,
    bilipschitz_check,
    branch_ratio_check,
    build_tree,
    embed_standard,
    extend_linear,
    tree_distance,
)

SCHEMA = 1
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class Table:
    """Named columns plus a summary dict, emitted as CSV or JSON."""

    def __init__(self, columns: Sequence[str], rows: Iterable[Sequence] = (), summary: dict | None = None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.summary = summary or {}


def _plain(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def _cell(value) -> str:
    value = _plain(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _strict(value):
    # JSON has no NaN or infinity; those become null
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _strict(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_strict(v) for v in value]
    return value


def emit(table: Table, fmt: str, config: dict, stream) -> None:
    if fmt == "json":
        doc = {
            "schema": SCHEMA,
            "config": _plain(config),
            "columns": table.columns,
            "rows": [_plain(r) for r in table.rows],
            "summary": _plain(table.summary),
        }
        stream.write(json.dumps(_strict(doc), indent=2, allow_nan=False) + "\n")
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])


def _point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return x, y


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _number(text: str):
    """Exact rational when the text is one (``1/3``, ``0.25``), float otherwise."""
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _threads(args) -> int:
    env = os.environ.get("HILBERT_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"HILBERT_LAB_THREADS must be an integer, got {env!r}") from None
    if args.threads is not None:
        return max(1, args.threads)
    return os.cpu_count() or 1


def _parallel_map(fn: Callable, items: Sequence, workers: int) -> list:
    # results are collected in input order whatever the schedule
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _grid(args) -> np.ndarray:
    if args.count == 0:
        return np.empty(0)
    return RadiusGrid(args.rmin, args.rmax, args.count, args.spacing).values()


def _check_tolerances(args) -> None:
    for name in ("quad_tol", "tol_geo"):
        value = getattr(args, name, None)
        if value is not None and not 0.0 < value < 1e-2:
            raise ValidationError(f"--{name.replace('_', '-')} must lie in (0, 1e-2), got {value}")


# ---------------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------------


def cmd_dist(args) -> Table:
    domain = load_domain(args.domain)
    d = hilbert_distance(domain, args.p, args.q, args.tol_geo)
    return Table(["px", "py", "qx", "qy", "distance"], [[*args.p, *args.q, d]])


def cmd_norm(args) -> Table:
    domain = load_domain(args.domain)
    sample = finsler_sample(domain, args.x, args.v, args.tol_geo)
    size = math.hypot(*args.v)
    return Table(
        ["x", "y", "vx", "vy", "t_plus", "t_minus", "norm"],
        [[*args.x, *args.v, sample.t_plus, sample.t_minus, size * sample.norm_value]],
    )


def cmd_sigma(args) -> Table:
    domain = load_domain(args.domain)
    points = args.x or [tuple(domain.basepoint)]
    rows = []
    for x in points:
        area = unit_ball_area(domain, x, args.quad_tol, args.tol_geo)
        rows.append([x[0], x[1], area, math.pi / area])
    return Table(["x", "y", "unit_ball_area", "sigma"], rows)


def cmd_blowup(args) -> Table:
    domain = load_domain(args.domain)
    lams = args.lam or [1.0 - 1e-4]
    limit = blowup_limit(domain, args.s)
    corrected = blowup_limit(domain, args.s, support_power=1.5)
    rows = [[args.s, lam, blowup_ratio(domain, args.s, lam, args.quad_tol), limit, corrected] for lam in lams]
    return Table(["s", "lam", "ratio", "limit", "limit_corrected"], rows)


def cmd_area(args) -> Table:
    domain = load_domain(args.domain)
    value = centro_projective_area(domain, quad_tol=args.quad_tol, tol=args.tol_geo)
    return Table(["kind", "area"], [[domain.kind, value]])


def cmd_cantor_fn(args) -> Table:
    cf = build_cantor_function(args.p, args.depth)
    ts = np.asarray(args.t) if args.t else np.linspace(0.0, 1.0, args.samples)
    values = np.atleast_1d(eval_cantor(cf, ts)) if len(ts) else np.empty(0)
    return Table(["t", "f"], zip(ts, values), {"error_bound": cf.error_bound, "alpha": cf.alpha})


def cmd_cantor_measure(args) -> Table:
    cf = build_cantor_function(args.p, args.depth)
    mu = derivative_measure(cf)
    rng = np.random.default_rng(args.seed)
    centers = mu.sample_support(args.centers, rng)
    radii = default_radii(cf, args.radii)
    fit = ahlfors_exponent_fit(mu, radii, centers)
    level = min(args.level, cf.depth)
    intervals = mu.intervals(level)
    rows = [[a, b, mu.weight(level)] for a, b in intervals]
    summary = {
        "level": level,
        "alpha_hat": fit.alpha_hat,
        "alpha": cf.alpha,
        "c_lo": fit.c_lo,
        "c_hi": fit.c_hi,
        "pairs": fit.pairs,
        "lower_constant_bound": (2.0 * cf.p) ** (-cf.alpha),
        "ball_profile": [[r, float(np.mean(mu.ball_mass(centers, r)))] for r in radii],
    }
    return Table(["a", "b", "mass"], rows, summary)


def cmd_cantor_domain(args) -> Table:
    cf = build_cantor_function(args.p, args.depth)
    dom = build_cantor_domain(cf)
    rows = [[x, y] for x, y in dom.vertices]
    rows.append(rows[0])  # closed polyline
    summary = {"vertices": len(dom), "center": dom.boundary.center, "symmetric": dom.is_centrally_symmetric()}
    return Table(["x", "y"], rows, summary)


def _sweep(args, value: Callable[[float], float], mode: str) -> Table:
    radii = _grid(args)
    values = _parallel_map(value, list(radii), _threads(args))
    if not len(radii):
        summary = {"mode": mode, "slope": None, "grid": [args.rmin, args.rmax, 0, args.spacing],
                   "tolerances": {"quad_tol": args.quad_tol, "tol_geo": args.tol_geo}}
        return Table(["R", "value", "log_value", "local_slope"], [], summary)
    est = fit_entropy(radii, values, mode)
    local = list(est.local_slopes) + [float("nan")]
    rows = [[R, v, lv, ls] for R, v, lv, ls in zip(est.radii, est.values, est.log_values, local)]
    summary = {
        "mode": mode,
        "slope": est.slope,
        "grid": [args.rmin, args.rmax, args.count, args.spacing],
        "tolerances": {"quad_tol": args.quad_tol, "tol_geo": args.tol_geo},
    }
    if len(radii) >= 2:
        sys.stderr.write(f"slope {est.slope:.6f}\n")
    return Table(["R", "value", "log_value", "local_slope"], rows, summary)


def cmd_entropy_spheres(args) -> Table:
    domain = load_domain(args.domain)
    return _sweep(args, lambda R: circle_length(domain, R, args.quad_tol, args.tol_geo), "sphere")


def cmd_entropy_balls(args) -> Table:
    domain = load_domain(args.domain)
    return _sweep(args, lambda R: ball_volume(domain, R, args.quad_tol, args.tol_geo), "ball")


def _series_params(args) -> SeriesParams:
    return SeriesParams(args.p, args.rule, args.prefactor, args.sides)


def cmd_entropy_series(args) -> Table:
    params = _series_params(args)
    table = _sweep(args, lambda R: cantor_series(params, R).value, "series")
    table.summary["rate"] = params.rate
    return table


def cmd_entropy_bounds(args) -> Table:
    params = SeriesParams(args.p, "doubled")
    rows = []
    for R in _grid(args):
        value = cantor_series(params, R).value
        lower, upper = series_bounds(params, R, corrected=args.corrected)
        rows.append([R, lower, value, upper, bool(lower <= value <= upper)])
    summary = {"all_hold": all(r[-1] for r in rows), "corrected": args.corrected}
    return Table(["R", "lower", "series", "upper", "holds"], rows, summary)


def _tree(args):
    regular = OrderedRegularSet.standard(args.p, args.generations)
    k = args.gaps if args.gaps is not None else len(regular)
    return build_tree(regular, k)


def cmd_tree_build(args) -> Table:
    tree = _tree(args)
    rows = [[v.word or "root", v.a, v.b, "" if v.parent is None else (v.parent or "root"), v.created] for v in tree.vertices.values()]
    return Table(["word", "a", "b", "parent", "created"], rows, {"leaves": len(tree.leaves)})


def cmd_tree_dist(args) -> Table:
    tree = _tree(args)
    return Table(["x", "y", "d_tree"], [[args.x, args.y, tree_distance(tree, args.x, args.y)]])


def cmd_tree_check(args) -> Table:
    tree = _tree(args)
    pairs = "exhaustive" if args.pairs == 0 else args.pairs
    report = bilipschitz_check(tree, pairs, seed=args.seed)
    k_hat = branch_ratio_check(tree)
    row = [
        k_hat,
        report.max_ratio_up,
        report.max_ratio_down,
        report.k_bound,
        report.pairs,
        report.same_leaf_pairs,
        report.euclid_le_tree,
    ]
    cols = ["branch_ratio", "max_ratio_up", "max_ratio_down", "k_bound", "pairs", "same_leaf_pairs", "euclid_le_tree"]
    return Table(cols, [row])


def cmd_tree_embed(args) -> Table:
    emb = embed_standard(args.p_src, args.p_tgt, args.depth)
    up, down = emb.distortion(args.samples or None, args.seed)
    rows = [[w or "root", emb.image(w) or "root"] for w in sorted(emb.vertex_map, key=lambda w: (len(w), w))]
    summary = {
        "levels": list(emb.levels),
        "order_preserved": emb.order_preserved,
        "max_ratio_up": up,
        "max_ratio_down": down,
        "distortion": max(up, down),
    }
    return Table(["source", "target"], rows, summary)


def cmd_tree_extend(args) -> Table:
    emb = embed_standard(args.p_src, args.p_tgt, args.depth)
    gaps = OrderedRegularSet.standard(args.p_src, args.depth).gaps
    ext = extend_linear(emb.boundary_map, gaps)
    ts = [Fraction(i, args.samples - 1) for i in range(args.samples)] if args.samples > 1 else [Fraction(0)]
    return Table(["t", "f"], [[t, ext(t)] for t in ts])


# ---------------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, domain: bool = False) -> None:
    if domain:
        p.add_argument("--domain", required=True, help="domain spec (JSON file)")
    p.add_argument("--quad-tol", type=float, default=DEFAULT_QUAD_TOL)
    p.add_argument("--tol-geo", type=float, default=TOL_GEO)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--threads", type=int, help="worker pool size (HILBERT_LAB_THREADS overrides)")


def _grid_flags(p: argparse.ArgumentParser, rmin: float, rmax: float, count: int) -> None:
    p.add_argument("--rmin", type=float, default=rmin)
    p.add_argument("--rmax", type=float, default=rmax)
    p.add_argument("--count", type=int, default=count)
    p.add_argument("--spacing", choices=("linear", "geometric"), default="linear")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hilbert-lab", description="Hilbert geometry experiments in the plane.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="Hilbert distance between two points")
    _common(p, domain=True)
    p.add_argument("--p", type=_point, required=True)
    p.add_argument("--q", type=_point, required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("norm", help="Finsler norm of a tangent vector")
    _common(p, domain=True)
    p.add_argument("--x", type=_point, required=True)
    p.add_argument("--v", type=_point, required=True)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("sigma", help="Busemann density")
    _common(p, domain=True)
    p.add_argument("--x", type=_point, action="append", help="point (repeatable; default basepoint)")
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("blowup", help="rescaled density near a boundary point")
    _common(p, domain=True)
    p.add_argument("--s", type=float, default=0.0, help="boundary angle parameter")
    p.add_argument("--lam", type=float, action="append", help="scale factor in (0, 1) (repeatable)")
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("area", help="centro-projective area")
    _common(p, domain=True)
    p.set_defaults(func=cmd_area)

    cantor = sub.add_parser("cantor", help="Cantor functions, measures and domains").add_subparsers(
        dest="cantor_command", required=True
    )
    p = cantor.add_parser("fn", help="evaluate the Cantor function")
    _common(p)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--t", type=_floats, help="comma-separated points (default: uniform grid)")
    p.add_argument("--samples", type=int, default=11)
    p.set_defaults(func=cmd_cantor_fn)

    p = cantor.add_parser("measure", help="support intervals and Ahlfors exponent fit of the Cantor measure")
    _common(p)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--level", type=int, default=6, help="generation of the listed support intervals")
    p.add_argument("--radii", type=int, default=24)
    p.add_argument("--centers", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cantor_measure)

    p = cantor.add_parser("domain", help="vertices of the Cantor domain")
    _common(p)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--depth", type=int, default=6)
    p.set_defaults(func=cmd_cantor_domain)

    entropy = sub.add_parser("entropy", help="sphere lengths, ball volumes and gap series").add_subparsers(
        dest="entropy_command", required=True
    )
    p = entropy.add_parser("spheres", help="circle length sweep")
    _common(p, domain=True)
    _grid_flags(p, 2.0, 8.0, 13)
    p.set_defaults(func=cmd_entropy_spheres)

    p = entropy.add_parser("balls", help="ball volume sweep")
    _common(p, domain=True)
    _grid_flags(p, 10.0, 20.0, 11)
    p.set_defaults(func=cmd_entropy_balls)

    p = entropy.add_parser("series", help="Cantor gap series sweep")
    _common(p)
    _grid_flags(p, 0.0, 60.0, 61)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--rule", choices=("exact", "doubled"), default="doubled")
    p.add_argument("--prefactor", type=float, default=1.0)
    p.add_argument("--sides", type=int, choices=(1, 2), default=1)
    p.set_defaults(func=cmd_entropy_series)

    p = entropy.add_parser("bounds", help="closed-form bounds of the gap series")
    _common(p)
    _grid_flags(p, 0.0, 60.0, 601)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--corrected", action="store_true", help="use the upper bound with the full geometric factor")
    p.set_defaults(func=cmd_entropy_bounds)

    tree = sub.add_parser("tree", help="interval trees and ordered embeddings").add_subparsers(
        dest="tree_command", required=True
    )
    for name, func, help_text in (
        ("build", cmd_tree_build, "dump the interval tree"),
        ("dist", cmd_tree_dist, "tree distance between two points"),
        ("check", cmd_tree_check, "branch ratio and bi-Lipschitz comparison"),
    ):
        p = tree.add_parser(name, help=help_text)
        _common(p)
        p.add_argument("--p", type=float, default=3.0)
        p.add_argument("--generations", type=int, default=4)
        p.add_argument("--gaps", type=int, help="number of gaps to remove (default: all generated)")
        if name == "dist":
            p.add_argument("--x", type=_number, required=True)
            p.add_argument("--y", type=_number, required=True)
        if name == "check":
            p.add_argument("--pairs", type=int, default=0, help="sampled pairs (0: exhaustive)")
            p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)

    for name, func, help_text in (
        ("embed", cmd_tree_embed, "digit-block embedding between standard sets"),
        ("extend", cmd_tree_extend, "linear extension of the embedding to [0, 1]"),
    ):
        p = tree.add_parser(name, help=help_text)
        _common(p)
        p.add_argument("--p-src", type=float, default=5.0)
        p.add_argument("--p-tgt", type=float, default=3.0)
        p.add_argument("--depth", type=int, default=8)
        if name == "embed":
            p.add_argument("--samples", type=int, default=0, help="sampled leaf pairs (0: all)")
            p.add_argument("--seed", type=int, default=0)
        else:
            p.add_argument("--samples", type=int, default=101)
        p.set_defaults(func=func)
    return parser


def _config(args) -> dict:
    skip = {"func", "out", "format", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_tolerances(args)
        table = args.func(args)
        buf = io.StringIO()
        emit(table, args.format, _config(args), buf)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except HilbertLabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
