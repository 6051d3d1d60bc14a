"""Parameter-space sweeps of rho* over the standard sub-model families.

A sweep evaluates rho* on a rectangular grid for one family, routing
through the closed form whenever the family has one (homogeneous2, rank1,
poly_p, homogeneousK) and through the numeric optimizer otherwise
(core_periphery, full_rank3).  Cells on degenerate loci (a = b, p = q,
tested at grid-point equality) are excluded, never numeric, reproducing
the empty diagonals of the reference surfaces; model errors raised while
evaluating a cell are recorded as exclusions with the error name.

Downstream operations summarize the grid: verdict region counts and
connected components, marching-squares level sets with per-crossing
bisection refinement, Riemann region measures, CSV emission with
round-trippable floats, and deterministic SVG heatmaps.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .chernoff import (
    Verdict,
    _rank1_parts,
    rho_star_homogeneous2,
    rho_star_homogeneousK,
    rho_star_numeric,
    rho_star_rank1,
    verdict_from_rho,
)
from .errors import (
    EmptyLevelSet,
    IoFailure,
    NotTwoDimensional,
    RhoStarError,
    UnknownFamily,
)
from .model import (
    core_periphery_matrix,
    homogeneous_matrix,
    rank_one_matrix,
    two_block_matrix,
    validate_model,
)

THREADS_ENV_VAR = "RHOSTAR_THREADS"

_VERDICT_CODES = {Verdict.ASE_PREFERRED: 0, Verdict.LSE_PREFERRED: 1, Verdict.EQUAL: 2}
_CODE_VERDICTS = {v: k for k, v in _VERDICT_CODES.items()}
_NO_VERDICT = -1

EXCLUDED_EQUAL_ROWS = "DEGENERATE_EQUAL_ROWS"
EXCLUDED_PARAMETER_ORDER = "PARAMETER_ORDER"


@dataclass(frozen=True)
class AxisSpec:
    """Inclusive sweep range for one named parameter."""

    name: str
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0 or self.stop < self.start:
            raise ValueError(f"invalid axis range {self.name}={self.start}:{self.stop}:{self.step}")

    def values(self) -> np.ndarray:
        count = int(round((self.stop - self.start) / self.step)) + 1
        vals = self.start + self.step * np.arange(count)
        return vals[vals <= self.stop + 1e-12 * max(1.0, abs(self.stop))]


@dataclass(frozen=True)
class Family:
    """One sub-model family: parameter set, model builder, optional closed form."""

    name: str
    parameters: tuple[str, ...]
    default_axes: tuple[str, ...]
    defaults: dict
    build: callable
    closed_form: callable | None = None
    degenerate_reason: callable | None = None


def _homogeneous2_build(p):
    return validate_model(homogeneous_matrix(2, p["a"], p["b"]), [0.5, 0.5])


def _homogeneous2_closed(p):
    rho, _, _ = rho_star_homogeneous2(p["a"], p["b"])
    return rho, 0.5, 0.5


def _core_periphery_build(p):
    return validate_model(core_periphery_matrix(p["a"], p["b"]), [p["pi1"], 1.0 - p["pi1"]])


def _rank1_build(p):
    return validate_model(rank_one_matrix(p["p"], p["q"]), [p["pi1"], 1.0 - p["pi1"]])


def _rank1_closed(p):
    rho = rho_star_rank1(p["p"], p["q"], p["pi1"])
    parts = _rank1_parts(p["p"], p["q"], p["pi1"])
    return rho, parts["t_star_ase"], parts["t_star_lse"]


def _poly_p_build(p):
    q = p["p"] ** p["gamma"]
    return validate_model(rank_one_matrix(p["p"], q), [p["pi1"], 1.0 - p["pi1"]])


def _poly_p_closed(p):
    q = p["p"] ** p["gamma"]
    rho = rho_star_rank1(p["p"], q, p["pi1"])
    parts = _rank1_parts(p["p"], q, p["pi1"])
    return rho, parts["t_star_ase"], parts["t_star_lse"]


def _full_rank3_build(p):
    return validate_model(two_block_matrix(p["a"], p["b"], p["c"]), [p["pi1"], 1.0 - p["pi1"]])


def _homogeneousK_build(p):
    K = int(round(p["K"]))
    return validate_model(homogeneous_matrix(K, p["a"], p["b"]), np.full(K, 1.0 / K))


def _homogeneousK_closed(p):
    rho, _, _ = rho_star_homogeneousK(p["a"], p["b"], int(round(p["K"])))
    return rho, 0.5, 0.5


def _equal_ab(p):
    return EXCLUDED_EQUAL_ROWS if p["a"] == p["b"] else None


def _equal_pq(p):
    return EXCLUDED_EQUAL_ROWS if p["p"] == p["q"] else None


def _affinity_order(p):
    if p["a"] == p["b"]:
        return EXCLUDED_EQUAL_ROWS
    if p["b"] > p["a"]:
        return EXCLUDED_PARAMETER_ORDER
    return None


FAMILIES: dict[str, Family] = {
    f.name: f
    for f in [
        Family(
            name="homogeneous2",
            parameters=("a", "b"),
            default_axes=("a", "b"),
            defaults={},
            build=_homogeneous2_build,
            closed_form=_homogeneous2_closed,
            degenerate_reason=_equal_ab,
        ),
        Family(
            name="core_periphery",
            parameters=("a", "b", "pi1"),
            default_axes=("a", "b"),
            defaults={"pi1": 0.5},
            build=_core_periphery_build,
            degenerate_reason=_equal_ab,
        ),
        Family(
            name="rank1",
            parameters=("p", "q", "pi1"),
            default_axes=("p", "q"),
            defaults={"pi1": 0.5},
            build=_rank1_build,
            closed_form=_rank1_closed,
            degenerate_reason=_equal_pq,
        ),
        Family(
            name="poly_p",
            parameters=("p", "gamma", "pi1"),
            default_axes=("p", "gamma"),
            defaults={"pi1": 0.5, "gamma": 7.0},
            build=_poly_p_build,
            closed_form=_poly_p_closed,
        ),
        Family(
            name="full_rank3",
            parameters=("a", "b", "c", "pi1"),
            default_axes=("a", "b", "c"),
            defaults={"pi1": 0.5},
            build=_full_rank3_build,
        ),
        Family(
            name="homogeneousK",
            parameters=("a", "b", "K"),
            default_axes=("a", "b"),
            defaults={"K": 3.0},
            build=_homogeneousK_build,
            closed_form=_homogeneousK_closed,
            degenerate_reason=_affinity_order,
        ),
    ]
}

DEFAULT_AXIS_RANGE = (0.01, 0.99, 0.01)


@dataclass
class SweepGrid:
    """Columnar result of one sweep: per-cell rho*, verdicts, diagnostics.

    Arrays are shaped like the grid (one dimension per axis, row-major over
    ``np.ndindex``).  Excluded cells carry NaN in the numeric arrays, code
    -1 in ``verdict_codes``, and their reason string in ``reasons``.
    """

    family: str
    axes: tuple[AxisSpec, ...]
    fixed: dict
    rho: np.ndarray
    t_ase: np.ndarray
    t_lse: np.ndarray
    verdict_codes: np.ndarray
    excluded: np.ndarray
    reasons: dict = field(default_factory=dict)
    cross_check_max_discrepancy: float | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.rho.shape

    @property
    def axis_values(self) -> list[np.ndarray]:
        return [ax.values() for ax in self.axes]

    def params_at(self, index: tuple[int, ...]) -> dict:
        values = self.axis_values
        p = {ax.name: float(values[i][index[i]]) for i, ax in enumerate(self.axes)}
        p.update(self.fixed)
        return p

    def verdict_at(self, index: tuple[int, ...]) -> Verdict | None:
        code = int(self.verdict_codes[index])
        return _CODE_VERDICTS.get(code)


def _resolve_axes(family: Family, grid) -> tuple[AxisSpec, ...]:
    if grid is None:
        return tuple(
            AxisSpec(name, *DEFAULT_AXIS_RANGE) for name in family.default_axes
        )
    axes = []
    for item in grid:
        if isinstance(item, AxisSpec):
            axes.append(item)
        else:
            name, (start, stop, step) = item
            axes.append(AxisSpec(name, start, stop, step))
    return tuple(axes)


def _evaluate_cell(family: Family, params: dict, cross_check: bool):
    """Evaluate one grid cell.

    Returns (rho, t_ase, t_lse, verdict_code, excluded, reason, discrepancy).
    """
    if family.degenerate_reason is not None:
        reason = family.degenerate_reason(params)
        if reason is not None:
            return (np.nan, np.nan, np.nan, _NO_VERDICT, True, reason, np.nan)
    try:
        closed = family.closed_form(params) if family.closed_form else None
        numeric = None
        if closed is None or cross_check:
            report = rho_star_numeric(family.build(params))
            numeric = (report.rho_star, report.t_star_ase, report.t_star_lse)
        rho, t_a, t_l = closed if closed is not None else numeric
        discrepancy = (
            abs(closed[0] - numeric[0]) if closed is not None and numeric is not None
            else np.nan
        )
    except RhoStarError as exc:
        return (np.nan, np.nan, np.nan, _NO_VERDICT, True, type(exc).__name__, np.nan)
    code = _VERDICT_CODES[verdict_from_rho(rho)]
    return (rho, t_a, t_l, code, False, "", discrepancy)


def _worker_chunk(args):
    family_name, fixed, axis_specs, flat_indices, shape, cross_check = args
    family = FAMILIES[family_name]
    values = [AxisSpec(*spec).values() for spec in axis_specs]
    names = [spec[0] for spec in axis_specs]
    out = []
    for flat in flat_indices:
        index = np.unravel_index(flat, shape)
        params = {names[i]: float(values[i][index[i]]) for i in range(len(names))}
        params.update(fixed)
        out.append(_evaluate_cell(family, params, cross_check))
    return out


def sweep(family: str, fixed: dict | None = None, grid=None,
          cross_check: bool = False, workers: int | None = None) -> SweepGrid:
    """Evaluate rho* over a parameter grid for one sub-model family.

    ``grid`` is a sequence of AxisSpec (or (name, (start, stop, step))
    pairs); defaults to the family's standard axes over [0.01, 0.99] with
    step 0.01.  ``fixed`` supplies the remaining parameters; axis names and
    fixed bindings must partition the family's parameter set.  With
    ``cross_check`` every closed-form cell is recomputed numerically and
    the largest discrepancy is recorded.  ``workers`` > 1 maps cells over
    processes with a deterministic reduction (identical output for any
    worker count); it defaults to the RHOSTAR_THREADS environment variable.
    """
    if family not in FAMILIES:
        raise UnknownFamily(
            f"unknown family {family!r}; known: {sorted(FAMILIES)}"
        )
    fam = FAMILIES[family]
    axes = _resolve_axes(fam, grid)
    bindings = dict(fam.defaults)
    bindings.update(fixed or {})
    axis_names = [ax.name for ax in axes]
    binding_names = [k for k in bindings if k not in axis_names]
    if sorted(axis_names + binding_names) != sorted(fam.parameters):
        raise ValueError(
            f"family {family!r} needs parameters {fam.parameters}; "
            f"got axes {axis_names} and bindings {sorted(bindings)}"
        )
    bindings = {k: bindings[k] for k in binding_names}

    values = [ax.values() for ax in axes]
    shape = tuple(len(v) for v in values)
    n_cells = int(np.prod(shape))
    rho = np.full(shape, np.nan)
    t_ase = np.full(shape, np.nan)
    t_lse = np.full(shape, np.nan)
    codes = np.full(shape, _NO_VERDICT, dtype=np.int8)
    excluded = np.zeros(shape, dtype=bool)
    reasons: dict = {}
    max_disc = np.nan

    if workers is None:
        workers = int(os.environ.get(THREADS_ENV_VAR, "1"))

    def _store(flat, result):
        nonlocal max_disc
        index = np.unravel_index(flat, shape)
        r, ta, tl, code, excl, reason, disc = result
        rho[index] = r
        t_ase[index] = ta
        t_lse[index] = tl
        codes[index] = code
        excluded[index] = excl
        if reason:
            reasons[flat] = reason
        if np.isfinite(disc) and not (max_disc >= disc):
            max_disc = disc

    if workers > 1 and n_cells > 256:
        spec_tuples = [(ax.name, ax.start, ax.stop, ax.step) for ax in axes]
        chunk = max(256, n_cells // (workers * 16))
        jobs = [
            (family, bindings, spec_tuples, range(lo, min(lo + chunk, n_cells)),
             shape, cross_check)
            for lo in range(0, n_cells, chunk)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for job, results in zip(jobs, pool.map(_worker_chunk, jobs)):
                for flat, result in zip(job[3], results):
                    _store(flat, result)
    else:
        names = axis_names
        for flat in range(n_cells):
            index = np.unravel_index(flat, shape)
            params = {names[i]: float(values[i][index[i]]) for i in range(len(names))}
            params.update(bindings)
            _store(flat, _evaluate_cell(fam, params, cross_check))

    return SweepGrid(
        family=family,
        axes=axes,
        fixed=bindings,
        rho=rho,
        t_ase=t_ase,
        t_lse=t_lse,
        verdict_codes=codes,
        excluded=excluded,
        reasons=reasons,
        cross_check_max_discrepancy=None if np.isnan(max_disc) else float(max_disc),
    )


@dataclass(frozen=True)
class RegionSummary:
    """Verdict counts, fractions of non-excluded cells, component counts."""

    counts: dict
    fractions: dict
    components: dict
    excluded_cells: int
    total_cells: int

    def to_dict(self) -> dict:
        return {
            "counts": {k.value: v for k, v in self.counts.items()},
            "fractions": {k.value: v for k, v in self.fractions.items()},
            "components": {k.value: v for k, v in self.components.items()},
            "excluded_cells": self.excluded_cells,
            "total_cells": self.total_cells,
        }


def classify_regions(grid: SweepGrid) -> RegionSummary:
    """Count cells and connected components per verdict.

    Components use orthogonal adjacency (4-neighbor in two dimensions and
    its analogue in higher dimensions).
    """
    valid = ~grid.excluded
    total_valid = int(valid.sum())
    counts, fractions, components = {}, {}, {}
    structure = ndimage.generate_binary_structure(grid.rho.ndim, 1)
    for verdict, code in _VERDICT_CODES.items():
        mask = grid.verdict_codes == code
        counts[verdict] = int(mask.sum())
        fractions[verdict] = counts[verdict] / total_valid if total_valid else 0.0
        _, n_components = ndimage.label(mask, structure=structure)
        components[verdict] = int(n_components)
    return RegionSummary(
        counts=counts,
        fractions=fractions,
        components=components,
        excluded_cells=int(grid.excluded.sum()),
        total_cells=int(grid.rho.size),
    )


def region_measure(grid: SweepGrid, predicate, where=None) -> float:
    """Fraction of non-excluded cells with the given verdict.

    ``where`` optionally restricts the numerator by a callable on the cell
    parameter dict (e.g. lambda p: p["a"] < p["b"]).  The denominator is
    always every non-excluded cell, so the value is a Riemann estimate of
    the region's measure within the swept parameter box.
    """
    verdict = Verdict(predicate) if not isinstance(predicate, Verdict) else predicate
    code = _VERDICT_CODES[verdict]
    valid = ~grid.excluded
    total = int(valid.sum())
    if total == 0:
        return 0.0
    mask = grid.verdict_codes == code
    if where is not None:
        sel = np.zeros(grid.shape, dtype=bool)
        for index in np.ndindex(grid.shape):
            if mask[index]:
                sel[index] = bool(where(grid.params_at(index)))
        mask = sel
    return float(mask.sum()) / total


def _rho_on_segment(grid: SweepGrid, axis: int, index_fixed: tuple, x: float) -> float:
    """rho* along one grid edge, at axis-coordinate x (other axis fixed)."""
    fam = FAMILIES[grid.family]
    values = grid.axis_values
    params = dict(grid.fixed)
    for i, ax in enumerate(grid.axes):
        params[ax.name] = x if i == axis else float(values[i][index_fixed[i]])
    if fam.closed_form is not None:
        return fam.closed_form(params)[0]
    return rho_star_numeric(fam.build(params)).rho_star


def _refine_crossing(grid: SweepGrid, level: float, axis: int,
                     index: tuple, x0: float, x1: float,
                     f0: float, f1: float) -> float:
    """Bisection for rho(x) = level between two grid nodes along ``axis``."""
    for _ in range(60):
        xm = 0.5 * (x0 + x1)
        try:
            fm = _rho_on_segment(grid, axis, index, xm) - level
        except RhoStarError:
            break
        if fm == 0.0:
            return xm
        if (f0 < 0) != (fm < 0):
            x1, f1 = xm, fm
        else:
            x0, f0 = xm, fm
        if abs(x1 - x0) < 1e-13:
            break
    return 0.5 * (x0 + x1)


def level_set(grid: SweepGrid, level: float) -> list[np.ndarray]:
    """Marching-squares contour of rho* = level on a two-axis grid.

    Every sign change along a grid edge is refined by bisection against
    the family's rho* evaluation, so returned points satisfy the level
    equation to high accuracy.  Returns a list of polylines, each an
    (m, 2) array in axis coordinates (first axis is column 0).  Raises
    EmptyLevelSet when the level is never crossed (informational).
    """
    if len(grid.axes) != 2:
        raise NotTwoDimensional("level_set requires a grid over exactly 2 axes")
    xs, ys = grid.axis_values
    V = grid.rho
    f = V - level

    # crossing points keyed by (edge orientation, i, j)
    crossings: dict = {}

    def _edge_point(i, j, axis):
        key = (axis, i, j)
        if key in crossings:
            return crossings[key]
        if axis == 0:
            f0, f1 = f[i, j], f[i + 1, j]
            x0, x1 = xs[i], xs[i + 1]
        else:
            f0, f1 = f[i, j], f[i, j + 1]
            x0, x1 = ys[j], ys[j + 1]
        if not (np.isfinite(f0) and np.isfinite(f1)) or (f0 < 0) == (f1 < 0):
            crossings[key] = None
            return None
        x = _refine_crossing(grid, level, axis, (i, j), x0, x1, f0, f1)
        point = (x, float(ys[j])) if axis == 0 else (float(xs[i]), x)
        crossings[key] = point
        return point

    segments = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            corners = f[i, j], f[i + 1, j], f[i + 1, j + 1], f[i, j + 1]
            if not all(np.isfinite(c) for c in corners):
                continue
            pts = [
                _edge_point(i, j, 0),        # bottom edge (varies x)
                _edge_point(i + 1, j, 1),    # right edge (varies y)
                _edge_point(i, j + 1, 0),    # top edge
                _edge_point(i, j, 1),        # left edge
            ]
            hit = [p for p in pts if p is not None]
            if len(hit) == 2:
                segments.append((hit[0], hit[1]))
            elif len(hit) == 4:
                # saddle: pair by the sign of the cell-center value
                center = np.mean(corners)
                if (center < 0) == (corners[0] < 0):
                    segments.append((pts[0], pts[1]))
                    segments.append((pts[2], pts[3]))
                else:
                    segments.append((pts[0], pts[3]))
                    segments.append((pts[1], pts[2]))
    if not segments:
        raise EmptyLevelSet(f"rho* never crosses level {level} on this grid")
    return _chain_segments(segments)


def _chain_segments(segments) -> list[np.ndarray]:
    """Merge line segments sharing endpoints into polylines."""
    def key(p):
        return (round(p[0], 9), round(p[1], 9))

    unused = set(range(len(segments)))
    seg_by_key: dict = {}
    for idx, (a, b) in enumerate(segments):
        seg_by_key.setdefault(key(a), []).append(idx)
        seg_by_key.setdefault(key(b), []).append(idx)

    polylines = []
    while unused:
        idx = unused.pop()
        a, b = segments[idx]
        chain = [a, b]
        # extend forward from b, then backward from a
        for end in (1, 0):
            while True:
                k = key(chain[-1] if end else chain[0])
                nxt = next((i for i in seg_by_key.get(k, []) if i in unused), None)
                if nxt is None:
                    break
                unused.discard(nxt)
                p, q = segments[nxt]
                point = q if key(p) == k else p
                if end:
                    chain.append(point)
                else:
                    chain.insert(0, point)
        polylines.append(np.array(chain))
    return polylines


def emit_csv(grid: SweepGrid, path) -> None:
    """Write the grid as CSV: axes, rho_star, verdict, t stars, status, reason.

    One row per cell in row-major axis order; floats carry 17 significant
    digits so parsing reproduces the binary values exactly; excluded cells
    have empty numeric fields and a reason code.
    """
    def fmt(x: float) -> str:
        return f"{x:.17g}"

    values = grid.axis_values
    names = [ax.name for ax in grid.axes]
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                names + ["rho_star", "verdict", "t_star_ase", "t_star_lse", "status", "reason"]
            )
            for flat, index in enumerate(np.ndindex(grid.shape)):
                coords = [fmt(float(values[i][index[i]])) for i in range(len(names))]
                if grid.excluded[index]:
                    writer.writerow(
                        coords + ["", "", "", "", "EXCLUDED", grid.reasons.get(flat, "")]
                    )
                else:
                    verdict = grid.verdict_at(index)
                    writer.writerow(
                        coords
                        + [
                            fmt(float(grid.rho[index])),
                            verdict.value if verdict else "",
                            fmt(float(grid.t_ase[index])),
                            fmt(float(grid.t_lse[index])),
                            "OK",
                            "",
                        ]
                    )
    except OSError as exc:
        raise IoFailure(f"could not write CSV to {path}: {exc}") from exc


def emit_heatmap(grid: SweepGrid, path) -> None:
    """Render a two-axis grid as a deterministic SVG heatmap (see heatmap)."""
    from .heatmap import render_heatmap_svg

    if len(grid.axes) != 2:
        raise NotTwoDimensional("emit_heatmap requires a grid over exactly 2 axes")
    try:
        with open(path, "w") as handle:
            handle.write(render_heatmap_svg(grid))
    except OSError as exc:
        raise IoFailure(f"could not write heatmap to {path}: {exc}") from exc
