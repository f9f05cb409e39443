"""Anisotropic distance fields, nearest-point projections, and reach estimates.

The field stores, per grid cell, the distance delta(x) = min_a F*(a - x)
to a dense boundary sample of a closed set A, the index of the nearest
sample point, and an ambiguity ``gap``.  The gap is the Euclidean diameter
of the near-minimizer cluster whenever that cluster is spatially split:
cluster points are grouped by single-linkage at the source sampling scale
(``tol_unique``), so the contiguous arc of samples around a unique foot
never triggers, while genuinely multi-valued projections (two feet across
a medial axis, or a whole equidistant loop) do.

The cluster window combines the relative tie tolerance ``eps_cluster``
with an absolute floor of ``window_cells`` grid spacings; the floor is
what guarantees every cell within about one cell of the medial axis is
flagged, making the reach estimate accurate to a couple of grid cells.

Nearest-source search is brute force over spatial cell blocks, pruning the
sources per block with an exact Lipschitz bound (desk scale: <= 1024^2
cells, <= 1e4 source points); no fast marching.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .duality import DualNorm
from .errors import InputError
from .hypersurface import StarBody, sample_surface
from .integrand import Integrand

__all__ = [
    "GridSpec",
    "SourceSet",
    "boundary_source",
    "segment_source",
    "DistanceField",
    "build_field",
    "project",
    "ProjectionResult",
    "direction_check",
    "estimate_reach_F",
    "reach_comparison",
    "ReachComparison",
]

@dataclass(frozen=True, eq=False)
class GridSpec:
    """Axis-aligned cell grid; distances are sampled at cell centers."""

    lo: np.ndarray
    hi: np.ndarray
    cells: tuple

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        cells = tuple(int(c) for c in np.atleast_1d(self.cells))
        if len(cells) == 1:
            cells = cells * len(lo)
        if len(lo) != len(hi) or len(lo) != len(cells):
            raise InputError("grid bounds/cells dimension mismatch")
        if np.any(hi <= lo) or any(c < 4 for c in cells):
            raise InputError("grid box must be nonempty with at least 4 cells per axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "cells", cells)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def spacing(self):
        return (self.hi - self.lo) / np.asarray(self.cells)

    @property
    def h(self) -> float:
        return float(self.spacing.max())

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def shape(self):
        return self.cells

    def centers(self):
        axes = [
            self.lo[k] + (np.arange(self.cells[k]) + 0.5) * self.spacing[k]
            for k in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def cell_of(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.floor((x - self.lo) / self.spacing).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.asarray(self.cells)):
            raise InputError("point outside the grid box")
        return tuple(idx)


@dataclass(frozen=True, eq=False)
class SourceSet:
    """Ordered boundary sample of a closed set A.

    ``loops`` lists (start, stop, closed) index ranges; points inside one
    loop are consecutive along the underlying curve, which is what lets the
    field builder tell one contiguous foot arc from several separated feet.
    ``inside`` classifies membership in A (delta is zero there); None means
    A is just the sampled curve.
    """

    points: np.ndarray
    spacing: float
    loops: tuple
    inside: Optional[Callable] = None

    def __post_init__(self):
        if len(self.points) == 0:
            raise InputError("empty source sample")

    @classmethod
    def from_points(cls, points, inside=None, closed=True):
        points = np.asarray(points, dtype=float)
        spacing = _max_step(points, closed)
        return cls(
            points=points,
            spacing=spacing,
            loops=((0, len(points), closed),),
            inside=inside,
        )

    def membership(self, x):
        if self.inside is None:
            return np.zeros(len(np.atleast_2d(x)), dtype=bool)
        return np.asarray(self.inside(np.atleast_2d(x)), dtype=bool)


def _max_step(points, closed):
    steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    if closed and len(points) > 2:
        steps = np.append(steps, np.linalg.norm(points[0] - points[-1]))
    return float(steps.max()) if len(steps) else 0.0


def boundary_source(
    bodies: Sequence[StarBody], resolution, region: str = "complement"
) -> SourceSet:
    """Sample the boundary of a union of star bodies as a source set.

    region selects what A is: "complement" (closure of the outside; delta
    measures inward depth), "set" (the closed union itself), or "curve"
    (the boundary alone).  Boundary points falling strictly inside another
    body are dropped, so overlapping unions keep only the true boundary.
    """
    if region not in ("complement", "set", "curve"):
        raise InputError(f"unknown region {region!r}")
    pieces, loops, start = [], [], 0
    for b in bodies:
        pts = sample_surface(b, resolution).points
        keep = np.ones(len(pts), dtype=bool)
        for other in bodies:
            if other is not b:
                keep &= other.phi(pts) > 0
        if not keep.any():
            continue
        pts, closed = _rotate_kept(pts, keep)
        pieces.append(pts)
        loops.append((start, start + len(pts), closed))
        start += len(pts)
    if not pieces:
        raise InputError("no boundary points survive the union filter")
    points = np.concatenate(pieces)
    spacing = max(
        _max_step(points[a:b], closed) for (a, b, closed) in loops
    )

    inside = None
    if region == "complement":
        def inside(x, bodies=tuple(bodies)):
            x = np.atleast_2d(x)
            out = np.ones(len(x), dtype=bool)
            for b in bodies:
                out &= b.phi(x) >= 0
            return out
    elif region == "set":
        def inside(x, bodies=tuple(bodies)):
            x = np.atleast_2d(x)
            out = np.zeros(len(x), dtype=bool)
            for b in bodies:
                out |= b.phi(x) <= 0
            return out
    return SourceSet(points=points, spacing=spacing, loops=tuple(loops), inside=inside)


def _rotate_kept(pts, keep):
    """Rotate a cyclic sample so the kept points form one consecutive block."""
    if keep.all():
        return pts, True
    shift = int(np.nonzero(~keep)[0][0])
    order = np.roll(np.arange(len(pts)), -shift)
    kept = order[keep[order]]
    return pts[kept], False


def segment_source(p0, p1, n: int, inside=None) -> SourceSet:
    """Open polyline sample of the segment [p0, p1] with n points."""
    p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
    t = np.linspace(0.0, 1.0, n)
    pts = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    return SourceSet(
        points=pts,
        spacing=float(np.linalg.norm(p1 - p0) / (n - 1)),
        loops=((0, n, False),),
        inside=inside,
    )


def merge_sources(sources: Sequence[SourceSet]) -> SourceSet:
    """Concatenate source sets; membership is the union of the parts."""
    pts = np.concatenate([s.points for s in sources])
    loops, start = [], 0
    for s in sources:
        for (a, b, closed) in s.loops:
            loops.append((start + a, start + b, closed))
        start += len(s.points)
    insides = [s.inside for s in sources if s.inside is not None]
    inside = None
    if insides:
        def inside(x, fns=tuple(insides)):
            x = np.atleast_2d(x)
            out = np.zeros(len(x), dtype=bool)
            for fn in fns:
                out |= np.asarray(fn(x), dtype=bool)
            return out
    return SourceSet(
        points=pts,
        spacing=max(s.spacing for s in sources),
        loops=tuple(loops),
        inside=inside,
    )


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Grid of anisotropic distances with nearest-source indices and gaps."""

    grid: GridSpec
    source: SourceSet
    dual: DualNorm
    delta: np.ndarray
    argmin: np.ndarray
    gap: np.ndarray
    eps_cluster: float
    tol_unique: float
    window_cells: float

    @property
    def f(self) -> Integrand:
        return self.dual.base

    def delta_at(self, x) -> float:
        """Stored delta of the cell containing x."""
        return float(self.delta[self.grid.cell_of(x)])

    def gap_at(self, x) -> float:
        return float(self.gap[self.grid.cell_of(x)])

    def evaluate_delta(self, x):
        """Fresh brute-force delta at arbitrary points (not grid lookup)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(len(x))
        for i, xi in enumerate(x):
            out[i] = float(self.dual.batch_value_fast(self.source.points - xi).min())
        if self.source.inside is not None:
            out[self.source.membership(x)] = 0.0
        return out

    def to_csv(self, path):
        shape = self.grid.shape
        idx = np.indices(shape).reshape(len(shape), -1).T
        header = ",".join(["i", "j", "k"][: len(shape)] + ["delta", "gap"])
        data = np.hstack(
            [idx, self.delta.reshape(-1, 1), self.gap.reshape(-1, 1)]
        )
        np.savetxt(path, data, delimiter=",", header=header, comments="")


def _pairwise_values(dual: DualNorm, sources, centers):
    """F*(a_j - x_i) for a chunk of cells; (len(centers), len(sources))."""
    base = dual.base
    from .integrand import EuclideanNorm, QuadraticNorm

    if isinstance(base, (EuclideanNorm, QuadraticNorm)):
        if isinstance(base, QuadraticNorm):
            l = np.linalg.cholesky(base.inverse)
            s, c = sources @ l, centers @ l
        else:
            s, c = sources, centers
        d2 = (
            np.einsum("ni,ni->n", c, c)[:, None]
            + np.einsum("mi,mi->m", s, s)[None, :]
            - 2.0 * (c @ s.T)
        )
        return np.sqrt(np.maximum(d2, 0.0, out=d2), out=d2)
    diff = sources[None, :, :] - centers[:, None, :]
    flat = diff.reshape(-1, diff.shape[-1])
    return dual.batch_value_fast(flat).reshape(len(centers), len(sources))


def _loop_predecessors(source: SourceSet):
    """Index of each sample's predecessor along its loop; open-chain heads
    point to a sentinel (len) that is never a candidate."""
    n = len(source.points)
    prev = np.empty(n, dtype=np.int64)
    for (a, b, closed) in source.loops:
        prev[a:b] = np.arange(a, b) - 1
        prev[a] = b - 1 if closed else n
    return prev


def _loop_membership(source: SourceSet):
    n = len(source.points)
    ids = np.empty(n, dtype=np.int64)
    sizes = []
    for k, (a, b, _closed) in enumerate(source.loops):
        ids[a:b] = k
        sizes.append(b - a)
    return ids, sizes


def _blocks(grid: GridSpec, target: int = 640):
    """Spatial cell blocks (flat indices, circumradius) covering the grid."""
    shape = grid.shape
    dim = len(shape)
    bs = max(2, int(round(target ** (1.0 / dim))))
    flat = np.arange(int(np.prod(shape))).reshape(shape)
    spacing = grid.spacing
    ranges = [range(0, s, bs) for s in shape]
    import itertools

    for corner in itertools.product(*ranges):
        sl = tuple(slice(c, min(c + bs, s)) for c, s in zip(corner, shape))
        cells = flat[sl].ravel()
        ext = np.array([min(c + bs, s) - c for c, s in zip(corner, shape)])
        radius = 0.5 * float(np.linalg.norm(ext * spacing))
        yield cells, radius


def build_field(
    source: SourceSet,
    f: Integrand,
    grid: GridSpec,
    eps_cluster: float = 1e-3,
    tol_unique: Optional[float] = None,
    window_cells: float = 1.5,
) -> DistanceField:
    """Compute delta, nearest-source index, and ambiguity gap on the grid."""
    dual = DualNorm(f)
    _assert_even(dual)
    if grid.dim != f.dim:
        raise InputError("grid and integrand dimensions differ")
    if source.points.shape[1] != f.dim:
        raise InputError("source and integrand dimensions differ")
    h = grid.h
    if source.spacing > 1.0001 * h:
        raise InputError(
            f"source sample too sparse: spacing {source.spacing:.3g} exceeds grid h {h:.3g}"
        )
    if tol_unique is None:
        tol_unique = 3.0 * max(source.spacing, h)

    centers = grid.centers()
    n_cells = len(centers)
    pts = source.points
    prev_global = _loop_predecessors(source)
    loop_ids, loop_sizes = _loop_membership(source)
    lip = dual.grad_bound()

    delta = np.empty(n_cells)
    argmin = np.empty(n_cells, dtype=np.int64)
    suspect = np.zeros(n_cells, dtype=bool)

    # cell-bucketed candidate pruning: per spatial block, only sources whose
    # distance to the block center clears an exact Lipschitz bound can enter
    # any cell's near-minimizer cluster
    for cells_idx, radius in _blocks(grid):
        block = centers[cells_idx]
        xc = block.mean(axis=0)
        d_center = dual.batch_value_fast(pts - xc)
        mc = float(d_center.min())
        win_hi = eps_cluster * (mc + lip * radius) + window_cells * h
        cand = np.nonzero(d_center <= mc + win_hi + 2.0 * lip * radius + 1e-12)[0]
        d = _pairwise_values(dual, pts[cand], block)
        m = d.min(axis=1)
        delta[cells_idx] = m
        argmin[cells_idx] = cand[d.argmin(axis=1)]
        win = eps_cluster * m + window_cells * h
        mask = d <= (m + win)[:, None]
        # a single foot shows up as one contiguous run of samples per loop;
        # several runs (or most of a loop) mean competing feet
        prev_pos = np.searchsorted(cand, prev_global[cand])
        prev_pos_c = np.minimum(prev_pos, len(cand) - 1)
        present = cand[prev_pos_c] == prev_global[cand]
        mask_prev = np.zeros_like(mask)
        mask_prev[:, present] = mask[:, prev_pos_c[present]]
        n_runs = (mask & ~mask_prev).sum(axis=1)
        cover = np.zeros(len(block), dtype=bool)
        cand_loops = loop_ids[cand]
        for li, size in enumerate(loop_sizes):
            cols = cand_loops == li
            if cols.any():
                cover |= mask[:, cols].sum(axis=1) / size >= 0.5
        suspect[cells_idx] = (n_runs >= 2) | cover

    gap = np.zeros(n_cells)
    bad = np.nonzero(suspect)[0]
    for i in bad:
        gap[i] = _resolve_gap(
            dual, source, centers[i], eps_cluster, window_cells * h, tol_unique
        )

    if source.inside is not None:
        member = source.membership(centers)
        delta[member] = 0.0
        gap[member] = 0.0

    shape = grid.shape
    return DistanceField(
        grid=grid,
        source=source,
        dual=dual,
        delta=delta.reshape(shape),
        argmin=argmin.reshape(shape),
        gap=gap.reshape(shape),
        eps_cluster=eps_cluster,
        tol_unique=float(tol_unique),
        window_cells=window_cells,
    )


def _assert_even(dual: DualNorm):
    rng = np.random.default_rng(7)
    v = rng.standard_normal((8, dual.dim))
    fwd, bwd = dual.batch_value(v), dual.batch_value(-v)
    if not np.allclose(fwd, bwd, rtol=1e-9):
        raise InputError("conjugate norm is not even; the integrand must satisfy F(-x) = F(x)")


def _resolve_gap(dual, source, x, eps_cluster, window_abs, tol_unique):
    """Exact cluster analysis at one point; 0 means a single connected foot."""
    d = dual.batch_value_fast(source.points - x)
    m = float(d.min())
    cluster = np.nonzero(d <= m + eps_cluster * m + window_abs)[0]
    pts = source.points[cluster]
    for (lo_i, hi_i, _closed) in source.loops:
        n_in = ((cluster >= lo_i) & (cluster < hi_i)).sum()
        if n_in >= 0.5 * (hi_i - lo_i):
            return _diameter(pts)
    if len(pts) > 400:
        diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        return diag if diag > tol_unique else 0.0
    if _connected(pts, tol_unique):
        return 0.0
    return _diameter(pts)


def _diameter(pts):
    if len(pts) > 400:
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.max()))


def _connected(pts, linkage):
    """Single-linkage connectivity of a small point set at the given scale."""
    k = len(pts)
    if k <= 1:
        return True
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    adj = d2 <= linkage**2
    seen = np.zeros(k, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        j = stack.pop()
        nxt = np.nonzero(adj[j] & ~seen)[0]
        seen[nxt] = True
        stack.extend(nxt.tolist())
    return bool(seen.all())


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Nearest-point query outcome; ambiguous results keep the best foot."""

    point: np.ndarray
    delta: float
    gap: float
    ambiguous: bool
    foot_index: int
    grad_check_dev: Optional[float]


def project(field: DistanceField, x, grad_check: bool = True) -> ProjectionResult:
    """Nearest source point of x, with the gradient-formula cross-check.

    The cross-check reconstructs the foot as x - delta * grad F(grad delta)
    with grad delta from central differences at grid spacing; its deviation
    from the direct argmin is reported (expected <= 5h for unique feet).
    """
    x = np.asarray(x, dtype=float)
    field.grid.cell_of(x)  # raises if outside the box
    d = field.dual.batch_value_fast(field.source.points - x)
    m = float(d.min())
    best = int(d.argmin())
    gap = _resolve_gap(
        field.dual,
        field.source,
        x,
        field.eps_cluster,
        field.window_cells * field.grid.h,
        field.tol_unique,
    )
    gap = max(gap, field.gap_at(x))
    ambiguous = gap > field.tol_unique
    foot = field.source.points[best]

    dev = None
    if grad_check and not ambiguous and m > 2 * field.grid.h:
        h = field.grid.h
        grad = np.empty(field.grid.dim)
        for k in range(field.grid.dim):
            e = np.zeros(field.grid.dim)
            e[k] = h
            grad[k] = (
                field.evaluate_delta(x + e)[0] - field.evaluate_delta(x - e)[0]
            ) / (2 * h)
        if np.linalg.norm(grad) > 1e-12:
            rebuilt = x - m * field.f.grad(grad)
            dev = float(np.linalg.norm(rebuilt - foot))
    return ProjectionResult(
        point=foot, delta=m, gap=gap, ambiguous=ambiguous,
        foot_index=best, grad_check_dev=dev,
    )


def direction_check(field: DistanceField, body: StarBody, f: Integrand, xs) -> float:
    """max over pairs (x, project(x)) of |(x-a)/F*(x-a) - grad F(nu(a))|.

    nu(a) is the boundary normal of A at the foot, oriented toward the side
    x lies on; this exercises the identity between the anisotropic normal
    direction of the distance fiber and the image of the normal under grad F.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    worst = 0.0
    for x in xs:
        res = project(field, x, grad_check=False)
        if res.ambiguous:
            raise InputError("direction check requires uniquely projecting points")
        a = res.point
        g = body.grad_phi(a)
        nu = g / np.linalg.norm(g)
        side = 1.0 if float(body.phi(x)) > 0 else -1.0
        lhs = (x - a) / field.dual.value(x - a)
        worst = max(worst, float(np.linalg.norm(lhs - f.grad(side * nu))))
    return worst


def estimate_reach_F(field: DistanceField) -> float:
    """Largest r such that every cell with 0 < delta < r projects uniquely."""
    flagged = (field.delta > 0) & (field.gap > field.tol_unique)
    if not flagged.any():
        return float(field.delta.max())
    return float(field.delta[flagged].min())


@dataclass(frozen=True, eq=False)
class ReachComparison:
    """Euclidean vs anisotropic reach with the rolling-ball factor rho."""

    rho: float
    reach_euclidean: float
    reach_anisotropic: float
    slack: float
    ok: bool


def reach_comparison(
    field_euclid: DistanceField,
    field_aniso: DistanceField,
    dual: DualNorm,
    resolution=None,
) -> ReachComparison:
    """Check reach(A) >= rho * reach^F(A) - 4h.

    rho is the interior rolling-ball radius of the unit Wulff shape: the
    reciprocal of the largest Euclidean principal curvature over its
    boundary nodes.
    """
    ga, gb = field_euclid.grid, field_aniso.grid
    if ga.cells != gb.cells or not (
        np.allclose(ga.lo, gb.lo) and np.allclose(ga.hi, gb.hi)
    ):
        raise InputError("reach comparison requires a shared grid")
    from .curvature import curvature_table
    from .hypersurface import WulffBody
    from .integrand import EuclideanNorm

    if resolution is None:
        resolution = 2048 if dual.dim == 2 else (64, 128)
    body = WulffBody(dual=dual, center=np.zeros(dual.dim), radius=1.0)
    quad = sample_surface(body, resolution)
    euclid = EuclideanNorm(dual.dim)
    table = curvature_table(body, euclid, quad)
    rho = 1.0 / float(table.kappa.max())
    r_e = estimate_reach_F(field_euclid)
    r_f = estimate_reach_F(field_aniso)
    slack = 4.0 * field_euclid.grid.h
    ok = r_e >= rho * r_f - slack
    if not ok:
        warnings.warn(
            f"rolling-ball reach bound violated: {r_e:.4g} < {rho:.4g}*{r_f:.4g} - {slack:.4g}"
        )
    return ReachComparison(
        rho=rho, reach_euclidean=r_e, reach_anisotropic=r_f, slack=slack, ok=ok
    )
