"""Grids, marching-squares level curves, sign domains, and component censuses.

The level set ``{H = 0}`` is traced cell by cell: each grid cell contributes
0, 1 or 2 segments whose endpoints are linear interpolations along cell
edges.  Segments in adjacent cells share edge crossings exactly (same float
computation), so components are formed by union-find over global edge ids
with no geometric tolerance.  Exact zeros at nodes count as positive, which
keeps the trace deterministic.

Sign domains (nodal domains of H) are connected components of same-sign
nodes under 4-adjacency; areas are metric node sums.  The global sphere
count runs the tracer on two antipodal stereographic charts and counts each
component exactly once: components whose trace stays inside a hemisphere are
owned by that chart, equator-crossing traces are matched between charts by
their crossing points, and traces hugging the equator band belong to the
canonical (south) chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .sphere import (
    NORTH_TO_SOUTH,
    SphereFieldSample,
    antipodal_view,
    cap_chart_radius,
    eval_Hn,
    inverse_stereographic,
)

__all__ = [
    "ChartGrid",
    "CurveComponent",
    "LevelCurveSet",
    "DomainSet",
    "ComponentCensus",
    "GlobalSphereCensus",
    "build_chart_grid",
    "extract_level_curves",
    "sign_domains",
    "component_census",
    "global_sphere_census",
    "global_census_from_evaluators",
]

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])

# Segment table by cell code (bit0..3 = bl, br, tr, tl positive), local edges
# 0=bottom, 1=right, 2=top, 3=left.  Codes 5 and 10 are resolved by the sign
# of the cell-center bilinear value.
_SEGMENTS = {
    1: [(0, 3)], 14: [(0, 3)],
    2: [(0, 1)], 13: [(0, 1)],
    4: [(1, 2)], 11: [(1, 2)],
    8: [(2, 3)], 7: [(2, 3)],
    3: [(3, 1)], 12: [(3, 1)],
    6: [(0, 2)], 9: [(0, 2)],
}
_SADDLE = {
    (5, True): [(0, 1), (2, 3)],
    (5, False): [(0, 3), (1, 2)],
    (10, True): [(0, 3), (1, 2)],
    (10, False): [(0, 1), (2, 3)],
}


@dataclass(frozen=True, eq=False)
class ChartGrid:
    """Square lattice of chart coordinates with per-node metric factors."""

    kind: str  # "plane" or "sphere"
    half_width: float
    spacing: float  # effective spacing (<= requested)
    nx: int
    ny: int
    rotation: np.ndarray | None = None

    @property
    def xs(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.ny)

    @property
    def nodes(self) -> np.ndarray:
        return self.xs[None, :] + 1j * self.ys[:, None]

    def metric_at(self, z) -> np.ndarray:
        """Length scale factor: 1 on the plane, 2/(1+|z|^2) on the sphere."""
        if self.kind == "plane":
            return np.ones_like(np.asarray(z, dtype=np.complex128), dtype=np.float64)
        return 2.0 / (1.0 + np.abs(z) ** 2)

    @property
    def node_metric(self) -> np.ndarray:
        return self.metric_at(self.nodes)

    @property
    def metric_area_weights(self) -> np.ndarray:
        """Per-node metric area contribution (lambda^2 h^2)."""
        return self.node_metric**2 * self.spacing**2


def build_chart_grid(
    chart: str, half_width: float, spacing: float, rotation: np.ndarray | None = None
) -> ChartGrid:
    """Grid whose nodes cover ``[-half_width, half_width]^2`` at pitch <= spacing."""
    if spacing <= 0.0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    if half_width < spacing:
        raise ValueError("half_width must be at least one spacing")
    if chart not in ("plane", "sphere"):
        raise ValueError(f"chart must be 'plane' or 'sphere', got {chart!r}")
    n = int(math.ceil(2.0 * half_width / spacing - 1e-9)) + 1
    eff = 2.0 * half_width / (n - 1)
    return ChartGrid(kind=chart, half_width=half_width, spacing=eff, nx=n, ny=n, rotation=rotation)


@dataclass(eq=False)
class CurveComponent:
    """One connected component of the traced level curve."""

    seg_a: np.ndarray  # complex endpoints
    seg_b: np.ndarray
    seg_edges: np.ndarray  # (k, 2) int, global edge ids of the endpoints
    cells: np.ndarray  # (k, 2) int, (iy, ix)
    metric_length: float
    touches_boundary: bool
    min_radius: float
    max_radius: float


@dataclass(eq=False)
class LevelCurveSet:
    grid: ChartGrid
    components: list[CurveComponent] = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return len(self.components)


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self):
        self.parent = {}

    def find(self, a):
        parent = self.parent
        root = parent.setdefault(a, a)
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def extract_level_curves(grid: ChartGrid, values: np.ndarray) -> LevelCurveSet:
    """Marching-squares trace of ``{values = 0}`` with union-find components."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (grid.ny, grid.nx):
        raise ValueError(f"values must have shape {(grid.ny, grid.nx)}, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("grid values must be finite")

    s = v >= 0.0
    code = (
        s[:-1, :-1].astype(np.int8)
        | (s[:-1, 1:].astype(np.int8) << 1)
        | (s[1:, 1:].astype(np.int8) << 2)
        | (s[1:, :-1].astype(np.int8) << 3)
    )
    active_iy, active_ix = np.nonzero((code != 0) & (code != 15))
    if len(active_iy) == 0:
        return LevelCurveSet(grid=grid)

    xs, ys, h, nx = grid.xs, grid.ys, grid.spacing, grid.nx
    uf = _UnionFind()
    seg_edges: list[tuple[int, int]] = []
    seg_pts: list[tuple[complex, complex]] = []
    seg_cell: list[tuple[int, int]] = []

    def edge_crossing(edge: int, iy: int, ix: int) -> tuple[int, complex]:
        # local edge -> (global edge id, crossing point)
        if edge == 0:  # bottom: (iy,ix)-(iy,ix+1)
            ey, ex, horiz = iy, ix, True
        elif edge == 2:  # top
            ey, ex, horiz = iy + 1, ix, True
        elif edge == 3:  # left: (iy,ix)-(iy+1,ix)
            ey, ex, horiz = iy, ix, False
        else:  # right
            ey, ex, horiz = iy, ix + 1, False
        if horiz:
            va, vb = v[ey, ex], v[ey, ex + 1]
            t = va / (va - vb)
            return 2 * (ey * nx + ex), complex(xs[ex] + t * h, ys[ey])
        va, vb = v[ey, ex], v[ey + 1, ex]
        t = va / (va - vb)
        return 2 * (ey * nx + ex) + 1, complex(xs[ex], ys[ey] + t * h)

    for iy, ix in zip(active_iy.tolist(), active_ix.tolist()):
        c = int(code[iy, ix])
        if c in (5, 10):
            center = v[iy, ix] + v[iy, ix + 1] + v[iy + 1, ix + 1] + v[iy + 1, ix]
            pairs = _SADDLE[(c, center >= 0.0)]
        else:
            pairs = _SEGMENTS[c]
        for ea, eb in pairs:
            ida, pa = edge_crossing(ea, iy, ix)
            idb, pb = edge_crossing(eb, iy, ix)
            uf.union(ida, idb)
            seg_edges.append((ida, idb))
            seg_pts.append((pa, pb))
            seg_cell.append((iy, ix))

    groups: dict[int, list[int]] = {}
    for i, (ida, _idb) in enumerate(seg_edges):
        r = uf.find(ida)
        groups.setdefault(r, []).append(i)

    ncy, ncx = grid.ny - 1, grid.nx - 1
    components = []
    for idxs in groups.values():
        a = np.array([seg_pts[i][0] for i in idxs], dtype=np.complex128)
        b = np.array([seg_pts[i][1] for i in idxs], dtype=np.complex128)
        edges = np.array([seg_edges[i] for i in idxs], dtype=np.int64)
        cells = np.array([seg_cell[i] for i in idxs], dtype=np.int64)
        mid = 0.5 * (a + b)
        length = float(np.sum(np.abs(b - a) * grid.metric_at(mid)))
        touches = bool(
            np.any((cells[:, 0] == 0) | (cells[:, 0] == ncy - 1))
            or np.any((cells[:, 1] == 0) | (cells[:, 1] == ncx - 1))
        )
        radii = np.concatenate([np.abs(a), np.abs(b)])
        components.append(
            CurveComponent(
                seg_a=a,
                seg_b=b,
                seg_edges=edges,
                cells=cells,
                metric_length=length,
                touches_boundary=touches,
                min_radius=float(radii.min()),
                max_radius=float(radii.max()),
            )
        )
    # deterministic order: by first cell then min radius
    components.sort(key=lambda comp: (comp.cells[0, 0], comp.cells[0, 1], comp.min_radius))
    return LevelCurveSet(grid=grid, components=components)


@dataclass(eq=False)
class DomainSet:
    """Sign regions (nodal domains) of the gridded field."""

    labels: np.ndarray  # (ny, nx) int, 1..n_regions
    areas: np.ndarray  # metric area per label, index 0 unused
    n_regions: int


def sign_domains(grid: ChartGrid, values: np.ndarray) -> DomainSet:
    """Label same-sign 4-connected node regions and accumulate metric areas."""
    v = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("grid values must be finite")
    pos = v >= 0.0
    lab_pos, n_pos = ndimage.label(pos, structure=_FOUR_CONNECTED)
    lab_neg, n_neg = ndimage.label(~pos, structure=_FOUR_CONNECTED)
    labels = np.where(pos, lab_pos, lab_neg + n_pos)
    areas = np.bincount(
        labels.ravel(), weights=grid.metric_area_weights.ravel(), minlength=n_pos + n_neg + 1
    )
    return DomainSet(labels=labels, areas=areas, n_regions=n_pos + n_neg)


def _min_adjacent_area(comp: CurveComponent, domains: DomainSet) -> float:
    cy, cx = comp.cells[:, 0], comp.cells[:, 1]
    labs = np.concatenate(
        [
            domains.labels[cy, cx],
            domains.labels[cy, cx + 1],
            domains.labels[cy + 1, cx + 1],
            domains.labels[cy + 1, cx],
        ]
    )
    return float(domains.areas[np.unique(labs)].min())


@dataclass(eq=False)
class ComponentCensus:
    """Counts of curve components relative to a disc/cap region."""

    n_inside: int
    n_star: int
    inside_min_adjacent_areas: np.ndarray  # sorted, one entry per inside component
    total_length_in_region: float
    region_chart_radius: float
    delta: float | None = None

    def n_small(self, delta: float) -> int:
        return int(np.count_nonzero(self.inside_min_adjacent_areas < delta))

    def n_large(self, delta: float) -> int:
        return self.n_inside - self.n_small(delta)


def _region_chart_radius(grid: ChartGrid, region: tuple[str, float]) -> float:
    kind, size = region
    if kind == "disc":
        return float(size)
    if kind == "cap":
        if grid.kind != "sphere":
            raise ValueError("cap regions require a sphere chart")
        return cap_chart_radius(size)
    raise ValueError(f"unknown region kind {kind!r}")


def component_census(
    curves: LevelCurveSet,
    domains: DomainSet,
    region: tuple[str, float],
    delta: float | None = None,
) -> ComponentCensus:
    """Census of components inside / intersecting the region, with delta data.

    A component is inside iff every segment endpoint is strictly inside the
    open region and its trace never reaches the grid boundary; it intersects
    iff any endpoint lies in the closed region.  delta-smallness compares the
    smallest adjacent nodal-domain metric area against ``delta``.
    """
    grid = curves.grid
    rho = _region_chart_radius(grid, region)
    if rho + 2.0 * grid.spacing > grid.half_width:
        raise ValueError("region must be covered by the grid with a 2-cell margin")

    n_inside = 0
    n_star = 0
    small_areas = []
    length = 0.0
    for comp in curves.components:
        radii_a, radii_b = np.abs(comp.seg_a), np.abs(comp.seg_b)
        if not comp.touches_boundary and radii_a.max() < rho and radii_b.max() < rho:
            n_inside += 1
            small_areas.append(_min_adjacent_area(comp, domains))
        if radii_a.min() <= rho or radii_b.min() <= rho:
            n_star += 1
        mid = 0.5 * (comp.seg_a + comp.seg_b)
        in_region = np.abs(mid) < rho
        if np.any(in_region):
            length += float(
                np.sum(
                    np.abs(comp.seg_b - comp.seg_a)[in_region]
                    * grid.metric_at(mid[in_region])
                )
            )
    return ComponentCensus(
        n_inside=n_inside,
        n_star=n_star,
        inside_min_adjacent_areas=np.sort(np.asarray(small_areas, dtype=np.float64)),
        total_length_in_region=length,
        region_chart_radius=rho,
        delta=delta,
    )


@dataclass(eq=False)
class GlobalSphereCensus:
    """Whole-sphere component count from the two antipodal charts."""

    count: int
    flagged: bool
    match_failures: int
    total_length: float
    inside_min_adjacent_areas: np.ndarray
    component_points: list[np.ndarray] | None
    spacing: float

    def n_small(self, delta: float) -> int:
        return int(np.count_nonzero(self.inside_min_adjacent_areas < delta))

    def n_large(self, delta: float) -> int:
        return self.count - self.n_small(delta)


def _ordered_path(comp: CurveComponent) -> tuple[np.ndarray, bool]:
    """Polyline points of the component in path order; second value is True
    for closed loops (first point repeated at the end)."""
    edges = comp.seg_edges
    k = len(edges)
    adj: dict[int, list[tuple[int, int]]] = {}
    for i in range(k):
        adj.setdefault(int(edges[i, 0]), []).append((i, 0))
        adj.setdefault(int(edges[i, 1]), []).append((i, 1))
    start_edge = None
    for e, inc in adj.items():
        if len(inc) == 1:
            start_edge = e
            break
    closed = start_edge is None
    if closed:
        start_edge = int(edges[0, 0])

    def endpoint(i: int, end: int) -> complex:
        return comp.seg_a[i] if end == 0 else comp.seg_b[i]

    visited = np.zeros(k, dtype=bool)
    cur = start_edge
    i0, e0 = adj[cur][0]
    pts = [endpoint(i0, e0)]
    while True:
        step = None
        for i, end in adj[cur]:
            if not visited[i]:
                step = (i, end)
                break
        if step is None:
            break
        i, end = step
        visited[i] = True
        pts.append(endpoint(i, 1 - end))
        cur = int(edges[i, 1 - end])
    return np.asarray(pts, dtype=np.complex128), closed


def _wrap_angle(x):
    return (np.asarray(x) + math.pi) % (2.0 * math.pi) - math.pi


def _crossing_interval(pts: np.ndarray) -> tuple[float, float]:
    """Circular mean and half-span of the unit-circle crossings of a path piece."""
    a, b = pts[:-1], pts[1:]
    ra, rb = np.abs(a), np.abs(b)
    mask = (ra >= 1.0) != (rb >= 1.0)
    if np.any(mask):
        a, b = a[mask], b[mask]
        d = b - a
        qa = np.abs(d) ** 2
        qb = 2.0 * (a.real * d.real + a.imag * d.imag)
        qc = np.abs(a) ** 2 - 1.0
        disc = np.sqrt(np.maximum(qb * qb - 4.0 * qa * qc, 0.0))
        t1 = (-qb - disc) / (2.0 * qa)
        t2 = (-qb + disc) / (2.0 * qa)
        t = np.where((t1 >= 0.0) & (t1 <= 1.0), t1, t2)
        ang = np.angle(a + t * d)
    else:  # degenerate: endpoints exactly on the circle
        ang = np.angle(pts)
    mean = math.atan2(float(np.sin(ang).sum()), float(np.cos(ang).sum()))
    half = float(np.max(np.abs(_wrap_angle(ang - mean))))
    return mean, half


def _transit_intervals(
    path: np.ndarray, closed: bool, band_lo: float, band_hi: float
) -> list[tuple[float, float]]:
    """Crossing intervals of full band transits (below band_lo to above band_hi).

    Shallow incursions that enter the band and retreat emit nothing, which
    keeps the emitted transits chart-symmetric: the band edges are mirror
    images under the antipodal coordinate change z -> 1/z.
    """
    if closed:
        pts = path[:-1]
        k0 = int(np.argmin(np.abs(pts)))
        path = np.concatenate([pts[k0:], pts[: k0 + 1]])
    r = np.abs(path)
    state = 0  # -1 below the band, +1 above, 0 unseen
    anchor = 0
    intervals = []
    for j in range(len(path)):
        if r[j] < band_lo:
            side = -1
        elif r[j] > band_hi:
            side = 1
        else:
            continue
        if side == state:
            anchor = j
        elif state == 0:
            state, anchor = side, j
        else:
            intervals.append(_crossing_interval(path[anchor : j + 1]))
            state, anchor = side, j
    return intervals


def _chart_points_to_sphere(z: np.ndarray, north_chart: bool) -> np.ndarray:
    pts = inverse_stereographic(z)
    if north_chart:
        pts = pts @ NORTH_TO_SOUTH  # symmetric, so this is the rotation itself
    return pts


def global_census_from_evaluators(
    f_south,
    f_north,
    spacing_target: float,
    delta: float | None = None,
    collect_points: bool = False,
) -> GlobalSphereCensus:
    """Two-chart global component count for arbitrary chart evaluators.

    ``f_south(z)`` and ``f_north(z)`` give the field in the south and north
    stereographic charts; the sphere-metric spacing is at most
    ``spacing_target`` everywhere in the owned region ``|z| <= 1``.
    """
    if spacing_target <= 0.0:
        raise ValueError("spacing_target must be positive")
    h = spacing_target / 2.0  # metric factor is at most 2 on |z| <= 1
    grid = build_chart_grid("sphere", 1.0 + 5.0 * h, h)
    heff = grid.spacing
    band_lo, band_hi = math.exp(-2.0 * heff), math.exp(2.0 * heff)
    # Length partition: the parallel at south-chart radius 1 + heff splits the
    # sphere between the charts; using the equator itself would double-count
    # traces that lie exactly on it (chord midpoints fall inside both discs).
    length_cut = (1.0 + heff, 1.0 / (1.0 + heff))

    count = 0
    small_areas: list[float] = []
    points: list[np.ndarray] = []
    total_length = 0.0
    # (chart, arc, circular crossing intervals) of the full equator transits
    matching: list[tuple[int, int, list[tuple[float, float]]]] = []
    arc_areas: dict[tuple[int, int], float] = {}
    arc_points: dict[tuple[int, int], np.ndarray] = {}

    for chart_id, f in ((0, f_south), (1, f_north)):
        values = np.asarray(f(grid.nodes), dtype=np.float64)
        curves = extract_level_curves(grid, values)
        domains = sign_domains(grid, values)
        for arc_id, comp in enumerate(curves.components):
            mid = 0.5 * (comp.seg_a + comp.seg_b)
            sel = np.abs(mid) < length_cut[chart_id]
            if np.any(sel):
                total_length += float(
                    np.sum(np.abs(comp.seg_b - comp.seg_a)[sel] * grid.metric_at(mid[sel]))
                )
            crossing_class = comp.min_radius < band_lo and comp.max_radius > band_hi
            owned = (not crossing_class) and (
                comp.min_radius < band_lo
                or (comp.max_radius <= band_hi and chart_id == 0)
            )
            if crossing_class:
                key = (chart_id, arc_id)
                path, closed = _ordered_path(comp)
                matching.append((chart_id, arc_id, _transit_intervals(path, closed, band_lo, band_hi)))
                arc_areas[key] = _min_adjacent_area(comp, domains)
                if collect_points:
                    arc_points[key] = _chart_points_to_sphere(
                        np.concatenate([comp.seg_a, comp.seg_b]), chart_id == 1
                    )
            elif owned:
                count += 1
                small_areas.append(_min_adjacent_area(comp, domains))
                if collect_points:
                    points.append(
                        _chart_points_to_sphere(
                            np.concatenate([comp.seg_a, comp.seg_b]), chart_id == 1
                        )
                    )

    # Match transit crossing intervals between charts (the antipodal chart sees
    # the mirrored angle -theta) and count each merged group of arcs once.
    match_failures = 0
    tol = 2.0 * heff
    south = [(aid, mu, hs) for cid, aid, ivs in matching if cid == 0 for mu, hs in ivs]
    north = [(aid, mu, hs) for cid, aid, ivs in matching if cid == 1 for mu, hs in ivs]
    uf = _UnionFind()
    for s_aid, s_mu, s_hs in south:
        hit = False
        for n_aid, n_mu, n_hs in north:
            if abs(float(_wrap_angle(s_mu + n_mu))) <= s_hs + n_hs + tol:
                uf.union((0, s_aid), (1, n_aid))
                hit = True
        if not hit:
            match_failures += 1
    for n_aid, n_mu, n_hs in north:
        if not any(
            abs(float(_wrap_angle(s_mu + n_mu))) <= s_hs + n_hs + tol
            for _s_aid, s_mu, s_hs in south
        ):
            match_failures += 1

    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for cid, aid, _ivs in matching:
        groups.setdefault(uf.find((cid, aid)), []).append((cid, aid))
    for members in groups.values():
        count += 1
        small_areas.append(min(arc_areas[m] for m in members))
        if collect_points:
            points.append(np.concatenate([arc_points[m] for m in members], axis=0))

    return GlobalSphereCensus(
        count=count,
        flagged=match_failures > 0,
        match_failures=match_failures,
        total_length=total_length,
        inside_min_adjacent_areas=np.sort(np.asarray(small_areas, dtype=np.float64)),
        component_points=points if collect_points else None,
        spacing=heff,
    )


def global_sphere_census(
    sample: SphereFieldSample,
    spacing_target: float,
    delta: float | None = None,
    collect_points: bool = False,
) -> GlobalSphereCensus:
    """Whole-sphere census of the degree-n lemniscate of ``sample``."""
    rev = antipodal_view(sample)
    return global_census_from_evaluators(
        lambda z: eval_Hn(sample, z),
        lambda z: eval_Hn(rev, z),
        spacing_target,
        delta=delta,
        collect_points=collect_points,
    )
