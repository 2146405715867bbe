"""Monte Carlo campaigns with deterministic seeding and uncertainty reporting.

Every campaign is a pure function of (configuration, master seed): sample i
draws from the stream (master_seed, label, i), excluded slots retry once at
the deterministic replacement index m + i, and aggregation runs in sample
index order, so thread count and scheduling never change the numbers.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammaln

from . import plane as pl
from . import sphere as sph
from . import topology as tp
from . import winding as wd
from .rng import derive_stream, draw_complex_gaussians, generator

__all__ = [
    "ExcludedSample",
    "EstimateReport",
    "LocalCountPair",
    "SandwichReport",
    "SmallComponentReport",
    "CheckResult",
    "DistributionChecksReport",
    "estimate_cns_plane",
    "estimate_sphere_global",
    "estimate_local_count_sphere",
    "estimate_length",
    "estimate_zero_pole_intensity",
    "check_sandwich",
    "small_component_scaling",
    "distribution_checks",
    "default_sphere_spacing",
    "reports_agree",
]

DEFAULT_PLANE_SPACING = 0.04
DEFAULT_ZERO_SPACING = 0.1
DEFAULT_TAIL_TOL = 1e-12
MAX_EXCLUDED_FRACTION = 0.05


def default_sphere_spacing(n: int) -> float:
    """Sphere-metric grid target: nodal features live at scale 1/sqrt(n)."""
    return 0.15 / math.sqrt(n)


class ExcludedSample(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(eq=False)
class EstimateReport:
    estimator: str
    estimate: float
    stderr: float
    ci95: tuple[float, float]
    samples: int  # included sample count
    excluded: int  # slots with no value even after the retry
    excluded_reasons: dict[str, int]  # exclusion events by reason
    config: dict
    seed: int
    wall_seconds: float
    passed: bool | None
    target: float | None = None
    extra: dict = field(default_factory=dict)


def _campaign(m: int, slot, threads: int = 1):
    """Run ``slot(index)`` for indices 0..m-1 with one deterministic retry
    (index m + i) per excluded slot.  Returns (values with None holes, events)."""

    def attempt(i: int):
        events = []
        try:
            return slot(i), events
        except ExcludedSample as exc:
            events.append(exc.reason)
        try:
            return slot(m + i), events
        except ExcludedSample as exc:
            events.append(exc.reason)
            return None, events

    values: list = [None] * m
    counter: Counter = Counter()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, (value, events) in enumerate(pool.map(attempt, range(m))):
                values[i] = value
                counter.update(events)
    else:
        for i in range(m):
            values[i], events = attempt(i)
            counter.update(events)
    return values, dict(counter)


def _finish(
    name: str,
    values: list,
    events: dict,
    config: dict,
    seed: int,
    t0: float,
    target: float | None = None,
    pass_fn=None,
    extra: dict | None = None,
) -> EstimateReport:
    m = len(values)
    kept = np.array([v for v in values if v is not None], dtype=np.float64)
    excluded = m - len(kept)
    estimate = float(kept.mean()) if len(kept) else math.nan
    stderr = float(kept.std(ddof=1) / math.sqrt(len(kept))) if len(kept) > 1 else math.nan
    passed = None if pass_fn is None else bool(pass_fn(estimate, stderr))
    if excluded >= MAX_EXCLUDED_FRACTION * m and passed is not False:
        passed = False
    return EstimateReport(
        estimator=name,
        estimate=estimate,
        stderr=stderr,
        ci95=(estimate - 1.96 * stderr, estimate + 1.96 * stderr),
        samples=len(kept),
        excluded=excluded,
        excluded_reasons=events,
        config=config,
        seed=seed,
        wall_seconds=time.perf_counter() - t0,
        passed=passed,
        target=target,
        extra=extra or {},
    )


def reports_agree(a: EstimateReport, b: EstimateReport, scale_a: float = 1.0, widen: float = 1.0) -> bool:
    """True when scale_a * a and b agree within their combined 95% CIs."""
    gap = abs(scale_a * a.estimate - b.estimate)
    return gap <= widen * 1.96 * (scale_a * a.stderr + b.stderr)


# ---------------------------------------------------------------------------
# census campaigns

def estimate_cns_plane(
    R: float,
    spacing: float = DEFAULT_PLANE_SPACING,
    m: int = 200,
    master_seed: int = 0,
    threads: int = 1,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> EstimateReport:
    """Mean of N(Gamma; R) / (pi R^2) over independent plane samples."""
    if R < 2:
        raise ValueError("R must be at least 2")
    if spacing > 0.1:
        raise ValueError("spacing must be at most 0.1")
    t0 = time.perf_counter()
    label = "cns-plane"
    grid = tp.build_chart_grid("plane", R + 5 * spacing, spacing)
    nodes = grid.nodes
    validity = math.sqrt(2.0) * grid.half_width * (1 + 1e-9)

    def slot(i: int):
        sample = pl.sample_plane_pair(master_seed, label, i, R=validity, tail_tol=tail_tol)
        values = pl.eval_H_plane(sample, nodes)
        curves = tp.extract_level_curves(grid, values)
        domains = tp.sign_domains(grid, values)
        census = tp.component_census(curves, domains, ("disc", R))
        return census.n_inside

    values, events = _campaign(m, slot, threads)
    area = math.pi * R * R
    scaled = [None if v is None else v / area for v in values]
    config = {"R": R, "spacing": spacing, "m": m, "tail_tol": tail_tol}
    return _finish(
        "estimate-cns-plane",
        scaled,
        events,
        config,
        master_seed,
        t0,
        pass_fn=lambda est, se: 0.0 < est <= 1.0 / math.pi,
        extra={"counts": [v for v in values if v is not None]},
    )


def estimate_sphere_global(
    n: int,
    spacing_target: float | None = None,
    m: int = 100,
    master_seed: int = 0,
    threads: int = 1,
) -> EstimateReport:
    """Mean of the whole-sphere component count divided by the degree."""
    if n < 16:
        raise ValueError("degree must be at least 16")
    spacing_target = spacing_target or default_sphere_spacing(n)
    t0 = time.perf_counter()
    label = "sphere-global"

    def slot(i: int):
        sample = sph.sample_sphere_pair(master_seed, label, i, n)
        census = tp.global_sphere_census(sample, spacing_target)
        if census.flagged:
            raise ExcludedSample("equator_match_failure")
        return census.count / n

    values, events = _campaign(m, slot, threads)
    config = {"n": n, "spacing_target": spacing_target, "m": m}
    return _finish(
        "estimate-sphere-global",
        values,
        events,
        config,
        master_seed,
        t0,
        pass_fn=lambda est, se: 0.0 < est <= 1.0,
    )


@dataclass(eq=False)
class LocalCountPair:
    sphere: EstimateReport
    plane: EstimateReport
    agree: bool
    passed: bool


def estimate_local_count_sphere(
    n: int,
    R: float,
    spacing_target: float | None = None,
    m: int = 200,
    master_seed: int = 0,
    threads: int = 1,
    plane_spacing: float = DEFAULT_PLANE_SPACING,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> LocalCountPair:
    """Mean of N(Gamma_n; south pole, R/sqrt(n)) with its plane companion N(Gamma; R/2)."""
    if not R < math.pi * math.sqrt(n) / 2.0:
        raise ValueError("R must satisfy R < pi*sqrt(n)/2")
    spacing_target = spacing_target or default_sphere_spacing(n)
    t0 = time.perf_counter()
    label = "local-count"
    r = R / math.sqrt(n)
    rho = sph.cap_chart_radius(r)
    h_chart = spacing_target / 2.0
    grid = tp.build_chart_grid("sphere", rho + 5 * h_chart, h_chart)
    nodes = grid.nodes

    def slot(i: int):
        sample = sph.sample_sphere_pair(master_seed, label, i, n)
        values = sph.eval_Hn(sample, nodes)
        curves = tp.extract_level_curves(grid, values)
        domains = tp.sign_domains(grid, values)
        return tp.component_census(curves, domains, ("cap", r)).n_inside

    values, events = _campaign(m, slot, threads)
    config = {"n": n, "R": R, "spacing_target": spacing_target, "m": m}
    sphere_report = _finish(
        "estimate-local-sphere", values, events, config, master_seed, t0,
        pass_fn=lambda est, se: est >= 0.0,
    )

    t1 = time.perf_counter()
    plane_R = R / 2.0
    pgrid = tp.build_chart_grid("plane", plane_R + 5 * plane_spacing, plane_spacing)
    pnodes = pgrid.nodes
    validity = math.sqrt(2.0) * pgrid.half_width * (1 + 1e-9)

    def pslot(i: int):
        sample = pl.sample_plane_pair(master_seed, label + "/plane", i, R=validity, tail_tol=tail_tol)
        hv = pl.eval_H_plane(sample, pnodes)
        curves = tp.extract_level_curves(pgrid, hv)
        domains = tp.sign_domains(pgrid, hv)
        return tp.component_census(curves, domains, ("disc", plane_R)).n_inside

    pvalues, pevents = _campaign(m, pslot, threads)
    pconfig = {"R": plane_R, "spacing": plane_spacing, "m": m}
    plane_report = _finish(
        "estimate-local-plane", pvalues, pevents, pconfig, master_seed, t1,
        pass_fn=lambda est, se: est >= 0.0,
    )
    agree = reports_agree(sphere_report, plane_report)
    passed = agree and sphere_report.passed is not False and plane_report.passed is not False
    return LocalCountPair(sphere=sphere_report, plane=plane_report, agree=agree, passed=passed)


def estimate_length(
    n: int,
    region: str | tuple[str, float] = "global",
    spacing_target: float | None = None,
    m: int = 200,
    master_seed: int = 0,
    threads: int = 1,
) -> EstimateReport:
    """Mean metric length of the degree-n lemniscate, globally or in a cap."""
    spacing_target = spacing_target or default_sphere_spacing(n)
    t0 = time.perf_counter()
    if region == "global":
        label = "length-global"

        def slot(i: int):
            sample = sph.sample_sphere_pair(master_seed, label, i, n)
            census = tp.global_sphere_census(sample, spacing_target)
            if census.flagged:
                raise ExcludedSample("equator_match_failure")
            return census.total_length

        target = (math.pi**2 / 2.0) * math.sqrt(n)
        config = {"n": n, "region": "global", "spacing_target": spacing_target, "m": m}
    else:
        kind, R = region
        if kind != "cap":
            raise ValueError("region must be 'global' or ('cap', R)")
        label = "length-cap"
        r = R / math.sqrt(n)
        rho = sph.cap_chart_radius(r)
        h_chart = spacing_target / 2.0
        grid = tp.build_chart_grid("sphere", rho + 5 * h_chart, h_chart)
        nodes = grid.nodes

        def slot(i: int):
            sample = sph.sample_sphere_pair(master_seed, label, i, n)
            values = sph.eval_Hn(sample, nodes)
            curves = tp.extract_level_curves(grid, values)
            domains = tp.sign_domains(grid, values)
            return tp.component_census(curves, domains, ("cap", r)).total_length_in_region

        target = (math.pi / 8.0) * sph.cap_area(r) * math.sqrt(n)
        config = {"n": n, "region": ["cap", R], "spacing_target": spacing_target, "m": m}

    values, events = _campaign(m, slot, threads)

    def pass_fn(est, se):
        return abs(est - target) <= max(3.0 * se, 0.02 * target)

    report = _finish(
        "estimate-length", values, events, config, master_seed, t0, target=target, pass_fn=pass_fn
    )
    report.extra["relative_deviation"] = report.estimate / target - 1.0
    return report


def estimate_zero_pole_intensity(
    model: tuple[str, float | int],
    m: int = 200,
    master_seed: int = 0,
    threads: int = 1,
    spacing: float | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> EstimateReport:
    """Combined zero intensity of the two halves against the 2/pi (plane) law.

    Plane model ('plane', R): zeros of G_1 plus zeros of G_2 per unit area in
    the disc D(0; R) approximated by grid cells, target 2/pi.  Sphere model
    ('sphere', n): zeros of p_n plus q_n per steradian on a hemisphere,
    target n/(2 pi).
    """
    kind, size = model
    t0 = time.perf_counter()
    if kind == "plane":
        R = float(size)
        h = spacing or DEFAULT_ZERO_SPACING
        rect = (-R, R, -R, R)
        mask = wd.disc_cell_mask(rect, h, R)
        validity = R * math.sqrt(2.0) * (1 + 1e-9)
        label = "zeros-plane"
        ncx = mask.shape[1]
        area = float(mask.sum()) * (2.0 * R / ncx) ** 2
        target = 2.0 / math.pi

        def slot(i: int):
            sample = pl.sample_plane_pair(master_seed, label, i, R=validity, tail_tol=tail_tol)
            total = 0
            for coeffs in (sample.coeffs_1, sample.coeffs_2):
                census = wd.winding_zero_count(
                    lambda z: pl.eval_normalized_F(coeffs, z), rect, h, mask=mask
                )
                if census.flagged:
                    raise ExcludedSample("winding_unresolved")
                total += census.count
            return total / area

        config = {"model": "plane", "R": R, "spacing": h, "m": m}
    elif kind == "sphere":
        n = int(size)
        h = spacing or 0.25 / math.sqrt(n)
        rect = (-1.0, 1.0, -1.0, 1.0)
        mask = wd.disc_cell_mask(rect, h, 1.0)
        label = "zeros-sphere"
        ncx = mask.shape[1]
        hx = 2.0 / ncx
        cx = -1.0 + hx * (np.arange(ncx) + 0.5)
        cc = cx[None, :] + 1j * cx[:, None]
        lam2 = (2.0 / (1.0 + np.abs(cc) ** 2)) ** 2
        area = float((lam2 * hx * hx)[mask].sum())  # steradians
        target = n / (2.0 * math.pi)

        def slot(i: int):
            sample = sph.sample_sphere_pair(master_seed, label, i, n)
            total = 0
            for half in ("p", "q"):
                census = wd.winding_zero_count(
                    lambda z: sph.eval_normalized_Fn(sample, half, z), rect, h, mask=mask
                )
                if census.flagged:
                    raise ExcludedSample("winding_unresolved")
                total += census.count
            return total / area

        config = {"model": "sphere", "n": n, "spacing": h, "m": m}
    else:
        raise ValueError("model must be ('plane', R) or ('sphere', n)")

    values, events = _campaign(m, slot, threads)

    def pass_fn(est, se):
        return abs(est - target) <= 3.0 * se

    return _finish(
        "estimate-zeros", values, events, config, master_seed, t0, target=target, pass_fn=pass_fn
    )


@dataclass(eq=False)
class SandwichReport:
    estimator: str
    violation_fraction: float
    samples: int
    excluded: int
    excluded_reasons: dict[str, int]
    per_sample: list[dict]
    config: dict
    seed: int
    wall_seconds: float
    passed: bool


def check_sandwich(
    n: int,
    r: float,
    m_samples: int = 20,
    m_centers: int = 200,
    spacing_target: float | None = None,
    master_seed: int = 0,
    threads: int = 1,
) -> SandwichReport:
    """Per-sample integral-geometric sandwich check.

    For each sample, the center-averaged local counts sandwich the global
    count: 4 pi <N(x, r)> / sigma(B(r)) <= N_global <= 4 pi <N*(x, r)> /
    sigma(B(r)); violations are tested beyond 3 center-average standard
    errors of each side.
    """
    if not (0.0 < r < math.pi / 2.0):
        raise ValueError("cap radius must lie in (0, pi/2)")
    spacing_target = spacing_target or default_sphere_spacing(n)
    t0 = time.perf_counter()
    label = "sandwich"
    sigma_b = sph.cap_area(r)
    cos_r = math.cos(r)

    def slot(i: int):
        sample = sph.sample_sphere_pair(master_seed, label, i, n)
        census = tp.global_sphere_census(sample, spacing_target, collect_points=True)
        if census.flagged:
            raise ExcludedSample("equator_match_failure")
        centers = sph.uniform_sphere_points(
            derive_stream(master_seed, label + "/centers", i), m_centers
        )
        n_vec = np.zeros(m_centers)
        nstar_vec = np.zeros(m_centers)
        for pts in census.component_points:
            dots = pts @ centers.T
            n_vec += dots.min(axis=0) > cos_r
            nstar_vec += dots.max(axis=0) >= cos_r
        scale = 4.0 * math.pi / sigma_b
        lower = scale * float(n_vec.mean())
        upper = scale * float(nstar_vec.mean())
        se_lower = scale * float(n_vec.std(ddof=1)) / math.sqrt(m_centers)
        se_upper = scale * float(nstar_vec.std(ddof=1)) / math.sqrt(m_centers)
        violated = bool(
            lower > census.count + 3.0 * se_lower or upper < census.count - 3.0 * se_upper
        )
        return {
            "count": census.count,
            "lower": lower,
            "upper": upper,
            "se_lower": se_lower,
            "se_upper": se_upper,
            "violated": violated,
        }

    values, events = _campaign(m_samples, slot, threads)
    kept = [v for v in values if v is not None]
    fraction = float(np.mean([v["violated"] for v in kept])) if kept else math.nan
    excluded = m_samples - len(kept)
    passed = fraction <= 0.05 and excluded < MAX_EXCLUDED_FRACTION * m_samples
    return SandwichReport(
        estimator="check-sandwich",
        violation_fraction=fraction,
        samples=len(kept),
        excluded=excluded,
        excluded_reasons=events,
        per_sample=kept,
        config={"n": n, "r": r, "m_samples": m_samples, "m_centers": m_centers,
                "spacing_target": spacing_target},
        seed=master_seed,
        wall_seconds=time.perf_counter() - t0,
        passed=passed,
    )


@dataclass(eq=False)
class SmallComponentReport:
    estimator: str
    deltas: list[float]
    means: list[float]
    stderrs: list[float]
    slope: float | None
    inconclusive: bool
    samples: int
    excluded: int
    excluded_reasons: dict[str, int]
    config: dict
    seed: int
    wall_seconds: float
    passed: bool | None


def small_component_scaling(
    model: tuple[str, float | int],
    delta_list,
    m: int = 300,
    master_seed: int = 0,
    threads: int = 1,
    spacing: float | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> SmallComponentReport:
    """Mean count of delta-small components per delta with a log-log slope fit.

    The sphere model applies thresholds delta/n in steradians; all means are
    nonzero for the fit to be conclusive, and the slope is the least-squares
    fit of log(mean) against log(delta).
    """
    deltas = [float(d) for d in delta_list]
    if len(deltas) < 3 or any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta_list must be strictly increasing with at least 3 values")
    kind, size = model
    t0 = time.perf_counter()
    if kind == "plane":
        R = float(size)
        h = spacing or DEFAULT_PLANE_SPACING
        grid = tp.build_chart_grid("plane", R + 5 * h, h)
        nodes = grid.nodes
        validity = math.sqrt(2.0) * grid.half_width * (1 + 1e-9)
        label = "small-plane"

        def slot(i: int):
            sample = pl.sample_plane_pair(master_seed, label, i, R=validity, tail_tol=tail_tol)
            hv = pl.eval_H_plane(sample, nodes)
            curves = tp.extract_level_curves(grid, hv)
            domains = tp.sign_domains(grid, hv)
            census = tp.component_census(curves, domains, ("disc", R))
            return [census.n_small(d) for d in deltas]

        config = {"model": "plane", "R": R, "spacing": h, "deltas": deltas, "m": m}
    elif kind == "sphere":
        n = int(size)
        spacing_target = spacing or default_sphere_spacing(n)
        label = "small-sphere"

        def slot(i: int):
            sample = sph.sample_sphere_pair(master_seed, label, i, n)
            census = tp.global_sphere_census(sample, spacing_target)
            if census.flagged:
                raise ExcludedSample("equator_match_failure")
            return [census.n_small(d / n) for d in deltas]

        config = {"model": "sphere", "n": n, "spacing_target": spacing_target,
                  "deltas": deltas, "m": m}
    else:
        raise ValueError("model must be ('plane', R) or ('sphere', n)")

    values, events = _campaign(m, slot, threads)
    kept = np.array([v for v in values if v is not None], dtype=np.float64)
    excluded = m - len(kept)
    means = kept.mean(axis=0) if len(kept) else np.full(len(deltas), math.nan)
    stderrs = (
        kept.std(axis=0, ddof=1) / math.sqrt(len(kept))
        if len(kept) > 1
        else np.full(len(deltas), math.nan)
    )
    nz = means > 0.0
    if nz.sum() >= 2:
        slope = float(np.polyfit(np.log(np.asarray(deltas)[nz]), np.log(means[nz]), 1)[0])
        inconclusive = False
        passed = slope > 0.0 and excluded < MAX_EXCLUDED_FRACTION * m
    else:
        slope = None
        inconclusive = True
        passed = None
    return SmallComponentReport(
        estimator="small-components",
        deltas=deltas,
        means=[float(x) for x in means],
        stderrs=[float(x) for x in stderrs],
        slope=slope,
        inconclusive=inconclusive,
        samples=len(kept),
        excluded=excluded,
        excluded_reasons=events,
        config=config,
        seed=master_seed,
        wall_seconds=time.perf_counter() - t0,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# distribution checks

@dataclass(eq=False)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass(eq=False)
class DistributionChecksReport:
    estimator: str
    checks: list[CheckResult]
    samples: int
    config: dict
    seed: int
    wall_seconds: float
    passed: bool


def _coeff_matrix(seed, m: int, k: int) -> np.ndarray:
    x = generator(seed).standard_normal((m, k, 2))
    return (x[..., 0] + 1j * x[..., 1]) / math.sqrt(2.0)


def _plane_weights(zs: np.ndarray, n_terms: int) -> np.ndarray:
    """(n_terms, npts) matrix with w[k, p] = z_p^k e^{-|z_p|^2/2} / sqrt(k!)."""
    k = np.arange(n_terms)[:, None]
    r = np.abs(zs)[None, :]
    theta = np.angle(zs)[None, :]
    log_r = np.where(r > 0.0, np.log(np.where(r > 0.0, r, 1.0)), 0.0)
    logw = k * log_r - 0.5 * gammaln(k + 1.0) - 0.5 * r**2
    w = np.exp(logw) * np.exp(1j * k * theta)
    w[1:, :] = np.where(r > 0.0, w[1:, :], 0.0)
    return w


def distribution_checks(m: int = 100_000, master_seed: int = 0) -> DistributionChecksReport:
    """Bundle of distributional pass/fail diagnostics of the plane model."""
    if m < 10_000:
        raise ValueError("m must be at least 10^4")
    t0 = time.perf_counter()
    checks: list[CheckResult] = []

    # (a) H(0) = |xi|^2 - |eta|^2 is Laplace(1)
    xi = draw_complex_gaussians(derive_stream(master_seed, "dist/h0", 0, 0), m).values
    eta = draw_complex_gaussians(derive_stream(master_seed, "dist/h0", 0, 1), m).values
    h0 = np.abs(xi) ** 2 - np.abs(eta) ** 2
    p_laplace = float(stats.kstest(h0, stats.laplace(loc=0.0, scale=1.0).cdf).pvalue)
    checks.append(CheckResult("laplace_H0", p_laplace, 0.01, p_laplace > 0.01,
                              {"kind": "KS p-value"}))

    # (b) uniformity statistic at z = 0 is Uniform[-1, 1]
    xi = draw_complex_gaussians(derive_stream(master_seed, "dist/unif", 0, 0), m).values
    eta = draw_complex_gaussians(derive_stream(master_seed, "dist/unif", 0, 1), m).values
    u = (np.abs(xi) ** 2 - np.abs(eta) ** 2) / (np.abs(xi) ** 2 + np.abs(eta) ** 2)
    p_unif = float(stats.kstest(u, stats.uniform(loc=-1.0, scale=2.0).cdf).pvalue)
    checks.append(CheckResult("uniform_sphere", p_unif, 0.01, p_unif > 0.01,
                              {"kind": "KS p-value"}))

    # (c) conditional gradient variance and independence at g in {1, 1+2i}
    for tag, g in (("1", 1.0 + 0.0j), ("1+2i", 1.0 + 2.0j)):
        draws = pl.conditional_gradient_draw(
            g, derive_stream(master_seed, f"dist/grad-{tag}", 0, 0), count=m
        )
        var_target = 2.0 * (g.real**2 + g.imag**2)
        for comp in (0, 1):
            v = float(draws[:, comp].var(ddof=1))
            se = v * math.sqrt(2.0 / (m - 1))
            checks.append(
                CheckResult(
                    f"grad_var_{tag}_c{comp}",
                    v,
                    4.0 * se,
                    abs(v - var_target) <= 4.0 * se,
                    {"target": var_target},
                )
            )
        rho = float(np.corrcoef(draws[:, 0], draws[:, 1])[0, 1])
        checks.append(CheckResult(f"grad_corr_{tag}", rho, 4.0 / math.sqrt(m),
                                  abs(rho) < 4.0 / math.sqrt(m), {}))

    # (d) |F|^2 moments are shift invariant
    md = min(m, 20_000)
    probes = np.array([0.0, 1.0, 2.0 + 1.0j, 3.0j], dtype=np.complex128)
    shifts = [1.0 + 0.0j, 1.0 + 1.0j]
    radius = max(abs(p + s) for p in probes for s in shifts) * (1 + 1e-9)
    n_terms = pl.truncation_order(radius, DEFAULT_TAIL_TOL) + 1
    base = _coeff_matrix(derive_stream(master_seed, "dist/shift", 0, 0), md, n_terms)
    other = _coeff_matrix(derive_stream(master_seed, "dist/shift", 0, 1), md, n_terms)
    w0 = _plane_weights(probes, n_terms)
    sq0 = np.abs(base @ w0) ** 2  # (md, 4)
    for s_i, b in enumerate(shifts):
        wb = _plane_weights(probes + b, n_terms)
        sqb = np.abs(other @ wb) ** 2
        dmean = sq0.mean(axis=0) - sqb.mean(axis=0)
        se = np.sqrt(sq0.var(axis=0, ddof=1) / md + sqb.var(axis=0, ddof=1) / md)
        ok_mean = bool(np.all(np.abs(dmean) <= 4.0 * se))
        x0 = sq0 - sq0.mean(axis=0)
        xb = sqb - sqb.mean(axis=0)
        c0 = x0.T @ x0 / (md - 1)
        cb = xb.T @ xb / (md - 1)
        # standard error of each covariance entry, estimated from the data
        se_c0 = np.sqrt(((x0[:, :, None] * x0[:, None, :]) ** 2).mean(axis=0) / md)
        se_cb = np.sqrt(((xb[:, :, None] * xb[:, None, :]) ** 2).mean(axis=0) / md)
        ok_cov = bool(np.all(np.abs(c0 - cb) <= 4.0 * np.sqrt(se_c0**2 + se_cb**2)))
        checks.append(
            CheckResult(
                f"shift_invariance_{s_i}",
                float(np.max(np.abs(dmean) / se)),
                4.0,
                ok_mean and ok_cov,
                {"shift": [b.real, b.imag]},
            )
        )

    # (e) correlation decay of the event {|Psi| < 1} = {H < 0}
    me = min(m, 50_000)
    pts = np.array([0.0, 1.0, 2.0, 4.0], dtype=np.complex128)
    n_terms = pl.truncation_order(4.0 * (1 + 1e-9), DEFAULT_TAIL_TOL) + 1
    c1 = _coeff_matrix(derive_stream(master_seed, "dist/mix", 0, 0), me, n_terms)
    c2 = _coeff_matrix(derive_stream(master_seed, "dist/mix", 0, 1), me, n_terms)
    w = _plane_weights(pts, n_terms)
    hvals = np.abs(c1 @ w) ** 2 - np.abs(c2 @ w) ** 2
    ind = (hvals < 0.0).astype(np.float64)
    corrs = {}
    for j, t in enumerate((1.0, 2.0, 4.0), start=1):
        corrs[t] = float(np.corrcoef(ind[:, 0], ind[:, j])[0, 1])
    thr = 4.0 / math.sqrt(me)
    checks.append(
        CheckResult("mixing_decay_t4", corrs[4.0], thr, abs(corrs[4.0]) < thr,
                    {"corr_t1": corrs[1.0], "corr_t2": corrs[2.0]})
    )

    return DistributionChecksReport(
        estimator="dist-checks",
        checks=checks,
        samples=m,
        config={"m": m},
        seed=master_seed,
        wall_seconds=time.perf_counter() - t0,
        passed=all(c.passed for c in checks),
    )
