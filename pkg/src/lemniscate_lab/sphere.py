"""Degree-n spherical random polynomial pair, stereographic geometry, rotations.

The pair ``p_n, q_n`` has coefficients ``xi_k sqrt(C(n,k))`` on ``z^k``; its
normalized field ``F_n = p_n / (1+|z|^2)^{n/2}`` has unit variance everywhere
(binomial identity), and ``H_n = |F_n|^2 - |F_n~|^2`` vanishes exactly on the
degree-n lemniscate in chart coordinates.

Chart conventions: the projection ``zeta(u, v, w) = (u + iv)/(1 - w)`` sends
the south pole to 0 and the north pole to the point at infinity.  The
antipodal chart (projection after the 180-degree rotation about the u-axis)
has coordinate ``1/z``, and ``|F_n|`` there equals ``|F_n|`` of the field with
reversed coefficient vector, which is how the north chart is evaluated without
ever forming large ``|z|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .plane import _eval_weighted_series
from .rng import CoefficientDraw, StreamSeed, derive_stream, draw_complex_gaussians, generator

__all__ = [
    "SphereFieldSample",
    "stereographic",
    "inverse_stereographic",
    "rotation_to_south",
    "sample_sphere_pair",
    "eval_normalized_Fn",
    "eval_Hn",
    "antipodal_view",
    "chart_to_base",
    "scaled_covariance_gap",
    "uniform_sphere_points",
    "cap_chart_radius",
    "cap_area",
]

SOUTH = np.array([0.0, 0.0, -1.0])
NORTH = np.array([0.0, 0.0, 1.0])
# Fixed tie-break for antipodal inputs: 180 degrees about the u-axis.
NORTH_TO_SOUTH = np.diag([1.0, -1.0, -1.0])


def _check_unit(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != 3:
        raise ValueError("sphere points are 3-vectors")
    if np.any(np.abs(np.sum(x * x, axis=-1) - 1.0) > 1e-10):
        raise ValueError("sphere point is not unit length")
    return x


def stereographic(x) -> complex | np.ndarray:
    """(u + iv)/(1 - w); the north pole maps to complex infinity."""
    x = _check_unit(x)
    u, v, w = x[..., 0], x[..., 1], x[..., 2]
    denom = 1.0 - w
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0.0, (u + 1j * v) / np.where(denom > 0.0, denom, 1.0), complex(np.inf))
    return out if out.shape else complex(out[()])


def inverse_stereographic(z) -> np.ndarray:
    """Unit sphere point of a chart coordinate; infinity maps to the north pole."""
    zz = np.asarray(z, dtype=np.complex128)
    s = np.abs(zz) ** 2
    finite = np.isfinite(s)
    s_safe = np.where(finite, s, 1.0)
    denom = 1.0 + s_safe
    pts = np.stack(
        [
            np.where(finite, 2.0 * zz.real / denom, 0.0),
            np.where(finite, 2.0 * zz.imag / denom, 0.0),
            np.where(finite, (s_safe - 1.0) / denom, 1.0),
        ],
        axis=-1,
    )
    return pts


def rotation_to_south(x0) -> np.ndarray:
    """Rotation g with g @ x0 = south pole, rotating in the plane span(x0, south).

    Identity when x0 is already the south pole; the fixed 180-degree rotation
    about the u-axis when x0 is the north pole.
    """
    x0 = _check_unit(x0)
    c = float(np.dot(x0, SOUTH))
    if c >= 1.0 - 1e-15:
        return np.eye(3)
    if c <= -1.0 + 1e-15:
        return NORTH_TO_SOUTH.copy()
    axis = np.cross(x0, SOUTH)
    axis /= np.linalg.norm(axis)
    s = math.sqrt(max(0.0, 1.0 - c * c))
    k = np.array(
        [[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]]
    )
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


@dataclass(frozen=True)
class SphereFieldSample:
    """One realization of (p_n, q_n) with the cached half-log-binomial table."""

    degree: int
    coeffs_p: CoefficientDraw
    coeffs_q: CoefficientDraw
    log_binomial_half: np.ndarray

    def __post_init__(self):
        if len(self.coeffs_p) != self.degree + 1 or len(self.coeffs_q) != self.degree + 1:
            raise ValueError("coefficient vectors must have length degree + 1")


def _log_binomial_half(n: int) -> np.ndarray:
    k = np.arange(n + 1, dtype=np.float64)
    table = 0.5 * (gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0))
    table.setflags(write=False)
    return table


def sample_sphere_pair(master_seed: int, label: str, index: int, n: int) -> SphereFieldSample:
    """Draw independent coefficient vectors for p_n and q_n."""
    if n < 1:
        raise ValueError(f"degree must be >= 1, got {n}")
    cp = draw_complex_gaussians(derive_stream(master_seed, label, index, 0), n + 1)
    cq = draw_complex_gaussians(derive_stream(master_seed, label, index, 1), n + 1)
    return SphereFieldSample(
        degree=n, coeffs_p=cp, coeffs_q=cq, log_binomial_half=_log_binomial_half(n)
    )


def antipodal_view(sample: SphereFieldSample) -> SphereFieldSample:
    """Sample whose |F_n| in the base chart equals |F_n| of ``sample`` in the
    antipodal chart (coefficient vectors reversed)."""
    rev_p = CoefficientDraw(sample.coeffs_p.values[::-1].copy(), sample.coeffs_p.seed)
    rev_q = CoefficientDraw(sample.coeffs_q.values[::-1].copy(), sample.coeffs_q.seed)
    return SphereFieldSample(
        degree=sample.degree,
        coeffs_p=rev_p,
        coeffs_q=rev_q,
        log_binomial_half=sample.log_binomial_half,
    )


def eval_normalized_Fn(sample: SphereFieldSample, half: str, z) -> np.ndarray:
    """Evaluate the unit-variance field of one half ('p' or 'q') at chart points."""
    if half == "p":
        coeffs = sample.coeffs_p.values
    elif half == "q":
        coeffs = sample.coeffs_q.values
    else:
        raise ValueError(f"half must be 'p' or 'q', got {half!r}")
    zz = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(zz)):
        raise ValueError("chart points must be finite; use the antipodal chart near infinity")
    log_base = -0.5 * sample.degree * np.log1p(np.abs(zz) ** 2)
    out = _eval_weighted_series(coeffs, zz, log_base, np.diff(sample.log_binomial_half))
    return out if out.shape else out[()]


def eval_Hn(sample: SphereFieldSample, z) -> np.ndarray:
    """H_n(z) = |F_n(z)|^2 - |F_n~(z)|^2; zero set is the lemniscate in chart coords."""
    fp = eval_normalized_Fn(sample, "p", z)
    fq = eval_normalized_Fn(sample, "q", z)
    return np.abs(fp) ** 2 - np.abs(fq) ** 2


def chart_to_base(z, rotation: np.ndarray) -> np.ndarray:
    """Base-chart coordinates of the rotated-chart points ``z``.

    The rotated chart sends sphere point x to ``zeta(g x)``; this returns
    ``zeta(g^T zeta^{-1}(z))`` so the base-chart evaluator can be used.
    """
    pts = inverse_stereographic(z)
    base_pts = pts @ rotation  # (g^T @ p) per point
    return stereographic(base_pts)


def scaled_covariance_gap(n: int, R: float, z: complex, w: complex) -> float:
    """Distance between the rescaled degree-n covariance and its limit exp(z conj(w)/4)."""
    if not (0.0 < R < math.pi * math.sqrt(n) / 2.0):
        raise ValueError("R must lie in (0, pi*sqrt(n)/2)")
    if abs(z) > R or abs(w) > R:
        raise ValueError("|z| and |w| must not exceed R")
    x = R / math.sqrt(n)
    scale = math.sin(x) ** 2 / (R * R * (1.0 + math.cos(x)) ** 2)
    c = z * np.conj(w) * scale
    a = n * cmath.log(1.0 + c)
    b = z * np.conj(w) / 4.0
    return abs(cmath.exp(a) - cmath.exp(b))


def uniform_sphere_points(seed: StreamSeed, count: int) -> np.ndarray:
    """``count`` points uniform on the unit sphere, deterministic in ``seed``."""
    g = generator(seed)
    w = 1.0 - 2.0 * g.random(count)
    phi = 2.0 * math.pi * g.random(count)
    s = np.sqrt(np.maximum(0.0, 1.0 - w * w))
    return np.stack([s * np.cos(phi), s * np.sin(phi), w], axis=-1)


def cap_chart_radius(r: float) -> float:
    """Chart-disc radius of the geodesic cap B(south pole; r): tan(r/2)."""
    if not (0.0 < r < math.pi):
        raise ValueError("cap radius must lie in (0, pi)")
    return math.tan(r / 2.0)


def cap_area(r: float) -> float:
    """Spherical area (steradians) of a geodesic cap of radius r."""
    return 2.0 * math.pi * (1.0 - math.cos(r))
