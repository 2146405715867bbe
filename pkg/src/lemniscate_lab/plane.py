"""Plane Gaussian entire function pair, its normalized field and H-field.

The raw field is the random power series ``G(z) = sum_k xi_k z^k / sqrt(k!)``
with covariance ``exp(z * conj(w))``.  All evaluation happens on the
normalized field ``F = G / sqrt(E|G|^2)``, whose variance is 1 everywhere and
whose truncation error is controlled by a Poisson tail: dropping terms beyond
``N`` removes variance ``P[Poisson(|z|^2) > N]`` from ``F(z)``.  The H-field
``|F|^2 - |F~|^2`` of two independent halves vanishes exactly on the
lemniscate ``{|G_1/G_2| = 1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .rng import CoefficientDraw, StreamSeed, derive_stream, draw_complex_gaussians

__all__ = [
    "DegenerateSampleError",
    "PlaneFieldSample",
    "truncation_order",
    "sample_plane_pair",
    "eval_normalized_F",
    "eval_H_plane",
    "conditional_gradient_draw",
    "uniformity_statistic",
    "covariance_oracle",
]


class DegenerateSampleError(RuntimeError):
    """Both halves of a field pair vanish at a probe point (probability zero)."""


def _poisson_chernoff_cap(lam: float, tol: float) -> int:
    # Smallest m > lam with the Chernoff bound exp(-lam) (e lam / m)^m below tol/8.
    m = max(int(math.ceil(lam)) + 1, 2)
    while True:
        log_bound = -lam + m * (1.0 + math.log(lam / m))
        if log_bound < math.log(tol / 8.0):
            return m
        m = max(m + 1, int(m * 1.25))


def truncation_order(R: float, tail_tol: float) -> int:
    """Minimal N with the Poisson(R^2) upper tail beyond N below ``tail_tol``.

    The tail is summed directly in log space; a Chernoff bound caps the
    summation range and its remainder is added to every suffix sum, so the
    returned N is conservative by at most that remainder.
    """
    if not (0.0 < tail_tol < 1.0):
        raise ValueError(f"tail_tol must lie in (0, 1), got {tail_tol}")
    if not (R >= 0.0 and math.isfinite(R)):
        raise ValueError(f"R must be finite and nonnegative, got {R}")
    lam = R * R
    if lam == 0.0:
        return 0
    cap = _poisson_chernoff_cap(lam, tail_tol)
    k = np.arange(cap + 1)
    pmf = np.exp(-lam + k * math.log(lam) - gammaln(k + 1.0))
    # tail(N) = sum_{k>N} pmf, summed smallest-terms-first, plus the cap remainder
    remainder = (tail_tol / 8.0) * 0.999
    suffix = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]]) + remainder
    below = np.nonzero(suffix < tail_tol)[0]
    if len(below) == 0:
        raise RuntimeError("Poisson tail summation cap too small (internal error)")
    return int(below[0])


@dataclass(frozen=True)
class PlaneFieldSample:
    """One realization of the pair (G_1, G_2), truncated for a validity disc."""

    coeffs_1: CoefficientDraw
    coeffs_2: CoefficientDraw
    truncation_order: int
    radius_of_validity: float
    tail_tolerance: float


def sample_plane_pair(
    master_seed: int, label: str, index: int, R: float, tail_tol: float = 1e-12
) -> PlaneFieldSample:
    """Draw an independent pair of truncated plane fields valid on ``|z| <= R``."""
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    n = truncation_order(R, tail_tol)
    c1 = draw_complex_gaussians(derive_stream(master_seed, label, index, 0), n + 1)
    c2 = draw_complex_gaussians(derive_stream(master_seed, label, index, 1), n + 1)
    return PlaneFieldSample(
        coeffs_1=c1,
        coeffs_2=c2,
        truncation_order=n,
        radius_of_validity=R,
        tail_tolerance=tail_tol,
    )


def _eval_weighted_series(
    coeffs: np.ndarray, z: np.ndarray, log_base: np.ndarray, log_ratio: np.ndarray
) -> np.ndarray:
    """Kahan-compensated sum of c_k * t_k(z), t_0 = exp(log_base),
    t_k = t_{k-1} * z * exp(log_ratio[k-1]).

    Falls back to per-term log-magnitude weights when the recursion base
    would underflow (very large |z|).
    """
    n_terms = len(coeffs)
    acc = np.zeros(z.shape, dtype=np.complex128)
    comp = np.zeros_like(acc)
    if np.all(log_base > -700.0):
        t = np.exp(log_base).astype(np.complex128)
        for k in range(n_terms):
            term = coeffs[k] * t
            y = term - comp
            s = acc + y
            comp = (s - acc) - y
            acc = s
            if k + 1 < n_terms:
                t *= z * math.exp(log_ratio[k])
    else:
        r = np.abs(z)
        positive = r > 0.0
        log_r = np.where(positive, np.log(np.where(positive, r, 1.0)), 0.0)
        u = np.where(positive, z / np.where(positive, r, 1.0), 1.0)
        phase = np.ones_like(u)
        log_cum = 0.0
        for k in range(n_terms):
            log_w = log_base + k * log_r + log_cum
            term = coeffs[k] * np.exp(log_w) * phase
            if k >= 1:
                term = np.where(positive, term, 0.0)
            y = term - comp
            s = acc + y
            comp = (s - acc) - y
            acc = s
            if k + 1 < n_terms:
                log_cum += log_ratio[k]
                phase = phase * u
    return acc


def eval_normalized_F(
    coeffs: CoefficientDraw, z, radius_of_validity: float | None = None
) -> np.ndarray:
    """Evaluate the normalized plane field at ``z`` (scalar or array).

    Per-term weights are ``exp(k ln|z| - ln(k!)/2 - |z|^2/2)``; the sum is
    compensated, and ``E|F(z)|^2 = 1`` up to the truncation tolerance.
    """
    zz = np.asarray(z, dtype=np.complex128)
    if radius_of_validity is not None and np.any(np.abs(zz) > radius_of_validity * (1 + 1e-12)):
        raise ValueError("evaluation point outside the sample's radius of validity")
    n = len(coeffs.values)
    log_ratio = -0.5 * np.log(np.arange(1, n, dtype=np.float64)) if n > 1 else np.zeros(0)
    out = _eval_weighted_series(coeffs.values, zz, -0.5 * np.abs(zz) ** 2, log_ratio)
    return out if out.shape else out[()]


def eval_H_plane(sample: PlaneFieldSample, z) -> np.ndarray:
    """H(z) = |F(z)|^2 - |F~(z)|^2; its zero set is the lemniscate of the pair."""
    f1 = eval_normalized_F(sample.coeffs_1, z, sample.radius_of_validity)
    f2 = eval_normalized_F(sample.coeffs_2, z, sample.radius_of_validity)
    return np.abs(f1) ** 2 - np.abs(f2) ** 2


def conditional_gradient_draw(g: complex, seed: StreamSeed, count: int | None = None) -> np.ndarray:
    """Draw the gradient of ``|F|^2`` at 0 conditioned on ``F(0) = g``.

    Returns ``2 * (a Re xi + b Im xi, b Re xi - a Im xi)`` for a fresh standard
    complex Gaussian ``xi``; shape ``(2,)``, or ``(count, 2)`` when ``count``
    is given.
    """
    m = 1 if count is None else count
    xi = draw_complex_gaussians(seed, m).values
    a, b = float(np.real(g)), float(np.imag(g))
    out = 2.0 * np.stack(
        [a * xi.real + b * xi.imag, b * xi.real - a * xi.imag], axis=-1
    )
    return out[0] if count is None else out


def uniformity_statistic(sample: PlaneFieldSample, z) -> np.ndarray:
    """Third coordinate of the inverse stereographic image of G_1(z)/G_2(z).

    Computed as ``(|G_1|^2 - |G_2|^2) / (|G_1|^2 + |G_2|^2)`` via the
    normalized halves (the normalization cancels); uniform on [-1, 1] under
    the model.
    """
    f1 = np.abs(eval_normalized_F(sample.coeffs_1, z, sample.radius_of_validity)) ** 2
    f2 = np.abs(eval_normalized_F(sample.coeffs_2, z, sample.radius_of_validity)) ** 2
    denom = f1 + f2
    if np.any(denom == 0.0):
        raise DegenerateSampleError("both fields vanish at a probe point")
    return (f1 - f2) / denom


def covariance_oracle(kind: str):
    """Closed-form covariance evaluator: ``gef`` or ``normalized_F``."""
    if kind == "gef":
        return lambda z, w: np.exp(np.asarray(z) * np.conj(w))
    if kind == "normalized_F":
        return lambda z, w: np.exp(
            np.asarray(z) * np.conj(w)
            - 0.5 * np.abs(z) ** 2
            - 0.5 * np.abs(np.asarray(w)) ** 2
        )
    raise ValueError(f"unknown covariance kind: {kind!r}")
