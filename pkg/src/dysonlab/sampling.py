"""GUE eigenvalue sampling, bulk scaling, and empirical density estimation.

Sampling goes through the symmetric tridiagonal beta = 2 matrix model:
independent standard normal diagonal entries, chi-distributed off-diagonals
with descending degrees of freedom 2(N-1), ..., 2, eigenvalues divided by
sqrt(2) to land on the ``exp(-x^2)`` weight convention, under which the
N = 1 marginal has variance 1/2 and the empirical law of ``lambda/sqrt(N)``
approaches the semicircle on (-sqrt2, sqrt2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "EigensolverError",
    "ParticleConfiguration",
    "EmpiricalDensity",
    "sample_gue_eigenvalues",
    "bulk_scale",
    "semicircle_scale",
    "label_center_outward",
    "empirical_one_point",
    "semicircle_cdf",
    "ks_statistic",
    "ks_two_sample",
]

SQRT2 = math.sqrt(2.0)

_SCALINGS = ("raw", "semicircle", "bulk")


class EigensolverError(RuntimeError):
    """Tridiagonal eigensolver failed to converge."""


@dataclass(frozen=True)
class ParticleConfiguration:
    """Sorted eigenvalue (or particle) vector with its scaling convention.

    ``raw`` carries eigenvalues of the weight-exp(-x^2) ensemble;
    ``semicircle`` is lambda/sqrt(N); ``bulk`` is y = sqrt(N) lambda - theta N
    centered at macro-position theta.
    """

    positions: np.ndarray
    scaling: str = "raw"
    theta: float | None = None

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        if pos.ndim != 1 or pos.size < 1:
            raise ValueError("positions must be a non-empty vector")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if np.any(np.diff(pos) <= 0.0):
            raise ValueError("positions must be strictly increasing")
        if self.scaling not in _SCALINGS:
            raise ValueError(f"scaling must be one of {_SCALINGS}")
        if self.scaling == "bulk" and self.theta is None:
            raise ValueError("bulk scaling carries its macro-position theta")

    @property
    def n(self) -> int:
        return self.positions.size


def sample_gue_eigenvalues(n: int, rng_seed) -> ParticleConfiguration:
    """One draw of N sorted eigenvalues with joint density ~ prod|dx|^2 exp(-sum x^2).

    Deterministic given the seed: the diagonal normals are drawn first, then
    the chi off-diagonals, then a single tridiagonal eigensolve.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    diag = rng.standard_normal(n)
    if n == 1:
        lam = diag
    else:
        dof = 2.0 * np.arange(n - 1, 0, -1)
        off = np.sqrt(rng.chisquare(dof)) / SQRT2
        try:
            lam = eigh_tridiagonal(diag, off, eigvals_only=True, lapack_driver="stev")
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
            raise EigensolverError(f"tridiagonal eigensolve failed for N={n}") from exc
    lam = np.sort(lam) / SQRT2
    return ParticleConfiguration(positions=lam, scaling="raw")


def bulk_scale(config: ParticleConfiguration, theta: float) -> ParticleConfiguration:
    """Zoom into the bulk window at macro-position theta: y = sqrt(N) x - theta N."""
    if config.scaling != "raw":
        raise ValueError("bulk scaling applies to raw configurations")
    if abs(theta) >= SQRT2:
        raise ValueError("|theta| must be < sqrt(2)")
    n = config.n
    y = math.sqrt(n) * config.positions - theta * n
    return ParticleConfiguration(positions=y, scaling="bulk", theta=float(theta))


def semicircle_scale(config: ParticleConfiguration) -> ParticleConfiguration:
    """Macroscopic scaling lambda / sqrt(N) (semicircle support (-sqrt2, sqrt2))."""
    if config.scaling != "raw":
        raise ValueError("semicircle scaling applies to raw configurations")
    return ParticleConfiguration(
        positions=config.positions / math.sqrt(config.n), scaling="semicircle"
    )


def label_center_outward(config: ParticleConfiguration) -> np.ndarray:
    """Particle positions ordered by |position|, ties broken toward the negative side.

    The first m entries are the m bulk-window particles that the dynamics
    comparisons tag.
    """
    pos = config.positions
    order = np.lexsort((pos, np.abs(pos)))
    return pos[order]


def center_outward_indices(config: ParticleConfiguration) -> np.ndarray:
    """Indices into the sorted position vector, in center-outward label order."""
    pos = config.positions
    return np.lexsort((pos, np.abs(pos)))


@dataclass(frozen=True)
class EmpiricalDensity:
    """Histogram estimate of the one-point function on a uniform grid."""

    grid: np.ndarray
    values: np.ndarray
    standard_errors: np.ndarray
    sample_count: int
    bin_width: float

    def mass(self) -> float:
        """Integral of the estimated density over the window."""
        return float(self.values.sum() * self.bin_width)


def empirical_one_point(
    samples, window: tuple[float, float], bins: int
) -> EmpiricalDensity:
    """Per-sample intensity histogram over the window.

    ``values[j]`` estimates the one-point correlation at the bin center; the
    per-bin standard error is the Poisson-style sqrt(count) scale.
    """
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError("window must be a nonempty interval")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    pooled = np.concatenate([np.asarray(c.positions, dtype=float) for c in samples])
    counts, edges = np.histogram(pooled, bins=bins, range=(lo, hi))
    width = (hi - lo) / bins
    centers = 0.5 * (edges[:-1] + edges[1:])
    scale = len(samples) * width
    values = counts / scale
    errors = np.sqrt(counts) / scale
    return EmpiricalDensity(
        grid=centers,
        values=values,
        standard_errors=errors,
        sample_count=len(samples),
        bin_width=width,
    )


def semicircle_cdf(y) -> np.ndarray:
    """CDF of the semicircle law with density sqrt(2 - y^2)/pi on (-sqrt2, sqrt2)."""
    y = np.clip(np.asarray(y, dtype=float), -SQRT2, SQRT2)
    root = np.sqrt(np.maximum(2.0 - y * y, 0.0))
    return 0.5 + (y * root / 2.0 + np.arcsin(np.clip(y / SQRT2, -1.0, 1.0))) / math.pi


def ks_statistic(points, cdf=semicircle_cdf) -> float:
    """Kolmogorov-Smirnov distance of the empirical law of ``points`` to ``cdf``."""
    pts = np.sort(np.asarray(points, dtype=float).ravel())
    if pts.size == 0:
        raise ValueError("need at least one point")
    f = np.asarray(cdf(pts), dtype=float)
    k = pts.size
    upper = np.max(np.arange(1, k + 1) / k - f)
    lower = np.max(f - np.arange(0, k) / k)
    return float(max(upper, lower))


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    allpts = np.concatenate([a, b])
    fa = np.searchsorted(a, allpts, side="right") / a.size
    fb = np.searchsorted(b, allpts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
