"""Determinantal kernels of the GUE point process at every scaling.

Four kernel families share one evaluation interface (callable on scalars or
equal-shape arrays, plus a ``diag`` method):

* ``FiniteKernel``   -- K^N(x, y), the rank-N projection onto psi_0..psi_{N-1},
  evaluated in Christoffel-Darboux form with a Taylor switch near the diagonal;
* ``ScaledKernel``   -- the bulk-window kernel K_theta^N and its macroscopic
  companion L^N(x, y) = K^N(sqrt(N) x, sqrt(N) y) / sqrt(N);
* ``SineKernel``     -- the translation-invariant bulk limit
  sin(sqrt(2 - theta^2)(x - y)) / (pi (x - y));
* ``PalmKernel``     -- the rank-one reduction conditioning a particle at x.

Correlation functions are determinants of kernel Gram matrices, and the
pair/Palm correlation differences used by the tail estimates are provided in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hermite import OscillatorEvaluator

__all__ = [
    "ConditioningError",
    "FiniteKernel",
    "ScaledKernel",
    "SineKernel",
    "PalmKernel",
    "CorrelationDifferences",
    "kernel_sum",
    "kernel_cd",
    "kernel_diag",
    "scaled_kernel",
    "sine_kernel",
    "palm_kernel",
    "correlation",
    "correlation_differences",
    "sine_kernel_sup_difference",
]

SQRT2 = math.sqrt(2.0)

# below this separation the CD quotient loses too many digits; use the
# diagonal (derivative) form at the midpoint, exact to O(|x-y|^2)
_CD_DIAGONAL_SWITCH = 1e-8

_MAX_CORRELATION_POINTS = 8


class ConditioningError(ValueError):
    """Palm reduction requested at a point where the kernel diagonal is <= 0."""


@lru_cache(maxsize=32)
def _evaluator(n_max: int) -> OscillatorEvaluator:
    return OscillatorEvaluator(n_max)


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError("particle number N must be >= 1")


def _pair_rows(n: int, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(psi_{n-1}, psi_n) at the given points."""
    rows = _evaluator(n).rows(pts, [n - 1, n])
    return rows[0], rows[1]


def _diag_rows(n: int, pts: np.ndarray) -> np.ndarray:
    """psi_{n-2}, psi_{n-1}, psi_n, psi_{n+1} (psi_{-1} = 0 for n = 1)."""
    ev = _evaluator(n + 1)
    if n == 1:
        sub = ev.rows(pts, [0, 1, 2])
        zero = np.zeros_like(sub[0])
        return np.stack([zero, sub[0], sub[1], sub[2]])
    return ev.rows(pts, [n - 2, n - 1, n, n + 1])


def _diag_from_rows(n: int, rows: np.ndarray) -> np.ndarray:
    """K^N(x, x) from the stacked rows of ``_diag_rows``.

    Four-term expansion of the derivative form
    K^N(x,x) = sqrt(N/2) (psi_{N-1} psi_N' - psi_N psi_{N-1}')(x).
    """
    pm2, pm1, p0, p1 = rows
    return 0.5 * n * (
        pm1 * pm1
        + p0 * p0
        - math.sqrt(1.0 + 1.0 / n) * pm1 * p1
        - math.sqrt(1.0 - 1.0 / n) * pm2 * p0
    )


def kernel_diag(n: int, x) -> float | np.ndarray:
    """K^N(x, x) via the derivative form of the Christoffel-Darboux limit."""
    _check_n(n)
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    ev = _evaluator(n + 1)
    pm1 = ev.rows(pts, [n - 1])[0]
    p0 = ev.rows(pts, [n])[0]
    dp0 = np.array([ev.psi_derivative(n, float(t)) for t in pts])
    dpm1 = np.array([ev.psi_derivative(n - 1, float(t)) for t in pts])
    val = math.sqrt(n / 2.0) * (pm1 * dp0 - p0 * dpm1)
    return float(val[0]) if np.isscalar(x) or np.ndim(x) == 0 else val


def _kernel_diag_fast(n: int, pts: np.ndarray) -> np.ndarray:
    """Vectorized diagonal via the four-term form (same algebra as kernel_diag)."""
    return _diag_from_rows(n, _diag_rows(n, pts))


def kernel_sum(n: int, x, y) -> float | np.ndarray:
    """K^N(x, y) = sum_{k<N} psi_k(x) psi_k(y), direct summation."""
    _check_n(n)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    xs, ys = np.broadcast_arrays(xs, ys)
    ev = _evaluator(max(n - 1, 0))
    val = np.einsum("km,km->m", ev.batch(xs.ravel()), ev.batch(ys.ravel()))
    val = val.reshape(xs.shape)
    return float(val[0]) if np.ndim(x) == 0 and np.ndim(y) == 0 else val


def kernel_cd(n: int, x, y) -> float | np.ndarray:
    """K^N(x, y) in Christoffel-Darboux form.

    ``sqrt(N/2) (psi_N(x) psi_{N-1}(y) - psi_{N-1}(x) psi_N(y)) / (x - y)``,
    silently delegating near-diagonal arguments to the diagonal form at the
    midpoint (cancellation guard, error O(|x-y|^2)).
    """
    _check_n(n)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    xs, ys = np.broadcast_arrays(xs, ys)
    shape = xs.shape
    xs, ys = xs.ravel(), ys.ravel()
    diff = xs - ys
    near = np.abs(diff) < _CD_DIAGONAL_SWITCH
    out = np.empty(xs.shape)
    if (~near).any():
        ax, bx = _pair_rows(n, xs[~near])
        ay, by = _pair_rows(n, ys[~near])
        out[~near] = math.sqrt(n / 2.0) * (bx * ay - ax * by) / diff[~near]
    if near.any():
        mid = 0.5 * (xs[near] + ys[near])
        out[near] = _kernel_diag_fast(n, mid)
    out = out.reshape(shape)
    return float(out.ravel()[0]) if np.ndim(x) == 0 and np.ndim(y) == 0 else out


def kernel_cd_matrix(n: int, xs, ys=None) -> np.ndarray:
    """K^N on a tensor grid, with exact diagonal handling.

    ``ys=None`` evaluates the symmetric grid ``xs x xs``.  Entries closer than
    the diagonal switch are replaced by the midpoint diagonal value.
    """
    _check_n(n)
    xs = np.asarray(xs, dtype=float)
    same = ys is None
    ys = xs if same else np.asarray(ys, dtype=float)
    ax, bx = _pair_rows(n, xs)
    ay, by = (ax, bx) if same else _pair_rows(n, ys)
    diff = xs[:, None] - ys[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = math.sqrt(n / 2.0) * (np.outer(bx, ay) - np.outer(ax, by)) / diff
    near = np.abs(diff) < _CD_DIAGONAL_SWITCH
    if near.any():
        mids = 0.5 * (xs[:, None] + ys[None, :])[near]
        out[near] = _kernel_diag_fast(n, np.asarray(mids, dtype=float))
    return out


@dataclass(frozen=True)
class FiniteKernel:
    """The rank-N projection kernel of the unscaled GUE eigenvalue process."""

    n: int

    def __post_init__(self) -> None:
        _check_n(self.n)

    def __call__(self, x, y):
        return kernel_cd(self.n, x, y)

    def diag(self, x):
        pts = np.atleast_1d(np.asarray(x, dtype=float))
        val = _kernel_diag_fast(self.n, pts)
        return float(val[0]) if np.ndim(x) == 0 else val

    def matrix(self, xs, ys=None) -> np.ndarray:
        return kernel_cd_matrix(self.n, xs, ys)

    def weightless_batch(self, pts: np.ndarray) -> np.ndarray:
        """Rows psi~_k(pts) = psi_k(pts) exp(pts^2/2) for k < N.

        Lets Gauss-Hermite rules integrate kernel products exactly: the
        full integrand carries weight exp(-t^2) times a polynomial.
        """
        return _evaluator(self.n - 1).batch_weightless(np.asarray(pts, dtype=float))


def scaled_kernel(n: int, theta: float, x, y) -> float | np.ndarray:
    """Bulk-window kernel K_theta^N(x, y) = K^N((x + N theta)/sqrt(N), (y + N theta)/sqrt(N)) / sqrt(N)."""
    _check_n(n)
    if abs(theta) >= SQRT2:
        raise ValueError("macro-position must satisfy |theta| < sqrt(2)")
    rn = math.sqrt(n)
    xs = (np.asarray(x, dtype=float) + n * theta) / rn
    ys = (np.asarray(y, dtype=float) + n * theta) / rn
    return kernel_cd(n, xs, ys) / rn


@dataclass(frozen=True)
class ScaledKernel:
    """K_theta^N together with its macroscopic form L^N.

    ``__call__`` is K_theta^N; ``macro`` is L^N(x, y) = K^N(sqrt(N)x, sqrt(N)y)/sqrt(N).
    The two are affinely equivalent: K_theta^N(x, y) = L^N(x/N + theta, y/N + theta).
    """

    n: int
    theta: float

    def __post_init__(self) -> None:
        _check_n(self.n)
        if abs(self.theta) >= SQRT2:
            raise ValueError("macro-position must satisfy |theta| < sqrt(2)")

    def __call__(self, x, y):
        return scaled_kernel(self.n, self.theta, x, y)

    def diag(self, x):
        rn = math.sqrt(self.n)
        pts = (np.atleast_1d(np.asarray(x, dtype=float)) + self.n * self.theta) / rn
        val = _kernel_diag_fast(self.n, pts) / rn
        return float(val[0]) if np.ndim(x) == 0 else val

    def macro(self, x, y):
        rn = math.sqrt(self.n)
        xs = np.asarray(x, dtype=float) * rn
        ys = np.asarray(y, dtype=float) * rn
        return kernel_cd(self.n, xs, ys) / rn

    def macro_diag(self, x):
        rn = math.sqrt(self.n)
        pts = np.atleast_1d(np.asarray(x, dtype=float)) * rn
        val = _kernel_diag_fast(self.n, pts) / rn
        return float(val[0]) if np.ndim(x) == 0 else val

    def matrix(self, xs, ys=None) -> np.ndarray:
        rn = math.sqrt(self.n)
        u = (np.asarray(xs, dtype=float) + self.n * self.theta) / rn
        v = None if ys is None else (np.asarray(ys, dtype=float) + self.n * self.theta) / rn
        return kernel_cd_matrix(self.n, u, v) / rn


def macro_kernel_matrix(n: int, ys, zs=None) -> np.ndarray:
    """L^N on a tensor grid of macroscopic points."""
    rn = math.sqrt(n)
    u = np.asarray(ys, dtype=float) * rn
    v = None if zs is None else np.asarray(zs, dtype=float) * rn
    return kernel_cd_matrix(n, u, v) / rn


def macro_kernel_diag(n: int, ys) -> np.ndarray:
    """L^N(y, y) on an array of macroscopic points."""
    rn = math.sqrt(n)
    pts = np.atleast_1d(np.asarray(ys, dtype=float)) * rn
    return _kernel_diag_fast(n, pts) / rn


def sine_kernel(theta: float, x, y) -> float | np.ndarray:
    """sin(sqrt(2 - theta^2)(x - y)) / (pi (x - y)), diagonal sqrt(2 - theta^2)/pi."""
    if abs(theta) >= SQRT2:
        raise ValueError("macro-position must satisfy |theta| < sqrt(2)")
    omega = math.sqrt(2.0 - theta * theta)
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    val = (omega / math.pi) * np.sinc(diff * (omega / math.pi))
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class SineKernel:
    """Translation-invariant bulk-limit kernel at macro-position theta."""

    theta: float

    def __post_init__(self) -> None:
        if abs(self.theta) >= SQRT2:
            raise ValueError("macro-position must satisfy |theta| < sqrt(2)")

    def __call__(self, x, y):
        return sine_kernel(self.theta, x, y)

    def diag(self, x):
        val = math.sqrt(2.0 - self.theta**2) / math.pi
        if np.ndim(x) == 0:
            return val
        return np.full(np.shape(x), val)


class PalmKernel:
    """Kernel of the process conditioned to hold (and then drop) a particle.

    K_x(y, z) = K(y, z) - K(y, x) K(x, z) / K(x, x).
    """

    def __init__(self, base, x: float):
        kxx = float(base(x, x))
        if not kxx > 0.0:
            raise ConditioningError(
                f"conditioning point needs a positive diagonal, got K(x,x)={kxx:.3g}"
            )
        self.base = base
        self.x = float(x)
        self._kxx = kxx

    def __call__(self, y, z):
        b = self.base
        val = np.asarray(b(y, z)) - np.asarray(b(y, self.x)) * np.asarray(
            b(self.x, z)
        ) / self._kxx
        return float(val) if val.ndim == 0 else val

    def diag(self, y):
        return self(y, y)


def palm_kernel(base, x: float) -> PalmKernel:
    """Reduce ``base`` by conditioning at ``x`` (requires base(x, x) > 0)."""
    return PalmKernel(base, x)


def correlation(kernel, points) -> float:
    """n-point correlation det[K(x_i, x_j)] (LU with partial pivoting, n <= 8)."""
    pts = np.asarray(points, dtype=float).ravel()
    if pts.size == 0:
        raise ValueError("need at least one point")
    if pts.size > _MAX_CORRELATION_POINTS:
        raise ValueError(f"correlation order capped at {_MAX_CORRELATION_POINTS}")
    gram = np.asarray(kernel(pts[:, None], pts[None, :]), dtype=float)
    if gram.shape != (pts.size, pts.size):
        gram = np.empty((pts.size, pts.size))
        for i, a in enumerate(pts):
            for j, b in enumerate(pts):
                gram[i, j] = kernel(a, b)
    return float(np.linalg.det(gram))


@dataclass(frozen=True)
class CorrelationDifferences:
    """Palm / pair correlation differences at fixed conditioning point."""

    d1: float  # one-point difference rho_x^1(y) - rho^1(y)
    d2: float  # pair covariance rho^2(y,z) - rho^1(y) rho^1(z)
    d3: float  # Palm pair-covariance minus plain pair-covariance


def correlation_differences(
    n: int, theta: float, x: float, y: float, z: float
) -> CorrelationDifferences:
    """Closed forms of the three correlation differences for K_theta^N.

    d1 = -K(x,y)^2 / K(x,x)
    d2 = -K(y,z)^2
    d3 = 2 K(y,z) K(x,y) K(x,z) / K(x,x) - K(x,y)^2 K(x,z)^2 / K(x,x)^2
    """
    ker = ScaledKernel(n, theta)
    kxx = float(ker(x, x))
    if not kxx > 0.0:
        raise ConditioningError(
            f"conditioning point needs a positive diagonal, got K(x,x)={kxx:.3g}"
        )
    kxy = float(ker(x, y))
    kxz = float(ker(x, z))
    kyz = float(ker(y, z))
    d1 = -kxy * kxy / kxx
    d2 = -kyz * kyz
    d3 = 2.0 * kyz * kxy * kxz / kxx - (kxy * kxy) * (kxz * kxz) / (kxx * kxx)
    return CorrelationDifferences(d1=d1, d2=d2, d3=d3)


def sine_kernel_sup_difference(
    n: int, theta: float, lo: float = -5.0, hi: float = 5.0, step: float = 0.25
) -> float:
    """sup over the [lo, hi]^2 grid of |K_theta^N - sine kernel|."""
    grid = np.arange(lo, hi + 0.5 * step, step)
    finite = ScaledKernel(n, theta).matrix(grid)
    limit = sine_kernel(theta, grid[:, None], grid[None, :])
    return float(np.max(np.abs(finite - limit)))
