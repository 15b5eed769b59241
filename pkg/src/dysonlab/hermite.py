"""Oscillator wave functions: the orthonormal Gaussian-weighted Hermite family.

The family is ``psi_n(x) = (sqrt(pi) 2^n n!)^(-1/2) exp(-x^2/2) H_n(x)`` with
``H_n`` the physicists' Hermite polynomials.  Everything here is built on the
normalized three-term recurrence

    psi_{k+1}(x) = x sqrt(2/(k+1)) psi_k(x) - sqrt(k/(k+1)) psi_{k-1}(x),
    psi_0(x) = pi^(-1/4) exp(-x^2/2),

which keeps every intermediate bounded by 1 in the oscillatory region.  For
arguments far outside the oscillatory region the Gaussian prefactor underflows
double precision; the evaluator then switches to an exponent-tracked
representation (mantissa plus a separate binary exponent) so that values which
re-enter the representable range at higher index come back with full relative
accuracy instead of as exact zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OscillatorEvaluator",
    "OutOfRegimeError",
    "eval_psi",
    "eval_psi_batch",
    "eval_psi_derivative",
    "plancherel_rotach_bulk",
]

_PSI0_COEF = math.pi ** -0.25
_LOG2_PSI0 = -0.25 * math.log2(math.pi)
_LOG2_E = math.log2(math.e)

# x*x/2 beyond this puts psi_0 within a few decades of the subnormal range,
# where the direct recurrence start loses relative accuracy.
_DIRECT_SAFE_EXPONENT = 600.0

# Renormalize tracked mantissas every few steps; per-step growth is at most
# ~ sqrt(2)|x| + 1, so 8 steps stay far inside the double exponent range for
# any |x| the tracked branch accepts.
_RENORM_EVERY = 8

_POLICIES = ("direct", "exponent-tracked")


class OutOfRegimeError(ValueError):
    """Asymptotic formula requested outside its validity region."""


def _as_1d_points(x) -> np.ndarray:
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    if pts.ndim != 1:
        raise ValueError("expected a scalar or 1-d array of evaluation points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("oscillator wave functions require finite real arguments")
    return pts


@dataclass(frozen=True)
class OscillatorEvaluator:
    """Evaluator for ``psi_0 .. psi_n_max`` and their derivatives.

    Parameters
    ----------
    n_max : int
        Highest index evaluated.
    scaling_policy : str
        ``"exponent-tracked"`` (default) guards against Gaussian underflow for
        large ``|x|``; ``"direct"`` always uses plain double arithmetic.

    Instances are immutable and every method is a pure function, so a single
    evaluator may be shared freely across threads.
    """

    n_max: int
    scaling_policy: str = "exponent-tracked"

    def __post_init__(self) -> None:
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if self.scaling_policy not in _POLICIES:
            raise ValueError(f"scaling_policy must be one of {_POLICIES}")

    # ------------------------------------------------------------------
    # policy helpers

    @property
    def track_threshold(self) -> float:
        """|x| beyond which the exponent-tracked representation kicks in."""
        return math.sqrt(2.0 * self.n_max) + 4.0

    def _tracked_mask(self, pts: np.ndarray) -> np.ndarray:
        if self.scaling_policy == "direct":
            return np.zeros(pts.shape, dtype=bool)
        return (np.abs(pts) > self.track_threshold) | (
            0.5 * pts * pts > _DIRECT_SAFE_EXPONENT
        )

    # ------------------------------------------------------------------
    # recurrence cores

    def _direct_sweep(self, pts: np.ndarray, rows: np.ndarray) -> np.ndarray:
        out = np.empty((rows.size, pts.size))
        row_pos = {int(n): i for i, n in enumerate(rows)}
        prev = np.zeros_like(pts)
        cur = _PSI0_COEF * np.exp(-0.5 * pts * pts)
        if 0 in row_pos:
            out[row_pos[0]] = cur
        for k in range(int(rows.max())):
            c1 = math.sqrt(2.0 / (k + 1))
            c2 = math.sqrt(k / (k + 1.0))
            prev, cur = cur, c1 * pts * cur - c2 * prev
            if (k + 1) in row_pos:
                out[row_pos[k + 1]] = cur
        return out

    def _tracked_sweep(
        self, pts: np.ndarray, rows: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Recurrence on (mantissa, binary exponent) pairs.

        Returns mantissas and exponents for the requested rows; the actual
        value is ``mantissa * 2**exponent`` with mantissa in [1, 2) (or 0).
        """
        n_hi = int(rows.max())
        row_pos = {int(n): i for i, n in enumerate(rows)}
        mant = np.empty((rows.size, pts.size))
        expo = np.zeros((rows.size, pts.size), dtype=np.int64)

        # psi_0 in log2 space, split into integer exponent + mantissa
        log2_psi0 = _LOG2_PSI0 - 0.5 * pts * pts * _LOG2_E
        e = np.floor(log2_psi0).astype(np.int64)
        cur = np.exp2(log2_psi0 - e)
        prev = np.zeros_like(pts)

        def emit(k: int, cur: np.ndarray, e: np.ndarray) -> None:
            m, ee = np.frexp(cur)
            mant[row_pos[k]] = 2.0 * m
            expo[row_pos[k]] = e + ee - 1

        if 0 in row_pos:
            emit(0, cur, e)
        for k in range(n_hi):
            c1 = math.sqrt(2.0 / (k + 1))
            c2 = math.sqrt(k / (k + 1.0))
            prev, cur = cur, c1 * pts * cur - c2 * prev
            if (k + 1) % _RENORM_EVERY == 0:
                ref = np.maximum(np.abs(cur), np.abs(prev))
                _, shift = np.frexp(ref)
                scale = np.exp2(-shift.astype(float))
                cur = cur * scale
                prev = prev * scale
                e = e + shift
            if (k + 1) in row_pos:
                emit(k + 1, cur, e)
        return mant, expo

    # ------------------------------------------------------------------
    # public evaluation

    def rows(self, x, indices) -> np.ndarray:
        """psi_n(x) for each n in ``indices`` (shape ``(len(indices), len(x))``)."""
        pts = _as_1d_points(x)
        rows = np.asarray(indices, dtype=np.int64)
        if rows.size == 0:
            return np.empty((0, pts.size))
        if rows.min() < 0 or rows.max() > self.n_max:
            raise ValueError("row indices must lie in [0, n_max]")
        tracked = self._tracked_mask(pts)
        out = np.empty((rows.size, pts.size))
        plain = ~tracked
        if plain.any():
            out[:, plain] = self._direct_sweep(pts[plain], rows)
        if tracked.any():
            mant, expo = self._tracked_sweep(pts[tracked], rows)
            # clip: values this small are exact zeros in double anyway
            out[:, tracked] = np.ldexp(mant, np.clip(expo, -1100, 1100).astype(np.int32))
        return out

    def batch(self, x) -> np.ndarray:
        """All of psi_0..psi_n_max at the given points, one row per index."""
        return self.rows(x, np.arange(self.n_max + 1))

    def batch_tracked(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Exponent-tracked batch: (mantissa, exponent) with value m * 2**e."""
        pts = _as_1d_points(x)
        return self._tracked_sweep(pts, np.arange(self.n_max + 1))

    def batch_weightless(self, x) -> np.ndarray:
        """The polynomial parts ``psi_n(x) * exp(x^2/2)``.

        Same recurrence started from the constant pi^(-1/4); used to factor
        the Gaussian weight out of quadrature so Gauss-Hermite rules are exact.
        """
        pts = _as_1d_points(x)
        out = np.empty((self.n_max + 1, pts.size))
        prev = np.zeros_like(pts)
        cur = np.full(pts.shape, _PSI0_COEF)
        out[0] = cur
        for k in range(self.n_max):
            c1 = math.sqrt(2.0 / (k + 1))
            c2 = math.sqrt(k / (k + 1.0))
            prev, cur = cur, c1 * pts * cur - c2 * prev
            out[k + 1] = cur
        return out

    def psi(self, n: int, x: float) -> float:
        if not 0 <= n <= self.n_max:
            raise ValueError("index out of range for this evaluator")
        return float(self.rows([x], [n])[0, 0])

    def psi_derivative(self, n: int, x: float) -> float:
        """psi_n'(x) via sqrt(2) psi_n' = sqrt(n) psi_{n-1} - sqrt(n+1) psi_{n+1}."""
        if not 0 <= n <= self.n_max - 1:
            raise ValueError("derivative needs n + 1 <= n_max")
        if n == 0:
            hi = self.rows([x], [1])[0, 0]
            return float(-math.sqrt(0.5) * hi)
        lo, hi = self.rows([x], [n - 1, n + 1])[:, 0]
        return float((math.sqrt(n) * lo - math.sqrt(n + 1) * hi) / math.sqrt(2.0))


def eval_psi(n: int, x: float) -> float:
    """psi_n(x) by the normalized recurrence."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return OscillatorEvaluator(n).psi(n, x)


def eval_psi_batch(n_max: int, x: float) -> np.ndarray:
    """Vector [psi_0(x), ..., psi_n_max(x)] from a single recurrence pass."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    return OscillatorEvaluator(n_max).batch([x])[:, 0]


def eval_psi_derivative(n: int, x: float) -> float:
    """psi_n'(x) via the ladder identity (psi_{-1} is identically zero)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return OscillatorEvaluator(n + 1).psi_derivative(n, x)


def plancherel_rotach_bulk(N: int, l: int, tau: float) -> float:
    """Leading-order oscillatory approximation of ``psi_{N+l}(sqrt(2N) cos tau)``.

    Valid in the bulk regime ``N sin^3 tau >= 1`` with relative error
    O(1/(N sin tau)).  The phase constant was calibrated once against the
    exact recurrence and then frozen:

        amp   = (pi sin tau)^(-1/2) (2/N)^(1/4)
        phase = N (2 tau - sin 2 tau)/2 + (l + 1/2) tau + pi/4
    """
    if l not in (-1, 0, 1):
        raise ValueError("l must be one of -1, 0, 1")
    if not 0.0 < tau <= math.pi / 2:
        raise ValueError("tau must lie in (0, pi/2]")
    if N + l < 0 or N < 1:
        raise ValueError("N must be a positive integer with N + l >= 0")
    if N * math.sin(tau) ** 3 < 1.0:
        raise OutOfRegimeError(
            f"bulk asymptotics need N sin^3(tau) >= 1, got {N * math.sin(tau) ** 3:.3g}"
        )
    amp = (math.pi * math.sin(tau)) ** -0.5 * (2.0 / N) ** 0.25
    phase = 0.5 * N * (2.0 * tau - math.sin(2.0 * tau)) + (l + 0.5) * tau + math.pi / 4
    return amp * math.sin(phase)
