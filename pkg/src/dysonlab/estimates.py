"""Tail conditions of the drift-convergence argument, evaluated at desk scale.

The four rescaled conditions compare, over the tail region
``T = { y : r/N <= |x_hat - y| }`` with ``x_hat = x/N + theta``:

1. drift:          integral of L^N(y,y)/(x_hat - y)  minus theta
2. Palm drift:     integral of L^N(x_hat,y)^2 / (|x_hat - y| L^N(x_hat,x_hat))
3. variance:       v1 - v2, the single vs double variance integrals
4. Palm variance:  p1 + 2 p2 - p3, the Palm-reduced analogue

All integrals run over panel Gauss-Legendre grids with hard breaks at the
excluded window, the spectral band edges, and the conditioning points, and
panel widths capped so the rule resolves the kernel oscillation (frequency
at most ``2 sqrt(2) N`` in macroscopic coordinates).  The infinite region is
truncated at ``|y| <= sqrt(2) + 1`` where the kernel diagonal has decayed far
below double-precision resolution; the truncation remainder is monitored.

Double integrals are tensor-product rules on the same grid, evaluated as
bilinear forms of the kernel matrix in row chunks so the full matrix is never
materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hermite import OscillatorEvaluator
from .kernels import macro_kernel_matrix
from .quadrature import QuadratureToleranceError, fill_breaks, panel_nodes
from .reports import ExperimentReport

__all__ = [
    "BandDecomposition",
    "TailRegion",
    "VarianceTails",
    "PalmVarianceTails",
    "ConditionCell",
    "TailContext",
    "drift_tail_integral",
    "semicircle_drift_tail_integral",
    "palm_drift_tail_integral",
    "variance_tail_integrals",
    "palm_variance_tail_integrals",
    "pv_semicircle",
    "tail_decay_statistic",
    "kernel_bound_sweep",
    "condition_table",
]

SQRT2 = math.sqrt(2.0)

TRUNCATION_MARGIN = 1.0
DEFAULT_ALPHA = -0.55
ONE_D_REL_TOL = 1e-7
TWO_D_REL_TOL = 1e-5

# default panel-width cap is _PANEL_SCALE / N; the kernel oscillates at
# frequency <= 2 sqrt(2) N so a 16-point rule has orders of margin
_PANEL_SCALE = 8.0
_ORDER = 16


@dataclass(frozen=True)
class BandDecomposition:
    """Split of the line into spectral-edge bands and their complement.

    band  = (-sqrt2 - w, -sqrt2 + w) u (sqrt2 - w, sqrt2 + w),  w = N^alpha
    u1    = [-sqrt2 + w, sqrt2 - w]
    u2    = complement of (-sqrt2 - w, sqrt2 + w)

    with the exponent constrained to -2/3 < alpha < -1/2.
    """

    n: int
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not -2.0 / 3.0 < self.alpha < -0.5:
            raise ValueError("alpha must lie in (-2/3, -1/2)")

    @property
    def halfwidth(self) -> float:
        return float(self.n) ** self.alpha

    @property
    def band_measure(self) -> float:
        return 4.0 * self.halfwidth

    @property
    def edges(self) -> tuple[float, float, float, float]:
        w = self.halfwidth
        return (-SQRT2 - w, -SQRT2 + w, SQRT2 - w, SQRT2 + w)

    def in_band(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        a = np.abs(y)
        return (SQRT2 - self.halfwidth < a) & (a < SQRT2 + self.halfwidth)

    def in_u1(self, y) -> np.ndarray:
        return np.abs(np.asarray(y, dtype=float)) <= SQRT2 - self.halfwidth

    def in_u2(self, y) -> np.ndarray:
        return np.abs(np.asarray(y, dtype=float)) >= SQRT2 + self.halfwidth


@dataclass(frozen=True)
class TailRegion:
    """The region ``{ y : r/N <= |x_hat - y| }`` around ``x_hat = x/N + theta``."""

    n: int
    theta: float
    x: float
    r: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.r > 0:
            raise ValueError("r must be > 0")
        if abs(self.theta) >= SQRT2:
            raise ValueError("|theta| must be < sqrt(2)")
        if not math.isfinite(self.x):
            raise ValueError("x must be finite")

    @property
    def x_hat(self) -> float:
        return self.x / self.n + self.theta

    @property
    def inner_radius(self) -> float:
        return self.r / self.n

    def contains(self, y) -> np.ndarray:
        return np.abs(np.asarray(y, dtype=float) - self.x_hat) >= self.inner_radius


@dataclass(frozen=True)
class VarianceTails:
    """Single (v1) and double (v2) variance tail integrals; condition is v1 - v2."""

    v1: float
    v2: float

    @property
    def condition(self) -> float:
        return self.v1 - self.v2


@dataclass(frozen=True)
class PalmVarianceTails:
    """Palm variance pieces; condition is p1 + 2 p2 - p3."""

    p1: float
    p2: float
    p3: float

    @property
    def condition(self) -> float:
        return self.p1 + 2.0 * self.p2 - self.p3


@dataclass(frozen=True)
class ConditionCell:
    """All tail-condition scalars at one (N, theta, x, r)."""

    drift: float
    palm_drift: float
    v1: float
    v2: float
    p1: float
    p2: float
    p3: float

    @property
    def variance_condition(self) -> float:
        return self.v1 - self.v2

    @property
    def palm_variance_condition(self) -> float:
        return self.p1 + 2.0 * self.p2 - self.p3

    def value(self, name: str) -> float:
        return {
            "drift": self.drift,
            "palm_drift": self.palm_drift,
            "variance": self.variance_condition,
            "palm_variance": self.palm_variance_condition,
        }[name]


class TailContext:
    """Shared quadrature grid and kernel data for one (N, theta).

    Builds a single panel grid whose breaks cover every conditioning point
    ``x_hat``, every window edge ``x_hat +- r/N``, the band edges and a ladder
    around the spectral edges, then caches the oscillator rows needed for the
    kernel diagonal and Christoffel-Darboux numerators on that grid.  Cells
    (one per ``(x, r)``) are evaluated as masked weighted sums; the two double
    integrals are chunked bilinear forms.
    """

    def __init__(
        self,
        n: int,
        theta: float,
        x_values=(0.0,),
        r_values=(2.0,),
        alpha: float = DEFAULT_ALPHA,
        order: int = _ORDER,
        panel_scale: float = _PANEL_SCALE,
        margin: float = TRUNCATION_MARGIN,
    ):
        if n < 2:
            raise ValueError("tail conditions need N >= 2")
        if abs(theta) >= SQRT2:
            raise ValueError("|theta| must be < sqrt(2)")
        self.n = int(n)
        self.theta = float(theta)
        self.x_values = tuple(float(x) for x in x_values)
        self.r_values = tuple(float(r) for r in r_values)
        if any(r <= 0 for r in self.r_values):
            raise ValueError("all r must be > 0")
        self.alpha = float(alpha)
        self.order = int(order)
        self.box = SQRT2 + margin
        self.band = BandDecomposition(self.n, self.alpha)
        self.x_hats = tuple(self.theta + x / self.n for x in self.x_values)
        if any(abs(h) >= self.box for h in self.x_hats):
            raise ValueError("conditioning points must lie inside the truncation box")

        hard = [-SQRT2, SQRT2]
        hard += list(self.band.edges)
        airy = self.n ** (-2.0 / 3.0)
        for s in (-SQRT2, SQRT2):
            for k in (1.0, 2.0, 4.0):
                hard += [s - k * airy, s + k * airy]
        hard += list(self.x_hats)
        for h in self.x_hats:
            for r in self.r_values:
                hard += [h - r / self.n, h + r / self.n]

        cap_global = panel_scale / self.n
        hats = np.asarray(self.x_hats) if self.x_hats else np.zeros(0)

        def cap(mid: float) -> float:
            if hats.size == 0:
                return cap_global
            d = float(np.min(np.abs(hats - mid)))
            return min(cap_global, max(0.4 * d, cap_global / 8.0))

        self.breaks = fill_breaks(hard, -self.box, self.box, cap)
        self.y, self.w = panel_nodes(self.breaks, self.order)

        ev = OscillatorEvaluator(self.n + 1)
        scaled = math.sqrt(self.n) * self.y
        rows = ev.rows(scaled, [self.n - 2, self.n - 1, self.n, self.n + 1])
        self._psi_m1 = rows[1]  # psi_{N-1}(sqrt(N) y)
        self._psi_0 = rows[2]  # psi_N(sqrt(N) y)
        self.ldiag = self._four_term_diag(rows)

        hat_rows = ev.rows(math.sqrt(self.n) * np.asarray(self.x_hats), [
            self.n - 2, self.n - 1, self.n, self.n + 1,
        ]) if self.x_hats else np.zeros((4, 0))
        self._hat_psi_m1 = hat_rows[1]
        self._hat_psi_0 = hat_rows[2]
        self.lhat = self._four_term_diag(hat_rows)

    # ------------------------------------------------------------------

    def _four_term_diag(self, rows: np.ndarray) -> np.ndarray:
        n = self.n
        pm2, pm1, p0, p1 = rows
        return (math.sqrt(n) / 2.0) * (
            pm1 * pm1
            + p0 * p0
            - math.sqrt(1.0 + 1.0 / n) * pm1 * p1
            - math.sqrt(1.0 - 1.0 / n) * pm2 * p0
        )

    def macro_row(self, hat_index: int) -> np.ndarray:
        """L^N(x_hat, y_m) along the grid (garbage inside the window is masked off later)."""
        a0 = self._hat_psi_0[hat_index]
        b0 = self._hat_psi_m1[hat_index]
        diff = self.x_hats[hat_index] - self.y
        with np.errstate(divide="ignore", invalid="ignore"):
            row = (a0 * self._psi_m1 - b0 * self._psi_0) / (math.sqrt(2.0 * self.n) * diff)
        return np.where(np.isfinite(row), row, 0.0)

    def truncation_remainder(self) -> float:
        """Crude bound on what the |y| <= box truncation discards.

        The kernel diagonal decays exponentially past the spectral edge; this
        reports ``L(box, box) * box`` as a generous scale for the dropped mass.
        """
        edge = float(self.ldiag[np.argmax(self.y)])
        return abs(edge) * self.box

    def window_mask(self, hat_index: int, r: float) -> np.ndarray:
        return np.abs(self.y - self.x_hats[hat_index]) >= r / self.n

    # ------------------------------------------------------------------

    def _chunk_kernel(self, sl: slice) -> np.ndarray:
        """Kernel matrix rows L(y[sl], y[:]) with the exact diagonal patched in."""
        a, b = self._psi_0, self._psi_m1
        diff = self.y[sl, None] - self.y[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            block = (np.outer(a[sl], b) - np.outer(b[sl], a)) / (
                math.sqrt(2.0 * self.n) * diff
            )
        idx = np.arange(sl.start, sl.stop)
        block[idx - sl.start, idx] = self.ldiag[idx]
        return block

    def _bilinear_forms(
        self, f_cols: np.ndarray, g_cols: np.ndarray, transpose: bool = False
    ) -> tuple[np.ndarray, np.ndarray]:
        """Columnwise quadratic forms f' L^2 f and g' L g on the grid.

        ``transpose=True`` accumulates through column chunks instead of row
        chunks; the results agree up to floating-point summation order, which
        the (y, z)-swap symmetry test exercises.
        """
        m = self.y.size
        cols = f_cols.shape[1]
        chunk = max(64, int(6_000_000 // max(m, 1)))
        if not transpose:
            v2 = np.zeros(cols)
            p2 = np.zeros(cols)
            for start in range(0, m, chunk):
                sl = slice(start, min(start + chunk, m))
                block = self._chunk_kernel(sl)
                v2 += np.einsum("mj,mj->j", f_cols[sl], (block * block) @ f_cols)
                p2 += np.einsum("mj,mj->j", g_cols[sl], block @ g_cols)
            return v2, p2
        sf = np.zeros_like(f_cols)
        sg = np.zeros_like(g_cols)
        for start in range(0, m, chunk):
            sl = slice(start, min(start + chunk, m))
            block = self._chunk_kernel(sl)
            sf += (block * block).T @ f_cols[sl]
            sg += block.T @ g_cols[sl]
        return (
            np.einsum("mj,mj->j", f_cols, sf),
            np.einsum("mj,mj->j", g_cols, sg),
        )

    def evaluate_cells(self, transpose: bool = False) -> dict[tuple[int, int], ConditionCell]:
        """All condition scalars for every (x index, r index) cell."""
        m = self.y.size
        n_x, n_r = len(self.x_hats), len(self.r_values)
        cols = n_x * n_r
        f_cols = np.empty((m, cols))
        g_cols = np.empty((m, cols))
        partial: dict[tuple[int, int], dict[str, float]] = {}
        for ix in range(n_x):
            la = self.macro_row(ix)
            lhat = float(self.lhat[ix])
            invd = 1.0 / (self.x_hats[ix] - self.y)
            for ir, r in enumerate(self.r_values):
                wm = self.w * self.window_mask(ix, r)
                drift = float(np.dot(wm, self.ldiag * invd)) - self.theta
                palm = float(np.dot(wm, la * la * np.abs(invd))) / lhat
                v1 = float(np.dot(wm, self.ldiag * invd * invd)) / self.n
                p1 = float(np.dot(wm, la * la * invd * invd)) / (self.n * lhat)
                p3 = float(np.dot(wm, la * la * invd)) / lhat
                j = ix * n_r + ir
                f_cols[:, j] = wm * invd
                g_cols[:, j] = wm * la * invd
                partial[(ix, ir)] = {
                    "drift": drift,
                    "palm_drift": palm,
                    "v1": v1,
                    "p1": p1,
                    "p3": p3 * p3,
                    "lhat": lhat,
                }
        v2s, p2raws = self._bilinear_forms(f_cols, g_cols, transpose=transpose)
        cells = {}
        for (ix, ir), s in partial.items():
            j = ix * n_r + ir
            cells[(ix, ir)] = ConditionCell(
                drift=s["drift"],
                palm_drift=s["palm_drift"],
                v1=s["v1"],
                v2=float(v2s[j]),
                p1=s["p1"],
                p2=float(p2raws[j]) / s["lhat"],
                p3=s["p3"],
            )
        return cells

    def drift_with_density(self, hat_index: int, r: float, density: np.ndarray) -> float:
        """Drift tail integral with an arbitrary density in place of L(y, y)."""
        invd = 1.0 / (self.x_hats[hat_index] - self.y)
        wm = self.w * self.window_mask(hat_index, r)
        return float(np.dot(wm, density * invd)) - self.theta


# ----------------------------------------------------------------------
# single-cell operations


_ONE_D_FIELDS = ("drift", "palm_drift", "v1", "p1", "p3")
_TWO_D_FIELDS = ("v2", "p2")


@lru_cache(maxsize=64)
def _single_cell(
    n: int,
    theta: float,
    x: float,
    r: float,
    alpha: float,
    panel_scale: float,
    verify: bool,
) -> ConditionCell:
    ctx = TailContext(n, theta, (x,), (r,), alpha=alpha, panel_scale=panel_scale)
    cell = ctx.evaluate_cells()[(0, 0)]
    if not verify:
        return cell
    fine_ctx = TailContext(
        n, theta, (x,), (r,), alpha=alpha, panel_scale=panel_scale / 2.0
    )
    fine = fine_ctx.evaluate_cells()[(0, 0)]
    for field, tol in [(f, ONE_D_REL_TOL) for f in _ONE_D_FIELDS] + [
        (f, TWO_D_REL_TOL) for f in _TWO_D_FIELDS
    ]:
        a = getattr(cell, field)
        b = getattr(fine, field)
        err = abs(a - b)
        if err > tol * max(1.0, abs(b)):
            raise QuadratureToleranceError(
                f"tail integral '{field}' did not converge under panel refinement "
                f"(N={n}, theta={theta}, x={x}, r={r})",
                value=b,
                estimate=err,
            )
    return fine


def drift_tail_integral(
    n: int,
    theta: float,
    x: float,
    r: float,
    alpha: float = DEFAULT_ALPHA,
    panel_scale: float = _PANEL_SCALE,
    verify: bool = True,
) -> float:
    """Tail drift condition: integral of L(y,y)/(x_hat - y) over T, minus theta."""
    TailRegion(n, theta, x, r)
    return _single_cell(n, theta, x, r, alpha, panel_scale, verify).drift


def semicircle_drift_tail_integral(
    n: int, theta: float, x: float, r: float, panel_scale: float = _PANEL_SCALE
) -> float:
    """Drift condition with the semicircle density standing in for L(y, y)."""
    region = TailRegion(n, theta, x, r)
    ctx = TailContext(n, theta, (x,), (r,), panel_scale=panel_scale)
    rho = np.sqrt(np.maximum(2.0 - ctx.y * ctx.y, 0.0)) / math.pi
    del region
    return ctx.drift_with_density(0, r, rho)


def palm_drift_tail_integral(
    n: int,
    theta: float,
    x: float,
    r: float,
    alpha: float = DEFAULT_ALPHA,
    panel_scale: float = _PANEL_SCALE,
    verify: bool = True,
) -> float:
    """Palm drift condition: integral of L(x_hat,y)^2/(|x_hat-y| L(x_hat,x_hat))."""
    TailRegion(n, theta, x, r)
    return _single_cell(n, theta, x, r, alpha, panel_scale, verify).palm_drift


def variance_tail_integrals(
    n: int,
    theta: float,
    x: float,
    r: float,
    alpha: float = DEFAULT_ALPHA,
    panel_scale: float = _PANEL_SCALE,
    verify: bool = True,
) -> VarianceTails:
    """Variance condition pieces v1 (single) and v2 (double integral)."""
    TailRegion(n, theta, x, r)
    cell = _single_cell(n, theta, x, r, alpha, panel_scale, verify)
    return VarianceTails(v1=cell.v1, v2=cell.v2)


def palm_variance_tail_integrals(
    n: int,
    theta: float,
    x: float,
    r: float,
    alpha: float = DEFAULT_ALPHA,
    panel_scale: float = _PANEL_SCALE,
    verify: bool = True,
) -> PalmVarianceTails:
    """Palm variance pieces p1, p2 (triple product), p3 (squared ratio)."""
    TailRegion(n, theta, x, r)
    cell = _single_cell(n, theta, x, r, alpha, panel_scale, verify)
    return PalmVarianceTails(p1=cell.p1, p2=cell.p2, p3=cell.p3)


# ----------------------------------------------------------------------


def pv_semicircle(theta: float) -> float:
    """Principal value of the semicircle Stieltjes integral at theta.

    P.V. integral over [-sqrt2, sqrt2] of (1/(theta - y)) sqrt(2 - y^2)/pi,
    computed by subtracting the singular part analytically:

        = integral of (f(y) - f(theta))/(theta - y)  +  f(theta) log((sqrt2+theta)/(sqrt2-theta))

    with f the semicircle density.  The regular part is integrated after the
    substitution y = sqrt2 sin(phi), which removes the edge square-root
    singularities entirely; the identity value is theta.
    """
    if abs(theta) >= SQRT2:
        raise ValueError("|theta| must be < sqrt(2)")

    f_theta = math.sqrt(2.0 - theta * theta) / math.pi
    fp_theta = -theta / (math.pi * math.sqrt(2.0 - theta * theta))
    analytic = f_theta * math.log((SQRT2 + theta) / (SQRT2 - theta))

    phi_theta = math.asin(theta / SQRT2)
    breaks = np.unique(np.array([-math.pi / 2, phi_theta, math.pi / 2]))
    pts, wts = panel_nodes(breaks, order=80)
    y = SQRT2 * np.sin(pts)
    fy = np.sqrt(np.maximum(2.0 - y * y, 0.0)) / math.pi
    den = theta - y
    with np.errstate(divide="ignore", invalid="ignore"):
        quotient = (fy - f_theta) / den
    quotient = np.where(np.abs(den) < 1e-13, -fp_theta, quotient)
    regular = float(np.dot(wts, quotient * SQRT2 * np.cos(pts)))
    return regular + analytic


def tail_decay_statistic(
    n: int,
    theta: float,
    q: float,
    x: float = 0.0,
    alpha: float = DEFAULT_ALPHA,
    panel_scale: float = _PANEL_SCALE,
) -> float:
    """Integral of L(y,y)^q / |x_hat - y| outside the central bulk interval.

    The domain is the complement of u1 (band plus outer region) within the
    truncation box; for 0 < q < 3/2 this decays to zero along N.
    """
    if not 0 < q < 1.5:
        raise ValueError("q must lie in (0, 3/2)")
    ctx = TailContext(n, theta, (x,), (), alpha=alpha, panel_scale=panel_scale)
    if not bool(ctx.band.in_u1(ctx.x_hats[0])):
        raise ValueError("conditioning point must lie in the central bulk interval")
    mask = ~ctx.band.in_u1(ctx.y)
    dens = np.maximum(ctx.ldiag, 0.0) ** q
    return float(np.dot(ctx.w * mask, dens / np.abs(ctx.x_hats[0] - ctx.y)))


def kernel_bound_sweep(
    n_values,
    alpha: float = DEFAULT_ALPHA,
    base_points: int = 241,
    edge_points: int = 81,
) -> ExperimentReport:
    """Grid maxima behind the uniform kernel bounds, per N.

    Columns: ``max_scaled`` = max |L|/N^(1/3) over the box grid squared,
    ``max_u`` = max |L| with both points outside the bands, and
    ``max_u_weighted`` = max N |y - z| |L(y, z)| on the same set.
    """
    box = SQRT2 + TRUNCATION_MARGIN
    rows = []
    for n in n_values:
        band = BandDecomposition(int(n), alpha)
        airy = float(n) ** (-2.0 / 3.0)
        pieces = [np.linspace(-box, box, base_points)]
        for s in (-SQRT2, SQRT2):
            pieces.append(s + airy * np.linspace(-6.0, 6.0, edge_points))
            pieces.append(np.array([s - band.halfwidth, s + band.halfwidth]))
        grid = np.unique(np.clip(np.concatenate(pieces), -box, box))
        lmat = macro_kernel_matrix(int(n), grid)
        max_scaled = float(np.max(np.abs(lmat)) / float(n) ** (1.0 / 3.0))
        keep = ~band.in_band(grid)
        sub = np.abs(lmat[np.ix_(keep, keep)])
        gu = grid[keep]
        max_u = float(np.max(sub))
        sep = np.abs(gu[:, None] - gu[None, :])
        max_u_weighted = float(np.max(float(n) * sep * sub))
        rows.append((int(n), max_scaled, max_u, max_u_weighted))
    return ExperimentReport(
        name="kernel_bound_sweep",
        metadata={"alpha": alpha, "base_points": base_points, "edge_points": edge_points},
        columns=["n", "max_scaled", "max_u", "max_u_weighted"],
        rows=rows,
    )


def condition_table(
    theta: float,
    n_list,
    r_list,
    radius: float = 1.0,
    x_points: int = 41,
    alpha: float = DEFAULT_ALPHA,
    panel_scale: float = _PANEL_SCALE,
    detail: bool = False,
) -> ExperimentReport:
    """Sup over the x grid of the four tail conditions for each (N, r).

    Rows are ordered by (N, r) in the given list order.  With ``detail=True``
    one row per (N, r, x) carries every component instead of the sups.
    """
    xs = np.linspace(-radius, radius, x_points)
    sup_rows = []
    detail_rows = []
    for n in n_list:
        ctx = TailContext(
            int(n), theta, tuple(xs), tuple(r_list), alpha=alpha, panel_scale=panel_scale
        )
        cells = ctx.evaluate_cells()
        for ir, r in enumerate(r_list):
            sups = {k: 0.0 for k in ("drift", "palm_drift", "variance", "palm_variance")}
            for ix, x in enumerate(xs):
                cell = cells[(ix, ir)]
                for key in sups:
                    sups[key] = max(sups[key], abs(cell.value(key)))
                if detail:
                    detail_rows.append(
                        (
                            int(n),
                            float(r),
                            float(x),
                            cell.drift,
                            cell.palm_drift,
                            cell.v1,
                            cell.v2,
                            cell.p1,
                            cell.p2,
                            cell.p3,
                        )
                    )
            sup_rows.append(
                (
                    int(n),
                    float(r),
                    sups["drift"],
                    sups["palm_drift"],
                    sups["variance"],
                    sups["palm_variance"],
                )
            )
    metadata = {
        "theta": theta,
        "n_list": list(int(n) for n in n_list),
        "r_list": list(float(r) for r in r_list),
        "radius": radius,
        "x_points": x_points,
        "alpha": alpha,
        "panel_scale": panel_scale,
    }
    if detail:
        return ExperimentReport(
            name="condition_table_detail",
            metadata=metadata,
            columns=["n", "r", "x", "drift", "palm_drift", "v1", "v2", "p1", "p2", "p3"],
            rows=detail_rows,
        )
    return ExperimentReport(
        name="condition_table",
        metadata=metadata,
        columns=["n", "r", "drift_sup", "palm_drift_sup", "variance_sup", "palm_variance_sup"],
        rows=sup_rows,
    )
