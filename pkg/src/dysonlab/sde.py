"""Interacting-particle diffusions with logarithmic repulsion.

Drift menu (per particle i, state x sorted ascending):

* ``finite_theta(theta, N)``:  sum_{j != i} 1/(x_i - x_j) - x_i/N - theta
* ``finite_plain(N)``:         the same with theta = 0
* ``truncated(r)``:            sum over |x_i - x_j| < r only, no confinement
* ``truncated_theta(r, theta)``: truncated plus the constant theta

Truncated kinds may add an analytic reservoir correction standing in for a
uniform-density particle bath beyond a finite simulation window.

Integration is tamed Euler-Maruyama: the drift increment is capped as
``b dt / (1 + |b| dt / gamma)`` and any step that would break the strict
particle ordering is retried on two half steps whose Brownian increments are
a bridge split of the original (so the driving path is unchanged).  Per-path
Brownian terminal values are stored for Girsanov reweighting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .reports import ExperimentReport
from .sampling import ParticleConfiguration, center_outward_indices, ks_two_sample

__all__ = [
    "CollisionError",
    "StepFailureError",
    "DriftSpec",
    "Path",
    "PathEnsemble",
    "drift",
    "drift_vector",
    "integrate",
    "simulate_ensemble",
    "shift_transform",
    "girsanov_log_density",
    "tagged_statistics",
    "drift_rate",
]

SQRT2 = math.sqrt(2.0)

_KINDS = ("finite_theta", "finite_plain", "truncated", "truncated_theta")


class CollisionError(ValueError):
    """State contains coinciding particles."""


class StepFailureError(RuntimeError):
    """Step halving exhausted without restoring the particle ordering."""

    def __init__(self, message: str, t: float, state: np.ndarray):
        super().__init__(message)
        self.t = t
        self.state = state


@dataclass(frozen=True)
class DriftSpec:
    """Drift coefficient selector for the particle SDEs."""

    kind: str
    n: int | None = None
    theta: float = 0.0
    r: float | None = None
    reservoir_window: float | None = None
    reservoir_density: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if self.kind in ("finite_theta", "finite_plain"):
            if self.n is None or self.n < 1:
                raise ValueError("finite drifts need a particle number N >= 1")
            if self.reservoir_window is not None:
                raise ValueError("reservoir padding applies to truncated drifts only")
        if self.kind in ("truncated", "truncated_theta"):
            if self.r is None or not self.r > 0:
                raise ValueError("truncated drifts need a range r > 0")
        if abs(self.theta) >= SQRT2:
            raise ValueError("|theta| must be < sqrt(2)")
        if (self.reservoir_window is None) != (self.reservoir_density is None):
            raise ValueError("reservoir window and density come together")
        if self.reservoir_window is not None and not self.reservoir_window > 0:
            raise ValueError("reservoir window must be > 0")

    # constructors mirroring the drift menu
    @classmethod
    def finite_theta(cls, theta: float, n: int) -> "DriftSpec":
        return cls(kind="finite_theta", n=n, theta=theta)

    @classmethod
    def finite_plain(cls, n: int) -> "DriftSpec":
        return cls(kind="finite_plain", n=n)

    @classmethod
    def truncated(cls, r: float, reservoir_window=None, reservoir_density=None) -> "DriftSpec":
        return cls(
            kind="truncated",
            r=r,
            reservoir_window=reservoir_window,
            reservoir_density=reservoir_density,
        )

    @classmethod
    def truncated_theta(
        cls, r: float, theta: float, reservoir_window=None, reservoir_density=None
    ) -> "DriftSpec":
        return cls(
            kind="truncated_theta",
            r=r,
            theta=theta,
            reservoir_window=reservoir_window,
            reservoir_density=reservoir_density,
        )


def _reservoir_drift(spec: DriftSpec, state: np.ndarray) -> np.ndarray:
    """Analytic pull from a uniform density rho beyond [-W, W], range-truncated.

    For a particle at x the bath at density rho contributes
    rho [ log(r/(x+W)) 1{x+W<r} - log(r/(W-x)) 1{W-x<r} ].
    """
    w = spec.reservoir_window
    rho = spec.reservoir_density
    r = spec.r
    out = np.zeros_like(state)
    left = state + w
    right = w - state
    ml = left < r
    mr = right < r
    out[ml] += rho * np.log(r / left[ml])
    out[mr] -= rho * np.log(r / right[mr])
    return out


def drift_vector(spec: DriftSpec, state) -> np.ndarray:
    """The full drift vector at ``state`` (distinct entries required)."""
    x = np.asarray(state, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("state must be a non-empty vector")
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, np.inf)
    if not np.all(diff != 0.0):
        raise CollisionError("state contains coinciding particles")
    with np.errstate(divide="ignore"):
        inv = 1.0 / diff
    if spec.kind in ("truncated", "truncated_theta"):
        inv[np.abs(diff) >= spec.r] = 0.0
    interaction = inv.sum(axis=1)
    if spec.kind == "finite_theta":
        return interaction - x / spec.n - spec.theta
    if spec.kind == "finite_plain":
        return interaction - x / spec.n
    out = interaction
    if spec.kind == "truncated_theta":
        out = out + spec.theta
    if spec.reservoir_window is not None:
        out = out + _reservoir_drift(spec, x)
    return out


def _drift_batch(spec: DriftSpec, states: np.ndarray) -> np.ndarray:
    """Drift rows for a (paths, N) state block; same arithmetic as drift_vector."""
    diff = states[:, :, None] - states[:, None, :]
    p, n, _ = diff.shape
    diff[:, np.arange(n), np.arange(n)] = np.inf
    with np.errstate(divide="ignore"):
        inv = 1.0 / diff
    if spec.kind in ("truncated", "truncated_theta"):
        inv[np.abs(diff) >= spec.r] = 0.0
    interaction = inv.sum(axis=2)
    if spec.kind == "finite_theta":
        return interaction - states / spec.n - spec.theta
    if spec.kind == "finite_plain":
        return interaction - states / spec.n
    out = interaction
    if spec.kind == "truncated_theta":
        out = out + spec.theta
    if spec.reservoir_window is not None:
        out = out + np.stack([_reservoir_drift(spec, row) for row in states])
    return out


def drift(spec: DriftSpec, i: int, state) -> float:
    """Drift of particle ``i`` under ``spec``.

    ``i`` is 1-based, matching the SDE labels i = 1..N.
    """
    vec = drift_vector(spec, state)
    if not 1 <= i <= vec.size:
        raise ValueError("particle label out of range (labels are 1..N)")
    return float(vec[i - 1])


@dataclass(frozen=True)
class Path:
    """One trajectory on a uniform macro-step grid."""

    times: np.ndarray
    states: np.ndarray  # (len(times), N)
    brownian_terminal: np.ndarray  # (N,)
    seed: int | None
    dt: float


@dataclass
class PathEnsemble:
    """Monte-Carlo path collection with per-path seeds and tag bookkeeping."""

    paths: list[Path]
    dt: float
    t_end: float
    spec: DriftSpec
    seed: int | None = None
    tag_indices: np.ndarray | None = None  # (paths, m) indices into sorted states

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    @property
    def times(self) -> np.ndarray:
        return self.paths[0].times

    def brownian_terminals(self) -> np.ndarray:
        return np.stack([p.brownian_terminal for p in self.paths])

    def tagged(self, tag: int) -> np.ndarray:
        """(paths, times) trajectory of one center-outward tag."""
        if self.tag_indices is None:
            raise ValueError("ensemble carries no tags")
        cols = self.tag_indices[:, tag]
        return np.stack([p.states[:, c] for p, c in zip(self.paths, cols)])


def _ordered(x: np.ndarray) -> bool:
    return bool(np.all(np.diff(x) > 0.0))


def _tamed_increment(spec: DriftSpec, x: np.ndarray, dt: float, gamma: float) -> np.ndarray:
    b = drift_vector(spec, x)
    return b * dt / (1.0 + np.abs(b) * dt / gamma)


def _advance(
    spec: DriftSpec,
    x: np.ndarray,
    t: float,
    dt: float,
    db: np.ndarray,
    rng,
    gamma: float | None,
    depth: int,
    max_depth: int,
) -> np.ndarray:
    """One (possibly recursively halved) step preserving the strict ordering.

    The taming cap follows the step actually taken (gamma = 2/sqrt(dt) unless
    overridden), so halving restores the repulsion's full strength at small
    scales instead of keeping the macro-step cap.
    """
    g = 2.0 / math.sqrt(dt) if gamma is None else gamma
    proposal = x + _tamed_increment(spec, x, dt, g) + db
    if _ordered(proposal):
        return proposal
    if depth >= max_depth:
        raise StepFailureError(
            f"ordering violated after {max_depth} halvings at t={t:.6g}", t=t, state=x
        )
    # Brownian bridge split keeps the driving path consistent
    first = 0.5 * db + math.sqrt(dt / 4.0) * rng.standard_normal(x.size)
    second = db - first
    mid = _advance(spec, x, t, dt / 2.0, first, rng, gamma, depth + 1, max_depth)
    return _advance(spec, mid, t + dt / 2.0, dt / 2.0, second, rng, gamma, depth + 1, max_depth)


def integrate(
    spec: DriftSpec,
    initial,
    t_end: float,
    dt: float,
    rng_seed=None,
    noise: float = 1.0,
    gamma: float | None = None,
    max_halvings: int = 12,
    noise_increments: np.ndarray | None = None,
) -> Path:
    """Tamed Euler-Maruyama path on [0, t_end].

    ``noise`` scales the Brownian term (0 is the deterministic test hook);
    ``noise_increments`` (steps, N) overrides random increments entirely,
    bypassing step halving for exact-noise tests.  The taming cap defaults to
    ``2/sqrt(step)`` at every (sub-)step size; passing ``gamma`` freezes it.
    """
    if isinstance(initial, ParticleConfiguration):
        x = initial.positions.copy()
    else:
        x = np.asarray(initial, dtype=float).copy()
    if not _ordered(x):
        raise ValueError("initial state must be strictly increasing")
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    steps = int(round(t_end / dt))
    if steps < 1 or abs(steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end must be an integer multiple of dt")
    top_gamma = 2.0 / math.sqrt(dt) if gamma is None else gamma

    rng = np.random.default_rng(rng_seed)
    n = x.size
    states = np.empty((steps + 1, n))
    states[0] = x
    b_total = np.zeros(n)
    for k in range(steps):
        if noise_increments is not None:
            db = np.asarray(noise_increments[k], dtype=float)
            proposal = x + _tamed_increment(spec, x, dt, top_gamma) + db
            if not _ordered(proposal):
                raise StepFailureError(
                    f"ordering violated with prescribed noise at step {k}",
                    t=k * dt,
                    state=x,
                )
            x = proposal
        else:
            db = noise * math.sqrt(dt) * rng.standard_normal(n)
            x = _advance(spec, x, k * dt, dt, db, rng, gamma, 0, max_halvings)
        b_total += db
        states[k + 1] = x
    times = dt * np.arange(steps + 1)
    seed_val = int(rng_seed) if isinstance(rng_seed, (int, np.integer)) else None
    return Path(times=times, states=states, brownian_terminal=b_total, seed=seed_val, dt=dt)


def _simulate_block(
    spec: DriftSpec,
    block: np.ndarray,
    steps: int,
    dt: float,
    seeds,
    noise: float,
    gamma: float,
    keep: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Step a (paths, N) block through the grid with per-path noise streams.

    A bulk ``standard_normal((steps, n))`` draw consumes each path's bit
    stream exactly as the stepwise draws in :func:`integrate` do, so paths
    that never trigger step halving come out bit-identical to per-path
    integration.  Paths whose ordering breaks (or whose drift overflows) are
    reported back for an exact per-path redo.  Only step indices in ``keep``
    are stored.
    """
    p, n = block.shape
    scale = noise * math.sqrt(dt)
    increments = np.empty((p, steps, n))
    for j in range(p):
        increments[j] = np.random.default_rng(seeds[j]).standard_normal((steps, n))
    increments *= scale
    keep_pos = {int(k): i for i, k in enumerate(keep)}
    states = np.empty((p, len(keep), n))
    if 0 in keep_pos:
        states[:, keep_pos[0]] = block
    x = block.copy()
    bad = np.zeros(p, dtype=bool)
    for k in range(steps):
        b = _drift_batch(spec, x)
        with np.errstate(invalid="ignore", over="ignore"):
            x = x + b * dt / (1.0 + np.abs(b) * dt / gamma) + increments[:, k, :]
        ok = np.all(np.diff(x, axis=1) > 0.0, axis=1) & np.all(np.isfinite(x), axis=1)
        bad |= ~ok
        if (k + 1) in keep_pos:
            states[:, keep_pos[k + 1]] = x
    return states, increments.sum(axis=1), list(np.nonzero(bad)[0])


def _stored_steps(steps: int, store) -> np.ndarray:
    """Step indices to retain: "full", "ends", or a point count."""
    if store == "full":
        return np.arange(steps + 1)
    if store == "ends":
        return np.unique(np.array([0, steps]))
    k = int(store)
    if k < 2:
        raise ValueError("store must be 'full', 'ends', or an integer >= 2")
    return np.unique(np.round(np.linspace(0, steps, k)).astype(int))


def simulate_ensemble(
    spec: DriftSpec,
    initials,
    t_end: float,
    dt: float,
    seed: int,
    m_tags: int = 0,
    noise: float = 1.0,
    store="full",
    block_paths: int | None = None,
) -> PathEnsemble:
    """Independent paths from the given initial configurations.

    Per-path generators are spawned from one seed sequence; the blockwise
    vectorized stepping reproduces per-path integration bit for bit, with
    paths that need step halving recomputed individually.  Output therefore
    depends only on the seed, never on the block size.  ``store`` limits the
    retained time grid ("full", "ends", or a point count) to keep large
    ensembles in memory.
    """
    initials = [
        c if isinstance(c, ParticleConfiguration) else ParticleConfiguration(np.asarray(c, dtype=float))
        for c in initials
    ]
    if not initials:
        raise ValueError("need at least one initial configuration")
    n = initials[0].n
    if any(c.n != n for c in initials):
        raise ValueError("all initial configurations must share the particle number")
    if m_tags > n:
        raise ValueError("more tags requested than particles")
    steps = int(round(t_end / dt))
    if steps < 1 or abs(steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end must be an integer multiple of dt")
    gamma = 2.0 / math.sqrt(dt)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = root.spawn(len(initials))
    keep = _stored_steps(steps, store)
    times = dt * keep
    if block_paths is None:
        # keep a block's pairwise-difference tensor near cache size
        block_paths = max(64, min(512, int(4_000_000 // (n * n))))

    paths: list[Path | None] = [None] * len(initials)
    for start in range(0, len(initials), block_paths):
        idx = range(start, min(start + block_paths, len(initials)))
        block = np.stack([initials[i].positions for i in idx])
        states, b_totals, bad = _simulate_block(
            spec, block, steps, dt, [seeds[i] for i in idx], noise, gamma, keep
        )
        for j, i in enumerate(idx):
            paths[i] = Path(
                times=times,
                states=states[j],
                brownian_terminal=b_totals[j],
                seed=None,
                dt=dt,
            )
        for j in bad:
            i = start + j
            full = integrate(
                spec, initials[i], t_end, dt, rng_seed=seeds[i], noise=noise
            )
            paths[i] = Path(
                times=times,
                states=full.states[keep],
                brownian_terminal=full.brownian_terminal,
                seed=None,
                dt=dt,
            )

    tags = None
    if m_tags > 0:
        tags = np.stack([center_outward_indices(c)[:m_tags] for c in initials])
    seed_val = seed if isinstance(seed, (int, np.integer)) else None
    return PathEnsemble(
        paths=paths, dt=dt, t_end=t_end, spec=spec, seed=seed_val, tag_indices=tags
    )


def shift_transform(path: Path, theta: float) -> Path:
    """The moving-frame transform Y_t = X_t + theta t (same driving noise)."""
    shifted = path.states + theta * path.times[:, None]
    return Path(
        times=path.times.copy(),
        states=shifted,
        brownian_terminal=path.brownian_terminal.copy(),
        seed=path.seed,
        dt=path.dt,
    )


def girsanov_log_density(theta: float, n: int, brownian_terminals, t_end: float):
    """Log Radon-Nikodym weight (theta/N) sum_i B_T^i - theta^2 T / (2N).

    Accepts one terminal vector (N,) or a stack (paths, N); returns a scalar
    or per-path array on the log scale.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    b = np.asarray(brownian_terminals, dtype=float)
    total = b.sum(axis=-1)
    val = (theta / n) * total - theta * theta * t_end / (2.0 * n)
    return float(val) if np.ndim(val) == 0 else val


def drift_rate(ensemble: PathEnsemble, tag: int = 0) -> tuple[float, float]:
    """Mean displacement rate of one tagged particle and its MC standard error."""
    traj = ensemble.tagged(tag)
    per_path = (traj[:, -1] - traj[:, 0]) / ensemble.t_end
    est = float(per_path.mean())
    se = float(per_path.std(ddof=1) / math.sqrt(per_path.size))
    return est, se


def tagged_statistics(
    ensemble: PathEnsemble,
    m: int,
    times=None,
    other: PathEnsemble | None = None,
) -> ExperimentReport:
    """Per-time summary of the m tagged particles.

    Columns: time, tag, mean, variance, drift-rate estimate with standard
    error, and (when a second ensemble is supplied) the two-sample KS
    distance at matched times.
    """
    if ensemble.tag_indices is None or m > ensemble.tag_indices.shape[1]:
        raise ValueError("ensemble does not carry m tagged particles")
    grid = ensemble.times
    if times is None:
        idx = np.arange(grid.size)
    else:
        idx = np.array([int(np.argmin(np.abs(grid - t))) for t in times])
        matched = grid[idx]
        if np.any(np.abs(matched - np.asarray(times, dtype=float)) > 0.5 * ensemble.dt + 1e-12):
            raise ValueError("requested times must lie on the stored grid")
    columns = ["time", "tag", "mean", "variance", "drift_rate", "drift_rate_se"]
    if other is not None:
        columns.append("ks_distance")
    report = ExperimentReport(
        name="tagged_statistics",
        metadata={
            "paths": ensemble.n_paths,
            "dt": ensemble.dt,
            "t_end": ensemble.t_end,
            "m": m,
            "spec_kind": ensemble.spec.kind,
        },
        columns=columns,
    )
    for tag in range(m):
        traj = ensemble.tagged(tag)
        traj_other = other.tagged(tag) if other is not None else None
        for k in idx:
            t = float(grid[k])
            vals = traj[:, k]
            mean = float(vals.mean())
            var = float(vals.var(ddof=1)) if vals.size > 1 else 0.0
            if t > 0:
                inc = (vals - traj[:, 0]) / t
                rate = float(inc.mean())
                rate_se = float(inc.std(ddof=1) / math.sqrt(inc.size)) if inc.size > 1 else 0.0
            else:
                rate, rate_se = 0.0, 0.0
            row = [t, tag, mean, var, rate, rate_se]
            if traj_other is not None:
                row.append(ks_two_sample(vals, traj_other[:, k]))
            report.append(*row)
    return report
