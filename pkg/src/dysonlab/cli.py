"""Reproducible experiment runner.

Subcommands
-----------
kernel-table   finite vs sine kernel grids and their sup-difference
conditions     tail-condition table plus the principal-value identity row
simulate       paired drift ensembles, tagged statistics, Girsanov check
sample         eigenvalue draws, semicircle KS, empirical one-point overlay
pv-check       principal-value semicircle identity over a theta list

Every subcommand validates its configuration before computing (rejected
configs write no files), echoes the effective configuration into its outputs,
and is byte-reproducible under a fixed seed for any ``--threads`` value.
Exit codes: 0 all checks pass, 1 check failure, 2 config error, 3 numeric
error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path as FsPath

import numpy as np

from . import __version__
from .estimates import condition_table, pv_semicircle
from .kernels import ScaledKernel, sine_kernel
from .quadrature import QuadratureToleranceError
from .reports import ExperimentReport, heatmap_svg, polyline_svg
from .sampling import (
    EigensolverError,
    bulk_scale,
    empirical_one_point,
    ks_statistic,
    sample_gue_eigenvalues,
    semicircle_scale,
)
from .sde import (
    CollisionError,
    DriftSpec,
    StepFailureError,
    drift_rate,
    girsanov_log_density,
    simulate_ensemble,
    tagged_statistics,
)

SQRT2 = math.sqrt(2.0)

_FORMATS = ("csv", "json", "svg")

_DEFAULTS: dict[str, dict] = {
    "kernel-table": {
        "n_list": [64, 256],
        "theta": 0.0,
        "grid_lo": -5.0,
        "grid_hi": 5.0,
        "grid_step": 0.25,
    },
    "conditions": {
        "n_list": [64, 256],
        "r_list": [2.0, 8.0],
        "theta": 0.5,
        "radius": 1.0,
        "x_points": 41,
        "alpha": -0.55,
        "pv_tol": 1e-6,
    },
    "simulate": {
        "n": 32,
        "theta": 0.5,
        "t_end": 1.0,
        "dt": 1e-3,
        "paths": 200,
        "m": 2,
        "store_points": 11,
    },
    "sample": {
        "n": 200,
        "draws": 200,
        "theta": 0.5,
        "window_lo": -5.0,
        "window_hi": 5.0,
        "bins": 25,
        "ks_threshold": 0.03,
    },
    "pv-check": {
        "thetas": [-1.2, -0.7, 0.0, 0.3, 0.7, 1.2],
        "pv_tol": 1e-6,
    },
}


class ConfigError(ValueError):
    """Invalid configuration file or parameter set."""


def _parse_scalar(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip('"').strip("'")


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` file; values are JSON scalars/lists, '#' comments."""
    cfg: dict = {}
    try:
        text = FsPath(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        cfg[key.strip().replace("-", "_")] = _parse_scalar(value)
    return cfg


def _effective(subcommand: str, args: argparse.Namespace, file_cfg: dict) -> dict:
    cfg = dict(_DEFAULTS[subcommand])
    unknown = set(file_cfg) - set(cfg) - {"seed", "threads", "out", "format"}
    if unknown:
        raise ConfigError(f"unknown config keys for {subcommand}: {sorted(unknown)}")
    cfg.update(file_cfg)
    for key in cfg:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    cfg["seed"] = args.seed if args.seed is not None else int(file_cfg.get("seed", 1))
    cfg["threads"] = _threads(args, file_cfg)
    cfg["format"] = args.format or file_cfg.get("format", "csv")
    if cfg["format"] not in _FORMATS:
        raise ConfigError(f"format must be one of {_FORMATS}")
    return cfg


def _threads(args: argparse.Namespace, file_cfg: dict) -> int:
    if args.threads is not None:
        return args.threads
    if "threads" in file_cfg:
        return int(file_cfg["threads"])
    env = os.environ.get("DYSONLAB_THREADS")
    return int(env) if env else 1


def _pmap(fn, items, threads: int) -> list:
    """Order-preserving map, optionally on a thread pool (results by index)."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _int_list(value) -> list[int]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("expected a non-empty list")
    return [int(v) for v in value]


def _float_list(value) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("expected a non-empty list")
    return [float(v) for v in value]


class _Output:
    """Collects reports and SVG documents, then writes them all at once."""

    def __init__(self, out_dir: str, fmt: str):
        self.dir = FsPath(out_dir)
        self.fmt = fmt
        self.reports: list[ExperimentReport] = []
        self.svgs: list[tuple[str, str]] = []

    def add(self, report: ExperimentReport) -> None:
        self.reports.append(report)

    def add_svg(self, name: str, text: str) -> None:
        if self.fmt == "svg":
            self.svgs.append((name, text))

    def write(self) -> list[str]:
        self.dir.mkdir(parents=True, exist_ok=True)
        written = []
        for rep in self.reports:
            if self.fmt == "json":
                path = self.dir / f"{rep.name}.json"
                path.write_text(rep.to_json_text())
                written.append(str(path))
            else:
                path = self.dir / f"{rep.name}.csv"
                path.write_text(rep.to_csv_text(), newline="")
                written.append(str(path))
                meta = self.dir / f"{rep.name}.meta.json"
                meta.write_text(rep.metadata_json_text())
                written.append(str(meta))
        for name, text in self.svgs:
            path = self.dir / f"{name}.svg"
            path.write_text(text)
            written.append(str(path))
        return written


def _check_line(label: str, ok: bool, detail: str) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    return ok


# ----------------------------------------------------------------------
# subcommands


def _cmd_kernel_table(cfg: dict, out: _Output) -> bool:
    n_list = _int_list(cfg["n_list"])
    theta = float(cfg["theta"])
    lo, hi, step = float(cfg["grid_lo"]), float(cfg["grid_hi"]), float(cfg["grid_step"])
    if abs(theta) >= SQRT2:
        raise ConfigError("|theta| must be < sqrt(2)")
    if not (hi > lo and step > 0):
        raise ConfigError("grid bounds must satisfy lo < hi and step > 0")
    if any(n < 1 for n in n_list):
        raise ConfigError("all N must be >= 1")

    grid = np.arange(lo, hi + 0.5 * step, step)
    meta = {"config": dict(sorted(cfg.items())), "version": __version__}
    table = ExperimentReport(
        name="kernel_table",
        metadata=meta,
        columns=["n", "x", "y", "kernel", "sine", "abs_diff"],
    )
    summary = ExperimentReport(
        name="kernel_table_summary", metadata=meta, columns=["n", "sup_diff"]
    )
    sup_diffs = []
    limit = sine_kernel(theta, grid[:, None], grid[None, :])
    mats = _pmap(lambda n: ScaledKernel(n, theta).matrix(grid), n_list, cfg["threads"])
    for n, finite in zip(n_list, mats):
        diff = np.abs(finite - limit)
        sup_diffs.append(float(diff.max()))
        summary.append(n, sup_diffs[-1])
        for i, x in enumerate(grid):
            for j, y in enumerate(grid):
                table.append(n, float(x), float(y), float(finite[i, j]), float(limit[i, j]), float(diff[i, j]))
        out.add_svg(f"kernel_table_n{n}", heatmap_svg(diff, title=f"|finite - sine| N={n}"))
    out.add(table)
    out.add(summary)
    ok = True
    if len(n_list) > 1:
        decreasing = all(b < a for a, b in zip(sup_diffs, sup_diffs[1:]))
        ok &= _check_line(
            "sup-difference decreasing in N",
            decreasing,
            " > ".join(f"{d:.3e}" for d in sup_diffs),
        )
    else:
        _check_line("sup-difference", True, f"{sup_diffs[0]:.3e}")
    return ok


def _cmd_conditions(cfg: dict, out: _Output) -> bool:
    n_list = _int_list(cfg["n_list"])
    r_list = _float_list(cfg["r_list"])
    theta = float(cfg["theta"])
    radius, x_points, alpha = float(cfg["radius"]), int(cfg["x_points"]), float(cfg["alpha"])
    if abs(theta) >= SQRT2:
        raise ConfigError("|theta| must be < sqrt(2)")
    if any(n < 2 for n in n_list):
        raise ConfigError("all N must be >= 2")
    if any(r <= 0 for r in r_list):
        raise ConfigError("all r must be > 0")
    if x_points < 1 or radius < 0:
        raise ConfigError("x grid needs x_points >= 1 and radius >= 0")

    meta = {"config": dict(sorted(cfg.items())), "version": __version__}

    def one(n: int) -> ExperimentReport:
        return condition_table(
            theta, [n], r_list, radius=radius, x_points=x_points, alpha=alpha
        )

    parts = _pmap(one, n_list, cfg["threads"])
    table = ExperimentReport(
        name="conditions", metadata=meta, columns=parts[0].columns
    )
    for part in parts:
        for row in part.rows:
            table.append(*row)
    out.add(table)

    pv_value = pv_semicircle(theta)
    pv_err = abs(pv_value - theta)
    ok = _check_line(
        "principal-value identity", pv_err <= cfg["pv_tol"], f"|{pv_value:.9f} - {theta}| = {pv_err:.2e}"
    )

    summary = ExperimentReport(
        name="conditions_summary",
        metadata=meta,
        columns=["check", "value", "passed"],
    )
    summary.append("pv_identity_error", pv_err, pv_err <= cfg["pv_tol"])
    palm_col = table.columns.index("palm_drift_sup")
    for n in n_list:
        col = [row[palm_col] for row in table.rows if row[0] == n]
        mono = all(b <= a for a, b in zip(col, col[1:]))
        ok &= _check_line(
            f"palm-drift column monotone in r (N={n})",
            mono,
            " >= ".join(f"{v:.3e}" for v in col),
        )
        summary.append(f"palm_drift_monotone_n{n}", float(mono), mono)
    out.add(summary)

    if len(n_list) > 0:
        series = []
        for n in n_list:
            vals = [row[palm_col] for row in table.rows if row[0] == n]
            series.append((f"N={n}", np.asarray(r_list, dtype=float), np.asarray(vals)))
        out.add_svg("conditions", polyline_svg(series, title="palm drift condition vs r"))
    return ok


def _cmd_simulate(cfg: dict, out: _Output) -> bool:
    n, theta = int(cfg["n"]), float(cfg["theta"])
    t_end, dt = float(cfg["t_end"]), float(cfg["dt"])
    paths, m = int(cfg["paths"]), int(cfg["m"])
    store_points = int(cfg["store_points"])
    seed = int(cfg["seed"])
    if abs(theta) >= SQRT2:
        raise ConfigError("|theta| must be < sqrt(2)")
    if n < 1 or paths < 2 or m < 1 or m > n:
        raise ConfigError("need n >= 1, paths >= 2, 1 <= m <= n")
    if dt <= 0 or t_end <= 0 or store_points < 2:
        raise ConfigError("need dt > 0, t_end > 0, store_points >= 2")

    meta = {"config": dict(sorted(cfg.items())), "version": __version__}
    root = np.random.SeedSequence(seed)
    s_init_t, s_init_p, s_run_t, s_run_p = root.spawn(4)

    def draw_initials(ss):
        return [bulk_scale(sample_gue_eigenvalues(n, child), theta) for child in ss.spawn(paths)]

    init_t, init_p = _pmap(draw_initials, [s_init_t, s_init_p], cfg["threads"])

    def run(args):
        spec, inits, ss = args
        return simulate_ensemble(
            spec, inits, t_end, dt, seed=ss, m_tags=m, store=store_points
        )

    ens_t, ens_p = _pmap(
        run,
        [
            (DriftSpec.finite_theta(theta, n), init_t, s_run_t),
            (DriftSpec.finite_plain(n), init_p, s_run_p),
        ],
        cfg["threads"],
    )

    tagged = tagged_statistics(ens_t, m, other=ens_p)
    tagged.name = "simulate_tagged"
    tagged.metadata = {**meta, **tagged.metadata}
    out.add(tagged)

    est_t, se_t = drift_rate(ens_t, 0)
    est_p, se_p = drift_rate(ens_p, 0)
    logw = girsanov_log_density(theta, n, ens_p.brownian_terminals(), t_end)
    w = np.exp(logw)
    w_mean = float(w.mean())
    w_se = float(w.std(ddof=1) / math.sqrt(w.size))

    ok = _check_line(
        "stationary drift-rate (theta spec)", abs(est_t) <= 3 * se_t,
        f"est={est_t:.4f} se={se_t:.4f}",
    )
    ok &= _check_line(
        "moving-frame drift-rate (plain spec)", abs(est_p - theta) <= 3 * se_p,
        f"est={est_p:.4f} target={theta} se={se_p:.4f}",
    )
    ok &= _check_line(
        "girsanov mean-one", abs(w_mean - 1.0) <= 3 * w_se,
        f"mean={w_mean:.5f} se={w_se:.5f}",
    )

    summary = ExperimentReport(
        name="simulate_summary",
        metadata=meta,
        columns=["check", "estimate", "standard_error", "target", "passed"],
        rows=[
            ("drift_rate_theta", est_t, se_t, 0.0, abs(est_t) <= 3 * se_t),
            ("drift_rate_plain", est_p, se_p, theta, abs(est_p - theta) <= 3 * se_p),
            ("girsanov_mean", w_mean, w_se, 1.0, abs(w_mean - 1.0) <= 3 * w_se),
        ],
    )
    out.add(summary)

    times = ens_t.times
    mean_t = np.stack([ens_t.tagged(0).mean(axis=0), ens_p.tagged(0).mean(axis=0)])
    band = 1.0 * ens_p.tagged(0).std(axis=0) / math.sqrt(paths)
    out.add_svg(
        "simulate",
        polyline_svg(
            [
                ("theta spec tag 0", times, mean_t[0]),
                ("plain spec tag 0", times, mean_t[1]),
                ("plain +1se", times, mean_t[1] + band),
                ("plain -1se", times, mean_t[1] - band),
            ],
            title="tagged particle mean",
        ),
    )
    return ok


def _cmd_sample(cfg: dict, out: _Output) -> bool:
    n, draws, theta = int(cfg["n"]), int(cfg["draws"]), float(cfg["theta"])
    lo, hi, bins = float(cfg["window_lo"]), float(cfg["window_hi"]), int(cfg["bins"])
    seed = int(cfg["seed"])
    if abs(theta) >= SQRT2:
        raise ConfigError("|theta| must be < sqrt(2)")
    if n < 1 or draws < 1 or bins < 1 or not hi > lo:
        raise ConfigError("need n, draws, bins >= 1 and window_lo < window_hi")

    meta = {"config": dict(sorted(cfg.items())), "version": __version__}
    children = np.random.SeedSequence(seed).spawn(draws)
    configs = _pmap(lambda s: sample_gue_eigenvalues(n, s), children, cfg["threads"])

    eig = ExperimentReport(
        name="sample_eigenvalues", metadata=meta, columns=["draw", "index", "position"]
    )
    for d, c in enumerate(configs):
        for i, p in enumerate(c.positions):
            eig.append(d, i, float(p))
    out.add(eig)

    pooled = np.concatenate([semicircle_scale(c).positions for c in configs])
    ks = ks_statistic(pooled)

    bulk = [bulk_scale(c, theta) for c in configs]
    density = empirical_one_point(bulk, (lo, hi), bins)
    kernel = ScaledKernel(n, theta)
    ref = kernel.diag(density.grid)
    dens = ExperimentReport(
        name="sample_density",
        metadata=meta,
        columns=["bin_center", "empirical", "standard_error", "kernel_diag"],
    )
    for g, v, s, k in zip(density.grid, density.values, density.standard_errors, ref):
        dens.append(float(g), float(v), float(s), float(k))
    out.add(dens)

    sup_dev = float(np.max(np.abs(density.values - ref)))
    pooled_se = float(np.sqrt(np.mean(density.standard_errors**2)))
    ks_ok = ks <= float(cfg["ks_threshold"])
    dev_ok = sup_dev <= 3.0 * pooled_se
    ok = _check_line("semicircle KS", ks_ok, f"ks={ks:.4f} threshold={cfg['ks_threshold']}")
    ok &= _check_line(
        "empirical one-point vs kernel diagonal", dev_ok,
        f"sup_dev={sup_dev:.4f} pooled_se={pooled_se:.4f}",
    )
    summary = ExperimentReport(
        name="sample_summary",
        metadata=meta,
        columns=["check", "value", "threshold", "passed"],
        rows=[
            ("semicircle_ks", ks, float(cfg["ks_threshold"]), ks_ok),
            ("one_point_sup_dev", sup_dev, 3.0 * pooled_se, dev_ok),
        ],
    )
    out.add(summary)
    out.add_svg(
        "sample",
        polyline_svg(
            [
                ("empirical", density.grid, density.values),
                ("kernel diagonal", density.grid, ref),
            ],
            title=f"one-point function N={n} theta={theta}",
        ),
    )
    return ok


def _cmd_pv_check(cfg: dict, out: _Output) -> bool:
    thetas = _float_list(cfg["thetas"])
    tol = float(cfg["pv_tol"])
    if any(abs(t) >= SQRT2 for t in thetas):
        raise ConfigError("all thetas must satisfy |theta| < sqrt(2)")
    meta = {"config": dict(sorted(cfg.items())), "version": __version__}
    report = ExperimentReport(
        name="pv_check", metadata=meta, columns=["theta", "value", "error", "passed"]
    )
    ok = True
    for t in thetas:
        v = pv_semicircle(t)
        err = abs(v - t)
        passed = err <= tol
        ok &= _check_line(f"pv identity theta={t}", passed, f"error={err:.2e}")
        report.append(t, v, err, passed)
    out.add(report)
    return ok


_COMMANDS = {
    "kernel-table": _cmd_kernel_table,
    "conditions": _cmd_conditions,
    "simulate": _cmd_simulate,
    "sample": _cmd_sample,
    "pv-check": _cmd_pv_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dysonlab", description="GUE bulk-scaling numerical laboratory"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, defaults in _DEFAULTS.items():
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--seed", type=int, help="master RNG seed")
        p.add_argument("--threads", type=int, help="worker threads (env DYSONLAB_THREADS)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=_FORMATS, help="output format (default csv)")
        for key, value in defaults.items():
            flag = "--" + key.replace("_", "-")
            if isinstance(value, list):
                p.add_argument(flag, type=_parse_scalar, help=f"default {value}")
            elif isinstance(value, int):
                p.add_argument(flag, type=int, help=f"default {value}")
            else:
                p.add_argument(flag, type=float, help=f"default {value}")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    t0 = time.monotonic()
    try:
        file_cfg = parse_config_file(args.config) if args.config else {}
        cfg = _effective(args.command, args, file_cfg)
        out = _Output(args.out, cfg["format"])
        passed = _COMMANDS[args.command](cfg, out)
        written = out.write()
    except (ConfigError, argparse.ArgumentTypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (
        QuadratureToleranceError,
        StepFailureError,
        EigensolverError,
        CollisionError,
        np.linalg.LinAlgError,
    ) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(f"wrote {path}")
    print(f"wall time: {time.monotonic() - t0:.2f} s", file=sys.stderr)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
