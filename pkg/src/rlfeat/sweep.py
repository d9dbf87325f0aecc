"""Experiment sweeps: flat-text configs, grids, execution, CSV/SVG output.

A sweep walks a grid of aspect ratios (alpha_f, alpha_p), evaluates one mode
per grid point — closed-form theory, Monte Carlo simulation, analytic
spectral density, or simulation-vs-theory validation — and writes one CSV
per quantity plus static SVG figures.  Points are dispatched to a worker
pool; rows are ordered by grid index and written by a single writer, so
output is deterministic regardless of scheduling.

Point evaluation goes through an evaluator callable (by default the
in-process HTTP service), which keeps the command-line client and a remote
deployment byte-identical in output.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigParseError, ConfigValidationError
from .model import TEACHERS, config_from_snr, sigma_y2
from .simulate import default_trials, estimate
from .spectrum import spectral_density
from .theory import closed_form, is_divergent, theory_finite_lambda
from . import output, svgplot

MODES = ("theory", "simulate", "spectrum", "validate")
QUANTITIES = ("train", "test", "bias2", "variance")
Z_THRESHOLD = 3.0

_INT_KEYS = {"alpha_f_steps", "alpha_p_steps", "m", "trials", "seed"}
_FLOAT_KEYS = {
    "alpha_f",
    "alpha_f_min",
    "alpha_f_max",
    "alpha_p",
    "alpha_p_min",
    "alpha_p_max",
    "snr",
    "lambda",
}
_STR_KEYS = {"alpha_f_scale", "alpha_p_scale", "teacher", "mode", "out_dir"}
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


@dataclass(frozen=True)
class SweepSpec:
    """A validated sweep: mode, grid, model template, run parameters."""

    mode: str
    alpha_f_values: tuple
    alpha_p_values: tuple
    m: int = 512
    snr: float = 10.0
    lam: float = 1e-6
    teacher: str = "linear"
    trials: int = None  # None -> per-point default (1000; 150000 on boundary)
    seed: int = 0
    out_dir: str = "."
    alpha_f_scale: str = "log"
    alpha_p_scale: str = "log"

    def config_at(self, alpha_f, alpha_p):
        return config_from_snr(
            alpha_f,
            alpha_p,
            snr=self.snr,
            teacher=self.teacher,
            m=self.m,
            lam=self.lam,
        )

    def grid(self):
        """Grid points in deterministic row-major order (alpha_f outer)."""
        points = []
        for alpha_f in self.alpha_f_values:
            for alpha_p in self.alpha_p_values:
                points.append((alpha_f, alpha_p))
        return points


# ---------------------------------------------------------------------------
# Config parsing and validation
# ---------------------------------------------------------------------------


def _parse_entries(text):
    entries = {}
    for line_number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigParseError(line_number, f"expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigParseError(line_number, f"unknown key {key!r}")
        if key in entries:
            raise ConfigParseError(line_number, f"duplicate key {key!r}")
        if key in _INT_KEYS:
            try:
                entries[key] = int(value)
            except ValueError:
                raise ConfigParseError(
                    line_number, f"{key} needs an integer, got {value!r}"
                ) from None
        elif key in _FLOAT_KEYS:
            try:
                entries[key] = float(value)
            except ValueError:
                raise ConfigParseError(
                    line_number, f"{key} needs a number, got {value!r}"
                ) from None
        else:
            entries[key] = value
    return entries


def _axis_values(entries, prefix, violations):
    single = entries.get(prefix)
    lo = entries.get(f"{prefix}_min")
    hi = entries.get(f"{prefix}_max")
    steps = entries.get(f"{prefix}_steps")
    scale = entries.get(f"{prefix}_scale", "log")
    has_axis = any(v is not None for v in (lo, hi, steps))
    if single is not None and has_axis:
        violations.append(
            f"{prefix}: give either a single value or _min/_max/_steps, not both"
        )
        return None
    if single is not None:
        if not (single > 0):
            violations.append(f"{prefix}: must be > 0, got {single}")
            return None
        return (float(single),)
    if not has_axis:
        violations.append(
            f"{prefix}: missing ({prefix}= or {prefix}_min/_max/_steps required)"
        )
        return None
    missing = [
        name
        for name, v in (("min", lo), ("max", hi), ("steps", steps))
        if v is None
    ]
    if missing:
        parts = ", ".join(f"{prefix}_{name}" for name in missing)
        violations.append(f"{prefix}: incomplete axis, missing {parts}")
        return None
    ok = True
    if not (lo > 0):
        violations.append(f"{prefix}_min: must be > 0, got {lo}")
        ok = False
    if hi < lo:
        violations.append(f"{prefix}_max: must be >= {prefix}_min")
        ok = False
    if steps < 1:
        violations.append(f"{prefix}_steps: must be >= 1, got {steps}")
        ok = False
    if scale not in ("linear", "log"):
        violations.append(
            f"{prefix}_scale: must be 'linear' or 'log', got {scale!r}"
        )
        ok = False
    if not ok:
        return None
    if steps == 1:
        return (float(lo),)
    if scale == "linear":
        values = np.linspace(lo, hi, steps)
    else:
        values = np.geomspace(lo, hi, steps)
    return tuple(float(v) for v in values)


def spec_from_entries(entries, mode=None):
    """Validate parsed key-value entries into a SweepSpec.

    Collects every violated invariant and raises one ConfigValidationError
    listing all of them; ``mode`` (from the CLI subcommand) overrides any
    mode key in the file.
    """
    violations = []
    alpha_f_values = _axis_values(entries, "alpha_f", violations)
    alpha_p_values = _axis_values(entries, "alpha_p", violations)
    chosen_mode = mode or entries.get("mode")
    if chosen_mode is None:
        violations.append("mode: missing (theory, simulate, spectrum, validate)")
    elif chosen_mode not in MODES:
        violations.append(
            f"mode: must be one of {', '.join(MODES)}, got {chosen_mode!r}"
        )
    m = entries.get("m", 512)
    if m < 1:
        violations.append(f"m: must be >= 1, got {m}")
    snr = entries.get("snr", 10.0)
    if not (snr > 0):
        violations.append(f"snr: must be > 0, got {snr}")
    lam = entries.get("lambda", 1e-6)
    if not (lam > 0):
        violations.append(f"lambda: must be > 0, got {lam}")
    teacher = entries.get("teacher", "linear")
    if teacher not in TEACHERS:
        known = ", ".join(sorted(TEACHERS))
        violations.append(f"teacher: unknown {teacher!r} (known: {known})")
    trials = entries.get("trials")
    if trials is not None and trials < 1:
        violations.append(f"trials: must be >= 1, got {trials}")
    seed = entries.get("seed", 0)
    if seed < 0:
        violations.append(f"seed: must be >= 0, got {seed}")
    out_dir = entries.get("out_dir", ".")
    if not out_dir:
        violations.append("out_dir: must not be empty")
    if violations:
        raise ConfigValidationError(violations)
    return SweepSpec(
        mode=chosen_mode,
        alpha_f_values=alpha_f_values,
        alpha_p_values=alpha_p_values,
        m=m,
        snr=snr,
        lam=lam,
        teacher=teacher,
        trials=trials,
        seed=seed,
        out_dir=out_dir,
        alpha_f_scale=entries.get("alpha_f_scale", "log"),
        alpha_p_scale=entries.get("alpha_p_scale", "log"),
    )


def load_config(path, mode=None):
    """Parse and validate a flat key=value config file into a SweepSpec."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return spec_from_entries(_parse_entries(text), mode=mode)


# ---------------------------------------------------------------------------
# Point evaluation (shared by the service endpoints and local execution)
# ---------------------------------------------------------------------------


def _quantity_dict(result):
    return {
        "train": result.train_error,
        "test": result.test_error,
        "bias2": result.bias2,
        "variance": result.variance,
    }


def evaluate_theory(cfg):
    """Closed-form ridge-less and finite-lambda values at one grid point."""
    ridgeless = closed_form(cfg)
    finite = theory_finite_lambda(cfg.realized())
    realized = cfg.realized()
    return {
        "alpha_f": cfg.alpha_f,
        "alpha_p": cfg.alpha_p,
        "regime": ridgeless.regime.value,
        "ridgeless": _quantity_dict(ridgeless),
        "finite_lambda": _quantity_dict(finite),
        "lambda_bar": cfg.lambda_bar,
        "sigma_y2": sigma_y2(cfg),
        "n_f": cfg.n_f,
        "n_p": cfg.n_p,
        "m": cfg.m,
        "realized_alpha_f": realized.alpha_f,
        "realized_alpha_p": realized.alpha_p,
    }


def evaluate_simulate(cfg, trials, seed):
    """Monte Carlo estimate plus the finite-lambda theory it should match."""
    est = estimate(cfg, trials, seed0=seed)
    finite = theory_finite_lambda(cfg.realized())
    sim = {
        name: {
            "mean": est.stat(name).mean,
            "stderr": est.stat(name).stderr,
        }
        for name in QUANTITIES
    }
    return {
        "alpha_f": cfg.alpha_f,
        "alpha_p": cfg.alpha_p,
        "theory": _quantity_dict(finite),
        "sim": sim,
        "trials": est.n_trials,
        "seed": seed,
        "sigma_y2": est.sigma_y2,
        "n_f": cfg.n_f,
        "n_p": cfg.n_p,
        "m": cfg.m,
    }


def evaluate_validate(cfg, trials, seed):
    """Simulation with z-scores against the finite-lambda closed forms."""
    point = evaluate_simulate(cfg, trials, seed)
    zs = {}
    for name in QUANTITIES:
        stat = point["sim"][name]
        gap = stat["mean"] - point["theory"][name]
        zs[name] = gap / stat["stderr"] if stat["stderr"] > 0 else math.inf
    point["z"] = zs
    point["max_abs_z"] = max(abs(z) for z in zs.values())
    point["ok"] = point["max_abs_z"] <= Z_THRESHOLD
    return point


def evaluate_spectrum(cfg, n_points=512):
    """Analytic spectral density curve at one grid point."""
    result = spectral_density(cfg, n_points=n_points)
    return {
        "alpha_f": cfg.alpha_f,
        "alpha_p": cfg.alpha_p,
        "xs": [float(x) for x in result.xs],
        "rho": [float(r) for r in result.rho],
        "edge_min": result.edge_min,
        "edge_max": result.edge_max,
        "f_zero": result.f_zero,
        "bulk_mass": result.bulk_mass,
    }


# ---------------------------------------------------------------------------
# Sweep execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    """Outcome of one sweep: written files, per-point payloads, verdict."""

    spec: SweepSpec
    files: tuple
    points: tuple
    report: str
    ok: bool


def _point_runs(spec):
    """Per-point (alpha_f, alpha_p, trials, seed0) with disjoint seed ranges.

    Seed ranges are laid out cumulatively in grid order, so every trial in
    the sweep has a unique seed no matter how points are scheduled.
    """
    runs = []
    next_seed = spec.seed
    for alpha_f, alpha_p in spec.grid():
        trials = spec.trials
        if trials is None and spec.mode in ("simulate", "validate"):
            trials = default_trials(spec.config_at(alpha_f, alpha_p))
        runs.append((alpha_f, alpha_p, trials, next_seed))
        if trials is not None:
            next_seed += trials
    return runs


def local_evaluator(mode, payload):
    """Evaluate one sweep point directly in this process.

    The service endpoints call the same evaluate_* functions, so local and
    remote execution produce identical values.
    """
    cfg = config_from_snr(
        payload["alpha_f"],
        payload["alpha_p"],
        snr=payload["snr"],
        teacher=payload["teacher"],
        m=payload["m"],
        lam=payload["lambda"],
    )
    if mode == "theory":
        return evaluate_theory(cfg)
    if mode == "simulate":
        return evaluate_simulate(cfg, payload["trials"], payload["seed"])
    if mode == "validate":
        return evaluate_validate(cfg, payload["trials"], payload["seed"])
    if mode == "spectrum":
        return evaluate_spectrum(cfg, payload["n_points"])
    raise ValueError(f"unknown mode {mode!r}")


def _payload(spec, alpha_f, alpha_p, trials, seed):
    payload = {
        "alpha_f": alpha_f,
        "alpha_p": alpha_p,
        "m": spec.m,
        "snr": spec.snr,
        "lambda": spec.lam,
        "teacher": spec.teacher,
    }
    if spec.mode in ("simulate", "validate"):
        payload["trials"] = trials
        payload["seed"] = seed
    if spec.mode == "spectrum":
        payload["n_points"] = 512
    return payload


def run_sweep(spec, evaluator=None, max_workers=1):
    """Execute a sweep and write its CSV and SVG outputs.

    ``evaluator(mode, payload) -> dict`` computes one point; the default
    evaluates in-process.  Points run on a thread pool of ``max_workers``;
    files are written afterwards in grid order by this thread alone.
    """
    if evaluator is None:
        evaluator = local_evaluator
    runs = _point_runs(spec)
    payloads = [
        _payload(spec, alpha_f, alpha_p, trials, seed)
        for alpha_f, alpha_p, trials, seed in runs
    ]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            points = list(
                pool.map(lambda p: evaluator(spec.mode, p), payloads)
            )
    else:
        points = [evaluator(spec.mode, payload) for payload in payloads]
    os.makedirs(spec.out_dir, exist_ok=True)
    if spec.mode == "spectrum":
        files = _write_spectrum_outputs(spec, points)
    else:
        files = _write_sweep_outputs(spec, points)
    report, ok = _build_report(spec, points)
    return SweepResult(
        spec=spec, files=tuple(files), points=tuple(points), report=report, ok=ok
    )


def _theory_cell(value):
    # Divergent closed-form values (math.inf) become the "inf" CSV token;
    # None arrives from transports that encode divergence as null.
    if value is None:
        return math.inf
    return value


def _sweep_rows(spec, points, quantity):
    rows = []
    for point in points:
        row = {
            "alpha_f": point["alpha_f"],
            "alpha_p": point["alpha_p"],
            "n_f": point["n_f"],
            "n_p": point["n_p"],
            "m": point["m"],
            "quantity": quantity,
        }
        if spec.mode == "theory":
            row["theory"] = _theory_cell(point["ridgeless"][quantity])
        else:
            row["theory"] = _theory_cell(point["theory"][quantity])
            row["sim_mean"] = point["sim"][quantity]["mean"]
            row["sim_stderr"] = point["sim"][quantity]["stderr"]
            row["trials"] = point["trials"]
        rows.append(row)
    return rows


def _write_sweep_outputs(spec, points):
    files = []
    for quantity in QUANTITIES:
        rows = _sweep_rows(spec, points, quantity)
        csv_path = os.path.join(spec.out_dir, f"{spec.mode}_{quantity}.csv")
        output.write_rows(csv_path, output.SWEEP_COLUMNS, rows)
        files.append(csv_path)
        if len(spec.alpha_f_values) == 1:
            files.append(_write_line_plot(spec, quantity, rows, "alpha_p"))
        elif len(spec.alpha_p_values) == 1:
            files.append(_write_line_plot(spec, quantity, rows, "alpha_f"))
        else:
            files.append(_write_heatmap(spec, quantity, rows))
    return files


def _write_line_plot(spec, quantity, rows, axis):
    xs = tuple(row[axis] for row in rows)
    theory_ys = tuple(
        None if is_divergent(row["theory"]) else row["theory"] for row in rows
    )
    series = [svgplot.Series(label="theory", xs=xs, ys=theory_ys)]
    if spec.mode != "theory":
        sim_ys = tuple(row["sim_mean"] for row in rows)
        errs = tuple(row["sim_stderr"] for row in rows)
        series.append(
            svgplot.Series(
                label="simulation", xs=xs, ys=sim_ys, stderr=errs, markers=True
            )
        )
    if axis == "alpha_p":
        fixed_name, fixed = "alpha_f", spec.alpha_f_values[0]
        xlog = spec.alpha_p_scale == "log"
    else:
        fixed_name, fixed = "alpha_p", spec.alpha_p_values[0]
        xlog = spec.alpha_f_scale == "log"
    plotted = [y for s in series for y in s.ys if y is not None]
    ylog = bool(plotted) and all(math.isfinite(y) and y > 0 for y in plotted)
    path = os.path.join(spec.out_dir, f"{spec.mode}_{quantity}.svg")
    svgplot.line_plot(
        path,
        series,
        title=f"{quantity} at {fixed_name}={fixed:g}, m={spec.m}",
        xlabel=axis,
        ylabel=quantity,
        xlog=xlog,
        ylog=ylog,
        vlines=(1.0, fixed),
    )
    return path


def _write_heatmap(spec, quantity, rows):
    value_key = "theory" if spec.mode == "theory" else "sim_mean"
    n_p_axis = len(spec.alpha_p_values)
    grid = [
        [rows[i_f * n_p_axis + i_p][value_key] for i_p in range(n_p_axis)]
        for i_f in range(len(spec.alpha_f_values))
    ]
    path = os.path.join(spec.out_dir, f"{spec.mode}_{quantity}_heatmap.svg")
    svgplot.heatmap(
        path,
        spec.alpha_p_values,
        spec.alpha_f_values,
        grid,
        title=f"{quantity} ({spec.mode}), m={spec.m}",
        xlabel="alpha_p",
        ylabel="alpha_f",
        xlog=spec.alpha_p_scale == "log",
        ylog=spec.alpha_f_scale == "log",
    )
    return path


def _spectrum_stem(alpha_f, alpha_p):
    return f"spectrum_af{alpha_f:g}_ap{alpha_p:g}"


def _write_spectrum_outputs(spec, points):
    files = []
    for point in points:
        stem = _spectrum_stem(point["alpha_f"], point["alpha_p"])
        rows = [
            {
                "x": x,
                "rho": rho,
                "edge_min": point["edge_min"],
                "edge_max": point["edge_max"],
                "f_zero": point["f_zero"],
            }
            for x, rho in zip(point["xs"], point["rho"])
        ]
        csv_path = os.path.join(spec.out_dir, f"{stem}.csv")
        output.write_rows(
            csv_path,
            output.SPECTRUM_COLUMNS,
            rows,
            schema=output.SPECTRUM_SCHEMA_VERSION,
        )
        files.append(csv_path)
        svg_path = os.path.join(spec.out_dir, f"{stem}.svg")
        series = [
            svgplot.Series(
                label="density",
                xs=tuple(point["xs"]),
                ys=tuple(point["rho"]),
            )
        ]
        svgplot.line_plot(
            svg_path,
            series,
            title=(
                f"spectral density at alpha_f={point['alpha_f']:g}, "
                f"alpha_p={point['alpha_p']:g} "
                f"(f_zero={point['f_zero']:.4g})"
            ),
            xlabel="eigenvalue / (sigma_w2 sigma_x2)",
            ylabel="density",
            vlines=(point["edge_min"], point["edge_max"]),
        )
        files.append(svg_path)
    return files


def _build_report(spec, points):
    lines = [f"mode={spec.mode} points={len(points)} out_dir={spec.out_dir}"]
    ok = True
    if spec.mode == "validate":
        header = (
            f"{'alpha_f':>9} {'alpha_p':>9} "
            + " ".join(f"{'z_' + q:>12} " for q in QUANTITIES)
            + "verdict"
        )
        lines.append(header)
        for point in points:
            cells = " ".join(f"{point['z'][q]:+12.3f} " for q in QUANTITIES)
            verdict = "ok" if point["ok"] else "FAIL"
            lines.append(
                f"{point['alpha_f']:9.4g} {point['alpha_p']:9.4g} "
                + cells
                + verdict
            )
            ok = ok and point["ok"]
        threshold = f"|z| <= {Z_THRESHOLD:g}"
        lines.append(
            f"validation {'passed' if ok else 'FAILED'} ({threshold}, "
            f"{len(points)} points)"
        )
    if spec.mode == "spectrum":
        for point in points:
            lines.append(
                f"alpha_f={point['alpha_f']:g} alpha_p={point['alpha_p']:g}: "
                f"edges [{point['edge_min']:.6g}, {point['edge_max']:.6g}], "
                f"f_zero={point['f_zero']:.6g}, "
                f"bulk mass {point['bulk_mass']:.6f}"
            )
    return "\n".join(lines), ok
