"""Acceptance gate: one test per primary verification criterion.

Each test prints one [criterion NN] PASS/FAIL line (visible with -s, and in
the failure report otherwise); under ``pytest -v`` the test names themselves
give the per-criterion verdict lines.  Simulation criteria use fixed,
non-overlapping seed blocks, so every run is deterministic.
"""

import math
import time

import numpy as np
import pytest

from rlfeat.model import config_from_snr, sigma_y2
from rlfeat.simulate import empirical_spectrum, estimate
from rlfeat.spectrum import f_zero, spectral_density, support_edges
from rlfeat.theory import (
    chi_finite_lambda,
    closed_form,
    theory_finite_lambda,
)

TRIALS = 1000
SE_LIMIT = 3.0
QUANTITIES = ("train", "test", "bias2", "variance")


def _criterion(number, description, ok, detail):
    line = f"[criterion {number:02d}] {'PASS' if ok else 'FAIL'} {description}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def _scaled_z(est, cfg):
    """z-scores of the scaled simulation against scaled finite-ridge theory."""
    theory = theory_finite_lambda(cfg.realized())
    scale = est.sigma_y2
    targets = {
        "train": theory.train_error / scale,
        "test": theory.test_error / scale,
        "bias2": theory.bias2 / scale,
        "variance": theory.variance / scale,
    }
    scaled = est.scaled()
    return {
        name: (scaled.stat(name).mean - target) / scaled.stat(name).stderr
        for name, target in targets.items()
    }


def _sim_curve(alpha_f, alpha_p_values, seed_base):
    """Simulate TRIALS trials per grid point with disjoint seed blocks."""
    points = {}
    for index, alpha_p in enumerate(alpha_p_values):
        cfg = config_from_snr(alpha_f, alpha_p)
        points[alpha_p] = estimate(cfg, TRIALS, seed0=seed_base + TRIALS * index)
    return points


def _worst_z(alpha_f, points):
    worst = 0.0
    where = ""
    for alpha_p, est in points.items():
        cfg = config_from_snr(alpha_f, alpha_p)
        for name, z in _scaled_z(est, cfg).items():
            if abs(z) > abs(worst):
                worst = z
                where = f"{name}@alpha_p={alpha_p:g}"
    return worst, where


def test_criterion_01_underparameterized_curves_match_theory():
    alpha_p_values = (0.125, 0.25, 0.375, 0.75, 1.5, 3.0, 6.0)
    points = _sim_curve(0.5, alpha_p_values, seed_base=0)
    worst, where = _worst_z(0.5, points)
    _criterion(
        1,
        "alpha_f=0.5 curve: all scaled quantities within 3 SE of theory",
        abs(worst) <= SE_LIMIT,
        f"worst z={worst:+.2f} at {where}, 7 points x {TRIALS} trials",
    )


def test_criterion_02_overparameterized_curves_and_divergence():
    alpha_p_values = (0.25, 0.5, 0.75, 1.5, 2.0, 4.0, 8.0)
    points = _sim_curve(4.0, alpha_p_values, seed_base=30_000)
    worst, where = _worst_z(4.0, points)
    near = estimate(
        config_from_snr(4.0, 1.05), TRIALS, seed0=30_000 + TRIALS * 7
    )
    ratio = near.stat("test").mean / points[8.0].stat("test").mean
    ok = abs(worst) <= SE_LIMIT and ratio >= 5.0
    _criterion(
        2,
        "alpha_f=4 curve within 3 SE and test error spikes near alpha_p=1",
        ok,
        f"worst z={worst:+.2f} at {where}; test(1.05)/test(8)={ratio:.1f}",
    )


def _interior_grid(n=50):
    values = np.geomspace(0.1, 10.0, n)
    for alpha_f in values:
        for alpha_p in values:
            if alpha_f == 1.0 or alpha_p == 1.0 or alpha_f == alpha_p:
                continue
            yield float(alpha_f), float(alpha_p)


def test_criterion_03_error_decomposition_identity():
    start = time.perf_counter()
    worst = 0.0
    for alpha_f, alpha_p in _interior_grid():
        cfg = config_from_snr(alpha_f, alpha_p)
        result = closed_form(cfg)
        total = result.bias2 + result.variance + cfg.sigma_eps2
        gap = abs(result.test_error - total) / result.test_error
        worst = max(worst, gap)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    _criterion(
        3,
        "test = bias2 + variance + noise on the 50x50 interior grid",
        ok,
        f"worst relative gap {worst:.2e}, {elapsed * 1000:.0f} ms",
    )


def test_criterion_04_chi_limit_matches_closed_form():
    worst = 0.0
    for alpha_f, alpha_p in _interior_grid():
        cfg = config_from_snr(alpha_f, alpha_p, lam=1e-12)
        chi = chi_finite_lambda(cfg)
        target = max(0.0, 1.0 - alpha_f, 1.0 - alpha_p)
        worst = max(worst, abs(chi - target))
    _criterion(
        4,
        "chi at lambda_bar=1e-12 reaches max(0, 1-alpha_f, 1-alpha_p)",
        worst <= 1e-8,
        f"worst |chi - limit| = {worst:.2e}",
    )


def test_criterion_05_training_error_is_quadratic_in_ridge():
    lambdas = (1e-2, 1e-3, 1e-4)
    trains = [
        theory_finite_lambda(config_from_snr(4.0, 2.0, lam=lam)).train_error
        for lam in lambdas
    ]
    slope = np.polyfit(np.log(lambdas), np.log(trains), 1)[0]
    _criterion(
        5,
        "train error scales as lambda_bar^2 at (alpha_f, alpha_p) = (4, 2)",
        abs(slope - 2.0) <= 0.1,
        f"log-log slope {slope:.4f}",
    )


def _offset_boundary(value):
    return (0.98, 1.02) if value == 1.0 else (value,)


def test_criterion_06_spectral_mass_is_normalized():
    worst = 0.0
    where = ""
    for alpha_f_nominal in (0.25, 1.0, 4.0):
        for alpha_p_nominal in (0.125, 1.0, 8.0):
            for alpha_f in _offset_boundary(alpha_f_nominal):
                for alpha_p in _offset_boundary(alpha_p_nominal):
                    cfg = config_from_snr(alpha_f, alpha_p)
                    result = spectral_density(cfg)
                    gap = abs(result.bulk_mass + result.f_zero - 1.0)
                    if gap > worst:
                        worst = gap
                        where = f"({alpha_f:g},{alpha_p:g})"
    _criterion(
        6,
        "bulk density mass plus zero-mode weight is 1 to 1e-3",
        worst <= 1e-3,
        f"worst |mass-1| = {worst:.2e} at {where}",
    )


def _binned_analytic_density(cfg, bin_edges, refine=16):
    """Analytic density averaged over each histogram bin."""
    lo = bin_edges[:-1]
    width = bin_edges[1:] - bin_edges[:-1]
    offsets = (np.arange(refine) + 0.5) / refine
    xs = (lo[:, None] + width[:, None] * offsets[None, :]).ravel()
    rho = spectral_density(cfg, xs=xs).rho
    return rho.reshape(len(lo), refine).mean(axis=1)


def test_criterion_07_empirical_spectra_match_analytic_density():
    worst_sup = 0.0
    worst_zero = 0.0
    details = []
    for alpha_f, alpha_p in ((4.0, 2.0), (0.5, 2.0), (2.0, 0.5)):
        cfg = config_from_snr(alpha_f, alpha_p, m=4096)
        emp = empirical_spectrum(cfg, seed0=0)
        analytic = _binned_analytic_density(cfg, emp.bin_edges)
        peak = analytic.max()
        sup = np.abs(emp.density - analytic).max() / peak
        zero_gap = abs(emp.zero_fraction - f_zero(cfg)) * cfg.n_p / 2.0
        worst_sup = max(worst_sup, sup)
        worst_zero = max(worst_zero, zero_gap)
        details.append(f"({alpha_f:g},{alpha_p:g}): sup {sup * 100:.1f}%")
    ok = worst_sup <= 0.05 and worst_zero <= 1.0
    _criterion(
        7,
        "empirical Gram spectra at m=4096 track the analytic density",
        ok,
        "; ".join(details) + f"; zero-mode gap {worst_zero:.2f} x (2/n_p)",
    )


def test_criterion_08_lower_edge_collapses_at_interpolation():
    below = (0.8, 0.9, 0.95)
    above = (1.2, 1.1, 1.05)
    edges = {}
    bracket_ok = True
    detail_bits = []
    for alpha_p in below + above:
        cfg = config_from_snr(4.0, alpha_p)
        edge_min, edge_max = support_edges(cfg)
        edges[alpha_p] = edge_min
        emp = empirical_spectrum(
            config_from_snr(4.0, alpha_p, m=4096), n_matrices=1, seed0=0
        )
        sampled_lo = emp.eigenvalues[0]
        sampled_hi = emp.eigenvalues[-1]
        if not (edge_min < sampled_lo and sampled_hi < edge_max):
            bracket_ok = False
            detail_bits.append(f"bracket broken at alpha_p={alpha_p:g}")
    monotone = (
        edges[0.8] > edges[0.9] > edges[0.95] > 0
        and edges[1.2] > edges[1.1] > edges[1.05] > 0
    )
    detail_bits.insert(
        0,
        "edge_min "
        + " > ".join(f"{edges[a]:.4f}" for a in (0.8, 0.9, 0.95))
        + " | "
        + " > ".join(f"{edges[a]:.4f}" for a in (1.2, 1.1, 1.05)),
    )
    _criterion(
        8,
        "lower spectral edge shrinks toward zero near alpha_p=1 and "
        "brackets sampled eigenvalues",
        monotone and bracket_ok,
        "; ".join(detail_bits),
    )


def test_criterion_09_saturating_teacher_matches_effective_linear_model():
    cfg = config_from_snr(0.5, 2.0, teacher="tanh")
    est = estimate(cfg, TRIALS, seed0=20_000)
    zs = _scaled_z(est, cfg)
    moments = cfg.moments()
    linear_power = cfg.sigma_beta2 * cfg.sigma_x2
    nonlinear_power = linear_power * moments.delta_f
    bias_target = nonlinear_power / est.sigma_y2
    scaled_bias = est.scaled().stat("bias2")
    z_bias = (scaled_bias.mean - bias_target) / scaled_bias.stderr
    worst = max(abs(zs["train"]), abs(zs["test"]), abs(zs["variance"]))
    ok = worst <= SE_LIMIT and abs(z_bias) <= SE_LIMIT
    _criterion(
        9,
        "tanh teacher matches linear theory with noise-lifted effective "
        "variance; bias2 equals the nonlinear power",
        ok,
        f"worst train/test/var z={worst:+.2f}, bias2 z={z_bias:+.2f}",
    )


def test_criterion_10_rank_deficit_matches_zero_mode_weight():
    worst = 0.0
    where = "all 15 runs"
    for alpha_f, alpha_p in ((0.5, 2.0), (2.0, 0.5), (4.0, 4.0)):
        cfg = config_from_snr(alpha_f, alpha_p, m=2048)
        limit = 2.0 / cfg.n_p
        for seed in range(5):
            emp = empirical_spectrum(cfg, n_matrices=1, seed0=seed)
            gap = abs(emp.zero_fraction - f_zero(cfg))
            if gap / limit > worst:
                worst = gap / limit
                where = f"({alpha_f:g},{alpha_p:g}) seed {seed}"
    _criterion(
        10,
        "measured rank deficit equals the analytic zero-mode weight",
        worst <= 1.0,
        f"worst gap {worst:.2f} x (2/n_p) over {where}",
    )
