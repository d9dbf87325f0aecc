"""Teacher moments, configuration validation, and noise-scale conventions."""

import math

import numpy as np
import pytest

from rlfeat.errors import DegenerateTeacher, MomentsUnresolved, NotCentered
from rlfeat.model import (
    ModelConfig,
    TeacherActivation,
    config_from_snr,
    get_teacher,
    sigma_dy2,
    sigma_y2,
    teacher_moments,
)

# Frozen oracles for tanh moments: scipy.integrate.quad over [-12, 12] against
# the exact normal density (limit=400), independently confirmed by Monte Carlo
# with 2^26 draws (agreement ~1e-5; quad error estimates < 1e-12).
TANH_F2_QUAD = 0.394294490397842
TANH_FPRIME_QUAD = 0.605705509602159


def test_linear_moments_are_exact():
    mo = teacher_moments("linear")
    assert (mo.mean_f, mo.mean_f2, mo.mean_fprime) == (0.0, 1.0, 1.0)
    assert mo.delta_f == 0.0


def test_relu_moments_match_closed_forms():
    mo = teacher_moments("relu")
    assert mo.mean_f == 0.0
    assert mo.mean_f2 == pytest.approx(0.5 - 1.0 / (2.0 * math.pi), abs=1e-15)
    assert mo.mean_fprime == pytest.approx(0.5, abs=1e-15)
    assert mo.delta_f == pytest.approx(1.0 - 2.0 / math.pi, abs=1e-14)


def test_relu_moments_match_monte_carlo():
    rng = np.random.default_rng(12345)
    h = rng.standard_normal(1 << 22)
    f = np.maximum(h, 0.0) - 1.0 / math.sqrt(2.0 * math.pi)
    mo = teacher_moments("relu")
    assert mo.mean_f2 == pytest.approx(float((f * f).mean()), abs=2e-3)
    assert mo.mean_fprime == pytest.approx(float((h * f).mean()), abs=2e-3)


def test_tanh_moments_match_quad_oracle():
    mo = teacher_moments("tanh")
    assert mo.mean_f == pytest.approx(0.0, abs=1e-12)
    assert mo.mean_f2 == pytest.approx(TANH_F2_QUAD, abs=1e-12)
    assert mo.mean_fprime == pytest.approx(TANH_FPRIME_QUAD, abs=1e-12)


def test_uncentered_activation_is_rejected():
    shifted = TeacherActivation("shifted_tanh", lambda h: np.tanh(h) + 0.1)
    with pytest.raises(NotCentered):
        teacher_moments(shifted)


def test_purely_nonlinear_activation_is_rejected():
    # E[h * (h^2 - 1)] = E[h^3] - E[h] = 0: no linear component.
    quad_only = TeacherActivation("hermite2", lambda h: h * h - 1.0)
    with pytest.raises(DegenerateTeacher):
        teacher_moments(quad_only)


def test_kinked_activation_without_exact_moments_is_rejected():
    kinked = TeacherActivation(
        "abs_centered", lambda h: np.abs(h) - math.sqrt(2.0 / math.pi) + h
    )
    with pytest.raises(MomentsUnresolved):
        teacher_moments(kinked)


def test_unknown_teacher_name():
    with pytest.raises(KeyError):
        get_teacher("swish")


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(alpha_f=0.0, alpha_p=1.0),
        dict(alpha_f=1.0, alpha_p=-2.0),
        dict(alpha_f=1.0, alpha_p=1.0, sigma_x2=0.0),
        dict(alpha_f=1.0, alpha_p=1.0, sigma_eps2=-1.0),
        dict(alpha_f=1.0, alpha_p=1.0, lam=-1e-3),
        dict(alpha_f=1.0, alpha_p=1.0, m=0),
    ],
)
def test_config_rejects_invalid_values(kwargs):
    with pytest.raises(ValueError):
        ModelConfig(**kwargs)


def test_realized_dimensions_round():
    cfg = ModelConfig(alpha_f=0.5, alpha_p=2.0, m=512)
    assert (cfg.n_f, cfg.n_p) == (256, 1024)
    real = cfg.realized()
    assert (real.alpha_f, real.alpha_p) == (0.5, 2.0)
    odd = ModelConfig(alpha_f=1 / 3, alpha_p=2 / 3, m=100)
    assert (odd.n_f, odd.n_p) == (33, 67)
    assert odd.realized().alpha_f == pytest.approx(0.33)


def test_lambda_bar_scaling():
    cfg = ModelConfig(alpha_f=1.0, alpha_p=1.0, lam=2e-3, sigma_w2=4.0, sigma_x2=0.5)
    assert cfg.lambda_bar == pytest.approx(1e-3)


def test_sigma_dy2_zero_for_linear_teacher():
    cfg = ModelConfig(alpha_f=1.0, alpha_p=1.0, teacher="linear")
    assert sigma_dy2(cfg) == 0.0


def test_sigma_dy2_relu_value():
    cfg = ModelConfig(alpha_f=1.0, alpha_p=1.0, teacher="relu", sigma_beta2=10.0)
    assert sigma_dy2(cfg) == pytest.approx(10.0 * (1.0 - 2.0 / math.pi), rel=1e-12)


def test_sigma_y2_is_total_label_variance():
    cfg = ModelConfig(
        alpha_f=1.0, alpha_p=1.0, teacher="relu", sigma_beta2=10.0, sigma_eps2=1.0
    )
    assert sigma_y2(cfg) == pytest.approx(10.0 + sigma_dy2(cfg) + 1.0, rel=1e-12)


@pytest.mark.parametrize("teacher", ["linear", "tanh", "relu"])
def test_config_from_snr_hits_target_snr(teacher):
    cfg = config_from_snr(0.5, 2.0, snr=10.0, teacher=teacher)
    signal = cfg.sigma_beta2 * cfg.sigma_x2 + sigma_dy2(cfg)
    assert signal / cfg.sigma_eps2 == pytest.approx(10.0, rel=1e-12)


def test_config_from_snr_linear_defaults():
    cfg = config_from_snr(0.5, 2.0)
    assert cfg.sigma_beta2 == pytest.approx(10.0)
    assert cfg.sigma_eps2 == 1.0
    assert cfg.m == 512
