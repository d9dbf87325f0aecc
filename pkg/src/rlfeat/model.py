"""Model configuration and teacher-model moments.

The generative model: inputs x have i.i.d. N(0, sigma_x2/N_f) entries, labels are
y = y*(x) + eps with teacher

    y*(x) = (sigma_beta * sigma_x / <f'>) * f(x . beta / (sigma_x * sigma_beta)),

beta ~ N(0, sigma_beta2) i.i.d., eps ~ N(0, sigma_eps2). The student is ridge
regression on hidden features z = W^T x with W having i.i.d. N(0, sigma_w2/N_p)
entries. Everything downstream is controlled by the ratios alpha_f = N_f/M and
alpha_p = N_p/M together with the variance scales collected here.

Teacher nonlinearity enters only through two Gaussian moments of the activation
f(h), h ~ N(0,1): <f^2> = E[f(h)^2] and the linear component <f'> = E[f'(h)],
evaluated via Stein's identity <f'> = E[h f(h)]. The excess nonlinear label
variance is sigma_dy2 = sigma_beta2 * sigma_x2 * delta_f with
delta_f = (<f^2> - <f'>^2) / <f'>^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import DegenerateTeacher, MomentsUnresolved, NotCentered

__all__ = [
    "TeacherActivation",
    "TeacherMoments",
    "ModelConfig",
    "teacher_moments",
    "get_teacher",
    "TEACHERS",
    "sigma_dy2",
    "sigma_y2",
    "config_from_snr",
]

#: Default number of Gauss-Hermite nodes for activation moments.
GH_ORDER = 128

#: Agreement required between GH_ORDER and 2*GH_ORDER quadrature results.
GH_AGREEMENT_TOL = 1e-10

#: |E[f(h)]| above this raises NotCentered.
CENTERING_TOL = 1e-8

#: <f'>^2 below this raises DegenerateTeacher.
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class TeacherActivation:
    """A scalar activation f applied to the normalized linear field h ~ N(0,1).

    ``fn`` must be vectorized (numpy ufunc semantics). ``is_linear`` marks the
    identity activation so label generation can use y* = X @ beta exactly.
    ``exact_moments`` = (E[f], E[f^2], E[h f]) bypasses quadrature; required for
    activations with kinks, where Gauss-Hermite does not converge.
    """

    name: str
    fn: callable
    is_linear: bool = False
    exact_moments: tuple = None


TEACHERS = {
    "linear": TeacherActivation(
        "linear", lambda h: h, is_linear=True, exact_moments=(0.0, 1.0, 1.0)
    ),
    "tanh": TeacherActivation("tanh", np.tanh),
    # ReLU centered to zero Gaussian mean: E[max(0,h)] = 1/sqrt(2*pi), so that
    # E[f] = 0, E[f^2] = 1/2 - 1/(2*pi), E[h f] = 1/2 (kink at 0 rules out
    # Gauss-Hermite, hence the closed forms).
    "relu": TeacherActivation(
        "relu",
        lambda h: np.maximum(0.0, h) - 1.0 / math.sqrt(2.0 * math.pi),
        exact_moments=(0.0, 0.5 - 1.0 / (2.0 * math.pi), 0.5),
    ),
}


def get_teacher(name):
    try:
        return TEACHERS[name]
    except KeyError:
        raise KeyError(
            f"unknown teacher {name!r}; choose from {sorted(TEACHERS)}"
        ) from None


@dataclass(frozen=True)
class TeacherMoments:
    """Gaussian moments of a teacher activation."""

    mean_f: float
    mean_f2: float
    mean_fprime: float

    @property
    def delta_f(self):
        """Relative variance of the nonlinear label component."""
        return (self.mean_f2 - self.mean_fprime**2) / self.mean_fprime**2


def _gh_moments(fn, order):
    """Raw Gaussian moments (E[f], E[f^2], E[h f]) by Gauss-Hermite quadrature."""
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    # hermgauss integrates against exp(-t^2); h = sqrt(2) t maps to N(0,1).
    h = math.sqrt(2.0) * nodes
    w = weights / math.sqrt(math.pi)
    f = fn(h)
    return float(w @ f), float(w @ (f * f)), float(w @ (h * f))


@lru_cache(maxsize=None)
def _teacher_moments_cached(name, order):
    return _compute_moments(TEACHERS[name].fn, order)


def _validated(mean_f, mean_f2, mean_fprime):
    if abs(mean_f) > CENTERING_TOL:
        raise NotCentered(
            f"E[f(h)] = {mean_f:.3e}; center the activation so labels have zero mean"
        )
    if mean_fprime**2 < DEGENERATE_TOL:
        raise DegenerateTeacher(
            f"<f'>^2 = {mean_fprime ** 2:.3e}; teacher has no linear component"
        )
    return TeacherMoments(mean_f, mean_f2, mean_fprime)


def _compute_moments(fn, order):
    mean_f, mean_f2, mean_fprime = _gh_moments(fn, order)
    check = _gh_moments(fn, 2 * order)
    drift = max(abs(a - b) for a, b in zip((mean_f, mean_f2, mean_fprime), check))
    if drift > GH_AGREEMENT_TOL:
        raise MomentsUnresolved(
            f"quadrature at orders {order} and {2 * order} disagree by {drift:.3e}; "
            "the activation is too rough for Gauss-Hermite (supply exact_moments)"
        )
    return _validated(mean_f, mean_f2, mean_fprime)


def teacher_moments(teacher, order=GH_ORDER):
    """Moments (E[f], E[f^2], <f'> = E[h f]) of a teacher activation.

    ``teacher`` is a TeacherActivation or a registered name. exact_moments on
    the activation bypass quadrature; registry quadrature results are cached.
    Raises NotCentered / DegenerateTeacher / MomentsUnresolved when the
    activation is unusable.
    """
    if isinstance(teacher, str):
        teacher = get_teacher(teacher)
    if teacher.exact_moments is not None:
        return _validated(*teacher.exact_moments)
    if teacher.is_linear:
        return TeacherMoments(0.0, 1.0, 1.0)
    if teacher.name in TEACHERS and TEACHERS[teacher.name] is teacher:
        return _teacher_moments_cached(teacher.name, order)
    return _compute_moments(teacher.fn, order)


@dataclass(frozen=True)
class ModelConfig:
    """Complete description of one regression problem family.

    alpha_f, alpha_p are the feature/parameter ratios N_f/M, N_p/M. ``m`` is the
    training-set size used by the simulator (the theory depends only on ratios);
    the test set has the same size. ``lam`` is the ridge strength lambda.
    """

    alpha_f: float
    alpha_p: float
    sigma_x2: float = 1.0
    sigma_w2: float = 1.0
    sigma_beta2: float = 10.0
    sigma_eps2: float = 1.0
    lam: float = 1e-6
    teacher: str = "linear"
    m: int = 512

    def __post_init__(self):
        if self.alpha_f <= 0 or self.alpha_p <= 0:
            raise ValueError("alpha_f and alpha_p must be positive")
        if min(self.sigma_x2, self.sigma_w2) <= 0:
            raise ValueError("sigma_x2 and sigma_w2 must be positive")
        if self.sigma_beta2 < 0 or self.sigma_eps2 < 0 or self.lam < 0:
            raise ValueError("variances and lam must be nonnegative")
        if self.m < 1:
            raise ValueError("m must be a positive integer")

    @property
    def lambda_bar(self):
        """Dimensionless ridge strength lambda / (sigma_w2 * sigma_x2)."""
        return self.lam / (self.sigma_w2 * self.sigma_x2)

    @property
    def n_f(self):
        """Realized input-feature count round(alpha_f * m)."""
        return max(1, round(self.alpha_f * self.m))

    @property
    def n_p(self):
        """Realized hidden-feature count round(alpha_p * m)."""
        return max(1, round(self.alpha_p * self.m))

    def realized(self):
        """Config with alpha_f, alpha_p replaced by their realized integer ratios."""
        return replace(self, alpha_f=self.n_f / self.m, alpha_p=self.n_p / self.m)

    def activation(self):
        return get_teacher(self.teacher)

    def moments(self):
        return teacher_moments(self.teacher)


def sigma_dy2(cfg):
    """Variance of the nonlinear label component, sigma_beta2*sigma_x2*delta_f."""
    return cfg.sigma_beta2 * cfg.sigma_x2 * cfg.moments().delta_f


def sigma_y2(cfg):
    """Total label variance sigma_beta2*sigma_x2 + sigma_dy2 + sigma_eps2."""
    return cfg.sigma_beta2 * cfg.sigma_x2 + sigma_dy2(cfg) + cfg.sigma_eps2


def config_from_snr(alpha_f, alpha_p, snr=10.0, teacher="linear", m=512, lam=1e-6):
    """Build a config in the standard convention sigma_x2 = sigma_w2 = sigma_eps2 = 1.

    ``snr`` fixes the signal variance (sigma_beta2*sigma_x2 + sigma_dy2) / sigma_eps2,
    so sigma_beta2 = snr / (1 + delta_f).
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    delta_f = teacher_moments(teacher).delta_f
    return ModelConfig(
        alpha_f=alpha_f,
        alpha_p=alpha_p,
        sigma_beta2=snr / (1.0 + delta_f),
        lam=lam,
        teacher=teacher,
        m=m,
    )
