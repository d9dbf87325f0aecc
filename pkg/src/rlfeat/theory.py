"""Closed-form learning curves for ridge regression on random linear features.

Thermodynamic-limit (M, N_f, N_p -> inf at fixed alpha_f = N_f/M, alpha_p = N_p/M)
predictions for the ensemble-averaged training error, test error, squared bias and
variance, together with the scalar susceptibilities and squared averages they are
built from. Three regimes exist, set by the smallest of {N_f, N_p, M}; on the
phase boundaries between them several quantities diverge.

Conventions used throughout:

* ``lambda_bar = lam / (sigma_w2 * sigma_x2)`` is the dimensionless ridge.
* ``s = sigma_eps2 + sigma_dy2`` is the effective noise floor (label noise plus
  the variance of the nonlinear teacher component).
* ``b = sigma_beta2 * sigma_x2`` is the linear signal variance.
* Divergent values are the module constant ``DIVERGENT`` (IEEE +inf, assigned
  deliberately, never produced by overflow); poles of negative quantities use
  ``-DIVERGENT``. ``str()`` of these prints the CSV tokens ``inf`` / ``-inf``.

Ridge-less results are exact lambda -> 0 limits; quantities whose limit vanishes
carry their leading O(lambda_bar^2) coefficient in a separate ``*_lambda2`` field.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoPhysicalRoot, SingularSystem
from .model import ModelConfig, sigma_dy2

__all__ = [
    "DIVERGENT",
    "BOUNDARY_TOL",
    "is_divergent",
    "Regime",
    "classify_regime",
    "TheoryResult",
    "closed_form",
    "theory_finite_lambda",
    "chi_finite_lambda",
    "Susceptibilities",
    "susceptibilities_finite_lambda",
    "SquaredAverages",
    "squared_averages_finite_lambda",
    "Covariances",
    "covariances_finite_lambda",
    "covariances_ridgeless",
    "RidgelessSusceptibilities",
    "ridgeless_susceptibilities",
    "NuCoefficients",
    "nu_coefficients",
]

#: Dedicated divergent value. Assigned explicitly at pole classification;
#: arithmetic never overflows into it.
DIVERGENT = math.inf

#: Half-width of the band around each phase boundary treated as "on boundary".
BOUNDARY_TOL = 1e-9


def is_divergent(x):
    return isinstance(x, float) and math.isinf(x)


class Regime(enum.Enum):
    """Which of {N_f, N_p, M} is smallest, or which phase boundary the point sits on."""

    NF_SMALLEST = "nf_smallest"
    NP_SMALLEST = "np_smallest"
    M_SMALLEST = "m_smallest"
    BOUNDARY_INTERPOLATION_P = "boundary_alpha_p=1"
    BOUNDARY_INTERPOLATION_F = "boundary_alpha_f=1"
    BOUNDARY_MINIMAL_BIAS = "boundary_alpha_f=alpha_p"

    @property
    def is_boundary(self):
        return self.value.startswith("boundary")


def classify_regime(alpha_f, alpha_p, tol=BOUNDARY_TOL):
    """Classify (alpha_f, alpha_p) into a regime or one of the three boundaries.

    Boundaries (within ``tol``): alpha_p = 1 with alpha_f >= 1 (interpolation),
    alpha_f = 1 with alpha_p >= 1 (interpolation), and alpha_f = alpha_p with both
    <= 1 (minimal-bias transition). The corner (1, 1) classifies as the alpha_p = 1
    boundary. alpha_p = 1 with alpha_f < 1 (and symmetric cases) are interior
    points: no formula changes branch there.
    """
    if alpha_f <= 0 or alpha_p <= 0:
        raise ValueError("alpha_f and alpha_p must be positive")
    if abs(alpha_p - 1.0) <= tol and alpha_f >= 1.0 - tol:
        return Regime.BOUNDARY_INTERPOLATION_P
    if abs(alpha_f - 1.0) <= tol and alpha_p >= 1.0 - tol:
        return Regime.BOUNDARY_INTERPOLATION_F
    if abs(alpha_f - alpha_p) <= tol and alpha_f <= 1.0 + tol and alpha_p <= 1.0 + tol:
        return Regime.BOUNDARY_MINIMAL_BIAS
    if alpha_f < min(1.0, alpha_p):
        return Regime.NF_SMALLEST
    if alpha_p < min(1.0, alpha_f):
        return Regime.NP_SMALLEST
    if min(alpha_f, alpha_p) > 1.0:
        return Regime.M_SMALLEST
    # Remaining interior ties (e.g. alpha_f = 1 with alpha_p < 1) sit inside a
    # single analytic branch; pick the branch whose strict condition is closest.
    if alpha_p < alpha_f:
        return Regime.NP_SMALLEST
    return Regime.NF_SMALLEST


def _pole(coefficient, sign=1.0):
    """Value of coefficient/0+ carried as a deliberate divergence."""
    if coefficient > 0:
        return sign * DIVERGENT
    if coefficient < 0:
        return -sign * DIVERGENT
    return 0.0


@dataclass(frozen=True)
class TheoryResult:
    """Ensemble-averaged predictions for one (alpha_f, alpha_p) point.

    ``train_error`` equals ``dy2``; ``test_error = sigma_x2*dbeta2 + sigma_dy2 +
    sigma_eps2``; ``bias2 = sigma_x2*cov_dbeta + sigma_dy2``; ``variance =
    sigma_x2*(dbeta2 - cov_dbeta)``. The ``*_lambda2`` fields hold the leading
    O(lambda_bar^2) coefficient for quantities whose ridge-less limit is zero and
    are None elsewhere (and for finite-lambda evaluations, where the values
    themselves are exact). ``at_lambda_bar`` is None for ridge-less results.
    """

    train_error: float
    test_error: float
    bias2: float
    variance: float
    w2: float
    u2: float
    dy2: float
    dbeta2: float
    cov_w: float
    cov_u: float
    cov_dy: float
    cov_dbeta: float
    sigma_dy2: float
    regime: Regime
    u2_lambda2: float | None = None
    dy2_lambda2: float | None = None
    cov_u_lambda2: float | None = None
    cov_dbeta_lambda2: float | None = None
    at_lambda_bar: float | None = None


def _scales(cfg):
    dy2 = sigma_dy2(cfg)
    s = cfg.sigma_eps2 + dy2
    b = cfg.sigma_beta2 * cfg.sigma_x2
    return s, b, dy2


def _ridgeless_nf(cfg, s, b, dy2):
    """N_f < N_p, M branch."""
    af, ap = cfg.alpha_f, cfg.alpha_p
    sw2, sx2, sb2 = cfg.sigma_w2, cfg.sigma_x2, cfg.sigma_beta2
    train = s * (1 - af)
    return dict(
        train_error=train,
        test_error=s / (1 - af),
        bias2=dy2,
        variance=s * af / (1 - af),
        w2=sb2 / sw2 * af / (ap - af)
        + s / (sw2 * sx2) * af**2 / ((1 - af) * (ap - af)),
        u2=0.0,
        u2_lambda2=sb2 * sx2**2 * ap**3 / (ap - af) ** 3
        + sx2 * s * af * ap**3 / ((1 - af) * (ap - af) ** 3),
        dy2=train,
        dy2_lambda2=None,
        dbeta2=s / sx2 * af / (1 - af),
        cov_w=sb2 / sw2 * af / (ap - af),
        cov_u=0.0,
        cov_u_lambda2=sb2 * sx2**2 * ap**3 / (ap - af) ** 3,
        cov_dbeta=0.0,
        cov_dbeta_lambda2=sb2 * af**2 * ap**3 / ((1 - af) ** 2 * (ap - af) ** 3),
    )


def _ridgeless_np(cfg, s, b, dy2):
    """N_p < N_f, M branch."""
    af, ap = cfg.alpha_f, cfg.alpha_p
    sw2, sx2, sb2 = cfg.sigma_w2, cfg.sigma_x2, cfg.sigma_beta2
    train = b * (1 - ap) * (af - ap) / af + s * (1 - ap)
    return dict(
        train_error=train,
        test_error=b * (af - ap) / (af * (1 - ap)) + s / (1 - ap),
        bias2=b * (af - ap) / af + dy2,
        variance=b * ap * (af - ap) / (af * (1 - ap)) + s * ap / (1 - ap),
        w2=sb2 / sw2 * (1 + af - 2 * ap) / ((1 - ap) * (af - ap))
        + s / (sw2 * sx2) * af * ap / ((1 - ap) * (af - ap)),
        u2=sb2 * sx2**2 * (1 - ap) * (af - ap) * (1 + af - 2 * ap) / af**3
        + sx2 * s * (1 - ap) * (af - ap) / af**2,
        u2_lambda2=None,
        dy2=train,
        dy2_lambda2=None,
        dbeta2=sb2 * (af - ap) / (af * (1 - ap)) + s / sx2 * ap / (1 - ap),
        cov_w=sb2 / sw2 * ap / (af - ap),
        cov_u=sb2 * sx2**2 * (1 - ap) ** 2 * (af - ap) / af**3,
        cov_u_lambda2=None,
        cov_dbeta=sb2 * (af - ap) / af,
        cov_dbeta_lambda2=None,
    )


def _ridgeless_m(cfg, s, b, dy2):
    """M < N_f, N_p branch."""
    af, ap = cfg.alpha_f, cfg.alpha_p
    sw2, sx2, sb2 = cfg.sigma_w2, cfg.sigma_x2, cfg.sigma_beta2
    return dict(
        train_error=0.0,
        test_error=b * ap * (af - 1) / (af * (ap - 1))
        + s * (af * ap - 1) / ((af - 1) * (ap - 1)),
        bias2=b * ap * (af - 1) ** 2 / (af * (af * ap - 1)) + dy2,
        variance=b * ap * (af - 1) * (af + ap - 2) / (af * (ap - 1) * (af * ap - 1))
        + s * (af + ap - 2) / ((af - 1) * (ap - 1)),
        w2=sb2 / sw2 / (ap - 1) + s / (sw2 * sx2) * af / ((af - 1) * (ap - 1)),
        u2=0.0,
        u2_lambda2=sb2 * sx2**2 * ap**3 / (af * (ap - 1) ** 3)
        + sx2 * s * ap**3 / ((af - 1) * (ap - 1) ** 3),
        dy2=0.0,
        # chi1^2 * (b*kappa-part + s*(af*ap-1)/((af-1)(ap-1))), from
        # dy2 = chi^2 (sigma_x2*dbeta2 + s) expanded to O(lambda_bar^2).
        dy2_lambda2=b * af * ap**3 / ((af - 1) * (ap - 1) ** 3)
        + s * af**2 * ap**2 * (af * ap - 1) / ((af - 1) ** 3 * (ap - 1) ** 3),
        dbeta2=sb2 * ap * (af - 1) / (af * (ap - 1))
        + s / sx2 * (af + ap - 2) / ((af - 1) * (ap - 1)),
        cov_w=sb2 / sw2 / (af * ap - 1),
        cov_u=0.0,
        cov_u_lambda2=sb2 * sx2**2 * ap**3 / (af * (ap - 1) ** 2 * (af * ap - 1)),
        cov_dbeta=sb2 * ap * (af - 1) ** 2 / (af * (af * ap - 1)),
        cov_dbeta_lambda2=None,
    )


def _ridgeless_boundary(cfg, regime, s, b, dy2):
    """One-sided limits on the phase boundaries.

    Quantities whose two adjacent-branch limits coincide are returned at that
    (finite) value; all others are deliberate divergences. Fully degenerate
    configurations (zero signal and zero noise) return zeros instead of poles.
    """
    af, ap = cfg.alpha_f, cfg.alpha_p
    sw2, sx2, sb2 = cfg.sigma_w2, cfg.sigma_x2, cfg.sigma_beta2

    if regime is Regime.BOUNDARY_MINIMAL_BIAS:
        # alpha_f = alpha_p = a < 1: every Fig.-level quantity is continuous.
        a = 0.5 * (af + ap)
        return dict(
            train_error=s * (1 - a),
            test_error=s / (1 - a),
            bias2=dy2,
            variance=s * a / (1 - a),
            w2=_pole(sb2 + s),
            u2=0.0,
            u2_lambda2=_pole(sb2 + s),
            dy2=s * (1 - a),
            dy2_lambda2=None,
            dbeta2=s / sx2 * a / (1 - a),
            cov_w=_pole(sb2),
            cov_u=0.0,
            cov_u_lambda2=_pole(sb2),
            cov_dbeta=0.0,
            cov_dbeta_lambda2=_pole(sb2),
        )

    if regime is Regime.BOUNDARY_INTERPOLATION_P:
        # alpha_p = 1, alpha_f >= 1 (includes the (1, 1) corner).
        af = max(af, 1.0)
        bias2 = b * (af - 1) / af + dy2
        return dict(
            train_error=0.0,
            test_error=_pole(s + b * (af - 1)),
            bias2=bias2,
            variance=_pole(s + b * (af - 1)),
            w2=_pole(sb2 + s),
            u2=0.0,
            u2_lambda2=_pole(sb2 + s),
            dy2=0.0,
            dy2_lambda2=_pole(b + s),
            dbeta2=_pole(s + sb2 * (af - 1)),
            cov_w=sb2 / sw2 / (af - 1) if af > 1 else _pole(sb2),
            cov_u=0.0,
            cov_u_lambda2=_pole(sb2),
            cov_dbeta=sb2 * (af - 1) / af,
            cov_dbeta_lambda2=None,
        )

    # alpha_f = 1, alpha_p > 1.
    ap = max(ap, 1.0 + BOUNDARY_TOL) if ap <= 1.0 else ap
    return dict(
        train_error=0.0,
        test_error=_pole(s),
        bias2=dy2,
        variance=_pole(s),
        w2=_pole(s) if s > 0 else sb2 / sw2 / (ap - 1),
        u2=0.0,
        u2_lambda2=_pole(s) if s > 0 else sb2 * sx2**2 * ap**3 / (ap - 1) ** 3,
        dy2=0.0,
        dy2_lambda2=_pole(b + s),
        dbeta2=_pole(s),
        cov_w=sb2 / sw2 / (ap - 1),
        cov_u=0.0,
        cov_u_lambda2=sb2 * sx2**2 * ap**3 / (ap - 1) ** 3,
        cov_dbeta=0.0,
        cov_dbeta_lambda2=_pole(sb2),
    )


_BRANCHES = {
    Regime.NF_SMALLEST: _ridgeless_nf,
    Regime.NP_SMALLEST: _ridgeless_np,
    Regime.M_SMALLEST: _ridgeless_m,
}


def closed_form(cfg):
    """Ridge-less (lambda -> 0) closed-form predictions for ``cfg``.

    On a phase boundary, quantities with equal one-sided limits take that value
    and the rest are DIVERGENT. Leading O(lambda_bar^2) coefficients are filled
    in for quantities whose limit is zero.
    """
    s, b, dy2 = _scales(cfg)
    regime = classify_regime(cfg.alpha_f, cfg.alpha_p)
    if regime.is_boundary:
        vals = _ridgeless_boundary(cfg, regime, s, b, dy2)
    else:
        vals = _BRANCHES[regime](cfg, s, b, dy2)
    return TheoryResult(sigma_dy2=dy2, regime=regime, cov_dy=0.0, **vals)


# ---------------------------------------------------------------------------
# Finite-lambda susceptibilities
# ---------------------------------------------------------------------------


def _chi_cubic_coeffs(alpha_f, alpha_p, lambda_bar):
    c2 = alpha_f + alpha_p - 2.0
    c1 = (alpha_f - 1.0) * (alpha_p - 1.0) + alpha_f * alpha_p * lambda_bar
    c0 = -alpha_f * alpha_p * lambda_bar
    return c2, c1, c0


def chi_finite_lambda(cfg):
    """Physical root of the chi cubic at lambda_bar = cfg.lambda_bar.

    chi^3 + (af+ap-2) chi^2 + [(af-1)(ap-1) + af*ap*lb] chi - af*ap*lb = 0.

    The physical root is the continuation of chi0 = max(0, 1-af, 1-ap): the cubic
    is negative at chi0 and equals af*ap > 0 at 1, so a root is bracketed in
    (chi0, 1]. Located by bisection plus a Newton polish.
    """
    af, ap, lb = cfg.alpha_f, cfg.alpha_p, cfg.lambda_bar
    chi0 = max(0.0, 1.0 - af, 1.0 - ap)
    if lb == 0.0:
        return chi0
    c2, c1, c0 = _chi_cubic_coeffs(af, ap, lb)

    def p(x):
        return ((x + c2) * x + c1) * x + c0

    def dp(x):
        return (3.0 * x + 2.0 * c2) * x + c1

    lo, hi = chi0, 1.0
    flo = p(lo)
    if flo > 0.0 or p(hi) < 0.0:
        raise NoPhysicalRoot(
            f"chi bracket [{lo}, {hi}] lost at alpha_f={af}, alpha_p={ap}, "
            f"lambda_bar={lb}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if p(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    chi = 0.5 * (lo + hi)
    for _ in range(8):
        slope = dp(chi)
        if slope == 0.0:
            break
        step = p(chi) / slope
        chi -= step
        if abs(step) < 1e-17 * max(1.0, abs(chi)):
            break
    chi = min(max(chi, chi0), 1.0)
    scale = max(1.0, abs(c2), abs(c1), abs(c0))
    if abs(p(chi)) > 1e-10 * scale:
        raise NoPhysicalRoot(
            f"chi polish failed: residual {p(chi):.3e} at alpha_f={af}, "
            f"alpha_p={ap}, lambda_bar={lb}"
        )
    return chi


@dataclass(frozen=True)
class Susceptibilities:
    """The five scalar susceptibilities at finite lambda."""

    cfg: ModelConfig
    chi: float
    nu: float
    kappa: float
    omega: float
    phi: float

    def residuals(self):
        """Residuals of the five self-consistency relations (should be ~0)."""
        cfg = self.cfg
        af, ap = cfg.alpha_f, cfg.alpha_p
        c = cfg.sigma_w2 * cfg.sigma_x2
        chi, nu, kappa, omega, phi = self.chi, self.nu, self.kappa, self.omega, self.phi
        return (
            kappa * (1.0 + c / af * chi * nu) - 1.0,
            omega - cfg.sigma_x2 / af * chi * kappa,
            phi + cfg.sigma_w2 * nu * kappa,
            chi * (1.0 + c * nu * kappa) - 1.0,
            nu * (cfg.lam + c / ap * chi * kappa) - 1.0,
        )


def susceptibilities_finite_lambda(cfg):
    """All five susceptibilities at lambda_bar = cfg.lambda_bar > 0.

    chi comes from its cubic; kappa then solves the exact quadratic obtained by
    eliminating nu between the kappa- and nu-relations (this avoids the
    catastrophic cancellation of kappa = (alpha_f - 1 + chi)/alpha_f in the
    N_f-smallest regime at small lambda); nu, omega, phi follow exactly.
    """
    if cfg.lam <= 0:
        raise ValueError("susceptibilities_finite_lambda requires lam > 0")
    af, ap = cfg.alpha_f, cfg.alpha_p
    c = cfg.sigma_w2 * cfg.sigma_x2
    chi = chi_finite_lambda(cfg)
    # kappa * (lam + c/ap chi kappa + c/af chi) = lam + c/ap chi kappa
    # => (c chi / ap) kappa^2 + (lam + c chi/af - c chi/ap) kappa - lam = 0
    a_q = c * chi / ap
    b_q = cfg.lam + c * chi / af - c * chi / ap
    d_q = -cfg.lam
    disc = b_q * b_q - 4.0 * a_q * d_q
    if disc < 0.0:
        raise NoPhysicalRoot(f"kappa quadratic has no real root at {cfg}")
    sq = math.sqrt(disc)
    q = -0.5 * (b_q + math.copysign(sq, b_q)) if b_q != 0.0 else math.sqrt(-a_q * d_q)
    roots = []
    if a_q != 0.0 and q != 0.0:
        roots = [q / a_q, d_q / q]
    elif a_q != 0.0:
        roots = [0.0, -b_q / a_q]
    elif b_q != 0.0:
        roots = [-d_q / b_q]
    target = (af - 1.0 + chi) / af
    kappa = min(roots, key=lambda r: abs(r - target))
    nu = 1.0 / (cfg.lam + c / ap * chi * kappa)
    omega = cfg.sigma_x2 / af * chi * kappa
    phi = -cfg.sigma_w2 * nu * kappa
    return Susceptibilities(cfg=cfg, chi=chi, nu=nu, kappa=kappa, omega=omega, phi=phi)


@dataclass(frozen=True)
class SquaredAverages:
    """Mean squared order parameters at finite lambda."""

    w2: float
    u2: float
    dy2: float
    dbeta2: float


def squared_averages_finite_lambda(cfg, susc=None):
    """Solve the 4x4 linear system for (<w^2>, <u^2>, <dy^2>, <dbeta^2>).

    One step of iterative refinement keeps the small, O(lambda_bar^2) components
    accurate despite the 1/lambda_bar^2 scale spread the nu^2 entry introduces.
    """
    if susc is None:
        susc = susceptibilities_finite_lambda(cfg)
    s, _, _ = _scales(cfg)
    af, ap = cfg.alpha_f, cfg.alpha_p
    sw2, sx2, sb2 = cfg.sigma_w2, cfg.sigma_x2, cfg.sigma_beta2
    chi, nu, kappa, omega, phi = susc.chi, susc.nu, susc.kappa, susc.omega, susc.phi
    a = np.array(
        [
            [1.0, -sw2 * af / ap * nu**2, 0.0, 0.0],
            [-sw2 * omega**2, 1.0, -sx2 / af * kappa**2, 0.0],
            [0.0, 0.0, 1.0, -sx2 * chi**2],
            [-sw2 * kappa**2, 0.0, -sx2 / af * phi**2, 1.0],
        ]
    )
    rhs = np.array([0.0, sb2 * omega**2, s * chi**2, sb2 * kappa**2])
    try:
        x = np.linalg.solve(a, rhs)
        x = x + np.linalg.solve(a, rhs - a @ x)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"squared-average system singular at {cfg}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystem(f"squared-average system produced non-finite values at {cfg}")
    # Rounding can leave O(eps)-negative values in components that are exactly
    # zero at this order; genuine negativity means the system was inconsistent.
    floor = -1e-12 * max(1.0, float(np.max(np.abs(x))))
    if np.any(x < floor):
        raise SingularSystem(f"squared averages came out negative at {cfg}: {x}")
    x = np.maximum(x, 0.0)
    return SquaredAverages(w2=float(x[0]), u2=float(x[1]), dy2=float(x[2]), dbeta2=float(x[3]))


@dataclass(frozen=True)
class Covariances:
    """Order-parameter covariances between two models sharing everything but the
    training set. ``cov_dy`` vanishes identically at every lambda."""

    cov_w: float
    cov_u: float
    cov_dy: float
    cov_dbeta: float
    cov_u_lambda2: float | None = None
    cov_dbeta_lambda2: float | None = None


def covariances_finite_lambda(cfg, susc=None):
    """Closed-form solution of the two-dataset covariance system at finite lambda."""
    if susc is None:
        susc = susceptibilities_finite_lambda(cfg)
    af, ap = cfg.alpha_f, cfg.alpha_p
    sw2, sb2 = cfg.sigma_w2, cfg.sigma_beta2
    nu, kappa, omega = susc.nu, susc.kappa, susc.omega
    den = 1.0 - sw2**2 * nu**2 * omega**2 * af / ap
    if den <= 0.0 or not math.isfinite(den):
        raise SingularSystem(f"covariance system singular at {cfg}")
    cov_u = omega**2 * sb2 / den
    cov_w = nu**2 * sw2 * af / ap * cov_u
    cov_dbeta = kappa**2 * (sb2 + sw2 * cov_w)
    return Covariances(cov_w=cov_w, cov_u=cov_u, cov_dy=0.0, cov_dbeta=cov_dbeta)


def covariances_ridgeless(cfg):
    """Ridge-less covariances, with lambda_bar^2 coefficients where the limit is 0."""
    regime = classify_regime(cfg.alpha_f, cfg.alpha_p)
    af, ap = cfg.alpha_f, cfg.alpha_p
    sw2, sx2, sb2 = cfg.sigma_w2, cfg.sigma_x2, cfg.sigma_beta2
    if regime is Regime.NF_SMALLEST:
        return Covariances(
            cov_w=sb2 / sw2 * af / (ap - af),
            cov_u=0.0,
            cov_dy=0.0,
            cov_dbeta=0.0,
            cov_u_lambda2=sb2 * sx2**2 * ap**3 / (ap - af) ** 3,
            cov_dbeta_lambda2=sb2 * af**2 * ap**3 / ((1 - af) ** 2 * (ap - af) ** 3),
        )
    if regime is Regime.NP_SMALLEST:
        return Covariances(
            cov_w=sb2 / sw2 * ap / (af - ap),
            cov_u=sb2 * sx2**2 * (1 - ap) ** 2 * (af - ap) / af**3,
            cov_dy=0.0,
            cov_dbeta=sb2 * (af - ap) / af,
        )
    if regime is Regime.M_SMALLEST:
        return Covariances(
            cov_w=sb2 / sw2 / (af * ap - 1),
            cov_u=0.0,
            cov_dy=0.0,
            cov_dbeta=sb2 * ap * (af - 1) ** 2 / (af * (af * ap - 1)),
            cov_u_lambda2=sb2 * sx2**2 * ap**3 / (af * (ap - 1) ** 2 * (af * ap - 1)),
        )
    vals = _ridgeless_boundary(cfg, regime, *_scales(cfg))
    return Covariances(
        cov_w=vals["cov_w"],
        cov_u=vals["cov_u"],
        cov_dy=0.0,
        cov_dbeta=vals["cov_dbeta"],
        cov_u_lambda2=vals["cov_u_lambda2"],
        cov_dbeta_lambda2=vals["cov_dbeta_lambda2"],
    )


def theory_finite_lambda(cfg):
    """Exact thermodynamic-limit predictions at lambda = cfg.lam > 0.

    Agrees with closed_form() up to O(lambda_bar^2) away from boundaries, and is
    the right comparison target for simulations run at small but nonzero ridge
    (the measured training error in the interpolation regime *is* O(lambda^2)).
    """
    susc = susceptibilities_finite_lambda(cfg)
    sq = squared_averages_finite_lambda(cfg, susc)
    cov = covariances_finite_lambda(cfg, susc)
    _, _, dy2_nl = _scales(cfg)
    test = cfg.sigma_x2 * sq.dbeta2 + dy2_nl + cfg.sigma_eps2
    bias2 = cfg.sigma_x2 * cov.cov_dbeta + dy2_nl
    variance = cfg.sigma_x2 * (sq.dbeta2 - cov.cov_dbeta)
    return TheoryResult(
        train_error=sq.dy2,
        test_error=test,
        bias2=bias2,
        variance=variance,
        w2=sq.w2,
        u2=sq.u2,
        dy2=sq.dy2,
        dbeta2=sq.dbeta2,
        cov_w=cov.cov_w,
        cov_u=cov.cov_u,
        cov_dy=0.0,
        cov_dbeta=cov.cov_dbeta,
        sigma_dy2=dy2_nl,
        regime=classify_regime(cfg.alpha_f, cfg.alpha_p),
        at_lambda_bar=cfg.lambda_bar,
    )


# ---------------------------------------------------------------------------
# Ridge-less susceptibility expansions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RidgelessSusceptibilities:
    """Leading small-lambda_bar expansions of the five susceptibilities.

    chi ~ chi0 + lambda_bar*chi1, kappa ~ kappa0 + lambda_bar*kappa1,
    omega ~ omega0 + lambda_bar*omega1 (Taylor pairs), while
    nu ~ nu_m1/lambda_bar + nu0 and phi ~ phi_m1/lambda_bar + phi0 (Laurent
    pairs). All values are dimensionful. Boundary points carry DIVERGENT
    coefficients wherever the adjacent-branch limits disagree.
    """

    chi0: float
    chi1: float
    kappa0: float
    kappa1: float
    nu_m1: float
    nu0: float
    omega0: float
    omega1: float
    phi_m1: float
    phi0: float


def ridgeless_susceptibilities(cfg):
    af, ap = cfg.alpha_f, cfg.alpha_p
    sw2, sx2 = cfg.sigma_w2, cfg.sigma_x2
    c = sw2 * sx2
    regime = classify_regime(af, ap)
    if regime is Regime.NF_SMALLEST:
        chi0, chi1 = 1 - af, af**2 * ap / ((1 - af) * (ap - af))
        nu_m1, nu0 = (ap - af) / (ap * c), af**2 / ((1 - af) * (ap - af) * c)
    elif regime is Regime.NP_SMALLEST:
        chi0, chi1 = 1 - ap, af * ap**2 / ((1 - ap) * (af - ap))
        nu_m1, nu0 = 0.0, af * ap / ((1 - ap) * (af - ap) * c)
    elif regime is Regime.M_SMALLEST:
        chi0, chi1 = 0.0, af * ap / ((af - 1) * (ap - 1))
        nu_m1, nu0 = (ap - 1) / (ap * c), af / ((af - 1) * (ap - 1) * c)
    else:
        # On every boundary the subleading coefficients blow up; only the
        # leading terms (which agree from both sides) survive.
        chi0 = max(0.0, 1 - af, 1 - ap)
        nu_m1 = max(0.0, 1 - af / ap, 1 - 1 / ap) / c
        kappa0 = (af - 1 + chi0) / af
        return RidgelessSusceptibilities(
            chi0=chi0,
            chi1=DIVERGENT,
            kappa0=kappa0,
            kappa1=DIVERGENT,
            nu_m1=nu_m1,
            nu0=DIVERGENT,
            omega0=sx2 / af * chi0 * kappa0,
            omega1=DIVERGENT,
            phi_m1=-sw2 * nu_m1 * kappa0,
            phi0=-DIVERGENT,
        )
    kappa0 = (af - 1 + chi0) / af
    kappa1 = chi1 / af
    omega0 = sx2 / af * chi0 * kappa0
    omega1 = sx2 / af * (chi0 * kappa1 + chi1 * kappa0)
    phi_m1 = -sw2 * nu_m1 * kappa0
    phi0 = -sw2 * (nu_m1 * kappa1 + nu0 * kappa0)
    return RidgelessSusceptibilities(
        chi0=chi0,
        chi1=chi1,
        kappa0=kappa0,
        kappa1=kappa1,
        nu_m1=nu_m1,
        nu0=nu0,
        omega0=omega0,
        omega1=omega1,
        phi_m1=phi_m1,
        phi0=phi0,
    )


@dataclass(frozen=True)
class NuCoefficients:
    """Laurent coefficients of nu in the dimensionful ridge: nu ~ nu_minus1/lam + nu0.

    nu_minus1 = max(0, 1 - alpha_f/alpha_p, 1 - 1/alpha_p) is dimensionless and
    equals the rank deficit 1 - rank(Z^T Z)/N_p (also the zero-eigenvalue weight
    f_zero). nu0 is DIVERGENT on every phase boundary.
    """

    nu_minus1: float
    nu0: float


def nu_coefficients(cfg):
    r = ridgeless_susceptibilities(cfg)
    c = cfg.sigma_w2 * cfg.sigma_x2
    return NuCoefficients(nu_minus1=r.nu_m1 * c, nu0=r.nu0)
