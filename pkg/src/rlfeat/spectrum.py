"""Analytic eigenvalue spectrum of the student Hessian (hidden-feature Gram matrix).

The N_p x N_p Gram matrix Z^T Z of the hidden features has, in the thermodynamic
limit, a deterministic spectral measure: a possible point mass at zero of weight
f_zero = max(0, 1 - alpha_f/alpha_p, 1 - 1/alpha_p) plus a bulk density on
[edge_min, edge_max]. Everything here works in dimensionless eigenvalue units
x = eigenvalue / (sigma_w2 * sigma_x2); the full measure (bulk + atom) has total
mass 1 and first moment 1/alpha_p.

The trace resolvent nu_bar(lam_bar) = (c/N_p) Tr (lam_bar*c*I + Z^T Z)^-1 obeys a
cubic equation in t = alpha_p * lam_bar * nu_bar:

    t^3 + a2 t^2 + a1 t + a0 = 0,
    a2 = 1 + alpha_f - 2*alpha_p,
    a1 = (1 - alpha_p)(alpha_f - alpha_p) + alpha_f*alpha_p*lam_bar,
    a0 = -alpha_f*alpha_p^2*lam_bar.

The bulk density follows from the boundary values on the negative ridge axis,
rho(x) = -(1/pi) * lim_{eps->0+} Im nu_bar(-x + i*eps), and the support edges are
the positive roots of the cubic's discriminant, which is itself exactly a cubic
polynomial in lam_bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoAdmissibleRoot, NoEdgeFound
from .theory import classify_regime

__all__ = [
    "CubicCoeffs",
    "cubic_coeffs",
    "discriminant_poly",
    "f_zero",
    "support_edges",
    "resolvent_nu",
    "SpectrumResult",
    "spectral_density",
]

#: Imaginary offsets used for the eps -> 0+ extrapolation of the resolvent.
EPS_LADDER = (1e-6, 1e-7, 1e-8)


@dataclass(frozen=True)
class CubicCoeffs:
    """Coefficients of the monic resolvent cubic at one real lam_bar, with the
    standard discriminant intermediates Q = (a2^2 - 3 a1)/9,
    R = (9 a2 a1 - 27 a0 - 2 a2^3)/54, D = R^2 - Q^3 (D > 0: one real root,
    i.e. inside the bulk; D < 0: three real roots, outside)."""

    a2: float
    a1: float
    a0: float
    Q: float
    R: float
    D: float


def cubic_coeffs(cfg, lambda_bar):
    af, ap = cfg.alpha_f, cfg.alpha_p
    a2 = 1.0 + af - 2.0 * ap
    a1 = (1.0 - ap) * (af - ap) + af * ap * lambda_bar
    a0 = -af * ap**2 * lambda_bar
    q = (a2**2 - 3.0 * a1) / 9.0
    r = (9.0 * a2 * a1 - 27.0 * a0 - 2.0 * a2**3) / 54.0
    return CubicCoeffs(a2=a2, a1=a1, a0=a0, Q=q, R=r, D=r * r - q**3)


def discriminant_poly(cfg):
    """Coefficients (d0, d1, d2, d3) of D(lam_bar) = d0 + d1*L + d2*L^2 + d3*L^3.

    With a1 = p + q*L and a0 = r*L linear in L = lam_bar, both Q and R are linear
    in L, so D = R^2 - Q^3 is exactly cubic. Support edges are the positive roots
    of D(-x) = 0.
    """
    af, ap = cfg.alpha_f, cfg.alpha_p
    c2 = 1.0 + af - 2.0 * ap
    p = (1.0 - ap) * (af - ap)
    q = af * ap
    r = -af * ap**2
    q0 = (c2**2 - 3.0 * p) / 9.0
    q1 = -q / 3.0
    r0 = (9.0 * c2 * p - 2.0 * c2**3) / 54.0
    r1 = (9.0 * c2 * q - 27.0 * r) / 54.0
    d0 = r0 * r0 - q0**3
    d1 = 2.0 * r0 * r1 - 3.0 * q0**2 * q1
    d2 = r1 * r1 - 3.0 * q0 * q1**2
    d3 = -(q1**3)
    return d0, d1, d2, d3


def f_zero(cfg):
    """Weight of the zero-eigenvalue atom: the rank deficit of the Gram matrix."""
    af, ap = cfg.alpha_f, cfg.alpha_p
    return max(0.0, 1.0 - af / ap, 1.0 - 1.0 / ap)


def _edge_polynomial(cfg):
    """D(-x) as numpy polynomial coefficients (highest degree first)."""
    d0, d1, d2, d3 = discriminant_poly(cfg)
    return np.array([-d3, d2, -d1, d0])


def _cauchy_bound(poly):
    lead = poly[0]
    if lead == 0.0:
        poly = np.trim_zeros(poly, "f")
        lead = poly[0]
    return 1.0 + float(np.max(np.abs(poly[1:] / lead)))


def _bisect(fn, lo, hi, flo):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi or (hi - lo) < 1e-12 * hi:
            break
        if (fn(mid) <= 0.0) == (flo <= 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def support_edges(cfg):
    """Smallest and largest positive support edges (units sigma_w2*sigma_x2).

    Located as the positive roots of the discriminant cubic D(-x) via a
    log-spaced sign scan refined by bisection. Exactly on a phase boundary the
    bulk touches zero: edge_min = 0 and only edge_max is searched (the zero root
    of D is then structural, not a bulk edge).
    """
    poly = _edge_polynomial(cfg)
    on_boundary = classify_regime(cfg.alpha_f, cfg.alpha_p).is_boundary
    if on_boundary:
        # D(-x) has a root pinned at x = 0; divide it out and scan the rest.
        poly = poly[:-1]

    def dval(x):
        return float(np.polyval(poly, x))

    x_hi = _cauchy_bound(poly)
    lo_frac = 1e-9
    n = 4096
    for _ in range(6):
        xs = x_hi * np.logspace(math.log10(lo_frac), 0.0, n)
        vals = np.polyval(poly, xs)
        signs = np.sign(vals)
        crossings = []
        for i in np.nonzero(np.diff(signs) != 0)[0]:
            crossings.append(_bisect(dval, float(xs[i]), float(xs[i + 1]), float(vals[i])))
        need = 1 if on_boundary else 2
        if len(crossings) >= need:
            if on_boundary:
                return 0.0, max(crossings)
            return min(crossings), max(crossings)
        lo_frac *= 1e-3
        x_hi *= 4.0
        n *= 2
    raise NoEdgeFound(
        f"discriminant sign scan found {len(crossings)} crossings for "
        f"alpha_f={cfg.alpha_f}, alpha_p={cfg.alpha_p}"
    )


def _cubic_roots(a2, a1, a0):
    """All three roots of t^3 + a2 t^2 + a1 t + a0 with complex coefficients."""
    return np.roots([1.0, a2, a1, a0])


def _polish_root(t, a2, a1, a0):
    for _ in range(3):
        f = ((t + a2) * t + a1) * t + a0
        df = (3.0 * t + 2.0 * a2) * t + a1
        if df == 0.0:
            break
        step = f / df
        t -= step
        if abs(step) <= 1e-16 * max(1.0, abs(t)):
            break
    return t


def _track_nu(cfg, xs_desc, eps):
    """Resolvent nu_bar at descending abscissae xs, tracked by root continuity.

    The sweep starts above the spectrum where t = alpha_p*lam_bar*nu_bar -> alpha_p
    (nu_bar ~ 1/lam_bar with unit total mass), and follows the nearest root
    downward. Returns the complex nu_bar values in the order given.
    """
    af, ap = cfg.alpha_f, cfg.alpha_p
    out = np.empty(len(xs_desc), dtype=complex)
    t_prev = complex(ap)
    for i, x in enumerate(xs_desc):
        z = complex(-x, eps)
        a2 = 1.0 + af - 2.0 * ap
        a1 = (1.0 - ap) * (af - ap) + af * ap * z
        a0 = -af * ap**2 * z
        roots = _cubic_roots(a2, a1, a0)
        t = roots[np.argmin(np.abs(roots - t_prev))]
        t = _polish_root(complex(t), a2, a1, a0)
        nu = t / (ap * z)
        if nu.imag > 1e-6 * (1.0 + abs(nu)):
            admissible = [r for r in roots if (r / (ap * z)).imag <= 0.0]
            if not admissible:
                raise NoAdmissibleRoot(
                    f"no resolvent root with Im <= 0 at x={x}, eps={eps} "
                    f"(alpha_f={af}, alpha_p={ap})"
                )
            t = _polish_root(complex(min(admissible, key=lambda r: abs(r - t_prev))), a2, a1, a0)
            nu = t / (ap * z)
        t_prev = t
        out[i] = nu
    return out


def _track_from_above(cfg, xs_desc, eps):
    """Tracked nu_bar at descending xs, preceded by a discarded lead-in sweep
    from far above the spectrum where the t ~ alpha_p seed is exact."""
    xs_desc = np.asarray(xs_desc, dtype=float)
    top = float(xs_desc[0]) if len(xs_desc) else 0.0
    start = (max(_cauchy_bound(_edge_polynomial(cfg)), top) + 1.0) * 1.5
    lead = np.geomspace(start, max(top, 1e-12), 24)
    full = _track_nu(cfg, np.concatenate([lead, xs_desc]), eps)
    return full[len(lead):]


def resolvent_nu(cfg, x, eps=EPS_LADDER[-1]):
    """nu_bar(-x + i*eps) on the physical branch (Im nu_bar <= 0).

    A short tracked sweep from above the spectrum selects the branch; for bulk
    densities over a whole grid prefer spectral_density, which shares one sweep.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    return complex(_track_from_above(cfg, np.array([float(x)]), eps)[-1])


@dataclass(frozen=True)
class SpectrumResult:
    """Bulk density on a grid plus edges, zero-atom weight, and bulk mass.

    xs and the edges are in units of sigma_w2*sigma_x2; rho is the density of
    the full spectral measure (mass 1 including the zero atom), so
    bulk_mass = integral of rho ~ 1 - f_zero.
    """

    xs: np.ndarray
    rho: np.ndarray
    edge_min: float
    edge_max: float
    f_zero: float
    bulk_mass: float


def _extrapolated_density(cfg, xs_desc, eps_ladder):
    """-(1/pi) Im nu_bar, eps-extrapolated to 0+ by the last two ladder rungs."""
    eps2, eps3 = eps_ladder[-2], eps_ladder[-1]
    vals = {e: _track_from_above(cfg, xs_desc, e).imag for e in (eps2, eps3)}
    lim = (vals[eps3] * eps2 - vals[eps2] * eps3) / (eps2 - eps3)
    return -lim / math.pi


def _default_grid(edge_min, edge_max, n_points):
    """Uniform grid on [0, 1.1*edge_max] plus geometric clusters into each edge,
    so trapezoid integration resolves the square-root edge behavior."""
    hi = 1.1 * edge_max
    base = np.linspace(0.0, hi, n_points)
    span = edge_max - edge_min
    offsets = span * 10.0 ** (-0.25 * np.arange(4, 37))
    extra = [edge_min, edge_max]
    extra.extend(edge_min + offsets)
    extra.extend(edge_max - offsets)
    if edge_min > 0:
        extra.extend(edge_min - offsets[offsets < edge_min])
    extra.extend(edge_max + offsets)
    xs = np.unique(np.concatenate([base, np.asarray(extra)]))
    return xs[(xs >= 0.0) & (xs <= hi)]


def _bulk_mass(cfg, edge_min, edge_max, eps_ladder, n_theta=384):
    """Integral of rho over the bulk via x = edge_min + span*sin^2(pi/2 * w^2).

    The sin^2 substitution absorbs both square-root edges (and an
    inverse-square-root edge when the bulk touches zero); the extra w^2
    stretch packs points toward the lower edge, which keeps the rule
    accurate when the bulk ends a sliver above zero and the density rises
    steeply over a scale of order edge_min."""
    span = edge_max - edge_min
    if span <= 0:
        return 0.0
    w = (np.arange(n_theta) + 0.5) / n_theta
    theta = (math.pi / 2.0) * w**2
    xs = edge_min + span * np.sin(theta) ** 2
    rho = _extrapolated_density(cfg, xs[::-1], eps_ladder)[::-1]
    weights = span * np.sin(2.0 * theta) * math.pi * w / n_theta
    return float(np.clip(rho, 0.0, None) @ weights)


def spectral_density(cfg, xs=None, n_points=512, eps_ladder=EPS_LADDER):
    """Bulk spectral density on a grid, with edges, zero-atom weight, and mass.

    The density is evaluated on the physical resolvent branch at the two
    smallest imaginary offsets of ``eps_ladder`` and linearly extrapolated to
    eps = 0+. Values outside [edge_min, edge_max] are exactly zero; tiny
    negative rounding values are clipped to zero. ``xs`` defaults to a uniform
    grid on [0, 1.1*edge_max] refined geometrically at both edges.
    """
    if len(eps_ladder) < 2:
        raise ValueError("eps_ladder needs at least two values")
    edge_min, edge_max = support_edges(cfg)
    if xs is None:
        xs = _default_grid(edge_min, edge_max, n_points)
    else:
        xs = np.asarray(xs, dtype=float)
    order = np.argsort(xs)[::-1]
    rho_desc = _extrapolated_density(cfg, xs[order], eps_ladder)
    rho = np.empty_like(rho_desc)
    rho[order] = rho_desc
    inside = (xs >= edge_min) & (xs <= edge_max)
    rho = np.where(inside, np.clip(rho, 0.0, None), 0.0)
    mass = _bulk_mass(cfg, edge_min, edge_max, eps_ladder)
    return SpectrumResult(
        xs=xs,
        rho=rho,
        edge_min=edge_min,
        edge_max=edge_max,
        f_zero=f_zero(cfg),
        bulk_mass=mass,
    )