"""Morse holomorphic phase functions and numerical stationary phase.

The workhorse construction: starting from the quadratic base phase
``(z - anchor)^2`` (Morse, with one critical point), squaring the shifted
phase gives a quartic with a prescribed critical point at ``p_hat`` whose
critical Hessians admit a floor in terms of the distance from ``p_hat``
to the exclusion balls around the base phase's critical-value preimages.

Oscillatory integrals ``integral of u e^{2 i psi / h} dA`` are evaluated
by brute quadrature on the field's grid (the amplitude must be compactly
supported in the domain interior); the leading-order coefficient of the
one-critical-point expansion is calibrated once on ``psi = Im(z^2)`` and
frozen below.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Interpolator,
    PolarGrid,
    ScalarField,
    wirtinger,
)

__all__ = [
    "HolomorphicPhase",
    "ExclusionBall",
    "ExclusionSet",
    "ExclusionError",
    "base_phase",
    "squared_phase",
    "exclusion_set",
    "StationaryPhaseResult",
    "stationary_phase_eval",
    "bump_window",
    "LEADING_COEFFICIENT",
    "BOUND_COEFFICIENT",
]

# leading coefficient of the one-point stationary-phase expansion with the
# dA measure: integral ~ c * h * u(z0) * e^{2 i psi(z0)/h} / |psi''(z0)|;
# calibrated once on psi = Im(z^2) (see tests), analytically pi/2
LEADING_COEFFICIENT = math.pi / 2.0
# envelope constant for the first-order bound reports
BOUND_COEFFICIENT = 4.0


class ExclusionError(ValueError):
    """Anchor point lies inside an exclusion ball."""


@dataclass(frozen=True)
class ExclusionBall:
    center: complex
    radius: float

    def contains(self, p: complex) -> bool:
        return abs(p - self.center) < self.radius


@dataclass(frozen=True)
class ExclusionSet:
    """Union of balls around the critical-value preimages of a phase."""

    balls: tuple
    delta: float

    def contains(self, p: complex) -> bool:
        return any(b.contains(p) for b in self.balls)

    def violating_ball(self, p: complex):
        for b in self.balls:
            if b.contains(p):
                return b
        return None


@dataclass(frozen=True)
class HolomorphicPhase:
    """Polynomial holomorphic phase with certified critical-point data.

    ``coeffs`` are polynomial coefficients in increasing powers of z.
    Critical points carry their Hessian values; for squared phases the
    case tag records whether they come from critical points of the base
    phase ('base') or from the level set through p_hat ('level').
    """

    coeffs: np.ndarray
    critical_points: tuple
    critical_values: tuple
    hessians: tuple
    delta: float = 0.0
    hessian_floor_constant: float = 0.0
    case_tags: tuple = ()

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def d1(self, z):
        c = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(z, c)

    def d2(self, z):
        c = np.polynomial.polynomial.polyder(self.coeffs, 2)
        return np.polynomial.polynomial.polyval(z, c)

    def im_field(self, grid: PolarGrid) -> ScalarField:
        """psi = Im Phi sampled on a grid."""
        return ScalarField(grid, self(grid.nodes).imag.astype(complex))

    def min_hessian(self) -> float:
        return min(abs(h) for h in self.hessians)


def base_phase(anchor: complex) -> HolomorphicPhase:
    """The quadratic Morse phase (z - anchor)^2."""
    a = complex(anchor)
    coeffs = np.array([a * a, -2.0 * a, 1.0], dtype=complex)
    return HolomorphicPhase(
        coeffs=coeffs,
        critical_points=(a,),
        critical_values=(0.0 + 0.0j,),
        hessians=(2.0 + 0.0j,),
    )


def exclusion_set(base: HolomorphicPhase, delta: float) -> ExclusionSet:
    """Balls of radius sqrt(delta) around every point where the base phase
    takes one of its critical values."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    pts = []
    for cv in base.critical_values:
        shifted = base.coeffs.copy()
        shifted[0] -= cv
        roots = np.polynomial.polynomial.polyroots(shifted)
        pts.extend(complex(r) for r in roots)
    # dedupe coincident preimages
    uniq: list[complex] = []
    for p in pts:
        if all(abs(p - q) > 1e-12 for q in uniq):
            uniq.append(p)
    balls = tuple(ExclusionBall(p, math.sqrt(delta)) for p in uniq)
    return ExclusionSet(balls=balls, delta=delta)


def _newton_polish(phase_coeffs: np.ndarray, z0: complex, steps: int = 8) -> complex:
    d1 = np.polynomial.polynomial.polyder(phase_coeffs)
    d2 = np.polynomial.polynomial.polyder(phase_coeffs, 2)
    z = complex(z0)
    for _ in range(steps):
        g = np.polynomial.polynomial.polyval(z, d1)
        h = np.polynomial.polynomial.polyval(z, d2)
        if abs(h) < 1e-300:
            break
        z -= g / h
    return z


def squared_phase(base: HolomorphicPhase, p_hat: complex, delta: float) -> HolomorphicPhase:
    """The phase (Phi(z) - Phi(p_hat))^2 with certified critical data.

    Requires ``p_hat`` outside the exclusion set of radius sqrt(delta);
    critical points split into the base phase's own critical points and
    the level set {Phi = Phi(p_hat)}, and every Hessian is bounded below
    by a recorded multiple of delta^4.
    """
    ex = exclusion_set(base, delta)
    ball = ex.violating_ball(p_hat)
    if ball is not None:
        raise ExclusionError(
            f"p_hat={p_hat} lies in the exclusion ball around {ball.center} "
            f"(radius {ball.radius:.4g})"
        )
    w = base(p_hat)
    shifted = base.coeffs.copy()
    shifted[0] -= w
    sq = np.polynomial.polynomial.polymul(shifted, shifted)

    # critical points: roots of Phi' (base case) and of Phi - Phi(p_hat)
    pts: list[complex] = []
    tags: list[str] = []
    for r in base.critical_points:
        pts.append(complex(r))
        tags.append("base")
    for r in np.polynomial.polynomial.polyroots(shifted):
        pts.append(_newton_polish(sq, complex(r)))
        tags.append("level")
    # drop duplicates (a base critical point on the level set cannot occur
    # for p_hat outside the exclusion set)
    uniq, utags = [], []
    for p, t in zip(pts, tags):
        if all(abs(p - q) > 1e-10 for q in uniq):
            uniq.append(p)
            utags.append(t)

    d2 = np.polynomial.polynomial.polyder(sq, 2)
    hessians = tuple(complex(np.polynomial.polynomial.polyval(p, d2)) for p in uniq)
    values = tuple(
        complex(np.polynomial.polynomial.polyval(p, sq)) for p in uniq
    )
    min_h = min(abs(h) for h in hessians)
    if min_h == 0.0:
        raise ExclusionError("degenerate critical point; p_hat too close to exclusion set")
    return HolomorphicPhase(
        coeffs=sq,
        critical_points=tuple(uniq),
        critical_values=values,
        hessians=hessians,
        delta=float(delta),
        hessian_floor_constant=min_h / delta**4,
        case_tags=tuple(utags),
    )


# ---------------------------------------------------------------------------
# stationary phase evaluation
# ---------------------------------------------------------------------------


def bump_window(grid: PolarGrid, center: complex, radius: float) -> ScalarField:
    """C^2 window equal to 1 inside half the radius, 0 outside the radius."""
    d = np.abs(grid.nodes - center)
    t = np.clip((d - 0.5 * radius) / (0.5 * radius), 0.0, 1.0)
    w = 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)
    return ScalarField(grid, w.astype(complex))


@dataclass(frozen=True)
class StationaryPhaseResult:
    integral: complex
    h: float
    z_hat: complex
    hessian: complex
    bound: float
    leading: complex = 0.0 + 0.0j
    residual: float = float("nan")


def _locate_critical_point(psi: ScalarField, support_mask: np.ndarray, phase=None):
    """Critical points of psi inside the support: exact from a phase object
    when given, otherwise located from the sampled gradient."""
    g = psi.grid
    if phase is not None:
        pts = [p for p in phase.critical_points if _inside_support(g, p, support_mask)]
        hes = {p: 0.5 * abs(h) for p, h in zip(phase.critical_points, phase.hessians)}
        return pts, lambda p: hes[p]

    dz = wirtinger(psi, "dz")
    grad = 2.0 * np.abs(dz.c10)  # |grad psi| = 2 |d_z psi|
    scale = grad[support_mask].max() if support_mask.any() else grad.max()
    cand = support_mask & (grad < 0.05 * scale)
    pts = []
    if cand.any():
        # cluster candidate nodes and Newton-polish on the interpolated gradient
        interp_g = Interpolator(g, dz.c10)
        nodes = g.nodes[cand]
        order = np.argsort(np.abs(dz.c10[cand]))
        for idx in order:
            z0 = nodes[idx]
            if any(abs(z0 - p) < 0.15 * g.domain.r_outer for p in pts):
                continue
            z = z0
            for _ in range(30):
                gz = interp_g(z)
                eps = 1e-6 * g.domain.r_outer
                h = (interp_g(z + eps) - interp_g(z - eps)) / (2 * eps)
                if abs(h) < 1e-14:
                    break
                step = gz / h
                z = z - step
                if abs(step) < 1e-12:
                    break
            if abs(interp_g(z)) < 1e-6 * max(scale, 1e-30) and _inside_support(
                g, z, support_mask
            ):
                if all(abs(z - p) > 1e-6 for p in pts):
                    pts.append(complex(z))

    def hess(p):
        interp_g2 = Interpolator(g, dz.c10)
        eps = 1e-5 * g.domain.r_outer
        # |psi''| as modulus of d_z(d_z psi); psi = Im Phi gives |Phi''|/2
        return abs((interp_g2(p + eps) - interp_g2(p - eps)) / (2 * eps))

    return pts, hess


def _inside_support(grid: PolarGrid, p: complex, mask: np.ndarray) -> bool:
    d = np.abs(grid.nodes - p)
    j = np.unravel_index(np.argmin(d), d.shape)
    return bool(mask[j])


def stationary_phase_eval(
    u: ScalarField,
    psi: ScalarField,
    h: float,
    mode: str = "bound",
    phase: HolomorphicPhase | None = None,
    support_tol: float = 1e-6,
) -> StationaryPhaseResult:
    """Oscillatory integral of u e^{2 i psi / h} over the domain.

    ``mode='bound'`` returns the integral together with the first-order
    envelope C h / delta_eff; ``mode='leading'`` also returns the
    calibrated leading term and the measured residual after subtracting
    it.  The amplitude must vanish at the boundary (compact support) and
    its support must contain exactly one critical point of psi.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    g = u.grid
    g.check_same(psi.grid)
    amax = u.max_abs()
    if amax > 0:
        edge = np.abs(u.values[g.boundary_rings, :]).max()
        if edge > 1e-4 * amax:
            raise ValueError("amplitude is not compactly supported in the interior")
    support = np.abs(u.values) > support_tol * max(amax, 1e-300)

    pts, hess_of = _locate_critical_point(psi, support, phase)
    if len(pts) != 1:
        raise ValueError(
            f"support must contain exactly one critical point of psi, found {len(pts)}"
        )
    z_hat = pts[0]
    hess = hess_of(z_hat)
    if hess <= 0:
        raise ValueError("critical point of psi is degenerate")

    integrand = u.values * np.exp(2j * psi.values.real / h)
    integral = complex(np.sum(g.weights * integrand))

    # W^{2,inf}-type amplitude size for the envelope report
    du = wirtinger(u, "dz")
    d2 = wirtinger(ScalarField(g, du.c10), "dz")
    w2 = max(amax, 2 * np.abs(du.c10).max(), 4 * np.abs(d2.c10).max())
    delta_eff = math.sqrt(hess)
    bound = BOUND_COEFFICIENT * h / delta_eff * w2

    if mode == "bound":
        return StationaryPhaseResult(integral, h, z_hat, hess, bound)
    if mode != "leading":
        raise ValueError(f"mode must be 'bound' or 'leading', got {mode!r}")

    u_at = Interpolator(g, u.values)(z_hat)
    psi_at = Interpolator(g, psi.values.real)(z_hat).real
    leading = LEADING_COEFFICIENT * h * u_at * cmath.exp(2j * psi_at / h) / hess
    residual = abs(integral - leading)
    return StationaryPhaseResult(integral, h, z_hat, hess, bound, leading, residual)


def fit_loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log y against log x (ignoring zero entries)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])
