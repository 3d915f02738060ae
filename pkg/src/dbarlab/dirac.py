"""First-order 2x2 system machinery: the Dirac operator with matrix
potential, reduction of the magnetic Schrodinger equation to it,
diagonalization by integrating factors, oscillatory inverses, and the
Neumann-series construction of complex-geometric-optics solutions.

System conventions.  Sections are pairs U = (u, omega) with u a function
and omega a (0,1)-form.  The operator rows are

    row1 = dbar* omega + Qplus u + star(conj(Aprime) ^ omega)
    row2 = dbar u + u A + Qminus omega

and the reduction of L = Delta^X + q uses Qplus = Q/2, Aprime = A,
A-slot = iA, Qminus = -1, with A the (0,1)-part of X and
Q = -star dX + q.  Conjugating by the integrating factor F = e^{i alpha}
(dbar alpha = A) produces the diagonal potential (|F|^{-2} Q/2, -|F|^2).

CGO solutions of the diagonal system solve the coupled remainder
equations

    r + P(Ft (b + s)) = 0,     s + P*(Qt (a + r)) = 0,

with P, P* the oscillatory inverses built from a Morse phase; the
composition S = P Ft P* Qt is a contraction for small h and the series
is summed directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    OneForm,
    PolarGrid,
    ScalarField,
    dbar_star,
    exterior_d,
    hodge_star,
    inner_l2,
    norm_l2,
    project,
    wirtinger,
)
from .cauchy import (
    extend_grid,
    kernel_table,
    primitive_alpha,
    reflect_extend,
)
from .phases import HolomorphicPhase

__all__ = [
    "SigmaSection",
    "PotentialMatrix",
    "DiagonalPotential",
    "CgoSolution",
    "ContractionError",
    "dirac_apply",
    "adjoint_matrix",
    "reduce_schrodinger",
    "diagonalize",
    "undiagonalize",
    "difference_potential",
    "OscillatoryCauchy",
    "oscillatory_inverse",
    "neumann_cgo",
    "inner_sigma",
    "h1_norm_section",
    "boundary_pairing",
    "verify_green",
    "auxiliary_functional",
]


class ContractionError(RuntimeError):
    """The Neumann-series operator is not a contraction at this h."""


@dataclass(frozen=True)
class SigmaSection:
    """Pair (u, omega) with omega of pure type (0,1)."""

    u: ScalarField
    omega: OneForm

    def __post_init__(self):
        self.u.grid.check_same(self.omega.grid)
        if np.max(np.abs(self.omega.c10)) > 1e-12 * max(np.max(np.abs(self.omega.c01)), 1.0):
            raise ValueError("sigma section requires a pure (0,1) second component")

    @property
    def grid(self) -> PolarGrid:
        return self.u.grid

    def __sub__(self, other: "SigmaSection") -> "SigmaSection":
        return SigmaSection(self.u - other.u, self.omega - other.omega)


@dataclass(frozen=True)
class PotentialMatrix:
    """Matrix potential [[Qplus, star(conj(Aprime)^ .)], [A, Qminus]]."""

    Qplus: ScalarField
    Aprime: OneForm
    A: OneForm
    Qminus: ScalarField

    @property
    def grid(self) -> PolarGrid:
        return self.Qplus.grid

    @classmethod
    def zero(cls, grid: PolarGrid) -> "PotentialMatrix":
        z = np.zeros(grid.shape)
        return cls(
            ScalarField(grid, z),
            OneForm(grid, z, z),
            OneForm(grid, z, z),
            ScalarField(grid, z),
        )


@dataclass(frozen=True)
class DiagonalPotential:
    """Diagonal system potential (Qtilde, Ftilde)."""

    Qtilde: ScalarField
    Ftilde: ScalarField

    @property
    def grid(self) -> PolarGrid:
        return self.Qtilde.grid


def dirac_apply(V: PotentialMatrix, U: SigmaSection) -> SigmaSection:
    """(D + V) U with D = [[0, dbar*], [dbar, 0]]."""
    g = U.grid
    V.grid.check_same(g)
    om = U.omega
    row1 = (
        dbar_star(om).values
        + V.Qplus.values * U.u.values
        - 2j * np.conj(V.Aprime.c01) * om.c01  # star(conj(Aprime) ^ omega)
    )
    row2 = (
        wirtinger(U.u, "dzbar").c01
        + U.u.values * V.A.c01
        + V.Qminus.values * om.c01
    )
    return SigmaSection(
        ScalarField(g, row1), OneForm(g, np.zeros(g.shape), row2)
    )


def adjoint_matrix(V: PotentialMatrix) -> PotentialMatrix:
    """Adjoint with respect to the section inner product:
    (Qplus, Aprime, A, Qminus) -> (conj Qplus, -iA, i Aprime, conj Qminus)."""
    g = V.grid
    return PotentialMatrix(
        V.Qplus.conj(),
        OneForm(g, np.zeros(g.shape), -1j * V.A.c01),
        OneForm(g, np.zeros(g.shape), 1j * V.Aprime.c01),
        V.Qminus.conj(),
    )


# ---------------------------------------------------------------------------
# reduction and diagonalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionData:
    """Integrating data for a potential pair: the (0,1)-part A of X, a
    primitive alpha, the factor F = e^{i alpha}, and Q = -star dX + q."""

    A: OneForm
    alpha: ScalarField
    F: ScalarField
    Q: ScalarField

    def norms(self) -> dict:
        return {
            "F_sup": self.F.max_abs(),
            "F_inv_sup": float(np.max(1.0 / np.abs(self.F.values))),
            "alpha_sup": self.alpha.max_abs(),
        }


def reduce_schrodinger(pot, alpha: ScalarField | None = None):
    """Rewrite L = Delta^X + q as the first-order system (D + V) U = 0.

    Returns (V, ReductionData).  When `alpha` is given it is used as the
    primitive for the (0,1)-part of X (useful when a closed form exists);
    otherwise the Cauchy-transform primitive is taken.
    """
    g = pot.grid
    A = project(pot.X, "p01")
    Q = ScalarField(g, -hodge_star(exterior_d(pot.X)).values + pot.q.values)
    if alpha is None:
        alpha = primitive_alpha(A)
    F = ScalarField(g, np.exp(1j * alpha.values))
    V = PotentialMatrix(
        Qplus=Q * 0.5,
        Aprime=A,
        A=OneForm(g, np.zeros(g.shape), 1j * A.c01),
        Qminus=ScalarField(g, -np.ones(g.shape)),
    )
    return V, ReductionData(A=A, alpha=alpha, F=F, Q=Q)


def diagonalize(red: ReductionData) -> DiagonalPotential:
    """Diagonal potential (|F|^{-2} Q/2, -|F|^2) of the conjugated system."""
    g = red.F.grid
    mod2 = np.abs(red.F.values) ** 2
    if np.min(mod2) <= 0:
        raise ValueError("integrating factor vanished; cannot diagonalize")
    return DiagonalPotential(
        Qtilde=ScalarField(g, red.Q.values / (2.0 * mod2)),
        Ftilde=ScalarField(g, -mod2),
    )


def transform_section(U: SigmaSection, F: ScalarField) -> SigmaSection:
    """U = (u, omega) -> (F u, conj(F)^{-1} omega)."""
    g = U.grid
    return SigmaSection(
        ScalarField(g, F.values * U.u.values),
        OneForm(g, np.zeros(g.shape), U.omega.c01 / np.conj(F.values)),
    )


def undiagonalize(U_tilde: SigmaSection, F: ScalarField) -> SigmaSection:
    """Inverse of transform_section."""
    g = U_tilde.grid
    return SigmaSection(
        ScalarField(g, U_tilde.u.values / F.values),
        OneForm(g, np.zeros(g.shape), U_tilde.omega.c01 * np.conj(F.values)),
    )


def difference_potential(red1: ReductionData, red2: ReductionData) -> DiagonalPotential:
    """Diagonal difference potential of two reductions:
    (|F2|^{-2} Q2/2 - |F1|^{-2} Q1/2, |F1|^2 - |F2|^2)."""
    d1 = diagonalize(red1)
    d2 = diagonalize(red2)
    g = d1.Qtilde.grid
    return DiagonalPotential(
        Qtilde=d2.Qtilde - d1.Qtilde,
        Ftilde=d2.Ftilde - d1.Ftilde,
    )


# ---------------------------------------------------------------------------
# oscillatory inverses
# ---------------------------------------------------------------------------


class OscillatoryCauchy:
    """The conjugated right inverses P = R dbar^{-1} e^{-2 i psi / h} E and
    P* = R' dbar*^{-1} e^{2 i psi / h} E' on an enlarged grid.

    The extension E tapers reflected data to zero across the padding
    rings with a C^2 cutoff; psi is evaluated on the enlargement either
    from a phase object (exact) or by the same reflection of a sampled
    field.
    """

    def __init__(self, grid: PolarGrid, psi, h: float, pad_rings: int = 8):
        if h <= 0:
            raise ValueError("h must be positive")
        self.grid = grid
        self.h = float(h)
        self.big, self.rows = extend_grid(grid, pad_rings)
        if isinstance(psi, HolomorphicPhase):
            psi_big = psi(self.big.nodes).imag
        elif isinstance(psi, ScalarField):
            psi_big = reflect_extend(self.big, self.rows, psi.values.real, mode="c1").real
        else:
            psi_big = np.real(psi(self.big.nodes))
        self._osc_minus = np.exp(-2j * psi_big / self.h)
        self._table = kernel_table(self.big)

    def dbar_inv(self, omega: OneForm) -> ScalarField:
        self.grid.check_same(omega.grid)
        ext = reflect_extend(self.big, self.rows, omega.c01, mode="even")
        u = self._table.apply(self._osc_minus * ext)
        return ScalarField(self.grid, u[self.rows])

    def dbar_star_inv(self, v: ScalarField) -> OneForm:
        self.grid.check_same(v.grid)
        ext = reflect_extend(self.big, self.rows, v.values, mode="even")
        u = self._table.apply(np.conj(np.conj(self._osc_minus) * ext))
        out = -0.5 * np.conj(u)[self.rows]
        return OneForm(self.grid, np.zeros(self.grid.shape), out)


def oscillatory_inverse(x, psi, h: float, which: str, pad_rings: int = 8):
    """One-shot oscillatory inverse; see OscillatoryCauchy for semantics."""
    if which not in ("dbar", "dbar_star"):
        raise ValueError(f"which must be 'dbar' or 'dbar_star', got {which!r}")
    grid = x.grid
    op = OscillatoryCauchy(grid, psi, h, pad_rings)
    return op.dbar_inv(x) if which == "dbar" else op.dbar_star_inv(x)


# ---------------------------------------------------------------------------
# Neumann-series CGO solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CgoSolution:
    phase: HolomorphicPhase
    h: float
    seed_kind: str
    seed: object
    r_h: ScalarField
    s_h: OneForm
    norms: dict
    terms_used: int
    contraction_estimate: float
    residuals: tuple


def _poly_field(grid: PolarGrid, coeffs, conjugate: bool) -> np.ndarray:
    z = np.conj(grid.nodes) if conjugate else grid.nodes
    return np.polynomial.polynomial.polyval(z, np.asarray(coeffs, dtype=complex))


def _estimate_contraction(S, grid: PolarGrid, steps: int = 20, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    x = ScalarField(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    x = x * (1.0 / norm_l2(x))
    est = 0.0
    for _ in range(steps):
        y = S(x)
        ny = norm_l2(y)
        if ny == 0.0:
            return 0.0
        est = ny
        x = y * (1.0 / ny)
    return est


def neumann_cgo(
    Vt: DiagonalPotential,
    phase: HolomorphicPhase,
    h: float,
    seed_kind: str = "b",
    seed_coeffs=(1.0,),
    pad_rings: int = 8,
    tol: float = 1e-12,
    max_terms: int = 200,
    contraction_limit: float = 0.9,
    power_steps: int = 20,
    power_seed: int = 0,
) -> CgoSolution:
    """Remainders (r_h, s_h) of the diagonal-system CGO solution.

    seed_kind 'b': anti-holomorphic 1-form seed, the series runs on the
    scalar slot; seed_kind 'a': holomorphic function seed, the series
    runs on the form slot.  Refuses when the composed operator fails the
    contraction estimate.
    """
    g = Vt.grid
    Qt = Vt.Qtilde.values
    Ft = Vt.Ftilde.values
    op = OscillatoryCauchy(g, phase, h, pad_rings)
    zeros = np.zeros(g.shape)

    def P(vals01) -> ScalarField:
        return op.dbar_inv(OneForm(g, zeros, vals01))

    def Pstar(vals0) -> OneForm:
        return op.dbar_star_inv(ScalarField(g, vals0))

    if seed_kind == "b":
        b01 = _poly_field(g, seed_coeffs, conjugate=True)
        seed_obj = OneForm(g, zeros, b01)

        def S(x: ScalarField) -> ScalarField:
            return P(Ft * Pstar(Qt * x.values).c01)

        est = _estimate_contraction(S, g, steps=power_steps, seed=power_seed)
        if est >= contraction_limit:
            raise ContractionError(
                f"series operator estimate {est:.3f} >= {contraction_limit}; "
                "decrease h or the potential size"
            )
        t0 = P(Ft * b01) * (-1.0)
        r = t0
        term = t0
        used = 1
        while used < max_terms:
            term = S(term)
            r = r + term
            used += 1
            if norm_l2(term) < tol:
                break
        s = Pstar(Qt * r.values) * (-1.0)
        res1 = norm_l2(r + P(Ft * (b01 + s.c01)))
        res2 = norm_l2(s + Pstar(Qt * r.values))
        scale = max(norm_l2(t0), 1e-300)
        r_h, s_h = r, s
    elif seed_kind == "a":
        a0 = _poly_field(g, seed_coeffs, conjugate=False)
        seed_obj = ScalarField(g, a0)

        def S(x: ScalarField) -> ScalarField:
            # series on the form slot, tracked through its c01 values
            return ScalarField(g, Pstar(Qt * P(Ft * x.values).values).c01)

        est = _estimate_contraction(S, g, steps=power_steps, seed=power_seed)
        if est >= contraction_limit:
            raise ContractionError(
                f"series operator estimate {est:.3f} >= {contraction_limit}; "
                "decrease h or the potential size"
            )
        t0 = ScalarField(g, Pstar(Qt * a0).c01) * (-1.0)
        acc = t0
        term = t0
        used = 1
        while used < max_terms:
            term = S(term)
            acc = acc + term
            used += 1
            if norm_l2(term) < tol:
                break
        s_h = OneForm(g, zeros, acc.values)
        r_h = P(Ft * s_h.c01) * (-1.0)
        res1 = norm_l2(r_h + P(Ft * s_h.c01))
        res2 = norm_l2(
            ScalarField(g, s_h.c01 + Pstar(Qt * (a0 + r_h.values)).c01)
        )
        scale = max(norm_l2(t0), 1e-300)
    else:
        raise ValueError(f"seed_kind must be 'a' or 'b', got {seed_kind!r}")

    nr, ns = norm_l2(r_h), norm_l2(s_h)
    delta = phase.delta if phase.delta > 0 else 1.0
    norms = {
        "norm_r_l2": nr,
        "norm_s_l2": ns,
        "bound_ratio": (nr + ns) * delta**4 / math.sqrt(h),
    }
    return CgoSolution(
        phase=phase,
        h=h,
        seed_kind=seed_kind,
        seed=seed_obj,
        r_h=r_h,
        s_h=s_h,
        norms=norms,
        terms_used=used,
        contraction_estimate=est,
        residuals=(res1 / scale, res2 / scale),
    )


def cgo_section(sol: CgoSolution) -> SigmaSection:
    """Assemble the full diagonal-system solution
    (e^{Phi/h}(a + r), e^{conj Phi / h}(b + s))."""
    g = sol.r_h.grid
    phi = sol.phase(g.nodes)
    eplus = np.exp(phi / sol.h)
    eminus = np.exp(np.conj(phi) / sol.h)
    if sol.seed_kind == "b":
        u = eplus * sol.r_h.values
        om = eminus * (sol.seed.c01 + sol.s_h.c01)
    else:
        u = eplus * (sol.seed.values + sol.r_h.values)
        om = eminus * sol.s_h.c01
    return SigmaSection(ScalarField(g, u), OneForm(g, np.zeros(g.shape), om))


# ---------------------------------------------------------------------------
# pairings and Green identities
# ---------------------------------------------------------------------------


def inner_sigma(U: SigmaSection, Up: SigmaSection) -> complex:
    return inner_l2(U.u, Up.u) + inner_l2(U.omega, Up.omega)


def h1_norm_section(U: SigmaSection) -> float:
    """Discrete H^1 size: L2 norms of the components and of their
    coefficient gradients."""
    g = U.grid
    du = exterior_d(U.u)
    dom = exterior_d(ScalarField(g, U.omega.c01))
    return math.sqrt(
        norm_l2(U.u) ** 2
        + norm_l2(du) ** 2
        + norm_l2(U.omega) ** 2
        + norm_l2(dom) ** 2
    )


def boundary_pairing(U: SigmaSection, Up: SigmaSection) -> complex:
    """Boundary pairing: integral over the boundary of
    iota*(u star(conj omega') - star(omega) conj u')."""
    g = U.grid
    g.check_same(Up.grid)
    eit = np.exp(1j * g.theta)
    total = 0.0 + 0.0j
    for ring, sign in zip(g.boundary_rings, g.boundary_signs()):
        R = g.r[ring]
        integrand = (
            U.u.values[ring] * np.conj(Up.omega.c01[ring]) * eit
            - U.omega.c01[ring] * np.conj(eit) * np.conj(Up.u.values[ring])
        )
        total += sign * R * g.dtheta * np.sum(integrand)
    return complex(total)


def verify_green(V: PotentialMatrix, U: SigmaSection, Up: SigmaSection) -> dict:
    """Residual of the full Green identity
    <(D+V)U, U'> - <U, (D+V*)U'> = <U, U'>_boundary for arbitrary sections.

    When U' solves the adjoint system the middle term vanishes and this
    reduces to the one-sided boundary identity.
    """
    lhs = inner_sigma(dirac_apply(V, U), Up)
    adj = inner_sigma(U, dirac_apply(adjoint_matrix(V), Up))
    bd = boundary_pairing(U, Up)
    return {
        "interior": lhs,
        "adjoint_term": adj,
        "boundary": bd,
        "residual": abs(lhs - adj - bd),
    }


def auxiliary_functional(
    F1: ScalarField,
    F2: ScalarField,
    a: ScalarField,
    b: OneForm,
    A1: OneForm | None = None,
    A2: OneForm | None = None,
) -> dict:
    """Interior and boundary forms of the reduction functional.

    interior = i * integral of F2 F1^{-1} a (A2 - A1) ^ star(conj b),
    boundary = integral over the boundary of iota*(F2 F1^{-1} a star(conj b));
    the two agree by the Green identity whenever b is antiholomorphic.
    """
    g = F1.grid
    if A1 is None:
        A1 = OneForm(g, np.zeros(g.shape), wirtinger(F1, "dzbar").c01 / (1j * F1.values))
    if A2 is None:
        A2 = OneForm(g, np.zeros(g.shape), wirtinger(F2, "dzbar").c01 / (1j * F2.values))
    G = F2.values / F1.values
    lam = OneForm(g, np.zeros(g.shape), G * a.values * (A2.c01 - A1.c01))
    from .geometry import wedge

    two = wedge(lam, hodge_star(b.conj()))
    interior = 1j * two.integrate()

    eit = np.exp(1j * g.theta)
    boundary = 0.0 + 0.0j
    for ring, sign in zip(g.boundary_rings, g.boundary_signs()):
        R = g.r[ring]
        vals = G[ring] * a.values[ring] * np.conj(b.c01[ring]) * eit
        boundary += sign * R * g.dtheta * np.sum(vals)
    return {
        "interior": complex(interior),
        "boundary": complex(boundary),
        "difference": abs(complex(interior) - complex(boundary)),
    }
