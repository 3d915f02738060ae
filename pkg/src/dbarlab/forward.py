"""Assembly and Dirichlet solution of the magnetic Schrodinger operator,
boundary data production (Cauchy pairs, truncated DtN matrices), and gauge
transformations.

The operator acts as

    L u = lap(u) - 2i <X, du> + (i div*(X) + |X|^2 + q) u

with the positive Laplacian and the real-bilinear pairing <.,.> of
1-forms (|dz|^2 = 0, <dz, dz_bar> = 2); the factored form built from
integrating factors is available separately for cross-validation.

Discretization: spectral collocation in the angle, second-order finite
differences in the radius, direct block-tridiagonal elimination with
dense angular blocks and diagonal radial couplings.  On a disk the
center value is one extra unknown, closed by the mean-value relation and
eliminated by a rank-one Schur complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .geometry import (
    Interpolator,
    OneForm,
    PolarGrid,
    ScalarField,
    codiff,
    dbar_star,
    exterior_d,
    hodge_star,
    laplacian,
    project,
    wirtinger,
)
from .metrics import BoundaryTrace

__all__ = [
    "PotentialPair",
    "CauchyPair",
    "DtnMatrix",
    "EigenvalueCollision",
    "magnetic_apply",
    "magnetic_apply_factored",
    "assemble",
    "MagneticOperator",
    "solve_dirichlet",
    "neumann_data",
    "cauchy_pair",
    "dtn",
    "system_dtn",
    "diagonalized_system_dtn",
    "gauge_transform",
    "manufactured_potential",
    "save_dtn_csv",
    "load_dtn_csv",
]


class EigenvalueCollision(RuntimeError):
    """The Dirichlet problem is numerically singular at this discretization."""


@dataclass(frozen=True)
class PotentialPair:
    """A real connection 1-form X and a complex electric potential q."""

    X: OneForm
    q: ScalarField

    def __post_init__(self):
        self.X.grid.check_same(self.q.grid)
        if not self.X.is_real:
            raise ValueError("connection form X must be real-valued")

    @property
    def grid(self) -> PolarGrid:
        return self.X.grid

    def apriori_report(self, p: float = 4.0) -> dict:
        """Discrete W^{1,p} / W^{2,p} norm sizes against an a-priori bound."""
        g = self.grid
        w = g.weights

        def lp(vals):
            return float(np.sum(w * np.abs(vals) ** p) ** (1.0 / p))

        dq = exterior_d(self.q)
        q_norm = (lp(self.q.values) ** p + lp(dq.c10) ** p + lp(dq.c01) ** p) ** (1 / p)
        pieces = [lp(self.X.c10), lp(self.X.c01)]
        for c in (self.X.c10, self.X.c01):
            d1 = exterior_d(ScalarField(g, c))
            pieces += [lp(d1.c10), lp(d1.c01)]
            for cc in (d1.c10, d1.c01):
                d2 = exterior_d(ScalarField(g, cc))
                pieces += [lp(d2.c10), lp(d2.c01)]
        x_norm = float(np.sum(np.array(pieces) ** p) ** (1 / p))
        return {"q_w1p": q_norm, "X_w2p": x_norm, "p": p}


@dataclass(frozen=True)
class CauchyPair:
    """Boundary pair (f, g) = (trace, magnetic normal derivative) in
    truncated Fourier form."""

    f: BoundaryTrace
    g: BoundaryTrace


@dataclass(frozen=True)
class DtnMatrix:
    """Truncated-Fourier Dirichlet-to-Neumann matrix.

    Entry [(ci, m), (cj, n)] is the m-th Fourier coefficient on circle ci
    of the magnetic normal derivative for Dirichlet datum e^{i n theta}
    placed on circle cj (zero on the others).
    """

    order: int
    circles: tuple
    matrix: np.ndarray

    @property
    def n_modes(self) -> int:
        return 2 * self.order + 1

    def block(self, ci: int, cj: int) -> np.ndarray:
        m = self.n_modes
        return self.matrix[ci * m : (ci + 1) * m, cj * m : (cj + 1) * m]


# ---------------------------------------------------------------------------
# operator application (collocation-free routes)
# ---------------------------------------------------------------------------


def _zeroth_coefficient(pot: PotentialPair) -> np.ndarray:
    X, q = pot.X, pot.q
    div_term = 1j * codiff(X).values
    sq = 2.0 * (X.c10 * X.c01 + X.c01 * X.c10)
    return div_term + sq + q.values


def magnetic_apply(pot: PotentialPair, u: ScalarField) -> ScalarField:
    """L u through the coordinate expansion, using the spectral/4th-order
    derivative routes (reference evaluation, independent of the solver)."""
    g = u.grid
    pot.grid.check_same(g)
    du = exterior_d(u)
    pairing = 2.0 * (pot.X.c10 * du.c01 + pot.X.c01 * du.c10)
    lap = laplacian(u)
    return ScalarField(g, lap.values - 2j * pairing + _zeroth_coefficient(pot) * u.values)


def magnetic_apply_factored(pot: PotentialPair, u: ScalarField, F: ScalarField) -> ScalarField:
    """L u through the factored form 2 F_bar dbar*(F_bar^{-1} F^{-1} dbar(F u)) + Q u,
    with F an integrating factor for the (0,1)-part of X."""
    g = u.grid
    Q = -hodge_star(exterior_d(pot.X)).values + pot.q.values
    inner = wirtinger(ScalarField(g, F.values * u.values), "dzbar")
    mid = OneForm(g, np.zeros(g.shape), inner.c01 / (np.conj(F.values) * F.values))
    outer = dbar_star(mid)
    return ScalarField(g, 2.0 * np.conj(F.values) * outer.values + Q * u.values)


# ---------------------------------------------------------------------------
# collocation solver
# ---------------------------------------------------------------------------


def _theta_derivative_matrices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense spectral differentiation matrices for d/dtheta and d^2/dtheta^2."""
    m = np.fft.fftfreq(n, 1.0 / n)
    ik = 1j * np.where(np.abs(m) == n // 2, 0.0, m)
    mk2 = -(m**2)
    F = np.fft.fft(np.eye(n), axis=0)
    D1 = np.fft.ifft(ik[:, None] * F, axis=0)
    D2 = np.fft.ifft(mk2[:, None] * F, axis=0)
    return D1, D2


class MagneticOperator:
    """Factorized interior collocation operator for one potential pair."""

    def __init__(self, pot: PotentialPair, condition_limit: float = 1e12):
        self.pot = pot
        g = pot.grid
        self.grid = g
        n_r, n_t = g.shape
        dr = g.dr
        kind = g.domain.kind

        if kind == "disk":
            self.int_rings = np.arange(0, n_r - 1)
        else:
            self.int_rings = np.arange(1, n_r - 1)
        J = len(self.int_rings)
        self.n_theta = n_t

        D1t, D2t = _theta_derivative_matrices(n_t)
        eit = np.exp(1j * g.theta)
        X = pot.X
        zeroth = _zeroth_coefficient(pot)

        # per-ring blocks: dense diagonal block, diagonal off-couplings
        self.B = np.empty((J, n_t, n_t), dtype=complex)
        self.lo = np.empty((J, n_t), dtype=complex)
        self.hi = np.empty((J, n_t), dtype=complex)
        for a, j in enumerate(self.int_rings):
            r = g.r[j]
            P = X.c01[j] * np.conj(eit) + X.c10[j] * eit  # X(d/dr)
            T = 1j * (X.c10[j] * eit - X.c01[j] * np.conj(eit))  # X(d/dtheta)/r
            B = (2.0 / dr**2) * np.eye(n_t, dtype=complex)
            B -= D2t / r**2
            B -= 2j * (T / r)[:, None] * D1t
            B += np.diag(zeroth[j])
            self.B[a] = B
            self.lo[a] = -1.0 / dr**2 + 1.0 / (2 * dr * r) + 1j * P / dr
            self.hi[a] = -1.0 / dr**2 - 1.0 / (2 * dr * r) - 1j * P / dr

        # disk center closure: mean-value Laplacian + first-order derivatives
        self.kind = kind
        if kind == "disk":
            c = g.domain.center
            x0 = Interpolator(g, X.c10)(c)
            x1 = Interpolator(g, X.c01)(c)
            s0 = Interpolator(g, zeroth)(c)
            self.center_diag = 4.0 / dr**2 + s0
            mean_w = np.full(n_t, 1.0 / n_t)
            self.center_row = (
                -(4.0 / dr**2) * mean_w
                - (4j / dr) * (x1 * np.conj(eit) + x0 * eit) * mean_w
            )
            # ring-0 unknowns couple to the center through the `lo` slot
            self.center_col = self.lo[0].copy()

        self._factor(condition_limit)

    def _factor(self, condition_limit: float) -> None:
        J, n_t = len(self.int_rings), self.n_theta
        self.lus = []
        D = self.B[0].copy()
        for a in range(J):
            if a > 0:
                S = lu_solve(self.lus[a - 1], np.diag(self.hi[a - 1]).astype(complex))
                D = self.B[a] - self.lo[a][:, None] * S
            self.lus.append(lu_factor(D))
        # inverse-norm probe: a resonance amplifies the solve of random
        # boundary data (run through the full bordered system)
        rng = np.random.default_rng(0)
        boundary = {
            r: rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)
            for r in self.grid.boundary_rings
        }
        u = self.solve(boundary)
        scale = max(np.max(np.abs(v)) for v in boundary.values())
        amp = float(np.max(np.abs(u.values)) / scale)
        op_scale = 4.0 / self.grid.dr**2
        self.condition_estimate = amp * op_scale
        if not np.isfinite(self.condition_estimate) or self.condition_estimate > condition_limit:
            raise EigenvalueCollision(
                f"near-singular Dirichlet system (condition estimate "
                f"{self.condition_estimate:.2e}); a Dirichlet eigenvalue collision "
                "is likely -- perturb q"
            )

    def _solve_tridiag(self, rhs: np.ndarray) -> np.ndarray:
        """rhs shape (J, n_theta, K) -> interior solution, same shape."""
        J = len(self.int_rings)
        e = np.empty_like(rhs)
        e[0] = rhs[0]
        for a in range(1, J):
            e[a] = rhs[a] - self.lo[a][:, None] * lu_solve(self.lus[a - 1], e[a - 1])
        x = np.empty_like(rhs)
        x[J - 1] = lu_solve(self.lus[J - 1], e[J - 1])
        for a in range(J - 2, -1, -1):
            x[a] = lu_solve(self.lus[a], e[a] - self.hi[a][:, None] * x[a + 1])
        return x

    def solve(self, boundary: dict[int, np.ndarray]) -> ScalarField:
        """Dirichlet solve; `boundary` maps boundary ring index to samples."""
        g = self.grid
        n_r, n_t = g.shape
        J = len(self.int_rings)
        rhs = np.zeros((J, n_t, 1), dtype=complex)
        f_out = np.asarray(boundary[n_r - 1], dtype=complex)
        rhs[J - 1, :, 0] -= self.hi[J - 1] * f_out
        if self.kind == "annulus":
            f_in = np.asarray(boundary[0], dtype=complex)
            rhs[0, :, 0] -= self.lo[0] * f_in
            x = self._solve_tridiag(rhs)[:, :, 0]
            values = np.vstack([f_in[None, :], x, f_out[None, :]])
            return ScalarField(g, values)

        # disk: bordered system with the center unknown
        col = np.zeros((J, n_t, 1), dtype=complex)
        col[0, :, 0] = self.center_col
        xb = self._solve_tridiag(rhs)[:, :, 0]
        xc = self._solve_tridiag(col)[:, :, 0]
        row_dot_b = self.center_row @ xb[0]
        row_dot_c = self.center_row @ xc[0]
        u_c = -row_dot_b / (self.center_diag - row_dot_c)
        x = xb - u_c * xc
        values = np.vstack([x, f_out[None, :]])
        self.last_center_value = complex(u_c)
        return ScalarField(g, values)

    def residual(self, u: ScalarField, boundary: dict[int, np.ndarray]) -> float:
        """Relative residual of the discrete interior equations."""
        g = self.grid
        J = len(self.int_rings)
        n_t = self.n_theta
        vals = u.values
        res = 0.0
        norm = 0.0
        for a, j in enumerate(self.int_rings):
            row = self.B[a] @ vals[j]
            if j - 1 >= 0:
                row += self.lo[a] * vals[j - 1]
            elif self.kind == "disk":
                row += self.lo[a] * self.last_center_value
            row += self.hi[a] * vals[j + 1]
            res += np.sum(np.abs(row) ** 2)
            norm += np.sum(np.abs(vals[j]) ** 2)
        return math.sqrt(res) / max(math.sqrt(norm), 1e-300)


def assemble(pot: PotentialPair, condition_limit: float = 1e12) -> MagneticOperator:
    """Factorized discrete operator; raises EigenvalueCollision when the
    discretization sits on a Dirichlet eigenvalue."""
    return MagneticOperator(pot, condition_limit)


def solve_dirichlet(
    pot: PotentialPair,
    f: np.ndarray | dict[int, np.ndarray],
    operator: MagneticOperator | None = None,
    allow_perturbation: bool = True,
) -> ScalarField:
    """Solve L u = 0 with Dirichlet data f (samples per boundary circle).

    On an eigenvalue collision the potential is retried once with
    q + 1e-6 i, which moves the spectrum off the real axis.
    """
    g = pot.grid
    boundary = _boundary_dict(g, f)
    try:
        op = operator if operator is not None else assemble(pot)
    except EigenvalueCollision:
        if not allow_perturbation:
            raise
        shifted = PotentialPair(pot.X, pot.q + 1e-6j)
        op = assemble(shifted)
    return op.solve(boundary)


def _boundary_dict(g: PolarGrid, f) -> dict[int, np.ndarray]:
    if isinstance(f, dict):
        return {k: np.asarray(v, dtype=complex) for k, v in f.items()}
    f = np.asarray(f, dtype=complex)
    rings = g.boundary_rings
    if g.domain.kind == "disk":
        return {rings[-1]: f}
    if f.ndim == 1:
        return {rings[0]: np.zeros_like(f), rings[-1]: f}
    return {rings[0]: f[0], rings[-1]: f[1]}


# ---------------------------------------------------------------------------
# boundary data
# ---------------------------------------------------------------------------

_DERIV_STENCIL_WIDTH = 6


def _radial_edge_derivative(g: PolarGrid, values: np.ndarray, ring: int) -> np.ndarray:
    """One-sided high-order radial derivative at a boundary ring."""
    from .geometry import _fornberg_weights

    n_r = g.n_r
    w = min(_DERIV_STENCIL_WIDTH, n_r)
    if ring == n_r - 1:
        sel = np.arange(n_r - w, n_r)
    else:
        sel = np.arange(0, w)
    wts = _fornberg_weights(g.r[ring], g.r[sel], 1)
    return wts @ values[sel]


def neumann_data(pot: PotentialPair, u: ScalarField) -> dict[int, np.ndarray]:
    """Magnetic normal derivative d_nu u + i X(nu) u on each boundary circle,
    with the outward normal (inner circle of an annulus points inward)."""
    g = pot.grid
    out = {}
    eit = np.exp(1j * g.theta)
    for ring, sign in zip(g.boundary_rings, g.boundary_signs()):
        du = _radial_edge_derivative(g, u.values, ring)
        x_nu = pot.X.c10[ring] * eit + pot.X.c01[ring] * np.conj(eit)
        out[ring] = sign * (du + 1j * x_nu * u.values[ring])
    return out


def _trace_from_samples(g: PolarGrid, samples_by_ring: dict[int, np.ndarray], order: int) -> BoundaryTrace:
    rows = np.stack([samples_by_ring[ring] for ring in g.boundary_rings])
    from .metrics import trace_from_samples

    return trace_from_samples(rows, order)


def cauchy_pair(
    pot: PotentialPair,
    f,
    order: int,
    operator: MagneticOperator | None = None,
) -> CauchyPair:
    """Solve with Dirichlet data f and package (f, magnetic Neumann data)
    as truncated Fourier traces."""
    g = pot.grid
    boundary = _boundary_dict(g, f)
    u = solve_dirichlet(pot, boundary, operator=operator)
    gdata = neumann_data(pot, u)
    return CauchyPair(
        f=_trace_from_samples(g, boundary, order),
        g=_trace_from_samples(g, gdata, order),
    )


def dtn(pot: PotentialPair, order: int, operator: MagneticOperator | None = None) -> DtnMatrix:
    """Assemble the truncated DtN matrix column by column (shared
    factorization across the Fourier data)."""
    g = pot.grid
    op = operator if operator is not None else assemble(pot)
    rings = g.boundary_rings
    n_modes = 2 * order + 1
    n_c = len(rings)
    mat = np.zeros((n_c * n_modes, n_c * n_modes), dtype=complex)
    for cj, ring_j in enumerate(rings):
        for k, n in enumerate(range(-order, order + 1)):
            boundary = {r: np.zeros(g.n_theta, dtype=complex) for r in rings}
            boundary[ring_j] = np.exp(1j * n * g.theta)
            u = op.solve(boundary)
            gdata = neumann_data(pot, u)
            for ci, ring_i in enumerate(rings):
                coeffs = np.fft.fft(gdata[ring_i]) / g.n_theta
                col = np.array([coeffs[m % g.n_theta] for m in range(-order, order + 1)])
                mat[ci * n_modes : (ci + 1) * n_modes, cj * n_modes + k] = col
    radii = tuple(float(g.r[r]) for r in rings)
    return DtnMatrix(order=order, circles=radii, matrix=mat)


def system_dtn(pot: PotentialPair, order: int, operator: MagneticOperator | None = None) -> DtnMatrix:
    """Trace matrix of the first-order-system boundary data: for Dirichlet
    datum e^{i n theta} the row data is the arclength-normalized pullback
    of star omega, with omega = (dbar + iA) u the system's second component."""
    g = pot.grid
    op = operator if operator is not None else assemble(pot)
    A = project(pot.X, "p01")
    rings = g.boundary_rings
    n_modes = 2 * order + 1
    n_c = len(rings)
    eit = np.exp(1j * g.theta)
    mat = np.zeros((n_c * n_modes, n_c * n_modes), dtype=complex)
    for cj, ring_j in enumerate(rings):
        for k, n in enumerate(range(-order, order + 1)):
            boundary = {r: np.zeros(g.n_theta, dtype=complex) for r in rings}
            boundary[ring_j] = np.exp(1j * n * g.theta)
            u = op.solve(boundary)
            om01 = g.d_zbar(u.values) + 1j * A.c01 * u.values
            for ci, ring_i in enumerate(rings):
                lam = om01[ring_i] * np.conj(eit)
                coeffs = np.fft.fft(lam) / g.n_theta
                col = np.array([coeffs[m % g.n_theta] for m in range(-order, order + 1)])
                mat[ci * n_modes : (ci + 1) * n_modes, cj * n_modes + k] = col
    radii = tuple(float(g.r[r]) for r in rings)
    return DtnMatrix(order=order, circles=radii, matrix=mat)


def diagonalized_system_dtn(
    pot: PotentialPair,
    F: ScalarField,
    order: int,
    operator: MagneticOperator | None = None,
) -> DtnMatrix:
    """Graph map of the diagonalized system's Cauchy data.

    The conjugated sections carry traces (F u, pullback of star(conj(F)^{-1}
    omega)); in truncated Fourier space the graph map is G Fm^{-1} with Fm
    the boundary multiplication by F and G the transformed Neumann-side
    columns."""
    g = pot.grid
    op = operator if operator is not None else assemble(pot)
    A = project(pot.X, "p01")
    rings = g.boundary_rings
    n_modes = 2 * order + 1
    n_c = len(rings)
    eit = np.exp(1j * g.theta)

    def coeff_col(samples):
        c = np.fft.fft(samples) / g.n_theta
        return np.array([c[m % g.n_theta] for m in range(-order, order + 1)])

    Fmat = np.zeros((n_c * n_modes, n_c * n_modes), dtype=complex)
    Gmat = np.zeros((n_c * n_modes, n_c * n_modes), dtype=complex)
    for cj, ring_j in enumerate(rings):
        for k, n in enumerate(range(-order, order + 1)):
            boundary = {r: np.zeros(g.n_theta, dtype=complex) for r in rings}
            boundary[ring_j] = np.exp(1j * n * g.theta)
            u = op.solve(boundary)
            om01 = g.d_zbar(u.values) + 1j * A.c01 * u.values
            for ci, ring_i in enumerate(rings):
                ftil = F.values[ring_i] * u.values[ring_i]
                lam = om01[ring_i] * np.conj(eit) / np.conj(F.values[ring_i])
                Fmat[ci * n_modes : (ci + 1) * n_modes, cj * n_modes + k] = coeff_col(ftil)
                Gmat[ci * n_modes : (ci + 1) * n_modes, cj * n_modes + k] = coeff_col(lam)
    radii = tuple(float(g.r[r]) for r in rings)
    return DtnMatrix(order=order, circles=radii, matrix=Gmat @ np.linalg.inv(Fmat))


def gauge_transform(
    pot: PotentialPair, f_gauge: ScalarField, require_zero_trace: bool = True
) -> PotentialPair:
    """X -> X + d f for real f; refuses when a required zero trace fails."""
    g = pot.grid
    vals = f_gauge.values
    if np.max(np.abs(vals.imag)) > 1e-12 * max(np.max(np.abs(vals)), 1.0):
        raise ValueError("gauge function must be real-valued")
    if require_zero_trace:
        edge = max(np.max(np.abs(vals[r])) for r in g.boundary_rings)
        if edge > 1e-10 * max(np.max(np.abs(vals)), 1.0):
            raise ValueError("gauge function must vanish on the boundary")
    df = exterior_d(ScalarField(g, vals.real.astype(complex)))
    return PotentialPair(pot.X + df, pot.q)


def manufactured_potential(u_star: ScalarField, X: OneForm) -> PotentialPair:
    """Potential pair for which u_star solves L u = 0 exactly:
    q := -(Delta^X u*) / u* (u* must not vanish)."""
    g = u_star.grid
    if np.min(np.abs(u_star.values)) < 1e-8:
        raise ValueError("manufactured solution must be bounded away from zero")
    zero_q = PotentialPair(X, ScalarField(g, np.zeros(g.shape)))
    Lu = magnetic_apply(zero_q, u_star)
    q = ScalarField(g, -Lu.values / u_star.values)
    return PotentialPair(X, q)


# ---------------------------------------------------------------------------
# DtN CSV interchange
# ---------------------------------------------------------------------------


def save_dtn_csv(path, d: DtnMatrix) -> None:
    lines = [f"DTN v1 {d.order} {len(d.circles)}"]
    lines.append(",".join(f"{r:.17g}" for r in d.circles))
    for i in range(d.matrix.shape[0]):
        for j in range(d.matrix.shape[1]):
            v = d.matrix[i, j]
            lines.append(f"{i},{j},{v.real:.17g},{v.imag:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dtn_csv(path) -> DtnMatrix:
    with open(path) as fh:
        header = fh.readline().split()
        if header[:2] != ["DTN", "v1"]:
            raise ValueError("bad DtN header")
        order, n_c = int(header[2]), int(header[3])
        circles = tuple(float(x) for x in fh.readline().split(","))
        if len(circles) != n_c:
            raise ValueError("bad circle count")
        n = n_c * (2 * order + 1)
        mat = np.zeros((n, n), dtype=complex)
        for line in fh:
            i, j, re, im = line.split(",")
            mat[int(i), int(j)] = float(re) + 1j * float(im)
    return DtnMatrix(order=order, circles=circles, matrix=mat)
