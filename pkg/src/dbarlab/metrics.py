"""Boundary Sobolev norms, Cauchy-data distances, and the holomorphic
defect of boundary traces on the disk.

All boundary data lives in truncated Fourier form, one coefficient row
per boundary circle, modes n = -N..N.  The H^s norm is the exact
multiplier norm on the truncation:

    ||f||_{H^s}^2 = sum over circles and modes of (1 + n^2)^s |f_n|^2.

The scalar Cauchy-data distance normalizes differences by the H^{1/2}
size of the first trace; ensembles of Cauchy pairs are compared either
through the H^{1/2} -> H^{-1/2} operator-norm surrogate or through the
sup-inf construction with a least-squares inner minimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundaryTrace",
    "SobolevNorm",
    "boundary_norm",
    "pair_distance",
    "ensemble_distance",
    "system_distance",
    "holomorphic_defect",
    "holo_project",
    "trace_from_samples",
]


@dataclass(frozen=True)
class BoundaryTrace:
    """Fourier coefficients (circles x modes), modes ordered n = -N..N."""

    order: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[None, :]
        if c.shape[1] != 2 * self.order + 1:
            raise ValueError("coefficient count does not match order")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_circles(self) -> int:
        return self.coeffs.shape[0]

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.order, self.order + 1)

    def __sub__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        if other.order != self.order or other.n_circles != self.n_circles:
            raise ValueError("trace truncation mismatch")
        return BoundaryTrace(self.order, self.coeffs - other.coeffs)

    def __add__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        if other.order != self.order or other.n_circles != self.n_circles:
            raise ValueError("trace truncation mismatch")
        return BoundaryTrace(self.order, self.coeffs + other.coeffs)

    def scaled(self, c: complex) -> "BoundaryTrace":
        return BoundaryTrace(self.order, c * self.coeffs)

    def is_real(self, tol: float = 1e-10) -> bool:
        flipped = np.conj(self.coeffs[:, ::-1])
        scale = max(np.max(np.abs(self.coeffs)), 1e-300)
        return bool(np.max(np.abs(self.coeffs - flipped)) <= tol * scale)


def trace_from_samples(samples: np.ndarray, order: int) -> BoundaryTrace:
    """Truncated Fourier coefficients of per-circle angular samples."""
    s = np.asarray(samples, dtype=complex)
    if s.ndim == 1:
        s = s[None, :]
    n = s.shape[1]
    if 2 * order + 1 > n:
        raise ValueError("order exceeds the sample bandwidth")
    full = np.fft.fft(s, axis=1) / n
    cols = [full[:, m % n] for m in range(-order, order + 1)]
    return BoundaryTrace(order, np.stack(cols, axis=1))


@dataclass(frozen=True)
class SobolevNorm:
    exponent: float
    value: float


def _weights(order: int, s: float) -> np.ndarray:
    n = np.arange(-order, order + 1)
    return (1.0 + n.astype(float) ** 2) ** (s / 2.0)


def boundary_norm(t: BoundaryTrace, s: float) -> SobolevNorm:
    w = _weights(t.order, s)
    val = math.sqrt(float(np.sum((w[None, :] * np.abs(t.coeffs)) ** 2)))
    return SobolevNorm(s, val)


def pair_distance(p1, p2) -> float:
    """Cauchy-pair distance (||f1-f2||_{1/2} + ||g1-g2||_{-1/2}) / ||f1||_{1/2}."""
    f1, g1 = p1.f, p1.g
    f2, g2 = p2.f, p2.g
    den = boundary_norm(f1, 0.5).value
    if den == 0.0:
        raise ValueError("pair_distance needs a nonzero first trace")
    return (
        boundary_norm(f1 - f2, 0.5).value + boundary_norm(g1 - g2, -0.5).value
    ) / den


# ---------------------------------------------------------------------------
# ensemble distances
# ---------------------------------------------------------------------------


def _stacked_weights(dtn_like, s: float) -> np.ndarray:
    n_c = len(dtn_like.circles)
    return np.tile(_weights(dtn_like.order, s), n_c)


def _surrogate(d1, d2) -> float:
    wp = _stacked_weights(d1, 0.5)
    wm = _stacked_weights(d1, -0.5)
    diff = (d1.matrix - d2.matrix) * (wm[:, None] / wp[None, :])
    return float(np.linalg.svd(diff, compute_uv=False)[0])


def _sup_inf_one_sided(d1, d2, reg: float = 1e-12) -> float:
    """sup over basis data of ensemble 1 of the inf over the span of
    ensemble 2,评 evaluated through the normal equations."""
    wp = _stacked_weights(d1, 0.5)
    wm = _stacked_weights(d1, -0.5)
    W1 = wp**2
    Wm = wm**2
    L1, L2 = d1.matrix, d2.matrix
    A = np.diag(W1) + L2.conj().T @ (Wm[:, None] * L2)
    A += reg * np.eye(A.shape[0])
    worst = 0.0
    n = L1.shape[0]
    for k in range(n):
        f1 = np.zeros(n, dtype=complex)
        f1[k] = 1.0
        g1 = L1[:, k]
        rhs = W1 * f1 + L2.conj().T @ (Wm * g1)
        x = np.linalg.solve(A, rhs)

        def dval(f2):
            g2 = L2 @ f2
            num = np.sqrt(np.sum(W1 * np.abs(f1 - f2) ** 2)) + np.sqrt(
                np.sum(Wm * np.abs(g1 - g2) ** 2)
            )
            return num / np.sqrt(np.sum(W1 * np.abs(f1) ** 2))

        # least-squares candidate, refined below the matched-data candidate
        val = min(dval(x), dval(f1))
        worst = max(worst, val)
    return worst


def ensemble_distance(dtn1, dtn2, mode: str = "surrogate") -> float:
    """Distance between Cauchy-data ensembles given as DtN matrices.

    ``surrogate``: H^{1/2} -> H^{-1/2} operator norm of the difference,
    an upper bound for the sup-inf at matched Dirichlet data.
    ``sup_inf``: for each basis datum of one ensemble, minimize the pair
    distance over the span of the other, then symmetrize over the two
    orderings; converges to the surrogate from below.
    """
    if dtn1.order != dtn2.order or dtn1.circles != dtn2.circles:
        raise ValueError("DtN truncation mismatch")
    if mode == "surrogate":
        return max(_surrogate(dtn1, dtn2), _surrogate(dtn2, dtn1))
    if mode == "sup_inf":
        return max(_sup_inf_one_sided(dtn1, dtn2), _sup_inf_one_sided(dtn2, dtn1))
    raise ValueError(f"unknown mode {mode!r}")


def system_distance(sys1, sys2, mode: str = "surrogate") -> float:
    """Same construction on the first-order-system trace matrices
    (f, pullback of star omega); accepts DtnMatrix-shaped objects."""
    return ensemble_distance(sys1, sys2, mode=mode)


# ---------------------------------------------------------------------------
# holomorphic defect on the disk
# ---------------------------------------------------------------------------


def holomorphic_defect(t: BoundaryTrace, r: float = 0.0) -> float:
    """Weighted size of the negative-frequency content of a disk trace.

    Pairing a trace against the boundary values of antiholomorphic
    1-forms isolates the modes e^{-i m theta}, m >= 1; a trace extends
    holomorphically iff they all vanish.
    """
    if t.n_circles != 1:
        raise ValueError("holomorphic defect is defined for disk traces only")
    m = np.arange(1, t.order + 1)
    neg = t.coeffs[0, : t.order][::-1]  # coefficients for n = -1, -2, ...
    w = (1.0 + m.astype(float) ** 2) ** (r / 2.0)
    return float(np.sqrt(np.sum((w * np.abs(neg)) ** 2)))


def holo_project(t: BoundaryTrace, grid=None, radius: float = 1.0, center: complex = 0.0):
    """Zero the negative modes and return the power-series extension.

    Returns (projected trace, extension G(z) = sum f_n ((z-c)/R)^n); the
    extension is evaluated on `grid` when given, otherwise returned as a
    callable.
    """
    if t.n_circles != 1:
        raise ValueError("holo_project is defined for disk traces only")
    proj = t.coeffs.copy()
    proj[0, : t.order] = 0.0
    ptrace = BoundaryTrace(t.order, proj)
    pos = proj[0, t.order :]

    def G(z):
        w = (np.asarray(z) - center) / radius
        return np.polynomial.polynomial.polyval(w, pos)

    if grid is None:
        return ptrace, G
    from .geometry import ScalarField

    return ptrace, ScalarField(grid, G(grid.nodes))
