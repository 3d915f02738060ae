import numpy as np
import pytest

from dbarlab import geometry as geo
from dbarlab import forward as fw
from dbarlab import metrics as me


@pytest.fixture(scope="module")
def grid():
    return geo.PolarGrid(geo.disk(1.0), 96, 64)


@pytest.fixture(scope="module")
def zero_pot(grid):
    z = np.zeros(grid.shape)
    return fw.PotentialPair(geo.OneForm(grid, z, z), geo.ScalarField(grid, z))


def smooth_real_connection(grid, scale=0.25):
    Z = grid.nodes
    alpha = scale * np.exp(-2 * np.abs(Z) ** 2) * Z
    A = geo.wirtinger(geo.ScalarField(grid, alpha), "dzbar")
    return geo.OneForm(grid, np.conj(A.c01), A.c01), alpha


def test_potential_pair_requires_real_X(grid):
    z = np.zeros(grid.shape)
    X = geo.OneForm(grid, np.ones(grid.shape), z)  # not real
    with pytest.raises(ValueError):
        fw.PotentialPair(X, geo.ScalarField(grid, z))


def test_apriori_report(grid):
    X, _ = smooth_real_connection(grid)
    q = geo.ScalarField(grid, np.exp(-np.abs(grid.nodes) ** 2))
    rep = fw.PotentialPair(X, q).apriori_report()
    assert rep["q_w1p"] > 0 and rep["X_w2p"] > 0 and np.isfinite(rep["X_w2p"])


def test_magnetic_apply_plain_laplacian(grid, zero_pot):
    Z = grid.nodes
    u = geo.ScalarField(grid, Z.real**2 + Z.imag**2)
    out = fw.magnetic_apply(zero_pot, u)
    assert np.max(np.abs(out.values + 4.0)) < 1e-8


def test_magnetic_apply_q_constant(grid):
    z = np.zeros(grid.shape)
    pot = fw.PotentialPair(geo.OneForm(grid, z, z), geo.ScalarField(grid, np.ones(grid.shape)))
    u = geo.ScalarField(grid, np.full(grid.shape, 2.0 + 1.0j))
    out = fw.magnetic_apply(pot, u)
    assert np.max(np.abs(out.values - u.values)) < 1e-8


def test_gauge_covariance_of_apply(grid):
    rng = np.random.default_rng(3)
    Z = grid.nodes
    for _ in range(10):
        c = rng.standard_normal(3)
        fg = (1 - np.abs(Z) ** 2) ** 2 * (c[0] + c[1] * Z.real + c[2] * Z.imag)
        df = geo.exterior_d(geo.ScalarField(grid, fg + 0j))
        pot = fw.PotentialPair(df, geo.ScalarField(grid, np.zeros(grid.shape)))
        v = geo.ScalarField(grid, np.exp(0.3 * Z.real) + rng.standard_normal() * Z.imag)
        lhs = fw.magnetic_apply(pot, geo.ScalarField(grid, np.exp(-1j * fg) * v.values))
        rhs = geo.ScalarField(grid, np.exp(-1j * fg) * geo.laplacian(v).values)
        assert geo.norm_l2(lhs - rhs) < 1e-3 * max(geo.norm_l2(rhs), 1.0)


def test_expansion_matches_factored_form(grid):
    rng = np.random.default_rng(4)
    Z = grid.nodes
    for _ in range(5):
        c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        alpha = 0.2 * np.exp(-np.abs(Z) ** 2) * (c[0] * Z + c[1] * np.conj(Z) ** 2) * 0.5
        A = geo.wirtinger(geo.ScalarField(grid, alpha), "dzbar")
        X = geo.OneForm(grid, np.conj(A.c01), A.c01)
        q = geo.ScalarField(grid, 0.3 * np.exp(-2 * np.abs(Z - 0.2) ** 2))
        pot = fw.PotentialPair(X, q)
        F = geo.ScalarField(grid, np.exp(1j * alpha))
        v = geo.ScalarField(grid, c[2] + np.exp(0.3 * Z.imag) + c[3] * Z * np.conj(Z))
        e1 = fw.magnetic_apply(pot, v)
        e2 = fw.magnetic_apply_factored(pot, v, F)
        assert geo.norm_l2(e1 - e2) < 1e-3 * geo.norm_l2(e1)


def test_solve_harmonic_extension(grid, zero_pot):
    u = fw.solve_dirichlet(zero_pot, np.cos(grid.theta))
    assert np.max(np.abs(u.values - grid.nodes.real)) < 1e-6


def test_solve_constant(grid, zero_pot):
    u = fw.solve_dirichlet(zero_pot, np.ones(grid.n_theta))
    assert np.max(np.abs(u.values - 1.0)) < 1e-10


def test_solve_manufactured(grid):
    X, _ = smooth_real_connection(grid)
    Z = grid.nodes
    ustar = geo.ScalarField(grid, np.exp(0.3 * Z) + 2.0)
    pot = fw.manufactured_potential(ustar, X)
    u = fw.solve_dirichlet(pot, ustar.values[-1])
    assert np.max(np.abs(u.values - ustar.values)) < 1e-4


def test_discrete_residual_small(grid):
    X, _ = smooth_real_connection(grid)
    q = geo.ScalarField(grid, 0.2 * np.exp(-np.abs(grid.nodes) ** 2))
    pot = fw.PotentialPair(X, q)
    op = fw.assemble(pot)
    u = op.solve({grid.n_r - 1: np.exp(1j * grid.theta)})
    assert op.residual(u, {}) < 1e-8


def test_solve_annulus_harmonic():
    g = geo.PolarGrid(geo.annulus(0.5, 1.5), 96, 64)
    z = np.zeros(g.shape)
    pot = fw.PotentialPair(geo.OneForm(g, z, z), geo.ScalarField(g, z))
    # harmonic log|z| scaled: boundary data log(r)
    f_in = np.full(g.n_theta, np.log(0.5), dtype=complex)
    f_out = np.full(g.n_theta, np.log(1.5), dtype=complex)
    u = fw.solve_dirichlet(pot, {0: f_in, g.n_r - 1: f_out})
    assert np.max(np.abs(u.values - np.log(np.abs(g.nodes)))) < 1e-5


def test_neumann_data_trivial(grid, zero_pot):
    u = fw.solve_dirichlet(zero_pot, np.ones(grid.n_theta))
    nd = fw.neumann_data(zero_pot, u)
    assert np.max(np.abs(nd[grid.n_r - 1])) < 1e-8


def test_neumann_dtheta_connection_on_annulus():
    """X = c dtheta is tangent to the boundary circles, so f = 1 picks up
    only the plain radial derivative."""
    g = geo.PolarGrid(geo.annulus(0.5, 1.5), 96, 64)
    Z = g.nodes
    dth = geo.OneForm(g, 1 / (2j * Z), -1 / (2j * np.conj(Z)))
    pot = fw.PotentialPair(dth, geo.ScalarField(g, np.zeros(g.shape)))
    u = fw.solve_dirichlet(pot, {0: np.ones(g.n_theta), g.n_r - 1: np.ones(g.n_theta)})
    nd = fw.neumann_data(pot, u)
    for ring in g.boundary_rings:
        assert np.max(np.abs(nd[ring].imag)) < 1e-8


def test_dtn_diagonal_zero_potential():
    g = geo.PolarGrid(geo.disk(1.0), 384, 64)
    z = np.zeros(g.shape)
    pot = fw.PotentialPair(geo.OneForm(g, z, z), geo.ScalarField(g, z))
    d = fw.dtn(pot, 8)
    n = np.arange(-8, 9)
    assert np.max(np.abs(np.diag(d.matrix) - np.abs(n))) < 1e-4
    off = d.matrix - np.diag(np.diag(d.matrix))
    assert np.max(np.abs(off)) < 1e-10


def test_dtn_symmetry_for_real_potentials(grid):
    X, _ = smooth_real_connection(grid)
    q = geo.ScalarField(grid, 0.3 * np.exp(-2 * np.abs(grid.nodes) ** 2))
    d = fw.dtn(fw.PotentialPair(X, q), 6)
    # self-adjointness: Hermitian symmetry of the coefficient matrix
    M = d.matrix
    assert np.max(np.abs(M - M.conj().T)) < 1e-3 * max(np.max(np.abs(M)), 1.0)
    # bilinear transpose pairs with the reversed connection
    Xm = geo.OneForm(grid, -X.c10, -X.c01)
    dm = fw.dtn(fw.PotentialPair(Xm, q), 6)
    assert np.max(np.abs(M - dm.matrix[::-1, ::-1].T)) < 1e-3 * max(np.max(np.abs(M)), 1.0)


def test_gauge_transform_identity(grid):
    X, _ = smooth_real_connection(grid)
    pot = fw.PotentialPair(X, geo.ScalarField(grid, np.zeros(grid.shape)))
    out = fw.gauge_transform(pot, geo.ScalarField(grid, np.zeros(grid.shape)))
    assert np.allclose(out.X.c01, pot.X.c01)


def test_gauge_transform_trace_check(grid):
    X, _ = smooth_real_connection(grid)
    pot = fw.PotentialPair(X, geo.ScalarField(grid, np.zeros(grid.shape)))
    bad = geo.ScalarField(grid, np.abs(grid.nodes) ** 2)
    with pytest.raises(ValueError):
        fw.gauge_transform(pot, bad)
    ok = geo.ScalarField(grid, (1 - np.abs(grid.nodes) ** 2) ** 2)
    out = fw.gauge_transform(pot, ok)
    assert out.X.is_real


def test_dtn_gauge_invariance(grid):
    X, _ = smooth_real_connection(grid)
    q = geo.ScalarField(grid, 0.3 * np.exp(-2 * np.abs(grid.nodes) ** 2))
    pot = fw.PotentialPair(X, q)
    fg = geo.ScalarField(grid, (1 - np.abs(grid.nodes) ** 2) ** 2)
    d1 = fw.dtn(pot, 6)
    d2 = fw.dtn(fw.gauge_transform(pot, fg), 6)
    rel = me.ensemble_distance(d1, d2) / np.linalg.norm(d1.matrix, 2)
    assert rel < 1e-3


def test_selfadjoint_green_identity(grid):
    X, _ = smooth_real_connection(grid)
    q = geo.ScalarField(grid, 0.2 * np.exp(-np.abs(grid.nodes) ** 2))  # real q
    pot = fw.PotentialPair(X, q)
    Z = grid.nodes
    bump = np.exp(-10 * np.abs(Z - 0.1) ** 2)
    u = geo.ScalarField(grid, bump * (1 + Z))
    v = geo.ScalarField(grid, bump * np.conj(Z) ** 2)
    lhs = geo.inner_l2(fw.magnetic_apply(pot, u), v)
    rhs = geo.inner_l2(u, fw.magnetic_apply(pot, v))
    scale = geo.norm_l2(u) * geo.norm_l2(v)
    assert abs(lhs - rhs) < 1e-4 * scale


def test_dtn_csv_roundtrip(tmp_path, grid):
    X, _ = smooth_real_connection(grid)
    pot = fw.PotentialPair(X, geo.ScalarField(grid, np.zeros(grid.shape)))
    d = fw.dtn(pot, 4)
    path = tmp_path / "dtn.csv"
    fw.save_dtn_csv(path, d)
    back = fw.load_dtn_csv(path)
    assert back.order == 4 and back.circles == d.circles
    assert np.max(np.abs(back.matrix - d.matrix)) < 1e-15


def test_eigenvalue_collision_perturbation():
    """Near a Dirichlet eigenvalue of the disk the solver retries with a
    complex-shifted potential instead of failing."""
    g = geo.PolarGrid(geo.disk(1.0), 96, 16)
    z = np.zeros(g.shape)
    # lowest Dirichlet eigenvalue of the unit disk: j_{0,1}^2 = 5.7832...
    lam = 5.783185962946785
    pot = fw.PotentialPair(geo.OneForm(g, z, z), geo.ScalarField(g, np.full(g.shape, -lam)))
    with pytest.raises(fw.EigenvalueCollision):
        fw.assemble(pot, condition_limit=1e8)
    u = fw.solve_dirichlet(pot, np.ones(g.n_theta), allow_perturbation=True)
    assert np.all(np.isfinite(u.values))


def test_cauchy_pair_packaging(grid, zero_pot):
    pair = fw.cauchy_pair(zero_pot, np.exp(2j * grid.theta), order=6)
    f, g = pair.f, pair.g
    assert f.coeffs.shape == (1, 13)
    assert abs(f.coeffs[0, 6 + 2] - 1.0) < 1e-12
    assert np.sum(np.abs(f.coeffs) > 1e-10) == 1
    # harmonic extension r^2 e^{2 i theta}: normal derivative 2 e^{2 i theta}
    assert abs(g.coeffs[0, 6 + 2] - 2.0) < 1e-4
