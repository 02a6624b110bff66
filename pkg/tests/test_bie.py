import numpy as np
import pytest

from helmshape import _kernels_py, kernels
from helmshape.bie import bie_radiate, bie_solve, boundary_residual, layer_matrices
from helmshape.errors import NearBoundaryEvaluation, NotSupported, UnderResolved
from helmshape.geometry import StarCurve, VelocityField, transform_curve
from helmshape.mie import PlaneWave, WaveParameters, mie_solve

P = WaveParameters(2.0, eta=1.0)
ALPHA = 0.3


@pytest.fixture(scope="module")
def disc():
    return StarCurve.circle(1.0, 256)


@pytest.fixture(scope="module")
def ellipse():
    return StarCurve.ellipse_like(0.2, 2, 256)


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_disc_matches_mie(disc, beta):
    s = bie_solve(beta, disc, P, ALPHA)
    m = mie_solve(beta, P, ALPHA).cauchy(disc)
    assert np.max(np.abs(s.lam - m.lam)) <= 1e-8
    assert np.max(np.abs(s.sigma - m.sigma)) <= 1e-8
    assert np.max(np.abs(s.cauchy().gamma2 - m.gamma2)) <= 1e-7


def test_impedance_residual(disc):
    s = bie_solve(2, disc, P, ALPHA)
    assert np.max(np.abs(s.sigma + 1j * P.eta * s.lam)) <= 1e-9
    assert boundary_residual(s) <= 1e-9


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_off_node_boundary_residual(ellipse, beta):
    s = bie_solve(beta, ellipse, P, ALPHA, certify=False)
    assert boundary_residual(s) <= 1e-9


def test_neumann_self_convergence(ellipse):
    s = bie_solve(1, ellipse, P, ALPHA)
    assert s.self_convergence <= 1e-9


def test_under_resolved_certificate():
    c = StarCurve.from_cosines(1.0, {2: 0.25, 4: 0.05}, N=16)
    with pytest.raises(UnderResolved):
        bie_solve(1, c, WaveParameters(6.0), ALPHA)


def test_zero_incident(ellipse):
    s = bie_solve(0, ellipse, P, "none", certify=False)
    assert np.all(np.abs(s.sigma) == 0) and np.all(s.lam == 0)


def test_transmission_not_supported(disc):
    with pytest.raises(NotSupported):
        bie_solve(3, disc, WaveParameters(2.0, kappa1=3.0), ALPHA)


def test_near_boundary_rejected(ellipse):
    s = bie_solve(0, ellipse, P, ALPHA, certify=False)
    with pytest.raises(NearBoundaryEvaluation):
        s.evaluate(np.array([[1.21, 0.0]]))
    s.evaluate(np.array([[2.0, 0.0]]))


def test_spectral_convergence(ellipse):
    ref = bie_solve(1, ellipse.with_nodes(512), P, ALPHA, certify=False)
    logs = []
    for N in (8, 16, 32, 64):
        s = bie_solve(1, ellipse.with_nodes(N), P, ALPHA, certify=False)
        logs.append(np.log10(np.max(np.abs(s.lam - ref.lam[::512 // N]))))
    drops = -np.diff(logs)
    assert np.all(drops > 0) and np.all(np.diff(drops) > 0)


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_translation_identity(ellipse, beta):
    tb = np.array([0.03, -0.02])
    moved = StarCurve(ellipse.rho_hat, ellipse.N, tb)
    s0 = bie_solve(beta, ellipse, P, ALPHA, certify=False)
    s1 = bie_solve(beta, moved, P, ALPHA, certify=False)
    x = np.array([[1.9, 0.4], [-0.6, 1.8], [0.1, -2.1]])
    d = PlaneWave(P.kappa, ALPHA).direction
    lhs = s1.evaluate(x, "scattered").u
    rhs = np.exp(1j * P.kappa * d @ tb) * s0.evaluate(x - tb, "scattered").u
    assert np.max(np.abs(lhs - rhs)) <= 1e-7


@pytest.mark.parametrize("seed", range(5))
def test_backend_equivalence_random_perturbations(seed):
    rng = np.random.default_rng(seed)
    disc = StarCurve.circle(1.0, 128)
    coeffs = rng.uniform(-1, 1, 3)
    g = lambda p: coeffs[0] + coeffs[1] * np.cos(2 * p) + coeffs[2] * np.sin(3 * p)
    v = VelocityField.normal_profile(disc, g)
    beta = seed % 3
    t = 1e-2
    pert = transform_curve(disc, v, t)
    s = bie_solve(beta, pert, P, ALPHA)
    assert s.self_convergence <= 1e-9
    s0 = bie_solve(beta, transform_curve(disc, v, 0.0), P, ALPHA, certify=False)
    m = mie_solve(beta, P, ALPHA).cauchy(disc)
    assert np.max(np.abs(s0.lam - m.lam)) <= 1e-8
    assert np.max(np.abs(s0.sigma - m.sigma)) <= 1e-8


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_volume_derivatives_match_mie(disc, beta):
    s = bie_solve(beta, disc, P, ALPHA, certify=False)
    m = mie_solve(beta, P, ALPHA)
    pts = np.array([[1.8, 0.3], [-0.5, 2.0]])
    a, b = s.evaluate(pts, order=2), m.evaluate(pts, order=2)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y)) <= 1e-10


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_radiate_matches_mie(disc, beta):
    from helmshape.mie import radiate
    g = np.cos(2 * disc.phi) + 0.3j * np.sin(5 * disc.phi)
    s = bie_radiate(beta, disc, P, g)
    m = radiate(beta, P, g)
    st = m.cauchy(disc)
    assert np.max(np.abs(s.lam - st.lam)) <= 1e-10
    assert np.max(np.abs(s.sigma - st.sigma)) <= 1e-10


def test_kernel_backends_agree(ellipse, monkeypatch):
    a = layer_matrices(ellipse.with_nodes(64), 2.0)
    monkeypatch.setattr(kernels, "hankel_pairs", _kernels_py.hankel_pairs)
    b = layer_matrices(ellipse.with_nodes(64), 2.0)
    for x, y in zip((a.S, a.K, a.Kp, a.T), (b.S, b.K, b.Kp, b.T)):
        assert np.max(np.abs(x - y)) <= 1e-10 * np.max(np.abs(y))
