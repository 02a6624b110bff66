import numpy as np
import pytest

from helmshape.derivatives import (cauchy_md, cauchy_sd, derive, md_boundary_data, md_traces,
                                   md_via_lie, md_volume_source, sd_boundary_data, solve_sd,
                                   tangentiality_defect)
from helmshape.errors import MissingExtras, OutsideExtensionSupport
from helmshape.geometry import BoundaryOnlyField, StarCurve, VelocityField, laplace_beltrami
from helmshape.mie import PlaneWave, WaveParameters
from helmshape.problem import CauchyData, solve
from helmshape.special import CylinderTable

P = WaveParameters(2.0, eta=1.0, kappa1=3.0, mu0=1.0, mu1=2.0)
DISC = StarCurve.circle(1.0, 128)
G = lambda p: 1.0 + 0.3 * np.cos(2 * p) + 0.2 * np.sin(3 * p)
ALPHA = 0.3


@pytest.fixture(scope="module")
def bases():
    return {b: solve(b, DISC, P, ALPHA) for b in range(4)}


def _tangential():
    return VelocityField.tangential_profile(DISC, lambda p: 0.5 + np.cos(p))


@pytest.mark.parametrize("beta", [0, 1, 2, 3])
def test_tangential_field_gives_zero_data(bases, beta):
    g = sd_boundary_data(beta, bases[beta].cauchy_data(), _tangential(), P)
    for x in (g if beta == 3 else (g,)):
        assert np.max(np.abs(x)) <= 1e-13


def test_dirichlet_datum_is_minus_sigma(bases):
    v = VelocityField.normal_profile(DISC, 1.0)
    st = bases[0].state()
    assert np.max(np.abs(sd_boundary_data(0, st, v, P) + st.sigma)) <= 1e-15


def test_neumann_datum_unit_normal(bases):
    v = VelocityField.normal_profile(DISC, 1.0)
    st = bases[1].state()
    ref = laplace_beltrami(st.lam, DISC) + P.kappa ** 2 * st.lam
    assert np.max(np.abs(sd_boundary_data(1, st, v, P) - ref)) <= 1e-11


def test_transmission_needs_interior(bases):
    with pytest.raises(MissingExtras):
        sd_boundary_data(3, bases[3].state(), VelocityField.dilation(), P)


def test_literal_transmission_flag(bases):
    cd = bases[3].cauchy_data()
    v = VelocityField.dilation()
    a = sd_boundary_data(3, cd, v, P)[1]
    b = sd_boundary_data(3, cd, v, P, literal_transmission=True)[1]
    assert np.max(np.abs(a - b)) > 1e-3
    q = WaveParameters(2.0, kappa1=3.0)
    cd1 = solve(3, DISC, q, ALPHA).cauchy_data()
    a = sd_boundary_data(3, cd1, v, q)[1]
    b = sd_boundary_data(3, cd1, v, q, literal_transmission=True)[1]
    assert np.max(np.abs(a - b)) <= 1e-12


@pytest.mark.parametrize("beta", [0, 1, 2, 3])
def test_md_data_zero_field(bases, beta):
    z = VelocityField.translation((0.0, 0.0))
    m = md_boundary_data(beta, bases[beta].cauchy_data(), z, P)
    for x in (m if beta == 3 else (m,)):
        assert np.max(np.abs(x)) == 0.0


def test_md_data_dirichlet_identically_zero(bases):
    m = md_boundary_data(0, bases[0].cauchy_data(), VelocityField.dilation(), P)
    assert np.all(m == 0)


def test_md_data_translation_matches_series_oracle(bases):
    # translation: Udot = i kappa (d.b) U, so d_n Udot = 0 for the Neumann problem
    b = np.array([1.0, 0.0])
    v = VelocityField.translation(b)
    st = bases[1].state()
    m = md_boundary_data(1, st, v, P)
    d = PlaneWave(P.kappa, ALPHA).direction
    assert np.max(np.abs(m - 1j * P.kappa * (d @ b) * st.sigma)) <= 1e-12
    # the literal form reduces to grad U . grad_G(v.n), which does not vanish
    lit = md_boundary_data(1, st, v, P, "grad")
    ref = st.dlam_ds * DISC.d_ds(DISC.normal[:, 0])
    assert np.max(np.abs(lit - ref)) <= 1e-12
    assert np.max(np.abs(lit)) > 0.1


def test_md_data_needs_extension(bases):
    v = BoundaryOnlyField(DISC, DISC.normal)
    with pytest.raises(OutsideExtensionSupport):
        md_boundary_data(1, bases[1].state(), v, P)


def test_tangentiality(bases):
    v = VelocityField.normal_profile(DISC, G)
    assert tangentiality_defect(bases[2].state(), v) <= 1e-12


def test_source_translation_zero(bases):
    pts = np.array([[1.5, 0.2], [-1.1, 1.3]])
    fv = bases[1].evaluate(pts, 2)
    f = md_volume_source(fv, VelocityField.translation((0.4, -1.0)), pts, P.kappa)
    assert np.all(f == 0)


def test_source_dilation(bases):
    pts = np.array([[1.5, 0.2], [-1.1, 1.3]])
    fv = bases[2].evaluate(pts, 2)
    f = md_volume_source(fv, VelocityField.dilation(), pts, P.kappa)
    assert np.max(np.abs(f - 2 * P.kappa ** 2 * fv.u)) <= 1e-12


def test_source_matches_stencil(bases):
    # div(A' grad U) by nested 8th-order differences
    v = VelocityField.normal_profile(DISC, G)
    sol = bases[1]
    c = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
    k = np.arange(-4, 5)
    h = 5e-3
    th = np.linspace(0, 2 * np.pi, 6, endpoint=False)
    pts = 1.08 * np.column_stack([np.cos(th), np.sin(th)])

    def flux(p):
        g = sol.evaluate(p, 1).grad
        return np.einsum("nij,nj->ni", v.a_prime(p), g)

    div = sum(ci * flux(pts + ki * h * e)[:, j] for j, e in enumerate(np.eye(2))
              for ci, ki in zip(c, k)) / h
    fv = sol.evaluate(pts, 2)
    ref = div + P.kappa ** 2 * v.divergence(pts) * fv.u
    assert np.max(np.abs(md_volume_source(fv, v, pts, P.kappa) - ref)) <= 1e-6


def test_sd_tangential_is_zero(bases):
    up = solve_sd(bases[1], _tangential())
    pts = np.array([[1.5, 0.0], [0.0, -2.0]])
    assert np.max(np.abs(up.evaluate(pts).u)) <= 1e-13


def test_sd_dilation_matches_coefficient_derivative(bases):
    # U' for v = x on the unit disc equals d/da of the series at a = 1:
    # a_n = -c_n J_n(ka)/H_n(ka) gives da_n/da = 2i c_n / (pi a H_n(ka)^2)
    up = solve_sd(bases[0], VelocityField.dilation())
    n = up.raw.orders
    keep = np.abs(n) <= 20
    c = PlaneWave(P.kappa, ALPHA).coefficients(n[keep], (0.0, 0.0))
    H = CylinderTable(n[keep], P.kappa).H
    ref = 2j * c / (np.pi * H ** 2)
    assert np.max(np.abs(up.raw.a[keep] - ref)) <= 1e-12


@pytest.mark.parametrize("beta", [0, 1, 2])
def test_sd_translation_closed_form(bases, beta):
    # U_t^sc(x) = exp(i kappa d.tb) U^sc(x - tb)
    b = np.array([0.6, -0.3])
    up = solve_sd(bases[beta], VelocityField.translation(b))
    pts = np.array([[1.5, 0.2], [-1.1, 1.3], [0.3, -2.2]])
    fv = bases[beta].raw.evaluate(pts, "scattered", 1)
    d = PlaneWave(P.kappa, ALPHA).direction
    ref = 1j * P.kappa * (d @ b) * fv.u - fv.grad @ b
    assert np.max(np.abs(up.evaluate(pts).u - ref)) <= 1e-11


def test_sd_translation_difference_quotient(bases):
    # Richardson-extrapolated (U_t - U)/t against U'
    b = np.array([0.6, -0.3])
    v = VelocityField.translation(b)
    pts = np.array([[1.8, 0.4], [-1.2, 1.6]])
    u0 = bases[1].evaluate(pts).u

    def q(t):
        s = solve(1, StarCurve.circle(1.0, 128, t * b), P, ALPHA)
        return (s.evaluate(pts).u - u0) / t

    rich = 2 * q(5e-4) - q(1e-3)
    assert np.max(np.abs(rich - solve_sd(bases[1], v).evaluate(pts).u)) <= 1e-6


def test_lie_zero_and_tangential(bases):
    pts = np.array([[1.5, 0.2], [-1.1, 1.3]])
    z = VelocityField.translation((0.0, 0.0))
    bz = derive(bases[1], z)
    assert np.all(bz.material_derivative(pts) == 0)
    v = _tangential()
    bt = derive(bases[1], v)
    pts = np.array([[1.1, 0.2], [-0.8, 0.8]])
    ref = md_via_lie(0.0, bases[1].evaluate(pts, 1).grad, v, pts)
    assert np.max(np.abs(bt.material_derivative(pts) - ref)) <= 1e-13


def test_cmd_zero_field(bases):
    z = VelocityField.translation((0.0, 0.0))
    b = derive(bases[2], z)
    lam, sig = b.xi_dot["exterior"]
    assert np.all(lam == 0) and np.all(sig == 0)


def test_cmd_dirichlet_first_component(bases):
    b = derive(bases[0], VelocityField.normal_profile(DISC, G))
    assert np.max(np.abs(b.xi_dot["exterior"][0])) <= 1e-12


def test_cmd_difference_quotient(bases):
    v = VelocityField.dilation()
    b = derive(bases[1], v)
    st0 = bases[1].state()
    errs = []
    for t in (1e-3, 5e-4):
        s = solve(1, StarCurve.circle(1.0 + t, 128), P, ALPHA).state()
        errs.append(np.max(np.abs((s.lam - st0.lam) / t - b.xi_dot["exterior"][0])))
    assert errs[1] < 0.6 * errs[0] and errs[0] < 1e-2


def test_csd_invariants(bases):
    v = VelocityField.normal_profile(DISC, G)
    assert np.max(np.abs(derive(bases[0], v).xi_prime["exterior"][0])) <= 1e-7
    assert np.max(np.abs(derive(bases[1], v).xi_prime["exterior"][1])) <= 1e-7


@pytest.mark.parametrize("beta", [0, 1, 2, 3])
@pytest.mark.parametrize("kind", ["dilation", "translation", "normal", "tangential"])
def test_cld_identity(bases, beta, kind):
    v = {"dilation": VelocityField.dilation(),
         "translation": VelocityField.translation((0.6, -0.3)),
         "normal": VelocityField.normal_profile(DISC, G),
         "tangential": _tangential()}[kind]
    b = derive(bases[beta], v)
    for side in bases[beta].sides:
        assert b.cld_norm(side) <= 1e-7


def test_cld_needs_curvature_term_for_tangential_fields(bases):
    v = _tangential()
    b = derive(bases[1], v, curvature_correction=False)
    assert b.cld_norm() > 1e-3


@pytest.mark.parametrize("beta", [1, 2, 3])
def test_md_boundary_condition_conormal(bases, beta):
    for v in (VelocityField.dilation(), VelocityField.translation((0.6, -0.3)),
              VelocityField.normal_profile(DISC, G), _tangential()):
        b = derive(bases[beta], v)
        assert np.max(np.abs(b.md_boundary_residual())) <= 1e-10


def test_literal_readings_on_normal_field(bases):
    b = derive(bases[1], VelocityField.normal_profile(DISC, G))
    assert np.max(np.abs(b.md_boundary_residual("grad"))) <= 1e-10
    assert np.max(np.abs(b.md_boundary_residual("normal"))) > 1e-2


def test_md_traces_direct(bases):
    v = VelocityField.dilation()
    st = bases[2].state()
    up = solve_sd(bases[2], v).state()
    lam, sig = md_traces(up, st, v)
    ld, sd = cauchy_md(lam, sig, st, v)
    lp, sp = cauchy_sd(up.lam, up.sigma, st, v)
    assert np.max(np.abs(ld - lp)) <= 1e-12
    assert np.max(np.abs(sd - sp)) <= 1e-10


def test_cauchy_data_jumps(bases):
    cd = bases[3].cauchy_data()
    assert isinstance(cd, CauchyData)
    assert np.max(np.abs(cd.jump_dirichlet())) <= 1e-12
    assert np.max(np.abs(cd.jump_neumann())) <= 1e-12


def test_bundle_json(bases):
    d = derive(bases[0], VelocityField.dilation()).to_json()
    assert d["provenance"]["backend"] == "mie"
    assert d["cld_norm"]["exterior"] <= 1e-7
