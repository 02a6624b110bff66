"""Shape and material derivatives of the scattered field and its Cauchy data.

Conventions: ``n`` is the unit normal pointing into the exterior, ``tau`` the
counterclockwise unit tangent, ``h`` the signed curvature with
``d tau/ds = -h n`` (``h = 1/a`` on a disc of radius ``a``).
``J[i, j] = d_j v_i`` and ``A'(0) = (div v) I - J - J^T``.

The shape derivative ``U'`` solves the homogeneous problem of the same kind on
the unperturbed curve with data ``g``; the material derivative is derived from
it through ``Udot = U' + grad U . v``.  The material derivative solves
``-Delta Udot - kappa^2 Udot = f`` with boundary datum ``m``; both are
assembled here only to be checked as residual identities.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (MissingExtras, MissingSecondTrace, MissingSurfaceGradient,
                     MissingTrace, NotSupported, OutsideExtensionSupport)
from .geometry import Curve, VelocityField, boundary_sobolev_norm
from .problem import CauchyData, FieldSolution, radiate
from .traces import BoundaryState

__all__ = [
    "READINGS", "sd_boundary_data", "md_boundary_data", "md_volume_source",
    "md_via_lie", "md_traces", "cauchy_md", "cauchy_sd", "cld_residual",
    "cauchy_norm", "tangentiality_defect", "solve_sd", "derive", "DerivativeBundle",
]

# ``conormal``: -(A'(0) grad U) . n, the form obtained by differentiating the
# pulled-back boundary condition.  ``grad``: -(J^T grad U) . n + grad U . grad_G(v.n).
# ``normal``: -(J^T n) . grad U + grad U . grad_G(v.n).
READINGS = ("conormal", "grad", "normal")


def _samples(v, curve: Curve):
    if isinstance(v, VelocityField):
        return v.on_curve(curve)
    return np.asarray(v, float).reshape(curve.N, 2)


def _jacobian(v, points):
    if not isinstance(v, VelocityField):
        raise OutsideExtensionSupport("velocity given by boundary samples only; no Jacobian")
    try:
        return v.jacobian(points)
    except NotSupported as exc:
        raise OutsideExtensionSupport(str(exc)) from exc


def _field(v, points, what="evaluate"):
    if not isinstance(v, VelocityField):
        raise OutsideExtensionSupport("velocity given by boundary samples only")
    try:
        return getattr(v, what)(points)
    except NotSupported as exc:
        raise OutsideExtensionSupport(str(exc)) from exc


def _vn(v, curve):
    return np.einsum("ij,ij->i", _samples(v, curve), curve.normal)


def _vt(v, curve):
    return np.einsum("ij,ij->i", _samples(v, curve), curve.tangent)


def _as_cauchy(c):
    return CauchyData(c) if isinstance(c, BoundaryState) else c


# ---------------------------------------------------------------------------
# shape derivative data

def _neumann_core(st: BoundaryState, vn, kappa):
    """``div_G((v.n) grad_G U) + kappa^2 (v.n) gamma_0 U``."""
    c = st.curve
    return c.d_ds(vn * st.dlam_ds) + kappa ** 2 * vn * st.lam


def sd_boundary_data(beta, cauchy, v, params, *, literal_transmission=False):
    """Boundary datum of the shape-derivative problem.

    For ``beta = 3`` returns the jump pair ``(g0, g1)`` with
    ``g1 = [1/mu] div_G((v.n) grad_G U) + [kappa^2/mu] (v.n) U``; with
    ``literal_transmission`` the second coefficient is ``[kappa^2]``.
    """
    beta = int(beta)
    cd = _as_cauchy(cauchy)
    st = cd.exterior
    c = st.curve
    vn = _vn(v, c)
    if beta == 0:
        return -st.sigma * vn
    if beta == 1:
        return _neumann_core(st, vn, params.kappa)
    if beta == 2:
        if params.eta is None:
            raise MissingExtras("impedance datum needs eta")
        g1 = _neumann_core(st, vn, params.kappa)
        return g1 + 1j * params.eta * vn * (-st.sigma - c.curvature * st.lam)
    if beta == 3:
        if cd.interior is None or params.kappa1 is None:
            raise MissingExtras("transmission datum needs interior traces and kappa1")
        si = cd.interior
        g0 = -(st.sigma - si.sigma) * vn
        inv_mu = 1.0 / params.mu0 - 1.0 / params.mu1
        if literal_transmission:
            k2 = params.kappa ** 2 - params.kappa1 ** 2
        else:
            k2 = params.kappa ** 2 / params.mu0 - params.kappa1 ** 2 / params.mu1
        g1 = inv_mu * c.d_ds(vn * st.dlam_ds) + k2 * vn * st.lam
        return g0, g1
    raise ValueError(f"unknown problem kind {beta}")


# ---------------------------------------------------------------------------
# material derivative data

def _m_reading(st: BoundaryState, v, reading):
    c = st.curve
    if st.grad is None:
        raise MissingSurfaceGradient("boundary state carries no gradient")
    g = st.grad
    n = c.normal
    J = _jacobian(v, c.x)
    if reading == "conormal":
        div = J[:, 0, 0] + J[:, 1, 1]
        A = div[:, None, None] * np.eye(2) - J - np.swapaxes(J, 1, 2)
        return -np.einsum("ni,nij,nj->n", n, A, g)
    dvn = c.d_ds(_vn(v, c))
    surf = np.einsum("ni,ni->n", g, c.tangent) * dvn
    if reading == "grad":
        return -np.einsum("nji,nj,ni->n", J, g, n) + surf
    if reading == "normal":
        return -np.einsum("nji,nj,ni->n", J, n, g) + surf
    raise ValueError(f"unknown reading {reading!r}; expected one of {READINGS}")


def _surface_divergence(v, curve):
    J = _jacobian(v, curve.x)
    t = curve.tangent
    return np.einsum("ni,nij,nj->n", t, J, t)


def md_boundary_data(beta, cauchy, v, params, reading="conormal"):
    """Boundary datum ``m`` of the material-derivative problem.

    ``m0 = 0``, ``m1`` per ``reading``, ``m2 = m1 + div_G v gamma_1 U`` and for
    ``beta = 3`` the pair ``(0, [mu^{-1} m1])``.
    """
    beta = int(beta)
    cd = _as_cauchy(cauchy)
    st = cd.exterior
    if beta == 0:
        return np.zeros(st.curve.N, complex)
    if beta == 1:
        return _m_reading(st, v, reading)
    if beta == 2:
        return _m_reading(st, v, reading) + _surface_divergence(v, st.curve) * st.sigma
    if beta == 3:
        if cd.interior is None:
            raise MissingExtras("transmission datum needs interior traces")
        m = (_m_reading(st, v, reading) / params.mu0
             - _m_reading(cd.interior, v, reading) / params.mu1)
        return np.zeros(st.curve.N, complex), m
    raise ValueError(f"unknown problem kind {beta}")


def tangentiality_defect(state: BoundaryState, v):
    """``max |grad U . grad_G(v.n) - grad_G U . grad_G(v.n)|``; zero because
    ``grad_G(v.n)`` is tangential."""
    c = state.curve
    w = c.d_ds(_vn(v, c))[:, None] * c.tangent
    full = np.einsum("ni,ni->n", state.grad, w)
    surf = state.dlam_ds * np.einsum("ni,ni->n", w, c.tangent)
    return float(np.max(np.abs(full - surf)))


def md_volume_source(fv, v, points, kappa):
    """``f = div(A'(0) grad U) + kappa^2 div(v) U``.

    ``fv`` carries ``u``, ``grad`` and ``hess`` of ``U`` at ``points``;
    expanded as ``-Delta v . grad U + A'(0) : Hess U + kappa^2 div(v) U``.
    """
    if fv.hess is None:
        raise MissingSecondTrace("source needs the Hessian of U")
    J = _jacobian(v, points)
    H = _field(v, points, "hessian")
    lap_v = H[..., :, 0, 0] + H[..., :, 1, 1]
    div = J[..., 0, 0] + J[..., 1, 1]
    A = div[..., None, None] * np.eye(2) - J - np.swapaxes(J, -1, -2)
    return (-np.einsum("...i,...i->...", lap_v, fv.grad)
            + np.einsum("...ij,...ij->...", A, fv.hess)
            + kappa ** 2 * div * fv.u)


def md_via_lie(sd_values, grad_u, v, points):
    """``Udot = U' + grad U . v`` at ``points``."""
    V = _field(v, points)
    return np.asarray(sd_values) + np.einsum("...i,...i->...", grad_u, V)


def md_traces(sd_state: BoundaryState, state: BoundaryState, v):
    """``(gamma_0 Udot, gamma_1 Udot)`` from traces of ``U'`` and ``U``.

    ``grad Udot = grad U' + Hess U v + J^T grad U``.
    """
    c = state.curve
    if state.hess is None:
        raise MissingSecondTrace("material-derivative traces need the Hessian of U")
    V = _samples(v, c)
    n = c.normal
    J = _jacobian(v, c.x)
    lam = sd_state.lam + np.einsum("ni,ni->n", state.grad, V)
    sig = (sd_state.sigma + np.einsum("ni,nij,nj->n", n, state.hess, V)
           + np.einsum("ni,nji,nj->n", n, J, state.grad))
    return lam, sig


def cauchy_md(md_lam, md_sig, state: BoundaryState, v, *, reading="grad",
              curvature_correction=True):
    """Material derivative of the Cauchy data.

    ``sigma_dot = gamma_1 Udot - (J^T grad U) . n - grad_G U . grad_G(v.n)
    + h (v.tau) d_s lam``.  The last term is the tangential part of the
    normal's material derivative and vanishes for normal ``v``; it is dropped
    with ``curvature_correction=False``.  ``reading="normal"`` replaces the
    Jacobian term by ``(J^T n) . grad U``.
    """
    if md_lam is None or md_sig is None:
        raise MissingTrace("both traces of the material derivative are required")
    c = state.curve
    J = _jacobian(v, c.x)
    n = c.normal
    if reading == "grad":
        jt = np.einsum("nji,nj,ni->n", J, state.grad, n)
    elif reading == "normal":
        jt = np.einsum("nji,nj,ni->n", J, n, state.grad)
    else:
        raise ValueError(f"unknown reading {reading!r}")
    sig = md_sig - jt - state.dlam_ds * c.d_ds(_vn(v, c))
    if curvature_correction:
        sig = sig + c.curvature * _vt(v, c) * state.dlam_ds
    return np.asarray(md_lam), sig


def cauchy_sd(sd_lam, sd_sig, state: BoundaryState, v):
    """Shape derivative of the Cauchy data:
    ``(gamma_0 U' + gamma_1 U (v.n), gamma_1 U' + gamma_2 U (v.n) - grad_G U . grad_G(v.n))``.
    """
    if state.hess is None:
        raise MissingSecondTrace("shape derivative of sigma needs gamma_2 U")
    c = state.curve
    vn = _vn(v, c)
    lam = sd_lam + state.sigma * vn
    sig = sd_sig + state.gamma2 * vn - state.dlam_ds * c.d_ds(vn)
    return lam, sig


def cld_residual(xi_dot, xi_prime, state: BoundaryState, v):
    """``xi_dot - xi_prime - (v.tau) d_s xi`` componentwise."""
    c = state.curve
    vt = _vt(v, c)
    return (xi_dot[0] - xi_prime[0] - vt * state.dlam_ds,
            xi_dot[1] - xi_prime[1] - vt * c.d_ds(state.sigma))


def cauchy_norm(lam, sigma, curve: Curve, s=0.0):
    """Surrogate for the product norm ``H^{s+1/2} x H^{s-1/2}`` on the curve."""
    a = boundary_sobolev_norm(lam, s + 0.5, curve)
    b = boundary_sobolev_norm(sigma, s - 0.5, curve)
    return float(np.hypot(a, b))


# ---------------------------------------------------------------------------
# solves and bundles

def solve_sd(base: FieldSolution, v, *, literal_transmission=False) -> FieldSolution:
    """Shape derivative ``U'`` on the unperturbed curve, same backend as ``base``."""
    g = sd_boundary_data(base.beta, base.cauchy_data(), v, base.params,
                         literal_transmission=literal_transmission)
    return radiate(base, g)


@dataclass(frozen=True)
class DerivativeBundle:
    """Base solution, velocity, ``U'`` and every derived boundary quantity.

    Per-side dictionaries are keyed ``"exterior"`` (and ``"interior"`` for
    transmission).
    """

    base: FieldSolution
    v: object
    sd: FieldSolution
    g: object
    m: object
    xi_prime: dict
    xi_dot: dict
    md_trace: dict
    options: dict = field(default_factory=dict)

    @property
    def beta(self):
        return self.base.beta

    @property
    def curve(self):
        return self.base.curve

    def kappa(self, side="exterior"):
        return self.base.params.kappa_of(side)

    def shape_derivative(self, points, order=0, side="exterior"):
        return self.sd.evaluate(points, order, side)

    def material_derivative(self, points, side="exterior"):
        """``Udot`` at volume points through the Lie relation."""
        up = self.sd.evaluate(points, 0, side).u
        gu = self.base.evaluate(points, 1, side).grad
        return md_via_lie(up, gu, self.v, points)

    def source(self, points, side="exterior"):
        fv = self.base.evaluate(points, 2, side)
        return md_volume_source(fv, self.v, points, self.kappa(side))

    def cld(self, side="exterior"):
        st = self.base.state(side)
        return cld_residual(self.xi_dot[side], self.xi_prime[side], st, self.v)

    def cld_norm(self, side="exterior"):
        r = self.cld(side)
        return cauchy_norm(r[0], r[1], self.curve)

    def md_boundary_residual(self, reading=None):
        """Residual of the boundary condition satisfied by ``Udot`` against
        ``m`` (for ``reading`` other than the bundle's, ``m`` is rebuilt)."""
        beta = self.beta
        p = self.base.params
        m = self.m if reading is None else md_boundary_data(
            beta, self.base.cauchy_data(), self.v, p, reading)
        lam, sig = self.md_trace["exterior"]
        if beta == 0:
            return lam - m
        if beta == 1:
            return sig - m
        if beta == 2:
            return sig + 1j * p.eta * lam - m
        li, si = self.md_trace["interior"]
        return np.concatenate([lam - li - m[0], sig / p.mu0 - si / p.mu1 - m[1]])

    def to_json(self):
        def cx(a):
            return [[float(z.real), float(z.imag)] for z in np.asarray(a).ravel()]
        return {
            "provenance": {**self.base.provenance(), **self.options,
                           "velocity": self.v.describe() if isinstance(self.v, VelocityField)
                           else {"extension": "samples"}},
            "xi_prime": {s: {"lam": cx(a), "sigma": cx(b)} for s, (a, b) in self.xi_prime.items()},
            "xi_dot": {s: {"lam": cx(a), "sigma": cx(b)} for s, (a, b) in self.xi_dot.items()},
            "cld_norm": {s: self.cld_norm(s) for s in self.xi_prime},
        }


def derive(base: FieldSolution, v, *, reading="conormal", cmd_reading="grad",
           curvature_correction=True, literal_transmission=False) -> DerivativeBundle:
    """Assemble the derivative bundle of ``base`` along ``v``."""
    cd = base.cauchy_data()
    g = sd_boundary_data(base.beta, cd, v, base.params,
                         literal_transmission=literal_transmission)
    sd = radiate(base, g)
    try:
        m = md_boundary_data(base.beta, cd, v, base.params, reading)
    except OutsideExtensionSupport:
        m = None
    xi_p, xi_d, mdt = {}, {}, {}
    for side in base.sides:
        st = cd.side(side)
        sst = sd.state(side)
        xi_p[side] = cauchy_sd(sst.lam, sst.sigma, st, v)
        try:
            mdt[side] = md_traces(sst, st, v)
            xi_d[side] = cauchy_md(*mdt[side], st, v, reading=cmd_reading,
                                   curvature_correction=curvature_correction)
        except OutsideExtensionSupport:
            pass
    opts = {"reading": reading, "cmd_reading": cmd_reading,
            "curvature_correction": bool(curvature_correction),
            "literal_transmission": bool(literal_transmission)}
    return DerivativeBundle(base, v, sd, g, m, xi_p, xi_d, mdt, opts)
