"""Nyström boundary-integral solver for exterior Dirichlet, Neumann and
impedance problems on smooth closed curves.

Direct formulation: the total-field Cauchy data ``(lam, sigma)`` satisfy the
Burton-Miller combination of the two exterior Calderón identities

    (1/2 + K' - i kappa S) sigma - (T - i kappa (K - 1/2)) lam = sigma_i - i kappa lam_i

which is uniquely solvable for every ``kappa > 0``.  The scattered field is
``D lam - S sigma`` in the exterior.  Weakly singular kernels are integrated
with logarithmic splitting and trigonometric weights; the hypersingular
operator uses the Maue identity ``T = d/ds S d/ds + kappa^2 n.S n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import IllConditioned, NearBoundaryEvaluation, NotSupported, UnderResolved
from .geometry import Curve, ParametricCurve, StarCurve, trig_interpolate
from .mie import FieldValues, PlaneWave, WaveParameters
from .traces import BoundaryState

__all__ = [
    "BIESolution", "bie_solve", "bie_radiate", "layer_matrices", "curve_with_nodes",
    "COND_LIMIT", "SELF_CONVERGENCE_TOL",
]

COND_LIMIT = 1e12
SELF_CONVERGENCE_TOL = 1e-9
COLLAR_FACTOR = 10.0
EULER = np.euler_gamma


def _diff_matrix(N):
    """Spectral differentiation matrix on ``N`` equispaced periodic nodes."""
    k = np.arange(N)
    col = np.zeros(N)
    col[1:] = 0.5 * (-1.0) ** k[1:] / np.tan(np.pi * k[1:] / N)
    return sla.toeplitz(col, -col)


def _kress_weights(N, t=None, nodes=None):
    """Weights ``R_j(t)`` for ``int ln(4 sin^2((t-tau)/2)) f(tau) dtau``."""
    n = N // 2
    nodes = 2 * np.pi * np.arange(N) / N if nodes is None else nodes
    t = nodes if t is None else np.asarray(t, float)
    diff = t[:, None] - nodes[None, :]
    m = np.arange(1, n)
    out = np.zeros(diff.shape)
    for mm in m:
        out -= np.cos(mm * diff) / mm
    return 2 * np.pi / n * out - np.pi / n ** 2 * np.cos(n * diff)


def _kress_matrix(N):
    n = N // 2
    m = np.arange(1, n)
    k = np.arange(N)
    ang = 2 * np.pi * k / N
    col = -(2 * np.pi / n) * (np.cos(np.outer(ang, m)) / m).sum(1) - np.pi / n ** 2 * np.cos(n * ang)
    return sla.toeplitz(col)


def _log_term(N):
    k = np.arange(N)
    with np.errstate(divide="ignore"):
        col = np.log(4.0 * np.sin(np.pi * k / N) ** 2)
    col[0] = 0.0
    return sla.toeplitz(col)


@dataclass
class LayerMatrices:
    S: np.ndarray
    K: np.ndarray
    Kp: np.ndarray
    T: np.ndarray


def layer_matrices(curve: Curve, kappa: float) -> LayerMatrices:
    """Nyström matrices of the single, double, adjoint double and hypersingular
    layer operators acting on nodal values.
    """
    N = curve.N
    x, dx = curve.x, curve.dx
    speed = curve.speed
    nu = np.stack([dx[:, 1], -dx[:, 0]], axis=1)     # |x'| n
    n_hat = curve.normal
    H0, H1r = kernels.hankel_pairs(x, x, kappa)
    R = _kress_matrix(N)
    LG = _log_term(N)
    w = np.pi / (N // 2)
    idx = np.arange(N)
    d = x[:, None, :] - x[None, :, :]                 # x_i - x_j

    # single layer without the |x'(tau)| weight
    M = 0.25j * H0
    M1 = -H0.real / (4 * np.pi)
    M1[idx, idx] = -1.0 / (4 * np.pi)
    M2 = M - M1 * LG
    M2[idx, idx] = 0.25j - EULER / (2 * np.pi) - np.log(kappa * speed / 2) / (2 * np.pi)
    S0 = R * M1 + w * M2
    S = S0 * speed[None, :]

    # double layer: kernel (i kappa/4) H1 nu_j.(x_i - x_j)/r
    nd = np.einsum("jk,ijk->ij", nu, d)
    L = 0.25j * kappa * H1r * nd
    L1 = -kappa / (4 * np.pi) * H1r.real * nd
    L2 = L - L1 * LG
    L2[idx, idx] = -curve.curvature * speed / (4 * np.pi)
    K = R * L1 + w * L2

    # adjoint: (i kappa/4) H1 n_i.(x_j - x_i)/r |x'_j|
    ndp = -np.einsum("ik,ijk->ij", n_hat, d) * speed[None, :]
    Lp = 0.25j * kappa * H1r * ndp
    Lp1 = -kappa / (4 * np.pi) * H1r.real * ndp
    Lp2 = Lp - Lp1 * LG
    Lp2[idx, idx] = -curve.curvature * speed / (4 * np.pi)
    Kp = R * Lp1 + w * Lp2

    D = _diff_matrix(N)
    T = (D @ S0 @ D) / speed[:, None]
    for c in range(2):
        T += kappa ** 2 * (n_hat[:, c][:, None] * S0) * (n_hat[:, c] * speed)[None, :]
    return LayerMatrices(S, K, Kp, T)


def curve_with_nodes(curve: Curve, N: int) -> Curve:
    if isinstance(curve, StarCurve):
        return curve.with_nodes(N)
    phi = 2 * np.pi * np.arange(N) / N
    return ParametricCurve(trig_interpolate(curve.x, phi), curve.center)


def _condition(A):
    lu, piv = sla.lu_factor(A)
    anorm = np.linalg.norm(A, 1)
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    return (lu, piv), (np.inf if rcond == 0 else 1.0 / rcond)


@dataclass(frozen=True)
class BIESolution:
    beta: int
    curve: Curve
    params: WaveParameters
    lam: np.ndarray
    sigma: np.ndarray
    incident: Optional[PlaneWave]
    condition: float
    self_convergence: Optional[float] = None
    meta: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.curve.N

    @property
    def collar_width(self):
        return COLLAR_FACTOR * self.curve.length / self.curve.N

    def cauchy(self, curve=None, side="exterior"):
        if side != "exterior":
            raise NotSupported("integral-equation solutions are exterior only")
        if curve is not None and curve is not self.curve:
            raise NotSupported("traces are available on the solver's own curve")
        return BoundaryState.from_cauchy(self.curve, self.lam, self.sigma, self.params.kappa)

    def evaluate(self, points, which="total", order=0):
        return eval_field(self, points, which, order)

    def to_json(self):
        def cx(v):
            return [[float(z.real), float(z.imag)] for z in v]
        return {"beta": int(self.beta), "params": self.params.to_json(), "N": int(self.N),
                "lam": cx(self.lam), "sigma": cx(self.sigma), "condition": float(self.condition),
                "self_convergence": self.self_convergence}


def _incident_traces(curve, incident):
    if incident is None:
        z = np.zeros(curve.N, complex)
        return z, z
    fv = incident.evaluate(curve.x, order=1)
    return fv.u, np.einsum("ij,ij->i", fv.grad, curve.normal)


def _solve_traces(beta, curve, params, lam_i, sig_i, g, eta):
    kappa = params.kappa
    L = layer_matrices(curve, kappa)
    N = curve.N
    I = np.eye(N)
    A = 0.5 * I + L.Kp - 1j * kappa * L.S
    B = L.T - 1j * kappa * (L.K - 0.5 * I)
    r = sig_i - 1j * kappa * lam_i
    if beta == 0:
        lhs, rhs = A, r + B @ g
    elif beta == 1:
        lhs, rhs = B, A @ g - r
    elif beta == 2:
        lhs, rhs = B + 1j * eta * A, A @ g - r
    else:
        raise NotSupported("the integral-equation backend covers beta = 0, 1, 2")
    fac, cond = _condition(lhs)
    if cond > COND_LIMIT:
        raise IllConditioned(f"system condition estimate {cond:.2e} exceeds {COND_LIMIT:.0e}")
    x = sla.lu_solve(fac, rhs)
    if beta == 0:
        lam, sigma = g.astype(complex), x
    elif beta == 1:
        lam, sigma = x, g.astype(complex)
    else:
        lam, sigma = x, g - 1j * eta * x
    return lam, sigma, cond


def _certify(sol_fn, curve, lam, sigma, certify):
    if not certify:
        return None
    c2 = curve_with_nodes(curve, 2 * curve.N)
    lam2, sig2, _ = sol_fn(c2)
    scale = max(np.max(np.abs(lam2)), np.max(np.abs(sig2)), 1e-300)
    err = max(np.max(np.abs(lam2[::2] - lam)), np.max(np.abs(sig2[::2] - sigma))) / scale
    if err > SELF_CONVERGENCE_TOL:
        raise UnderResolved(
            f"self-convergence N={curve.N}->{2 * curve.N} changed traces by {err:.2e}")
    return float(err)


def bie_solve(beta, curve: Curve, params: WaveParameters, incident=None, N=None,
              certify=True):
    """Total-field traces for plane-wave scattering by the obstacle bounded by ``curve``.

    ``incident`` is a :class:`PlaneWave`, an incidence angle, or ``"none"`` for
    the zero field.
    """
    beta = int(beta)
    if beta == 3:
        raise NotSupported("transmission is served by the series solver only")
    params.validate(beta)
    if N is not None and N != curve.N:
        curve = curve_with_nodes(curve, N)
    if incident is None:
        incident = PlaneWave(params.kappa, 0.0)
    elif isinstance(incident, str) and incident == "none":
        incident = None
    elif not isinstance(incident, PlaneWave):
        incident = PlaneWave(params.kappa, float(incident))
    eta = params.eta

    def run(c):
        li, si = _incident_traces(c, incident)
        return _solve_traces(beta, c, params, li, si, np.zeros(c.N, complex), eta)

    lam, sigma, cond = run(curve)
    cert = _certify(run, curve, lam, sigma, certify)
    return BIESolution(beta, curve, params, lam, sigma, incident, cond, cert)


def bie_radiate(beta, curve: Curve, params: WaveParameters, data, certify=False):
    """Radiating exterior solution with nodal boundary data ``data``
    (Dirichlet trace, Neumann trace, or ``d_n u + i eta u``).
    """
    beta = int(beta)
    if beta == 3:
        raise NotSupported("transmission is served by the series solver only")
    params.validate(beta)
    g = np.asarray(data, complex)
    z = np.zeros(curve.N, complex)
    lam, sigma, cond = _solve_traces(beta, curve, params, z, z, g, params.eta)

    def run(c):
        gi = trig_interpolate(g, 2 * np.pi * np.arange(c.N) / c.N)
        zz = np.zeros(c.N, complex)
        return _solve_traces(beta, c, params, zz, zz, gi, params.eta)

    cert = _certify(run, curve, lam, sigma, certify)
    return BIESolution(beta, curve, params, lam, sigma, None, cond, cert, {"radiated": True})


def eval_field(sol: BIESolution, points, which="total", order=0):
    """Exterior field from the Green representation, trapezoid rule in ``tau``.

    Points closer to the boundary than ``sol.collar_width`` are rejected.
    """
    p = np.asarray(points, float)
    shape = p.shape[:-1]
    p = p.reshape(-1, 2)
    c = sol.curve
    if which == "incident":
        if sol.incident is None:
            return FieldValues(*(np.zeros(shape + s, complex) for s in [(), (2,), (2, 2)][:order + 1]))
        out = sol.incident.evaluate(p, order)
        return FieldValues(*(None if v is None else v.reshape(shape + v.shape[1:]) for v in out))
    if which not in ("total", "scattered"):
        raise ValueError(f"unknown field {which!r}")
    if np.any(c.contains(p)):
        raise NearBoundaryEvaluation("point inside the obstacle")
    dist = c.boundary_distance(p)
    if np.any(dist < sol.collar_width):
        raise NearBoundaryEvaluation(
            f"point within {dist.min():.3g} of the boundary; collar width {sol.collar_width:.3g}")
    kappa = sol.params.kappa
    H0, H1r = kernels.hankel_pairs(p, c.x, kappa)
    w = c.weights
    a = sol.lam * w                     # double-layer density times weights
    b = sol.sigma * w
    d = p[:, None, :] - c.x[None, :, :]
    n = c.normal
    nd = np.einsum("jk,ijk->ij", n, d)
    u = (0.25j * kappa * H1r * nd) @ a - (0.25j * H0) @ b
    out = [u]
    if order >= 1:
        r2 = (d ** 2).sum(-1)
        # grad of Phi and of dPhi/dn(y) with respect to x
        gS = (-0.25j * kappa * H1r)[..., None] * d
        q = kappa * H0 - 2.0 * H1r
        gD = 0.25j * kappa * ((q * nd / r2)[..., None] * d + H1r[..., None] * n[None, :, :])
        grad = np.einsum("ijk,j->ik", gD, a) - np.einsum("ijk,j->ik", gS, b)
        out.append(grad)
    if order >= 2:
        r = np.sqrt(r2)
        H1 = H1r * r
        eye = np.eye(2)
        ddT = d[..., :, None] * d[..., None, :]
        hS = -0.25j * kappa * (q[..., None, None] * ddT / r2[..., None, None]
                               + H1r[..., None, None] * eye)
        g1 = kappa * H0 / r - 2.0 * H1 / r2
        g2 = -kappa ** 2 * H1 / r - 3.0 * kappa * H0 / r2 + 6.0 * H1 / r ** 3
        dn = d[..., :, None] * n[None, :, None, :] + n[None, :, :, None] * d[..., None, :]
        hD = 0.25j * kappa * (((g2 - g1 / r) * nd / r2)[..., None, None] * ddT
                              + (g1 * nd / r)[..., None, None] * eye
                              + (g1 / r)[..., None, None] * dn)
        hess = np.einsum("ijkl,j->ikl", hD, a) - np.einsum("ijkl,j->ikl", hS, b)
        out.append(hess)
    if which == "total" and sol.incident is not None:
        inc = sol.incident.evaluate(p, order)
        out = [x + y for x, y in zip(out, inc)]
    return FieldValues(*(v.reshape(shape + v.shape[1:]) for v in out))


def boundary_residual(sol: BIESolution):
    """Off-node consistency of the Dirichlet trace.

    At the parameter midpoints the representation's exterior trace
    ``lam_i + (K + 1/2) lam - S sigma`` is compared with the imposed or
    interpolated ``lam``.  Returns the maximum absolute discrepancy.
    """
    c = sol.curve
    N = c.N
    kappa = sol.params.kappa
    t = (np.arange(N) + 0.5) * 2 * np.pi / N
    xt = trig_interpolate(c.x, t)
    dxt = trig_interpolate(c.x, t, 1)
    speed_t = np.hypot(dxt[:, 0], dxt[:, 1])
    H0, H1r = kernels.hankel_pairs(xt, c.x, kappa)
    Rw = _kress_weights(N, t)
    nodes = c.phi
    LG = np.log(4.0 * np.sin((t[:, None] - nodes[None, :]) / 2) ** 2)
    w = 2 * np.pi / N
    M = 0.25j * H0 * c.speed[None, :]
    M1 = -H0.real / (4 * np.pi) * c.speed[None, :]
    S = Rw * M1 + w * (M - M1 * LG)
    nu = np.stack([c.dx[:, 1], -c.dx[:, 0]], axis=1)
    d = xt[:, None, :] - c.x[None, :, :]
    nd = np.einsum("jk,ijk->ij", nu, d)
    L = 0.25j * kappa * H1r * nd
    L1 = -kappa / (4 * np.pi) * H1r.real * nd
    K = Rw * L1 + w * (L - L1 * LG)
    lam_t = trig_interpolate(sol.lam, t)
    li = np.zeros(N, complex) if sol.incident is None else sol.incident.evaluate(xt).u
    rep = li + K @ sol.lam + 0.5 * lam_t - S @ sol.sigma
    target = np.zeros(N) if sol.beta == 0 else lam_t
    return float(np.max(np.abs(rep - target)))
