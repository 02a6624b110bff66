"""Separation-of-variables solutions on a disc.

The scattered (or radiated) field is ``sum_n a_n H_n(kappa0 r) e^{i n theta}``
in polar coordinates about the disc center; for the transmission problem the
interior field is ``sum_n b_n J_n(kappa1 r) e^{i n theta}``.  Jumps are
``[u] = u_exterior - u_interior`` and the transmission conditions read
``[u] = 0``, ``[mu^{-1} d_n u] = 0`` for the total fields.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import ResonanceIllConditioned, UnderResolved, WrongRegion
from .geometry import StarCurve, polar_to_cartesian
from .special import CylinderTable
from .traces import BoundaryState

__all__ = [
    "WaveParameters", "PlaneWave", "FieldValues", "SeriesSolution", "mie_solve",
    "radiate", "eval_field", "eval_cauchy", "COND_LIMIT",
]

COND_LIMIT = 1e12
TAIL_TOL = 1e-16


@dataclass(frozen=True)
class WaveParameters:
    """Wavenumbers and material constants.

    ``kappa`` is the exterior wavenumber, ``eta`` the impedance and
    ``kappa1``, ``mu0``, ``mu1`` the transmission data.
    """

    kappa: float
    eta: float = 1.0
    kappa1: Optional[float] = None
    mu0: float = 1.0
    mu1: float = 1.0

    def validate(self, beta):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if beta == 2 and not self.eta > 0:
            raise ValueError("impedance eta must be positive")
        if beta == 3:
            if self.kappa1 is None or not self.kappa1 > 0:
                raise ValueError("transmission needs kappa1 > 0")
            if not (self.mu0 > 0 and self.mu1 > 0):
                raise ValueError("mu0 and mu1 must be positive")
            if self.kappa1 == self.kappa and self.mu0 == self.mu1:
                raise ValueError("transmission requires kappa0 != kappa1 or mu0 != mu1")
        return self

    def kappa_of(self, side):
        return self.kappa1 if side == "interior" else self.kappa

    def mu_of(self, side):
        return self.mu1 if side == "interior" else self.mu0

    def to_json(self):
        return {"kappa": self.kappa, "eta": self.eta, "kappa1": self.kappa1,
                "mu0": self.mu0, "mu1": self.mu1}


class FieldValues(NamedTuple):
    u: np.ndarray
    grad: Optional[np.ndarray] = None
    hess: Optional[np.ndarray] = None


@dataclass(frozen=True)
class PlaneWave:
    """``exp(i kappa d.x)`` with ``d = (cos alpha, sin alpha)``."""

    kappa: float
    alpha: float = 0.0

    @property
    def direction(self):
        return np.array([np.cos(self.alpha), np.sin(self.alpha)])

    def evaluate(self, points, order=0):
        p = np.asarray(points, float)
        d = self.direction
        u = np.exp(1j * self.kappa * (p @ d))
        if order == 0:
            return FieldValues(u)
        grad = (1j * self.kappa * u)[..., None] * d
        if order == 1:
            return FieldValues(u, grad)
        hess = (-self.kappa ** 2 * u)[..., None, None] * np.outer(d, d)
        return FieldValues(u, grad, hess)

    def coefficients(self, orders, center):
        """Jacobi-Anger coefficients ``c_n`` about ``center``: the wave equals
        ``sum_n c_n J_n(kappa r) e^{i n theta}``.
        """
        n = np.asarray(orders)
        phase = np.exp(1j * self.kappa * (np.asarray(center, float) @ self.direction))
        return phase * (1j ** (n % 4)) * np.exp(-1j * n * self.alpha)

    def to_json(self):
        return {"kind": "plane_wave", "kappa": self.kappa, "alpha": self.alpha}


@dataclass(frozen=True)
class SeriesSolution:
    beta: int
    params: WaveParameters
    center: np.ndarray
    radius: float
    orders: np.ndarray
    a: np.ndarray                        # exterior coefficients on H_n(kappa0 r)
    b: Optional[np.ndarray] = None       # interior coefficients on J_n(kappa1 r)
    incident: Optional[PlaneWave] = None
    mode_residual: Optional[np.ndarray] = None
    mode_condition: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def n_modes(self):
        return int(np.max(np.abs(self.orders)))

    def evaluate(self, points, which="total", order=0):
        return eval_field(self, points, which, order)

    def cauchy(self, curve=None, side="exterior"):
        return eval_cauchy(self, curve, side)

    def disc_curve(self, N=64):
        return StarCurve.circle(self.radius, N, self.center)

    def to_json(self):
        def cx(v):
            return None if v is None else [[float(z.real), float(z.imag)] for z in v]
        return {
            "beta": int(self.beta), "params": self.params.to_json(),
            "center": [float(c) for c in self.center], "radius": float(self.radius),
            "orders": [int(n) for n in self.orders], "a": cx(self.a), "b": cx(self.b),
            "incident": None if self.incident is None else self.incident.to_json(),
        }


def _mode_count(kappa_a, n_modes):
    if n_modes is None:
        return max(40, int(1.5 * kappa_a) + 40)
    if n_modes < kappa_a + 8:
        raise UnderResolved(f"{n_modes} modes below kappa*a + 8 = {kappa_a + 8:.1f}")
    return int(n_modes)


def _solve_transmission(n, x0, x1, k0m, k1m, rhs0, rhs1):
    """Per-mode 2x2 solves with column equilibration.

    Unknowns ``(a_n, b_n)``; equations ``a H - b J1 = rhs0`` and
    ``k0m a H' - k1m b J1' = rhs1`` with ``k0m = kappa0/mu0``.
    """
    t0 = CylinderTable(n, x0)
    t1 = CylinderTable(n, x1)
    H, Hp, J1, J1p = t0.H, t0.Hp, t1.J, t1.Jp
    A = np.empty(n.shape + (2, 2), complex)
    A[..., 0, 0] = H
    A[..., 0, 1] = -J1
    A[..., 1, 0] = k0m * Hp
    A[..., 1, 1] = -k1m * J1p
    s = np.linalg.norm(A, axis=-2)
    As = A / s[..., None, :]
    rhs = np.stack([rhs0, rhs1], axis=-1)
    cond = np.linalg.cond(As)
    bad = np.nonzero(cond > COND_LIMIT)[0]
    if bad.size:
        m = int(n[bad[0]])
        raise ResonanceIllConditioned(
            f"transmission mode {m} has condition number {cond[bad[0]]:.2e} > {COND_LIMIT:.0e}")
    y = np.linalg.solve(As, rhs[..., None])[..., 0]
    res = np.abs(As @ y[..., None] - rhs[..., None])[..., 0].max(-1)
    scale = np.maximum(np.abs(rhs).max(-1), np.finfo(float).tiny)
    sol = y / s
    return sol[..., 0], sol[..., 1], res / scale, cond


def mie_solve(beta, params: WaveParameters, incident=None, radius=1.0,
              center=(0.0, 0.0), n_modes=None):
    """Scattering of a plane wave by the disc ``|x - center| < radius``.

    ``incident`` is a :class:`PlaneWave` or an incidence angle; its wavenumber
    must match ``params.kappa``.
    """
    beta = int(beta)
    params.validate(beta)
    k0 = params.kappa
    if incident is None:
        incident = PlaneWave(k0, 0.0)
    elif not isinstance(incident, PlaneWave):
        incident = PlaneWave(k0, float(incident))
    if incident.kappa != k0:
        raise ValueError("incident wavenumber differs from params.kappa")
    center = np.asarray(center, float)
    a = float(radius)
    kmax = max(k0, params.kappa1 or 0.0)
    Ncap = _mode_count(kmax * a, n_modes)
    n = np.arange(-Ncap, Ncap + 1)
    c = incident.coefficients(n, center)
    x0 = k0 * a
    t0 = CylinderTable(n, x0)
    J, Jp, H, Hp = t0.J, t0.Jp, t0.H, t0.Hp
    b = None
    res = None
    cond = None
    if beta == 0:
        coef = -c * J / H
    elif beta == 1:
        coef = -c * Jp / Hp
    elif beta == 2:
        eta = params.eta
        coef = -c * (k0 * Jp + 1j * eta * J) / (k0 * Hp + 1j * eta * H)
    elif beta == 3:
        k0m = k0 / params.mu0
        k1m = params.kappa1 / params.mu1
        coef, b, res, cond = _solve_transmission(
            n, x0, params.kappa1 * a, k0m, k1m, -c * J, -k0m * c * Jp)
    else:
        raise ValueError(f"unknown problem kind {beta}")

    if n_modes is None:
        meas = np.abs(coef) * np.maximum(np.abs(H), np.abs(x0 * Hp))
        if b is not None:
            t1 = CylinderTable(n, params.kappa1 * a)
            meas = np.maximum(meas, np.abs(b) * np.maximum(np.abs(t1.J), np.abs(t1.Jp)))
        keep = np.nonzero(meas > TAIL_TOL * meas.max())[0]
        Nk = min(Ncap, int(np.max(np.abs(n[keep]))) + 2)
        sl = slice(Ncap - Nk, Ncap + Nk + 1)
        n, coef = n[sl], coef[sl]
        b = None if b is None else b[sl]
        res = None if res is None else res[sl]
        cond = None if cond is None else cond[sl]
    amax = np.abs(coef).max()
    tail = float(max(abs(coef[0]), abs(coef[-1])) / amax) if amax > 0 else 0.0
    return SeriesSolution(beta, params, center, a, n, coef, b, incident, res, cond,
                          {"tail_ratio": tail})


def radiate(beta, params: WaveParameters, data, radius=1.0, center=(0.0, 0.0)):
    """Radiating solution on the disc exterior with prescribed boundary data.

    ``data`` holds nodal samples on equispaced angles: for ``beta=0`` the
    Dirichlet trace, ``beta=1`` the Neumann trace, ``beta=2`` the impedance
    datum ``d_n u + i eta u``, and for ``beta=3`` a pair ``(g0, g1)`` of the
    jumps ``[u]`` and ``[mu^{-1} d_n u]``.
    """
    beta = int(beta)
    params.validate(beta)
    k0 = params.kappa
    a = float(radius)
    center = np.asarray(center, float)
    if beta == 3:
        g0, g1 = (np.asarray(g, complex) for g in data)
    else:
        g0 = np.asarray(data, complex)
    N = g0.shape[0]
    n = np.arange(-(N // 2) + 1, N // 2)
    ghat = np.fft.fft(g0) / N
    gm = ghat[n % N]
    x0 = k0 * a
    t0 = CylinderTable(n, x0)
    H, Hp = t0.H, t0.Hp
    b = res = cond = None
    if beta == 0:
        coef = gm / H
    elif beta == 1:
        coef = gm / (k0 * Hp)
    elif beta == 2:
        coef = gm / (k0 * Hp + 1j * params.eta * H)
    elif beta == 3:
        g1m = (np.fft.fft(g1) / N)[n % N]
        coef, b, res, cond = _solve_transmission(
            n, x0, params.kappa1 * a, k0 / params.mu0, params.kappa1 / params.mu1, gm, g1m)
    else:
        raise ValueError(f"unknown problem kind {beta}")
    return SeriesSolution(beta, params, center, a, n, coef, b, None, res, cond,
                          {"radiated": True})


def _series(orders, coef, kind, kappa, r, th, order):
    """Evaluate ``sum_n coef_n Z_n(kappa r) e^{i n th}`` and its polar partials."""
    n = orders[:, None]
    tab = CylinderTable(n, kappa * r[None, :])
    if kind == "H":
        Z, Zp = tab.H, tab.Hp
    else:
        Z, Zp = tab.J, tab.Jp
    E = np.exp(1j * n * th[None, :]) * coef[:, None]
    u = (Z * E).sum(0)
    if order == 0:
        return (u,)
    ur = kappa * (Zp * E).sum(0)
    ut = (1j * n * Z * E).sum(0)
    if order == 1:
        return u, ur, ut
    Zpp = CylinderTable.second(n, kappa * r[None, :], Z, Zp)
    urr = kappa ** 2 * (Zpp * E).sum(0)
    urt = kappa * (1j * n * Zp * E).sum(0)
    utt = (-(n ** 2) * Z * E).sum(0)
    return u, ur, ut, urr, urt, utt


def eval_field(sol: SeriesSolution, points, which="total", order=0):
    """Field values (and gradient, Hessian for ``order`` 1, 2) at ``points``.

    ``which`` is ``total``, ``scattered``, ``incident`` or ``interior``.
    """
    p = np.asarray(points, float)
    shape = p.shape[:-1]
    p = p.reshape(-1, 2)
    d = p - sol.center
    r = np.hypot(d[:, 0], d[:, 1])
    th = np.arctan2(d[:, 1], d[:, 0])
    a = sol.radius
    slack = 1e-10 * a
    if which == "incident":
        if sol.incident is None:
            raise ValueError("solution has no incident field")
        out = sol.incident.evaluate(p, order)
    elif which == "interior":
        if sol.b is None:
            raise WrongRegion("no interior field for this problem")
        if np.any(r > a + slack):
            raise WrongRegion("interior evaluation outside the disc")
        out = _assemble(_series(sol.orders, sol.b, "J", sol.params.kappa1, r, th, order), r, th)
    elif which in ("total", "scattered"):
        if np.any(r < a - slack):
            raise WrongRegion(f"{which} field evaluated inside the disc")
        out = _assemble(_series(sol.orders, sol.a, "H", sol.params.kappa, r, th, order), r, th)
        if which == "total" and sol.incident is not None:
            inc = sol.incident.evaluate(p, order)
            out = FieldValues(*(None if x is None else x + y for x, y in zip(out, inc)))
    else:
        raise ValueError(f"unknown field {which!r}")
    return FieldValues(*(None if x is None else x.reshape(shape + x.shape[1:]) for x in out))


def _assemble(parts, r, th):
    if len(parts) == 1:
        return FieldValues(parts[0])
    if len(parts) == 3:
        u, ur, ut = parts
        return FieldValues(u, polar_to_cartesian(r, th, ur, ut))
    u, ur, ut, urr, urt, utt = parts
    g, h = polar_to_cartesian(r, th, ur, ut, urr, urt, utt)
    return FieldValues(u, g, h)


def eval_cauchy(sol: SeriesSolution, curve=None, side="exterior"):
    """Traces of the total field (exterior) or interior field on ``curve``.

    ``curve`` defaults to the disc boundary with 64 nodes.
    """
    curve = curve or sol.disc_curve()
    which = "interior" if side == "interior" else "total"
    fv = eval_field(sol, curve.x, which, order=2)
    return BoundaryState.from_field(curve, fv.u, fv.grad, fv.hess,
                                    sol.params.kappa_of(side), side)
