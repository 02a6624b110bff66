"""Smooth closed curves, tangential calculus, velocity fields and quadrature grids.

Curves are sampled at ``N`` equispaced parameter nodes ``phi_j = 2*pi*j/N`` and
oriented counterclockwise, so ``n = (x2', -x1')/|x'|`` is the outward normal and
the curvature ``h = div n`` equals ``1/a`` on a circle of radius ``a``.

:class:`StarCurve` carries the exact Fourier representation of the radius
``rho(phi)`` about a center, so every geometric quantity is evaluated in closed
form.  :class:`ParametricCurve` holds arbitrary node positions and obtains
derivatives spectrally; it is the image of a star curve under ``x + t*v(x)``
before re-fitting.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    FitResidualExceeded, NonpositiveRadius, NotStarshaped, NotSupported,
    RegionIntersectsBoundary, UnderResolved,
)

__all__ = [
    "Curve", "StarCurve", "ParametricCurve", "BoundaryField", "make_star_curve",
    "spectral_derivative", "trig_interpolate", "tangential_gradient",
    "tangential_divergence", "laplace_beltrami", "boundary_sobolev_norm",
    "transform_curve", "Extension", "VelocityField", "AffineField",
    "RadialBlendField", "BoundaryOnlyField", "SumField", "RadialGrid",
    "AnnulusGrid", "CollarGrid", "volume_norm", "polar_to_cartesian",
]

TWO_PI = 2.0 * np.pi


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def _nodes(N):
    return TWO_PI * np.arange(N) / N


# ---------------------------------------------------------------------------
# periodic spectral tools

def spectral_derivative(u, order=1, axis=0):
    """Derivative in ``phi`` of equispaced periodic samples.

    The Nyquist mode is dropped for odd orders so that real data stays real.
    """
    u = np.asarray(u)
    N = u.shape[axis]
    k = np.fft.fftfreq(N, 1.0 / N)
    mult = (1j * k) ** order
    if order % 2 and N % 2 == 0:
        mult[N // 2] = 0.0
    shape = [1] * u.ndim
    shape[axis] = N
    out = np.fft.ifft(np.fft.fft(u, axis=axis) * mult.reshape(shape), axis=axis)
    return out.real if np.isrealobj(u) else out


def trig_interpolate(samples, phi, deriv=0):
    """Evaluate the trigonometric interpolant of nodal samples (or its
    ``deriv``-th derivative) at arbitrary parameters ``phi``.

    ``samples`` may carry trailing axes; the result has shape
    ``phi.shape + samples.shape[1:]``.
    """
    samples = np.asarray(samples)
    phi = np.asarray(phi, dtype=float)
    N = samples.shape[0]
    c = np.fft.fft(samples, axis=0) / N
    k = np.fft.fftfreq(N, 1.0 / N)
    E = np.exp(1j * np.multiply.outer(phi.ravel(), k))
    mult = (1j * k) ** deriv
    if N % 2 == 0:
        # the Nyquist term is the real cosine cos(N phi / 2)
        nyq = N // 2
        mult[nyq] = 0.0
        cn = 0.5 * N
        ph = phi.ravel() * cn
        cos_d = [np.cos, lambda p: -np.sin(p), lambda p: -np.cos(p), np.sin][deriv % 4](ph)
        nyq_col = cos_d * cn ** deriv
    flat = c.reshape(N, -1)
    out = (E * mult) @ flat
    if N % 2 == 0:
        out = out + np.multiply.outer(nyq_col, flat[N // 2])
    out = out.reshape(phi.shape + samples.shape[1:])
    return out.real if np.isrealobj(samples) else out


@dataclass(frozen=True)
class BoundaryField:
    """Samples of a function on the parameter nodes of a curve."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.asarray(self.values)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def N(self):
        return self.values.shape[0]

    def fourier(self):
        """Coefficients ``c_m`` with ``u(phi_j) = sum_m c_m exp(i m phi_j)``, FFT order."""
        return np.fft.fft(self.values, axis=0) / self.N

    @classmethod
    def from_fourier(cls, coef, real=False):
        v = np.fft.ifft(np.asarray(coef) * len(coef), axis=0)
        return cls(v.real if real else v)

    def to_json(self):
        v = np.asarray(self.values, dtype=complex)
        return [[float(z.real), float(z.imag)] for z in v.ravel()]


def polar_to_cartesian(r, th, Fr, Ft, Frr=None, Frt=None, Ftt=None):
    """Cartesian gradient (and Hessian) from polar partial derivatives.

    Trailing axes of the partials beyond ``r.shape`` are carried along, so
    vector-valued functions give ``grad[..., i, j] = d_j F_i``.
    """
    er = np.stack([np.cos(th), np.sin(th)], axis=-1)
    et = np.stack([-np.sin(th), np.cos(th)], axis=-1)
    extra = np.ndim(Fr) - np.ndim(r)
    R = np.reshape(r, np.shape(r) + (1,) * extra)
    exp_b = lambda b: np.reshape(b, b.shape[:-1] + (1,) * extra + (b.shape[-1],))
    ger, get = exp_b(er), exp_b(et)
    grad = np.asarray(Fr)[..., None] * ger + np.asarray(Ft / R)[..., None] * get
    if Frr is None:
        return grad
    rr = er[..., :, None] * er[..., None, :]
    sym = er[..., :, None] * et[..., None, :] + et[..., :, None] * er[..., None, :]
    tt = et[..., :, None] * et[..., None, :]
    exp_m = lambda m: np.reshape(m, m.shape[:-2] + (1,) * extra + m.shape[-2:])
    c_sym = Frt / R - Ft / R ** 2
    c_tt = Ftt / R ** 2 + Fr / R
    hess = (np.asarray(Frr)[..., None, None] * exp_m(rr)
            + np.asarray(c_sym)[..., None, None] * exp_m(sym)
            + np.asarray(c_tt)[..., None, None] * exp_m(tt))
    return grad, hess


# ---------------------------------------------------------------------------
# curves

class Curve:
    """Counterclockwise closed curve sampled at equispaced parameter nodes."""

    def __init__(self, x, dx, ddx, center=(0.0, 0.0)):
        x = np.asarray(x, float)
        dx = np.asarray(dx, float)
        ddx = np.asarray(ddx, float)
        self.N = x.shape[0]
        self.center = _frozen(np.asarray(center, float))
        self.phi = _frozen(_nodes(self.N))
        self.x = _frozen(x)
        self.dx = _frozen(dx)
        self.ddx = _frozen(ddx)
        speed = np.hypot(dx[:, 0], dx[:, 1])
        self.speed = _frozen(speed)
        self.tangent = _frozen(dx / speed[:, None])
        self.normal = _frozen(np.stack([dx[:, 1], -dx[:, 0]], axis=1) / speed[:, None])
        self.curvature = _frozen((dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / speed ** 3)
        self.weights = _frozen(TWO_PI / self.N * speed)
        self.length = float(self.weights.sum())

    def d_dphi(self, u, order=1):
        return spectral_derivative(u, order)

    def d_ds(self, u):
        """Arclength derivative of nodal samples."""
        du = spectral_derivative(u)
        return du / self.speed.reshape((-1,) + (1,) * (np.ndim(du) - 1))

    def integrate(self, u):
        u = np.asarray(u)
        return np.tensordot(self.weights, u, axes=(0, 0))

    def interpolate(self, values, phi, deriv=0):
        return trig_interpolate(values, phi, deriv)

    def radial_extent(self):
        d = self.x - self.center
        r = np.hypot(d[:, 0], d[:, 1])
        return float(r.min()), float(r.max())

    def contains(self, points):
        """True for points strictly inside (by winding about the nodal polygon)."""
        p = np.atleast_2d(points)
        rel = self.x[None, :, :] - p[:, None, :]
        ang = np.arctan2(rel[..., 1], rel[..., 0])
        d = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
        d = (d + np.pi) % TWO_PI - np.pi
        return np.abs(d.sum(axis=1)) > np.pi

    def boundary_distance(self, points):
        """Distance from points to the nodes (a resolution-level proxy)."""
        p = np.atleast_2d(points)
        diff = p[:, None, :] - self.x[None, :, :]
        return np.sqrt((diff ** 2).sum(-1)).min(axis=1)


class ParametricCurve(Curve):
    """Curve given by node positions; derivatives are spectral."""

    def __init__(self, x, center=(0.0, 0.0)):
        x = np.asarray(x, float)
        super().__init__(x, spectral_derivative(x, 1), spectral_derivative(x, 2), center)

    def to_json(self):
        return {"x": self.x.tolist(), "N": self.N, "center": self.center.tolist()}


def _is_power_of_two(n):
    return n >= 1 and n & (n - 1) == 0


class StarCurve(Curve):
    """Starshaped curve ``x(phi) = c + rho(phi) (cos phi, sin phi)``.

    ``rho_hat`` holds the complex Fourier coefficients of ``rho`` for
    ``m = -M..M`` (length ``2M+1``), so ``rho`` is real when
    ``rho_hat[-m] = conj(rho_hat[m])``.
    """

    def __init__(self, rho_hat, N, center=(0.0, 0.0), *, fit_residual=0.0,
                 preimage_phi=None):
        rho_hat = np.asarray(rho_hat, complex)
        if rho_hat.ndim != 1 or rho_hat.size % 2 != 1:
            raise ValueError("rho_hat must have odd length 2M+1")
        if not _is_power_of_two(N) or N < 8:
            raise ValueError(f"node count must be a power of 2 and ≥ 8, got {N}")
        if np.max(np.abs(rho_hat - rho_hat[::-1].conj())) > 1e-13 * np.max(np.abs(rho_hat)):
            raise ValueError("rho_hat is not Hermitian, rho would be complex")
        M = (rho_hat.size - 1) // 2
        mag = np.abs(rho_hat)
        active = np.nonzero(mag > 1e-15 * mag.max())[0]
        m_eff = int(np.max(np.abs(active - M))) if active.size else 0
        if N < 4 * m_eff:
            raise UnderResolved(f"N={N} below 4·M={4 * m_eff} for highest harmonic {m_eff}")
        self.rho_hat = _frozen(rho_hat)
        self.M = M
        self.fit_residual = float(fit_residual)
        self.preimage_phi = None if preimage_phi is None else _frozen(preimage_phi)
        phi = _nodes(N)
        dense = np.linspace(0.0, TWO_PI, max(16 * m_eff, 64), endpoint=False)
        rmin = min(self.rho_at(phi).min(), self.rho_at(dense).min())
        if rmin <= 0.0:
            raise NonpositiveRadius(f"radius reaches {rmin:.3g} ≤ 0")
        rho, d1, d2 = (self.rho_at(phi, d) for d in range(3))
        er = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        ep = np.stack([-np.sin(phi), np.cos(phi)], axis=1)
        c = np.asarray(center, float)
        x = c + rho[:, None] * er
        dx = d1[:, None] * er + rho[:, None] * ep
        ddx = (d2 - rho)[:, None] * er + 2.0 * d1[:, None] * ep
        self.rho = _frozen(rho)
        self.drho = _frozen(d1)
        self.ddrho = _frozen(d2)
        super().__init__(x, dx, ddx, c)

    # construction helpers
    @classmethod
    def circle(cls, radius=1.0, N=64, center=(0.0, 0.0)):
        return cls(np.array([radius], complex), N, center)

    @classmethod
    def from_cosines(cls, a0, cos=None, sin=None, N=64, center=(0.0, 0.0)):
        """``rho = a0 + sum_m cos[m] cos(m phi) + sin[m] sin(m phi)``."""
        cos = dict(cos or {})
        sin = dict(sin or {})
        M = max([0, *cos, *sin])
        hat = np.zeros(2 * M + 1, complex)
        hat[M] = a0
        for m in range(1, M + 1):
            z = 0.5 * (cos.get(m, 0.0) - 1j * sin.get(m, 0.0))
            hat[M + m] = z
            hat[M - m] = np.conj(z)
        return cls(hat, N, center)

    @classmethod
    def from_samples(cls, rho_samples, N=None, center=(0.0, 0.0), max_harmonic=None, **kw):
        rho_samples = np.asarray(rho_samples, float)
        n = rho_samples.size
        M = n // 4 if max_harmonic is None else max_harmonic
        c = np.fft.fft(rho_samples) / n
        k = np.fft.fftfreq(n, 1.0 / n).astype(int)
        hat = np.zeros(2 * M + 1, complex)
        for m in range(-M, M + 1):
            hat[M + m] = c[m % n]
        return cls(hat, N or n, center, **kw)

    @classmethod
    def ellipse_like(cls, eps=0.2, harmonic=2, N=256, center=(0.0, 0.0)):
        """``rho = 1 + eps cos(harmonic phi)``."""
        return cls.from_cosines(1.0, {harmonic: eps}, N=N, center=center)

    def rho_at(self, phi, deriv=0):
        phi = np.asarray(phi, float)
        m = np.arange(-self.M, self.M + 1)
        E = np.exp(1j * np.multiply.outer(phi, m))
        return (E @ (self.rho_hat * (1j * m) ** deriv)).real

    def point_at(self, phi):
        phi = np.asarray(phi, float)
        r = self.rho_at(phi)
        return self.center + np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)

    def with_nodes(self, N):
        return StarCurve(self.rho_hat, N, self.center)

    @property
    def is_circle(self):
        return self.M == 0 or np.all(np.abs(np.delete(self.rho_hat, self.M)) == 0)

    def to_json(self):
        return {"rho": [[float(z.real), float(z.imag)] for z in self.rho_hat],
                "N": int(self.N), "center": [float(v) for v in self.center]}

    @classmethod
    def from_json(cls, d):
        hat = np.array([complex(a, b) for a, b in d["rho"]])
        return cls(hat, int(d["N"]), d.get("center", (0.0, 0.0)))


def make_star_curve(radius_coefficients, N, center=(0.0, 0.0)):
    return StarCurve(radius_coefficients, N, center)


# ---------------------------------------------------------------------------
# tangential calculus

def tangential_gradient(u, curve: Curve):
    """``grad_Gamma u = (du/ds) tau`` as an ``(N, 2)`` array."""
    du = curve.d_ds(np.asarray(u))
    return du[:, None] * curve.tangent


def tangential_divergence(w, curve: Curve):
    """``div_Gamma w = tau . dw/ds`` for an ``(N, 2)`` field.

    For tangential ``w = f tau`` this is ``df/ds``; for ``w = g n`` it is
    ``g h``.
    """
    dw = curve.d_ds(np.asarray(w))
    return np.einsum("ij,ij->i", dw, curve.tangent)


def laplace_beltrami(u, curve: Curve):
    return curve.d_ds(curve.d_ds(np.asarray(u)))


def boundary_sobolev_norm(u, s, curve: Curve):
    """Parameter-circle ``H^s(Gamma)`` surrogate norm.

    ``(L * sum_m (1+m^2)^s |c_m|^2)^(1/2)`` with ``c_m`` the Fourier
    coefficients of the nodal samples and ``L`` the curve length; for the unit
    circle and ``s = 0`` this is the ``L^2`` norm.
    """
    u = np.asarray(u)
    N = u.shape[0]
    c = np.fft.fft(u, axis=0) / N
    m = np.fft.fftfreq(N, 1.0 / N)
    w = (1.0 + m ** 2) ** float(s)
    e = np.abs(c) ** 2
    if e.ndim > 1:
        e = e.reshape(N, -1).sum(axis=1)
    return float(np.sqrt(curve.length * np.sum(w * e)))


# ---------------------------------------------------------------------------
# velocity fields

class Extension(enum.Enum):
    RADIAL_BLEND = "radial_blend"
    CONSTANT = "constant"
    AFFINE = "affine"
    NONE = "none"


class VelocityField:
    """Deformation field ``v``; ``J[..., i, j] = d_j v_i`` and
    ``H[..., i, j, l] = d_j d_l v_i``.
    """

    extension: Extension = Extension.NONE
    k = np.inf

    def evaluate(self, points):
        raise NotImplementedError

    def jacobian(self, points):
        raise NotImplementedError

    def hessian(self, points):
        raise NotImplementedError

    def on_curve(self, curve: Curve):
        return self.evaluate(curve.x)

    def normal_component(self, curve):
        return np.einsum("ij,ij->i", self.on_curve(curve), curve.normal)

    def tangential_component(self, curve):
        return np.einsum("ij,ij->i", self.on_curve(curve), curve.tangent)

    def grad_normal_component(self, curve):
        return tangential_gradient(self.normal_component(curve), curve)

    def divergence(self, points):
        J = self.jacobian(points)
        return J[..., 0, 0] + J[..., 1, 1]

    def vector_laplacian(self, points):
        H = self.hessian(points)
        return H[..., :, 0, 0] + H[..., :, 1, 1]

    def a_prime(self, points):
        """``A'(0) = (div v) I - J - J^T``."""
        J = self.jacobian(points)
        div = J[..., 0, 0] + J[..., 1, 1]
        return div[..., None, None] * np.eye(2) - J - np.swapaxes(J, -1, -2)

    def __add__(self, other):
        return SumField([self, other])

    def scaled(self, c):
        return SumField([self], [c])

    def describe(self):
        return {"extension": self.extension.value}

    # constructors
    @staticmethod
    def dilation(center=(0.0, 0.0), scale=1.0):
        return AffineField(scale * np.eye(2), (0.0, 0.0), center)

    @staticmethod
    def translation(b):
        return AffineField(np.zeros((2, 2)), b)

    @staticmethod
    def normal_profile(curve, g, width=0.5):
        """Field equal to ``g n`` on the curve, blended off radially."""
        g = _profile(curve, g)
        return RadialBlendField(curve, g[:, None] * curve.normal, width)

    @staticmethod
    def tangential_profile(curve, g, width=0.5):
        g = _profile(curve, g)
        return RadialBlendField(curve, g[:, None] * curve.tangent, width)

    @staticmethod
    def from_boundary(curve, samples, extension="none", width=0.5):
        ext = Extension(extension)
        if ext is Extension.RADIAL_BLEND:
            return RadialBlendField(curve, samples, width)
        if ext is Extension.NONE:
            return BoundaryOnlyField(curve, samples)
        raise ValueError(f"extension {ext.value} is not built from samples")


def _profile(curve, g):
    if callable(g):
        return np.asarray(g(curve.phi), float)
    g = np.asarray(g, float)
    return np.full(curve.N, float(g)) if g.ndim == 0 else g


class AffineField(VelocityField):
    """``v(x) = M (x - x0) + b``; with ``M = 0`` a translation."""

    def __init__(self, M, b, x0=(0.0, 0.0)):
        self.M = _frozen(np.asarray(M, float).reshape(2, 2))
        self.b = _frozen(np.asarray(b, float).reshape(2))
        self.x0 = _frozen(np.asarray(x0, float).reshape(2))
        self.extension = Extension.CONSTANT if not self.M.any() else Extension.AFFINE

    def evaluate(self, points):
        p = np.asarray(points, float)
        return (p - self.x0) @ self.M.T + self.b

    def jacobian(self, points):
        p = np.asarray(points, float)
        return np.broadcast_to(self.M, p.shape[:-1] + (2, 2)).copy()

    def hessian(self, points):
        p = np.asarray(points, float)
        return np.zeros(p.shape[:-1] + (2, 2, 2))

    def transform_disc(self, center, radius, t):
        """Image of a disc under ``x + t v(x)`` when ``M`` is a multiple of ``I``."""
        alpha = self.M[0, 0]
        if not np.allclose(self.M, alpha * np.eye(2), atol=0.0):
            raise NotSupported("only isotropic affine fields map discs to discs")
        c = np.asarray(center, float)
        return c + t * self.evaluate(c), radius * (1.0 + t * alpha)

    def describe(self):
        return {"extension": self.extension.value, "M": self.M.tolist(),
                "b": self.b.tolist(), "x0": self.x0.tolist()}


def _bump(u):
    """``B(u) = exp(-u^2/(1-u^2))`` on ``|u| < 1`` and its first two derivatives."""
    u = np.asarray(u, float)
    q = 1.0 - u * u
    inside = q > 1e-3
    qs = np.where(inside, q, 1.0)
    B = np.where(inside, np.exp(-u * u / qs), 0.0)
    g1 = -2.0 * u / qs ** 2
    g2 = -2.0 / qs ** 2 - 8.0 * u * u / qs ** 3
    return B, B * g1, B * (g1 * g1 + g2)


class RadialBlendField(VelocityField):
    """``v(x) = B(u) V(theta)`` with ``u = (r/rho(theta) - 1)/w``.

    ``V`` is the trigonometric interpolant of the supplied nodal values, so the
    field equals them on the curve and vanishes outside the shell
    ``|r/rho - 1| < w``.  ``B`` is smooth and flat at ``u = 0``.
    """

    extension = Extension.RADIAL_BLEND

    def __init__(self, curve: StarCurve, samples, width=0.5):
        if not isinstance(curve, StarCurve):
            raise NotSupported("radial blending needs a starshaped curve")
        if not 0.0 < width < 1.0:
            raise ValueError("blend width must lie in (0, 1)")
        self.curve = curve
        self.samples = _frozen(np.asarray(samples, float).reshape(curve.N, 2))
        self.width = float(width)

    def _polar(self, points):
        p = np.asarray(points, float) - self.curve.center
        r = np.hypot(p[..., 0], p[..., 1])
        th = np.arctan2(p[..., 1], p[..., 0])
        return r, th

    def _parts(self, points):
        r, th = self._polar(points)
        w = self.width
        rho, rp, rpp = (self.curve.rho_at(th, d) for d in range(3))
        u = (r / rho - 1.0) / w
        ur = 1.0 / (w * rho)
        ut = -r * rp / (w * rho ** 2)
        urt = -rp / (w * rho ** 2)
        utt = -(r / w) * (rpp / rho ** 2 - 2.0 * rp ** 2 / rho ** 3)
        B, B1, B2 = _bump(u)
        V, V1, V2 = (trig_interpolate(self.samples, th, d) for d in range(3))
        return r, th, (ur, ut, urt, utt), (B, B1, B2), (V, V1, V2)

    def evaluate(self, points):
        _, _, _, (B, _, _), (V, _, _) = self._parts(points)
        return B[..., None] * V

    def on_curve(self, curve):
        if curve is self.curve:
            return np.array(self.samples)
        return self.evaluate(curve.x)

    def _polar_derivs(self, points):
        r, th, (ur, ut, urt, utt), (B, B1, B2), (V, V1, V2) = self._parts(points)
        e = lambda a: a[..., None]
        Fr = e(B1 * ur) * V
        Ft = e(B1 * ut) * V + e(B) * V1
        Frr = e(B2 * ur * ur) * V
        Frt = e(B2 * ur * ut + B1 * urt) * V + e(B1 * ur) * V1
        Ftt = e(B2 * ut * ut + B1 * utt) * V + e(2.0 * B1 * ut) * V1 + e(B) * V2
        return r, th, Fr, Ft, Frr, Frt, Ftt

    def jacobian(self, points):
        r, th, Fr, Ft, *_ = self._polar_derivs(points)
        return polar_to_cartesian(r, th, Fr, Ft)

    def hessian(self, points):
        return polar_to_cartesian(*self._polar_derivs(points))[1]

    def describe(self):
        return {"extension": self.extension.value, "width": self.width}


class BoundaryOnlyField(VelocityField):
    """Samples on one curve, no extension off it."""

    extension = Extension.NONE

    def __init__(self, curve, samples):
        self.curve = curve
        self.samples = _frozen(np.asarray(samples, float).reshape(curve.N, 2))

    def on_curve(self, curve):
        if curve is self.curve or (curve.N == self.curve.N and np.array_equal(curve.x, self.curve.x)):
            return np.array(self.samples)
        raise NotSupported("boundary-only field evaluated on a different curve")

    def evaluate(self, points):
        raise NotSupported("boundary-only field has no extension")

    jacobian = hessian = evaluate


class SumField(VelocityField):
    def __init__(self, fields, coeffs=None):
        self.fields = list(fields)
        self.coeffs = list(coeffs) if coeffs is not None else [1.0] * len(self.fields)
        exts = {f.extension for f in self.fields}
        if Extension.NONE in exts:
            self.extension = Extension.NONE
        elif Extension.RADIAL_BLEND in exts:
            self.extension = Extension.RADIAL_BLEND
        elif exts == {Extension.CONSTANT}:
            self.extension = Extension.CONSTANT
        else:
            self.extension = Extension.AFFINE

    def _combine(self, name, arg):
        return sum(c * getattr(f, name)(arg) for c, f in zip(self.coeffs, self.fields))

    def evaluate(self, points):
        return self._combine("evaluate", points)

    def jacobian(self, points):
        return self._combine("jacobian", points)

    def hessian(self, points):
        return self._combine("hessian", points)

    def on_curve(self, curve):
        return self._combine("on_curve", curve)

    def describe(self):
        return {"extension": self.extension.value, "terms": [
            {"coeff": float(c), **f.describe()} for c, f in zip(self.coeffs, self.fields)]}


# ---------------------------------------------------------------------------
# transformations

def _velocity_samples(curve, v):
    if isinstance(v, VelocityField):
        return v.on_curve(curve)
    return np.asarray(v, float).reshape(curve.N, 2)


def transform_curve(curve: StarCurve, v, t, *, refit=True, tol=1e-10, max_iter=50):
    """Image of ``curve`` under ``x -> x + t v(x)``.

    With ``refit=False`` the result is the :class:`ParametricCurve` whose nodes
    are exactly ``x(phi_j) + t v(x(phi_j))``.  Otherwise the image is re-fitted
    to starshaped form about the same center, keeping harmonics ``|m| <= N/4``;
    the returned curve carries ``fit_residual`` and ``preimage_phi``, the
    parameters whose images land on the new nodes.
    """
    V = _velocity_samples(curve, v)
    X = curve.x + t * V
    c = curve.center
    d = X - c
    ang = np.unwrap(np.arctan2(d[:, 1], d[:, 0]))
    steps = np.diff(np.concatenate([ang, [ang[0] + TWO_PI]]))
    dX = spectral_derivative(X)
    cross = d[:, 0] * dX[:, 1] - d[:, 1] * dX[:, 0]
    if np.any(steps <= 0) or np.any(cross <= 0) or abs(ang[-1] - ang[0] + steps[-1] - TWO_PI) > 1e-9:
        raise NotStarshaped(f"image at t={t} is not starshaped about {c.tolist()}")
    if not refit:
        return ParametricCurve(X, c)
    if t == 0:
        return StarCurve(curve.rho_hat, curve.N, c, fit_residual=0.0, preimage_phi=curve.phi)

    N = curve.N
    theta = _nodes(N)
    # initial guess from the nodal angle table, then Newton on the interpolant
    phi_ext = np.concatenate([curve.phi - TWO_PI, curve.phi, curve.phi + TWO_PI])
    ang0 = ang - TWO_PI * np.floor(ang[0] / TWO_PI)
    ang_ext = np.concatenate([ang0 - TWO_PI, ang0, ang0 + TWO_PI])
    phi = np.interp(theta, ang_ext, phi_ext)
    for _ in range(max_iter):
        P = trig_interpolate(X, phi) - c
        dP = trig_interpolate(X, phi, 1)
        psi = np.arctan2(P[:, 1], P[:, 0])
        res = (psi - theta + np.pi) % TWO_PI - np.pi
        dpsi = (P[:, 0] * dP[:, 1] - P[:, 1] * dP[:, 0]) / (P ** 2).sum(1)
        if np.any(dpsi <= 0):
            raise NotStarshaped("angular parametrization is not monotone")
        step = res / dpsi
        phi = phi - step
        if np.max(np.abs(step)) < 1e-15:
            break
    P = trig_interpolate(X, phi) - c
    rho_t = np.hypot(P[:, 0], P[:, 1])
    coef = np.fft.fft(rho_t) / N
    M = N // 4
    m = np.fft.fftfreq(N, 1.0 / N).astype(int)
    hat = np.array([coef[j % N] for j in range(-M, M + 1)])
    kept = np.where(np.abs(m) <= M, coef, 0.0)
    recon = (np.fft.ifft(kept * N)).real
    residual = float(np.max(np.abs(recon - rho_t)) / np.max(rho_t))
    if residual > tol:
        raise FitResidualExceeded(f"fit residual {residual:.3e} exceeds {tol:.1e}")
    hat = 0.5 * (hat + hat[::-1].conj())
    return StarCurve(hat, N, c, fit_residual=residual, preimage_phi=np.mod(phi, TWO_PI))


# ---------------------------------------------------------------------------
# volume quadrature

@dataclass(frozen=True)
class RadialGrid:
    """Gauss-Legendre in the radial fraction times trapezoid in angle.

    Points are ``c + r(s, theta) e_r`` with
    ``r = inner(theta) + s (outer(theta) - inner(theta))``, ``s`` in ``[0, 1]``.
    """

    inner: Union[float, Callable]
    outer: Union[float, Callable]
    n_r: int = 24
    n_phi: int = 64
    center: Sequence[float] = (0.0, 0.0)
    compact: bool = True
    points: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    radii: np.ndarray = field(init=False, repr=False)
    theta: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s, ws = leggauss(self.n_r)
        s = 0.5 * (s + 1.0)
        ws = 0.5 * ws
        th = _nodes(self.n_phi)
        rin = np.broadcast_to(self._eval(self.inner, th), th.shape)
        rout = np.broadcast_to(self._eval(self.outer, th), th.shape)
        if np.any(rout <= rin):
            raise ValueError("outer radius must exceed inner radius")
        R = rin[None, :] + s[:, None] * (rout - rin)[None, :]
        W = R * (rout - rin)[None, :] * ws[:, None] * (TWO_PI / self.n_phi)
        TH = np.broadcast_to(th, R.shape)
        c = np.asarray(self.center, float)
        pts = c + np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1)
        object.__setattr__(self, "points", _frozen(pts.reshape(-1, 2)))
        object.__setattr__(self, "weights", _frozen(W.ravel()))
        object.__setattr__(self, "radii", _frozen(R.ravel()))
        object.__setattr__(self, "theta", _frozen(TH.ravel()))

    @staticmethod
    def _eval(f, th):
        return np.asarray(f(th), float) if callable(f) else np.full(th.shape, float(f))

    def check_clear(self, curves, margin=0.0):
        """Raise :class:`RegionIntersectsBoundary` if the region comes within
        ``margin`` of any of ``curves`` (a compact region must avoid all
        perturbed boundaries).
        """
        if not self.compact:
            return
        if isinstance(curves, Curve):
            curves = [curves]
        c = np.asarray(self.center, float)
        rmin_region = float(self.radii.min())
        rmax_region = float(self.radii.max())
        for cv in curves:
            d = cv.x - c
            r = np.hypot(d[:, 0], d[:, 1])
            lo, hi = r.min() - margin, r.max() + margin
            if not (hi < rmin_region or lo > rmax_region):
                raise RegionIntersectsBoundary(
                    f"region [{rmin_region:.3g}, {rmax_region:.3g}] meets boundary band "
                    f"[{lo:.3g}, {hi:.3g}]")


def AnnulusGrid(a, b, n_r=24, n_phi=64, center=(0.0, 0.0), compact=True):
    """Annulus ``a <= |x - c| <= b``."""
    return RadialGrid(float(a), float(b), n_r, n_phi, tuple(center), compact)


def CollarGrid(curve: StarCurve, depth, n_r=24, n_phi=None):
    """Exterior collar ``rho(theta) <= r <= rho(theta) + depth`` touching the curve."""
    n_phi = n_phi or curve.N
    return RadialGrid(curve.rho_at, lambda th: curve.rho_at(th) + depth, n_r, n_phi,
                      tuple(curve.center), compact=False)


def volume_norm(values, grid: RadialGrid, order="L2", gradients=None):
    """``L^2`` or ``H^1`` norm of samples on ``grid.points``.

    ``gradients`` has shape ``(n, 2)`` and is required for ``H1``.
    """
    u = np.asarray(values)
    total = np.sum(grid.weights * np.abs(u) ** 2)
    if order.upper() == "H1":
        if gradients is None:
            raise ValueError("H1 norm needs gradients")
        g = np.asarray(gradients)
        total = total + np.sum(grid.weights * (np.abs(g) ** 2).sum(axis=-1))
    elif order.upper() != "L2":
        raise ValueError(f"unknown order {order!r}")
    return float(np.sqrt(total))
