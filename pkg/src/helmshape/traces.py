"""Boundary traces of a Helmholtz solution on one side of a curve."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Curve, laplace_beltrami

__all__ = ["BoundaryState", "hessian_from_traces"]


def hessian_from_traces(curve: Curve, lam, sigma, kappa):
    """Gradient and Hessian at the nodes from Cauchy data alone.

    Uses ``U_tt = d_s^2 lam + h sigma``, ``U_nt = d_s sigma - h d_s lam`` and
    ``U_nn = -kappa^2 lam - U_tt`` (the Helmholtz equation).
    """
    h = curve.curvature
    dl = curve.d_ds(lam)
    Utt = curve.d_ds(dl) + h * sigma
    Unt = curve.d_ds(sigma) - h * dl
    Unn = -kappa ** 2 * lam - Utt
    n, t = curve.normal, curve.tangent
    grad = dl[:, None] * t + sigma[:, None] * n
    nn = n[:, :, None] * n[:, None, :]
    tt = t[:, :, None] * t[:, None, :]
    nt = n[:, :, None] * t[:, None, :] + t[:, :, None] * n[:, None, :]
    hess = Unn[:, None, None] * nn + Unt[:, None, None] * nt + Utt[:, None, None] * tt
    return grad, hess


@dataclass(frozen=True)
class BoundaryState:
    """Cauchy data ``(lam, sigma) = (gamma_0 U, gamma_1 U)`` with ``gamma_2 U``
    and the full gradient and Hessian at the nodes of ``curve``.

    ``side`` is ``"exterior"`` or ``"interior"``; ``kappa`` is the wavenumber of
    that side.
    """

    curve: Curve
    lam: np.ndarray
    sigma: np.ndarray
    grad: np.ndarray
    hess: Optional[np.ndarray]
    kappa: float
    side: str = "exterior"

    @property
    def gamma2(self):
        n = self.curve.normal
        return np.einsum("ni,nij,nj->n", n, self.hess, n)

    @property
    def dlam_ds(self):
        return self.curve.d_ds(self.lam)

    @classmethod
    def from_field(cls, curve, u, grad, hess, kappa, side="exterior"):
        sigma = np.einsum("ni,ni->n", grad, curve.normal)
        return cls(curve, np.asarray(u), sigma, np.asarray(grad),
                   None if hess is None else np.asarray(hess), float(kappa), side)

    @classmethod
    def from_cauchy(cls, curve, lam, sigma, kappa, side="exterior"):
        lam = np.asarray(lam)
        sigma = np.asarray(sigma)
        grad, hess = hessian_from_traces(curve, lam, sigma, kappa)
        return cls(curve, lam, sigma, grad, hess, float(kappa), side)

    def laplace_identity_residual(self):
        """``gamma_2 U + kappa^2 lam + h sigma + Delta_Gamma lam`` at the nodes."""
        c = self.curve
        return (self.gamma2 + self.kappa ** 2 * self.lam + c.curvature * self.sigma
                + laplace_beltrami(self.lam, c))
