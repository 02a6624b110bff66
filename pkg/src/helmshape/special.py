"""Bessel and Hankel function tables with a runtime Wronskian check.

Values come from :mod:`scipy.special` (AMOS).  Every table is validated
against ``J_n Y_n' - J_n' Y_n = 2/(pi x)`` before use.
"""
import numpy as np
from scipy import special as sp

from .errors import SpecialFunctionError

WRONSKIAN_TOL = 1e-12


def check_wronskian(n, x, J, Jp, Y, Yp, tol=WRONSKIAN_TOL):
    """Raise if the cylinder-function Wronskian fails by more than ``tol`` (relative)."""
    w = J * Yp - Jp * Y
    ref = 2.0 / (np.pi * x)
    scale = np.maximum(np.abs(ref), np.maximum(np.abs(J * Yp), np.abs(Jp * Y)))
    err = np.abs(w - ref) / scale
    bad = ~(err <= tol)
    if np.any(bad):
        i = np.argmax(np.where(bad, err, -1.0))
        raise SpecialFunctionError(
            f"Wronskian check failed at n={np.broadcast_to(n, err.shape).flat[i]}, "
            f"x={np.broadcast_to(x, err.shape).flat[i]}: relative error {err.flat[i]:.2e}")
    return float(np.max(err)) if err.size else 0.0


def _integer_orders(n, x):
    """Tables for integer orders from one evaluation per distinct ``(|n|, x)``.

    Uses ``Z_{-m} = (-1)^m Z_m`` and ``Z_m' = (m/x) Z_m - Z_{m+1}``.
    """
    shape = np.broadcast_shapes(n.shape, x.shape)
    m = np.abs(np.broadcast_to(n, shape)).astype(np.int64).ravel()
    xb = np.broadcast_to(x, shape).ravel()
    L = m.size
    keys = np.column_stack([np.concatenate([m, m + 1]).astype(float), np.concatenate([xb, xb])])
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    Ju = sp.jv(uniq[:, 0], uniq[:, 1])
    Yu = sp.yv(uniq[:, 0], uniq[:, 1])
    J0, J1 = Ju[inv[:L]], Ju[inv[L:]]
    Y0, Y1 = Yu[inv[:L]], Yu[inv[L:]]
    q = m / xb
    sign = np.where((np.broadcast_to(n, shape).ravel() < 0) & (m % 2 == 1), -1.0, 1.0)
    out = (sign * J0, sign * (q * J0 - J1), sign * Y0, sign * (q * Y0 - Y1))
    return tuple(a.reshape(shape) for a in out)


class CylinderTable:
    """``J_n``, ``Y_n``, ``H_n = J_n + i Y_n`` and two derivatives in ``x``.

    ``orders`` and ``x`` broadcast against each other.
    """

    def __init__(self, orders, x, check=True):
        n = np.asarray(orders)
        x = np.asarray(x, float)
        self.n = n
        self.x = x
        if n.dtype.kind in "iu" or np.array_equal(n, np.round(n)):
            self.J, self.Jp, self.Y, self.Yp = _integer_orders(n, x)
        else:
            self.J = sp.jv(n, x)
            self.Y = sp.yv(n, x)
            self.Jp = sp.jvp(n, x)
            self.Yp = sp.yvp(n, x)
        if check:
            self.wronskian_error = check_wronskian(n, x, self.J, self.Jp, self.Y, self.Yp)
        if not (np.all(np.isfinite(self.Y)) and np.all(np.isfinite(self.Yp))):
            raise SpecialFunctionError("Bessel Y overflow; reduce the mode count")

    @property
    def H(self):
        return self.J + 1j * self.Y

    @property
    def Hp(self):
        return self.Jp + 1j * self.Yp

    @staticmethod
    def second(n, x, f, fp):
        """``f''`` from Bessel's equation for any cylinder function ``f``."""
        return -fp / x - (1.0 - (n / x) ** 2) * f

    @property
    def Jpp(self):
        return self.second(self.n, self.x, self.J, self.Jp)

    @property
    def Hpp(self):
        return self.second(self.n, self.x, self.H, self.Hp)


def hankel1(n, x):
    return sp.hankel1(n, x)
