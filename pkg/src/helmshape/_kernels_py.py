"""Pure numpy implementation of the pairwise Hankel kernels."""
import numpy as np
from scipy import special as sp


def hankel_pairs(targets, sources, kappa):
    """``H0(kappa r)`` and ``H1(kappa r)/r`` for all target/source pairs.

    Entries with ``r == 0`` are set to zero; callers patch the diagonal.
    """
    t = np.asarray(targets, float)
    s = np.asarray(sources, float)
    dx = t[:, None, 0] - s[None, :, 0]
    dy = t[:, None, 1] - s[None, :, 1]
    r = np.hypot(dx, dy)
    zero = r == 0.0
    rs = np.where(zero, 1.0, r)
    z = kappa * rs
    H0 = sp.j0(z) + 1j * sp.y0(z)
    H1r = (sp.j1(z) + 1j * sp.y1(z)) / rs
    H0[zero] = 0.0
    H1r[zero] = 0.0
    return H0, H1r
