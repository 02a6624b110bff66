"""Backend-neutral handle on a solved exterior (or transmission) problem.

Discs are served by the series solver, other curves by the integral-equation
solver.  A :class:`FieldSolution` exposes nodal boundary states on its curve
and field values with derivatives at volume points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bie, mie
from .errors import NotSupported
from .geometry import Curve, StarCurve
from .mie import PlaneWave, WaveParameters
from .traces import BoundaryState

__all__ = ["FieldSolution", "CauchyData", "solve", "radiate", "make_incident"]


def make_incident(params: WaveParameters, incident):
    """``None`` gives incidence angle 0, ``"none"`` no incident field."""
    if isinstance(incident, str):
        if incident != "none":
            raise ValueError(f"unknown incident specification {incident!r}")
        return None
    if incident is None:
        return PlaneWave(params.kappa, 0.0)
    if isinstance(incident, PlaneWave):
        return incident
    return PlaneWave(params.kappa, float(incident))


def _disc(curve):
    if isinstance(curve, StarCurve) and curve.is_circle:
        return float(curve.rho_hat[curve.M].real), np.asarray(curve.center, float)
    return None


def _backend(curve, backend, beta):
    if backend not in ("auto", "mie", "bie"):
        raise ValueError(f"unknown backend {backend!r}")
    disc = _disc(curve)
    if backend == "auto":
        backend = "mie" if disc is not None else "bie"
    if backend == "mie" and disc is None:
        raise NotSupported("the series backend needs a circular curve")
    if backend == "bie" and beta == 3:
        raise NotSupported("transmission is served by the series backend only")
    return backend


@dataclass(frozen=True)
class CauchyData:
    """Exterior traces and, for transmission, interior traces on one curve.

    Jumps are exterior minus interior.
    """

    exterior: BoundaryState
    interior: Optional[BoundaryState] = None
    mu: tuple = (1.0, 1.0)

    @property
    def curve(self):
        return self.exterior.curve

    @property
    def lam(self):
        return self.exterior.lam

    @property
    def sigma(self):
        return self.exterior.sigma

    def sides(self):
        return ("exterior",) if self.interior is None else ("exterior", "interior")

    def side(self, name):
        st = self.exterior if name == "exterior" else self.interior
        if st is None:
            raise NotSupported(f"no {name} traces")
        return st

    def jump_dirichlet(self):
        return self.exterior.lam - self.side("interior").lam

    def jump_neumann(self):
        """``[mu^{-1} gamma_1 U]``."""
        return self.exterior.sigma / self.mu[0] - self.side("interior").sigma / self.mu[1]


@dataclass(frozen=True)
class FieldSolution:
    backend: str
    beta: int
    params: WaveParameters
    curve: Curve
    raw: object

    @property
    def N(self):
        return self.curve.N

    @property
    def incident(self):
        return self.raw.incident

    @property
    def sides(self):
        return ("exterior", "interior") if self.beta == 3 else ("exterior",)

    def state(self, side="exterior") -> BoundaryState:
        if self.backend == "mie":
            return self.raw.cauchy(self.curve, side)
        return self.raw.cauchy(side=side)

    def states_on(self, curve, side="exterior") -> BoundaryState:
        """Traces at the nodes of another curve (series backend) or of the
        solver's own curve."""
        if self.backend == "mie":
            return self.raw.cauchy(curve, side)
        if curve is not self.curve:
            raise NotSupported("integral-equation traces live on the solver's curve")
        return self.state(side)

    def cauchy_data(self) -> CauchyData:
        inter = self.state("interior") if self.beta == 3 else None
        return CauchyData(self.state("exterior"), inter, (self.params.mu0, self.params.mu1))

    def evaluate(self, points, order=0, side="exterior"):
        which = "interior" if side == "interior" else "total"
        return self.raw.evaluate(points, which, order)

    def provenance(self):
        out = {"backend": self.backend, "beta": int(self.beta), "N": int(self.N),
               "params": self.params.to_json()}
        if self.backend == "mie":
            out["n_modes"] = int(self.raw.n_modes)
        else:
            out["condition"] = float(self.raw.condition)
        return out


def solve(beta, curve: Curve, params: WaveParameters, incident=None, backend="auto",
          certify=False) -> FieldSolution:
    """Total field for plane-wave incidence on the obstacle bounded by ``curve``."""
    beta = int(beta)
    backend = _backend(curve, backend, beta)
    inc = make_incident(params, incident)
    if backend == "mie":
        a, c = _disc(curve)
        if inc is None:
            raw = mie.radiate(beta, params, _zero_data(beta, curve.N), a, c)
        else:
            raw = mie.mie_solve(beta, params, inc, a, c)
    else:
        raw = bie.bie_solve(beta, curve, params, "none" if inc is None else inc,
                            certify=certify)
    return FieldSolution(backend, beta, params, curve, raw)


def _zero_data(beta, N):
    z = np.zeros(N, complex)
    return (z, z) if beta == 3 else z


def radiate(base: FieldSolution, data) -> FieldSolution:
    """Radiating solution of the same kind on the same curve with boundary data
    ``data`` (a nodal array, or the jump pair for transmission)."""
    if base.backend == "mie":
        a, c = _disc(base.curve)
        raw = mie.radiate(base.beta, base.params, data, a, c)
    else:
        raw = bie.bie_radiate(base.beta, base.curve, base.params, data)
    return FieldSolution(base.backend, base.beta, base.params, base.curve, raw)
