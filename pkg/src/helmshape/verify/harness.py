"""Taylor-remainder studies and structural checks for the derivative formulas."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import mie
from ..derivatives import READINGS, cauchy_norm, derive
from ..errors import (HelmshapeError, LadderUnsolvable, NormalMismatch, NotSupported,
                      SlopeUnstable)
from ..geometry import (AffineField, AnnulusGrid, BoundaryOnlyField, CollarGrid, RadialGrid,
                        StarCurve, VelocityField, transform_curve, volume_norm)
from ..jsonio import csv_rows, provenance
from ..mie import WaveParameters
from ..problem import FieldSolution, make_incident, solve

__all__ = [
    "TARGETS", "THRESHOLDS", "default_ladder", "fit_slope", "TaylorStudy", "StudyReport",
    "taylor_study", "perturbed_solution", "hadamard_check", "mp_residual_check",
    "cross_backend_check", "study_region",
]

TARGETS = ("MD", "SD", "CMD", "CSD", "Stability", "StabilityTrace", "Lie")
# (lower, upper) bounds on the fitted exponent
THRESHOLDS = {"MD": (1.9, None), "SD": (1.9, None), "CMD": (1.9, None), "CSD": (1.9, None),
              "Stability": (0.95, 1.05), "StabilityTrace": (0.95, 1.05), "Lie": (0.9, None)}
ABS_TOL = 1e-8
SLOPE_RMS_LIMIT = 0.1
HADAMARD_TOL = {"mie": 1e-7, "bie": 1e-6}
MP_PDE_TOL = 1e-6
MP_BC_TOL = 1e-7
CROSS_TOL = 1e-7


def _threads():
    try:
        return max(1, int(os.environ.get("HELMSHAPE_THREADS", "1")))
    except ValueError:
        return 1


def default_ladder(hi=-1.5, lo=-3.5, step=0.5):
    """Geometric ladder ``10^hi, ..., 10^lo``."""
    n = int(round((hi - lo) / step)) + 1
    return tuple(float(10.0 ** e) for e in np.linspace(hi, lo, n))


def fit_slope(t, r, drop_largest=True):
    """Least-squares slope of ``log10 r`` against ``log10 t``.

    Returns ``(slope, stderr, intercept, rms)``; the largest ``t`` is dropped
    as pre-asymptotic.
    """
    t = np.asarray(t, float)
    r = np.asarray(r, float)
    order = np.argsort(t)
    t, r = t[order], r[order]
    if drop_largest:
        t, r = t[:-1], r[:-1]
    if t.size < 2 or np.any(r <= 0):
        return None, None, None, None
    x, y = np.log10(t), np.log10(r)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(x.size - 2, 1)
    s2 = float(res @ res) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return float(coef[0]), float(np.sqrt(cov[0, 0])), float(coef[1]), float(np.sqrt(np.mean(res ** 2)))


# ---------------------------------------------------------------------------
# study definitions

@dataclass(frozen=True)
class TaylorStudy:
    """One remainder study.

    ``region`` is a :class:`RadialGrid` for volume targets (chosen
    automatically when ``None``); ``norm`` is ``"L2"`` or ``"H1"`` for volume
    targets and the trace index ``s`` for boundary targets.
    """

    beta: int
    params: WaveParameters
    curve: StarCurve
    v: VelocityField
    target: str = "MD"
    ladder: tuple = field(default_factory=default_ladder)
    incident: object = 0.3
    norm: object = "L2"
    region: Optional[RadialGrid] = None
    backend: str = "auto"
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}; expected one of {TARGETS}")
        lad = np.asarray(self.ladder, float)
        if lad.size < 4 or np.any(np.diff(lad) >= 0) or np.any(lad <= 0):
            raise ValueError("ladder must be strictly decreasing, positive, with at least 4 points")


@dataclass(frozen=True)
class StudyReport:
    label: str
    target: str
    t: tuple
    remainders: tuple
    slope: Optional[float]
    stderr: Optional[float]
    rms: Optional[float]
    bounds: tuple
    passed: bool
    criterion: str
    provenance: dict

    def to_json(self):
        return {"label": self.label, "target": self.target, "t": list(self.t),
                "remainders": list(self.remainders), "slope": self.slope,
                "stderr": self.stderr, "fit_rms": self.rms,
                "bounds": list(self.bounds), "passed": bool(self.passed),
                "criterion": self.criterion, "provenance": self.provenance}

    def to_csv(self):
        return csv_rows(["label", "target", "t", "remainder"],
                        [(self.label, self.target, t, r) for t, r in zip(self.t, self.remainders)])


def _is_disc_map(v):
    if not isinstance(v, AffineField):
        return False
    M = v.M
    return bool(np.array_equal(M, M[0, 0] * np.eye(2)))


def _choose_backend(curve, v, backend, beta):
    disc = isinstance(curve, StarCurve) and curve.is_circle
    if backend == "auto":
        return "mie" if disc and _is_disc_map(v) else "bie"
    if backend == "mie" and not (disc and _is_disc_map(v)):
        raise NotSupported("series backend needs a disc and an isotropic affine field")
    if backend == "bie" and beta == 3:
        raise NotSupported("transmission studies run on the series backend")
    return backend


def perturbed_solution(base: FieldSolution, v, t):
    """Solution on ``Gamma_t`` and the curve whose nodes are ``T_t(x_j)``."""
    mapped = transform_curve(base.curve, v, t, refit=False)
    inc = base.incident if base.incident is not None else "none"
    if base.backend == "mie":
        a = float(base.curve.rho_hat[base.curve.M].real)
        c, at = v.transform_disc(base.curve.center, a, t)
        if inc == "none":
            raise NotSupported("perturbed series solves need an incident wave")
        raw = mie.mie_solve(base.beta, base.params, inc, at, c)
        sol = FieldSolution("mie", base.beta, base.params, StarCurve.circle(at, base.N, c), raw)
    else:
        sol = solve(base.beta, mapped, base.params, inc, backend="bie")
    return sol, mapped


def study_region(study: TaylorStudy, backend, curve=None):
    """Default volume region for a study."""
    curve = curve or study.curve
    tmax = max(study.ladder)
    vmax = float(np.max(np.abs(study.v.on_curve(curve)))) if isinstance(study.v, VelocityField) else 1.0
    rmax = curve.radial_extent()[1]
    collar = 10.0 * curve.length / curve.N
    c = tuple(curve.center)
    if study.target in ("MD", "Stability") and backend == "mie":
        return CollarGrid(curve, 0.5, n_r=16, n_phi=64)
    inner = rmax + 2.0 * tmax * vmax + (collar if backend == "bie" else 0.0) + 0.1
    return AnnulusGrid(inner, inner + 0.6, n_r=16, n_phi=64, center=c)


def _normal_part(curve, v):
    s = v.on_curve(curve)
    vn = np.einsum("ij,ij->i", s, curve.normal)
    return BoundaryOnlyField(curve, vn[:, None] * curve.normal)


def taylor_study(study: TaylorStudy, strict=False) -> StudyReport:
    """Remainder norms along the ladder and the fitted exponent."""
    beta = int(study.beta)
    target = study.target
    v = study.v
    backend = _choose_backend(study.curve, v, study.backend, beta)
    if target == "CSD":
        tangential = np.max(np.abs(v.tangential_component(study.curve)))
        if not (backend == "mie" and tangential < 1e-14):
            if beta == 3:
                raise NotSupported("transmission trace studies need a normal disc-preserving field")
            backend = "bie"
    base = solve(beta, study.curve, study.params, make_incident(study.params, study.incident),
                 backend=backend)
    bundle = derive(base, v)
    curve = base.curve
    move = v
    if target == "CSD" and backend == "bie":
        move = _normal_part(curve, v)
    region = study.region
    volume = target in ("MD", "SD", "Stability")
    if volume and region is None:
        region = study_region(study, backend, curve)
    order = 1 if (volume and str(study.norm).upper() == "H1") else 0

    pts = region.points if volume else None
    if volume:
        U0 = base.evaluate(pts, order + (1 if target == "MD" else 0))
        if target == "SD":
            D = bundle.shape_derivative(pts, order)
        elif target == "MD":
            Vp = v.evaluate(pts)
            Jp = v.jacobian(pts)
            Up = bundle.shape_derivative(pts, order)
            D_u = Up.u + np.einsum("ni,ni->n", U0.grad, Vp)
            D_g = None
            if order:
                U2 = base.evaluate(pts, 2)
                D_g = Up.grad + np.einsum("nij,nj->ni", U2.hess, Vp) + np.einsum("nji,nj->ni", Jp, U0.grad)
    else:
        st0 = base.state("exterior")
        if target == "CMD" or target == "Lie":
            dl, ds = bundle.xi_dot["exterior"]
        elif target == "CSD":
            dl, ds = bundle.xi_prime["exterior"]
        s_idx = 0.0 if isinstance(study.norm, str) else float(study.norm)

    def one(t):
        try:
            sol, mapped = perturbed_solution(base, move, t)
        except HelmshapeError as exc:
            raise LadderUnsolvable(f"t={t:.3g}: {exc}") from exc
        if volume:
            if target == "SD":
                region.check_clear([sol.curve, curve])
                Ut = sol.evaluate(pts, order)
                ru = Ut.u - U0.u - t * D.u
                rg = None if not order else Ut.grad - U0.grad - t * D.grad
            else:
                y = pts + t * v.evaluate(pts)
                Ut = sol.evaluate(y, order)
                if order:
                    gt = np.einsum("nji,nj->ni", np.eye(2) + t * v.jacobian(pts), Ut.grad)
                if target == "MD":
                    ru = Ut.u - U0.u - t * D_u
                    rg = None if not order else gt - U0.grad - t * D_g
                else:
                    ru = Ut.u - U0.u
                    rg = None if not order else gt - U0.grad
            return volume_norm(ru, region, "H1" if order else "L2", rg)
        st = sol.states_on(mapped) if sol.backend == "mie" else sol.state()
        rl = st.lam - st0.lam
        rs = st.sigma - st0.sigma
        if target == "Lie":
            return float(np.max(np.abs(rl / t - dl)))
        if target != "StabilityTrace":
            rl = rl - t * dl
            rs = rs - t * ds
        return cauchy_norm(rl, rs, curve, s_idx)

    ladder = tuple(float(t) for t in study.ladder)
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rem = tuple(float(r) for r in ex.map(one, ladder))
    else:
        rem = tuple(float(one(t)) for t in ladder)

    lo, hi = THRESHOLDS[target]
    slope, err, _, rms = fit_slope(ladder, rem)
    if max(rem) <= ABS_TOL:
        passed, crit = True, f"absolute: all remainders <= {ABS_TOL:g}"
        slope = err = rms = None
    elif slope is None:
        passed, crit = False, "non-positive remainder"
    else:
        passed = slope >= lo and (hi is None or slope <= hi)
        crit = f"slope >= {lo:g}" if hi is None else f"{lo:g} <= slope <= {hi:g}"
        if rms > SLOPE_RMS_LIMIT:
            if strict:
                raise SlopeUnstable(f"log-log fit rms {rms:.3g} exceeds {SLOPE_RMS_LIMIT}")
            crit += "; unstable fit"
    prov = provenance(**base.provenance(), target=target, seed=int(study.seed),
                      velocity=v.describe(), norm=str(study.norm),
                      region=None if region is None else {
                          "r_min": float(region.radii.min()), "r_max": float(region.radii.max()),
                          "points": int(region.points.shape[0])})
    label = study.label or f"{target}-beta{beta}"
    return StudyReport(label, target, ladder, rem, slope, err, rms, (lo, hi), bool(passed), crit, prov)


# ---------------------------------------------------------------------------
# structural checks

def hadamard_check(beta, curve: StarCurve, params: WaveParameters, profile, completion=None,
                   incident=0.3, backend="auto"):
    """Shape derivatives from two fields with equal normal components.

    ``completion`` is added to the normal field ``profile n``; by default the
    unit tangent blended off the curve.
    """
    v1 = VelocityField.normal_profile(curve, profile)
    v2 = v1 + (completion if completion is not None else VelocityField.tangential_profile(curve, 1.0))
    n1 = v1.normal_component(curve)
    n2 = v2.normal_component(curve)
    scale = max(1.0, float(np.max(np.abs(n1))))
    if np.max(np.abs(n1 - n2)) > 1e-12 * scale:
        raise NormalMismatch(f"normal components differ by {np.max(np.abs(n1 - n2)):.3e}")
    base = solve(beta, curve, params, make_incident(params, incident), backend=backend)
    b1, b2 = derive(base, v1), derive(base, v2)
    rmax = curve.radial_extent()[1]
    region = AnnulusGrid(rmax + 0.5, rmax + 1.0, n_r=4, n_phi=32, center=tuple(curve.center))
    du = np.max(np.abs(b1.shape_derivative(region.points).u - b2.shape_derivative(region.points).u))
    dxi = max(float(np.max(np.abs(a - b))) for s in base.sides
              for a, b in zip(b1.xi_prime[s], b2.xi_prime[s]))
    tol = HADAMARD_TOL[base.backend]
    diff = float(max(du, dxi))
    return {"check": "hadamard", "beta": int(beta), "field_difference": float(du),
            "trace_difference": dxi, "difference": diff, "tolerance": tol,
            "passed": bool(diff <= tol), "provenance": provenance(**base.provenance())}


_LAP8 = (np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560]),
         np.arange(-4, 5))


def _laplacian(f, pts, h):
    c, k = _LAP8
    out = 0.0
    for e in np.eye(2):
        out = out + sum(ci * f(pts + ki * h * e) for ci, ki in zip(c, k)) / h ** 2
    return out


def _default_mp_points(bundle, side):
    curve = bundle.curve
    th = np.linspace(0.0, 2 * np.pi, 8, endpoint=False) + 0.1
    rho = curve.rho_at(th)
    gap = 0.0 if bundle.base.backend == "mie" else 10.0 * curve.length / curve.N
    sign = 1.0 if side == "exterior" else -1.0
    pts = []
    for d in (0.06, 0.12):
        r = rho + sign * (gap + d)
        pts.append(np.asarray(curve.center) + np.column_stack([r * np.cos(th), r * np.sin(th)]))
    return np.concatenate(pts)


def mp_residual_check(bundle, points=None, h=5e-3, readings=READINGS):
    """Residuals of the material-derivative problem for the Lie-derived ``Udot``.

    PDE: ``Delta Udot + kappa^2 Udot + f`` with an 8th-order stencil of step
    ``h``.  BC: boundary condition of ``Udot`` minus ``m`` for each reading.
    """
    pde = {}
    for side in bundle.base.sides:
        pts = _default_mp_points(bundle, side) if points is None else np.asarray(points, float)
        if points is not None and side == "interior":
            continue
        k = bundle.kappa(side)
        md = lambda p, s=side: bundle.material_derivative(p, s)
        res = _laplacian(md, pts, h) + k ** 2 * md(pts) + bundle.source(pts, side)
        pde[side] = float(np.max(np.abs(res)))
    bc = {r: float(np.max(np.abs(bundle.md_boundary_residual(r)))) for r in readings}
    pde_max = max(pde.values())
    literal = [r for r in ("grad", "normal") if r in bc and bc[r] <= MP_BC_TOL]
    return {"check": "mp_residual", "beta": int(bundle.beta), "pde": pde, "pde_max": pde_max,
            "bc": bc, "reading": bundle.options.get("reading"),
            "pde_tolerance": MP_PDE_TOL, "bc_tolerance": MP_BC_TOL,
            "literal_readings_passing": literal,
            "passed": bool(pde_max <= MP_PDE_TOL and bc[bundle.options.get("reading", "conormal")] <= MP_BC_TOL),
            "provenance": provenance(**bundle.base.provenance(), velocity=bundle.v.describe())}


def cross_backend_check(beta, params: WaveParameters, v=None, N=256, radius=1.0,
                        incident=0.3):
    """Series versus integral-equation traces and derivative traces on a disc."""
    beta = int(beta)
    if beta == 3:
        raise NotSupported("cross-backend comparison covers beta = 0, 1, 2")
    disc = StarCurve.circle(radius, N)
    if v is None:
        v = VelocityField.normal_profile(disc, lambda p: 1.0 + 0.3 * np.cos(2 * p))
    inc = make_incident(params, incident)
    bm = derive(solve(beta, disc, params, inc, backend="mie"), v)
    bb = derive(solve(beta, disc, params, inc, backend="bie"), v)
    sm, sb = bm.base.state(), bb.base.state()
    um, ub = bm.sd.state(), bb.sd.state()

    def d(x, y):
        return float(np.max(np.abs(np.asarray(x) - np.asarray(y))))

    diffs = {"lam": d(sm.lam, sb.lam), "sigma": d(sm.sigma, sb.sigma),
             "sd_lam": d(um.lam, ub.lam), "sd_sigma": d(um.sigma, ub.sigma),
             "csd_lam": d(bm.xi_prime["exterior"][0], bb.xi_prime["exterior"][0]),
             "csd_sigma": d(bm.xi_prime["exterior"][1], bb.xi_prime["exterior"][1]),
             "cmd_lam": d(bm.xi_dot["exterior"][0], bb.xi_dot["exterior"][0]),
             "cmd_sigma": d(bm.xi_dot["exterior"][1], bb.xi_dot["exterior"][1])}
    worst = max(diffs.values())
    return {"check": "cross_backend", "beta": beta, "differences": diffs, "max": worst,
            "tolerance": CROSS_TOL, "passed": bool(worst <= CROSS_TOL),
            "provenance": provenance(N=int(N), params=params.to_json(), velocity=v.describe())}
