"""Surface-flux mass integrals on the fibered chart.

The flux density of a horizontal field Z with model-dual 1-form a_Z is

    q(Z) = sum_b (grad^h_{E_b} g)(E_b, Z) a_Z - d(tr_h g)(Z) a_Z / 2 - d(g(Z,Z)) / 2,

summed over the full model frame including the fiber direction.  The mass
quadratic form is the normalized limit of shell fluxes of q(Z); the
conformal mass adds the normalized limit of shell fluxes of

    (1 - m) <theta, a_Z>_h a_Z - |a_Z|_h^2 theta.

Limits are realized on a geometric radius schedule with one Richardson
extrapolation step at the generic remainder rate r^(2-m) of the integrated
flux; the raw sequence is always reported and convergence is declared,
never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .engine import DerivativeEngine, frame_jet1
from .errors import MassNotDefinedError
from .families import LeeFormField, MetricFamily, ScalarField, conformal_sweep
from .model import ModelSpace, sphere_volume
from .probes import geometric_radii, is_adapted, require_alf, require_weyl_alf
from .quadrature import QuadratureSpec, flux_model_metric, shell_nodes
from .weyl import WeylStructure, gauge_change


def horizontal_field(model: ModelSpace, z) -> np.ndarray:
    """Validate and normalize a horizontal direction: index or m coefficients."""
    if np.isscalar(z):
        b = int(z)
        if not 0 <= b < model.m:
            raise ValueError(f"basis index {b} outside 0..{model.m - 1}")
        out = np.zeros(model.m)
        out[b] = 1.0
        return out
    z = np.asarray(z, dtype=float)
    if z.shape != (model.m,):
        raise ValueError(f"horizontal field needs {model.m} coefficients, got shape {z.shape}")
    return z


def q_flux_components(engine: DerivativeEngine, model: ModelSpace, fam: MetricFamily,
                      z, coords) -> np.ndarray:
    """Frame components of q(Z) at (batched) chart points."""
    coords = np.asarray(coords, dtype=float)
    model.require_in_chart(coords)
    z = horizontal_field(model, z)
    zfull = np.concatenate([z, [0.0]])
    g, dg = frame_jet1(engine, model, fam.as_field(), coords)
    gam = model.lc_coeffs_h(coords)
    nabla = dg - np.einsum("ijl...,lk...->ijk...", gam, g) - np.einsum("ikl...,jl...->ijk...", gam, g)

    div_term = np.einsum("bbk...,k->...", nabla, zfull)
    dtr = np.einsum("ibb...->i...", dg)
    dtr_z = np.einsum("i...,i->...", dtr, zfull)
    dgzz = np.einsum("iab...,a,b->i...", dg, zfull, zfull)

    alpha = zfull.reshape((len(zfull),) + (1,) * (dg.ndim - 3))
    return (div_term - 0.5 * dtr_z) * alpha - 0.5 * dgzz


def lee_correction_components(model: ModelSpace, lee: LeeFormField, z, coords) -> np.ndarray:
    """(1 - m) <theta, a_Z>_h a_Z - |a_Z|_h^2 theta at (batched) chart points."""
    coords = np.asarray(coords, dtype=float)
    z = horizontal_field(model, z)
    zfull = np.concatenate([z, [0.0]])
    theta = lee.as_field().values(coords)
    inner = np.einsum("i...,i->...", theta, zfull)
    alpha = zfull.reshape((len(zfull),) + (1,) * (theta.ndim - 1))
    return (1 - model.m) * inner * alpha - float(z @ z) * theta


def gradient_correction_components(model: ModelSpace, f: ScalarField, z, coords) -> np.ndarray:
    """(1 - m) <df, a_Z>_h a_Z - |a_Z|_h^2 df: the conformal-change flux density."""
    coords = np.asarray(coords, dtype=float)
    z = horizontal_field(model, z)
    zfull = np.concatenate([z, [0.0]])
    df = f.grad_field().values(coords)
    inner = np.einsum("i...,i->...", df, zfull)
    alpha = zfull.reshape((len(zfull),) + (1,) * (df.ndim - 1))
    return (1 - model.m) * inner * alpha - float(z @ z) * df


def richardson_limit(radii: Sequence[float], values: Sequence[float], rate: float) -> float:
    """One extrapolation step on the last pair assuming a c * r^rate remainder."""
    r1, r2 = radii[-2], radii[-1]
    f1, f2 = values[-2], values[-1]
    lam = (r2 / r1) ** rate
    return (f2 - lam * f1) / (1.0 - lam)


def running_extrapolation(radii: Sequence[float], values: Sequence[float], rate: float) -> list:
    out = [float("nan")]
    for j in range(1, len(radii)):
        out.append(richardson_limit(radii[: j + 1], values[: j + 1], rate))
    return out


@dataclass
class MassQuery:
    """One mass computation: structure, direction, radii and node counts."""

    ws: WeylStructure
    z: object
    radii: Sequence[float] = ()
    quad: QuadratureSpec = dc_field(default_factory=QuadratureSpec)
    tol_conv: float = 1e-6
    check_decay: bool = True
    engine: DerivativeEngine = dc_field(default_factory=DerivativeEngine)

    def __post_init__(self):
        horizontal_field(self.ws.model, self.z)
        if len(self.radii) == 0:
            self.radii = geometric_radii(40.0, 320.0, 6)
        self.radii = [float(r) for r in self.radii]
        if any(r <= self.ws.model.R for r in self.radii):
            raise ValueError("all flux radii must exceed the excised-ball radius")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly increasing")


@dataclass
class MassReport:
    """Per-radius fluxes, extrapolated limits and convergence diagnostics."""

    z_label: str
    radii: list
    q_values: list                 # normalized Q flux per radius
    correction_values: list        # normalized conformal correction per radius
    q_limit: float
    correction_limit: float
    converged: bool
    tol_conv: float
    omega_n: float
    fiber_length: float
    quad: dict
    extrapolation_rate: float

    @property
    def mass(self) -> float:
        return self.q_limit + self.correction_limit

    @property
    def totals(self) -> list:
        return [q + c for q, c in zip(self.q_values, self.correction_values)]

    def as_dict(self) -> dict:
        return {
            "Z": self.z_label,
            "radii": self.radii,
            "q_values": self.q_values,
            "correction_values": self.correction_values,
            "q_limit": self.q_limit,
            "correction_limit": self.correction_limit,
            "mass": self.mass,
            "converged": bool(self.converged),
            "tol_conv": self.tol_conv,
            "omega_n": self.omega_n,
            "fiber_length": self.fiber_length,
            "quadrature": self.quad,
            "extrapolation_rate": self.extrapolation_rate,
        }

    def csv_rows(self) -> list:
        running = running_extrapolation(self.radii, self.totals, self.extrapolation_rate)
        return [
            (r, q, c, e)
            for r, q, c, e in zip(self.radii, self.q_values, self.correction_values, running)
        ]


def _z_label(model: ModelSpace, z) -> str:
    zv = horizontal_field(model, z)
    return "+".join(f"{c:g}*X{b + 1}" for b, c in enumerate(zv) if c != 0.0) or "0"


def _flux_pass(engine, model, fam, lee, z, radii, quad):
    norm = sphere_volume(model.m) * model.L
    q_vals, c_vals = [], []
    for r in radii:
        pts, weights, normals = shell_nodes(model, r, quad)
        qc = q_flux_components(engine, model, fam, z, pts)
        q_vals.append(flux_model_metric(model, qc, normals, weights) / norm)
        if lee is not None:
            cc = lee_correction_components(model, lee, z, pts)
            c_vals.append(flux_model_metric(model, cc, normals, weights) / norm)
        else:
            c_vals.append(0.0)
    return q_vals, c_vals


def _build_report(model: ModelSpace, z, radii, q_vals, c_vals, quad, tol_conv) -> MassReport:
    rate = 2 - model.m
    q_limit = richardson_limit(radii, q_vals, rate)
    c_limit = richardson_limit(radii, c_vals, rate) if any(c != 0.0 for c in c_vals) else 0.0
    totals = [q + c for q, c in zip(q_vals, c_vals)]
    gap = abs(totals[-1] - totals[-2])
    converged = gap < tol_conv * max(1.0, abs(totals[-1]))
    return MassReport(
        z_label=_z_label(model, z),
        radii=list(map(float, radii)),
        q_values=q_vals,
        correction_values=c_vals,
        q_limit=q_limit,
        correction_limit=c_limit,
        converged=converged,
        tol_conv=tol_conv,
        omega_n=sphere_volume(model.m),
        fiber_length=model.L,
        quad=quad.as_dict(),
        extrapolation_rate=rate,
    )


def riemannian_mass_Q(query: MassQuery) -> MassReport:
    """Normalized limit of shell fluxes of q(Z) for the gauge metric alone."""
    model = query.ws.model
    if query.check_decay:
        require_alf(query.engine, model, query.ws.metric)
    q_vals, c_vals = _flux_pass(query.engine, model, query.ws.metric, None, query.z,
                                query.radii, query.quad)
    return _build_report(model, query.z, query.radii, q_vals, c_vals, query.quad, query.tol_conv)


def conformal_mass(query: MassQuery) -> MassReport:
    """Riemannian mass plus the Lee-form boundary correction."""
    model = query.ws.model
    if query.check_decay:
        require_weyl_alf(query.engine, model, query.ws.metric, query.ws.lee)
    q_vals, c_vals = _flux_pass(query.engine, model, query.ws.metric, query.ws.lee, query.z,
                                query.radii, query.quad)
    return _build_report(model, query.z, query.radii, q_vals, c_vals, query.quad, query.tol_conv)


@dataclass
class ConformalChangeReport:
    """Predicted vs directly recomputed mass shift under g -> f g."""

    z_label: str
    predicted_delta: float
    direct_delta: float
    base_mass: float
    swept_mass: float
    rel_error: float

    def as_dict(self) -> dict:
        return {
            "Z": self.z_label,
            "predicted_delta": self.predicted_delta,
            "direct_delta": self.direct_delta,
            "base_mass": self.base_mass,
            "swept_mass": self.swept_mass,
            "rel_error": self.rel_error,
        }


def conformal_change_prediction(engine: DerivativeEngine, ws: WeylStructure, f: ScalarField, z,
                                radii=None, quad: Optional[QuadratureSpec] = None,
                                recompute: bool = True) -> ConformalChangeReport:
    """Predicted Q_{fg}(Z) - Q_g(Z): half the normalized flux of the df density."""
    model = ws.model
    radii = geometric_radii(40.0, 320.0, 6) if radii is None else list(map(float, radii))
    quad = quad or QuadratureSpec()
    if not is_adapted(engine, model, f):
        raise MassNotDefinedError(
            f"conformal factor {f.name!r} is not adapted: decay probes reject it"
        )
    norm = sphere_volume(model.m) * model.L
    vals = []
    for r in radii:
        pts, weights, normals = shell_nodes(model, r, quad)
        dc = gradient_correction_components(model, f, z, pts)
        vals.append(flux_model_metric(model, dc, normals, weights) / (2.0 * norm))
    predicted = richardson_limit(radii, vals, 2 - model.m)

    direct = base = swept = float("nan")
    rel = float("nan")
    if recompute:
        base_q = MassQuery(ws=ws, z=z, radii=radii, quad=quad, engine=engine, check_decay=False)
        base = riemannian_mass_Q(base_q).q_limit
        swept_fam = conformal_sweep(ws.metric, f)
        swept_ws = WeylStructure(model, swept_fam, ws.lee, gauge=ws.gauge + "~f")
        swept_q = MassQuery(ws=swept_ws, z=z, radii=radii, quad=quad, engine=engine, check_decay=False)
        swept = riemannian_mass_Q(swept_q).q_limit
        direct = swept - base
        rel = abs(predicted - direct) / max(abs(direct), 1e-8)
    return ConformalChangeReport(
        z_label=_z_label(model, z),
        predicted_delta=predicted,
        direct_delta=direct,
        base_mass=base,
        swept_mass=swept,
        rel_error=rel,
    )


@dataclass
class InvarianceReport:
    """Conformal mass evaluated in two adapted gauges of the same structure."""

    z_label: str
    factor: str
    mass_base: float
    mass_swept: float
    abs_difference: float
    rel_difference: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "Z": self.z_label,
            "factor": self.factor,
            "mass_base": self.mass_base,
            "mass_swept": self.mass_swept,
            "abs_difference": self.abs_difference,
            "rel_difference": self.rel_difference,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
        }


def invariance_audit(engine: DerivativeEngine, ws: WeylStructure, f: ScalarField, z,
                     radii=None, quad: Optional[QuadratureSpec] = None,
                     tolerance: float = 1e-4, check_decay: bool = True) -> InvarianceReport:
    """Full two-pipeline audit: mass in gauge g versus gauge f g."""
    model = ws.model
    radii = geometric_radii(40.0, 320.0, 6) if radii is None else list(map(float, radii))
    quad = quad or QuadratureSpec()
    if not is_adapted(engine, model, f):
        raise MassNotDefinedError(f"conformal factor {f.name!r} is not adapted")
    q1 = MassQuery(ws=ws, z=z, radii=radii, quad=quad, engine=engine, check_decay=check_decay)
    m1 = conformal_mass(q1).mass
    ws2 = gauge_change(ws, f)
    q2 = MassQuery(ws=ws2, z=z, radii=radii, quad=quad, engine=engine, check_decay=check_decay)
    m2 = conformal_mass(q2).mass
    diff = abs(m1 - m2)
    rel = diff / max(abs(m1), 1e-8)
    return InvarianceReport(
        z_label=_z_label(model, z),
        factor=f.name,
        mass_base=m1,
        mass_swept=m2,
        abs_difference=diff,
        rel_difference=rel,
        tolerance=tolerance,
        passed=rel < tolerance,
    )


def ricci_positivity_floor(engine: DerivativeEngine, ws: WeylStructure, sample_count: int = 12,
                           seed: int = 7, r_range=(1.5, 6.0)) -> float:
    """Smallest eigenvalue of the symmetrized connection Ricci over sample points.

    A non-negative floor numerically certifies (at the samples) the curvature
    hypothesis under which the mass form is expected to be non-negative.
    """
    from .weyl import weyl_curvature

    model = ws.model
    rng = np.random.default_rng(np.random.SeedSequence([seed, 31]))
    floor = math.inf
    for _ in range(sample_count):
        u = rng.normal(size=model.m)
        u /= np.linalg.norm(u)
        r = rng.uniform(*r_range)
        p = model.point(r * u, rng.uniform(0.0, model.L))
        ric = weyl_curvature(engine, ws, p).Ric
        sym = 0.5 * (ric + ric.T)
        floor = min(floor, float(np.min(np.linalg.eigvalsh(sym))))
    return floor


def mass_matrix(engine: DerivativeEngine, ws: WeylStructure, radii=None,
                quad: Optional[QuadratureSpec] = None, conformal: bool = True,
                tol_conv: float = 1e-6, check_decay: bool = True):
    """Polarized quadratic-form matrix over the horizontal basis fields.

    Returns (matrix, reports) with reports keyed by the queried directions.
    """
    model = ws.model
    m = model.m
    radii = geometric_radii(40.0, 320.0, 6) if radii is None else list(map(float, radii))
    quad = quad or QuadratureSpec()
    compute = conformal_mass if conformal else riemannian_mass_Q
    if check_decay:
        if conformal:
            require_weyl_alf(engine, model, ws.metric, ws.lee)
        else:
            require_alf(engine, model, ws.metric)

    reports = {}

    def value(zvec) -> float:
        key = _z_label(model, zvec)
        if key not in reports:
            q = MassQuery(ws=ws, z=zvec, radii=radii, quad=quad, engine=engine,
                          tol_conv=tol_conv, check_decay=False)
            reports[key] = compute(q)
        return reports[key].mass

    mat = np.zeros((m, m))
    for b in range(m):
        mat[b, b] = value(b)
    for b in range(m):
        for c in range(b + 1, m):
            zvec = np.zeros(m)
            zvec[b] = 1.0
            zvec[c] = 1.0
            mixed = value(zvec)
            mat[b, c] = mat[c, b] = 0.5 * (mixed - mat[b, b] - mat[c, c])
    return mat, reports
