"""Weyl-connection calculus on the fibered chart.

A Weyl structure is held in a fixed gauge: the gauge metric family g, a Lee
form theta, and the model chart.  Acting on a p-form of weight k trivialized
in that gauge, the connection is

    D_X w = nabla^g_X w + (k - p) theta(X) w - theta ^ (X _| w) + X^b ^ (theta# _| w)

and on vector fields

    D_Y X = nabla^g_Y X + theta(Y) X + theta(X) Y - g(X, Y) theta#.

All conformal-frame sums are realized in the fixed model frame through
inverse-Gram contractions with g.  Weighted forms are never implicitly
coerced between gauges; cross-gauge comparisons go through the explicit
f**(k/2) regauging rule.

Conventions: component arrays keep tensor axes first and batch axes last;
a derivative block H[i; J] holds (D_{E_i} w)_J with the direction slot first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import PointMetric, WeightedForm
from .engine import DerivativeEngine, Field, frame_jet1
from .errors import DegreeError, GaugeMismatchError
from .families import LeeFormField, MetricFamily, ScalarField, conformal_sweep
from .model import ModelSpace


@dataclass
class FormFieldSpec:
    """A weighted-form field: component evaluator plus degree, weight, gauge."""

    field: Field
    degree: int
    weight: float
    gauge: str = "g"

    def regauge(self, factor: ScalarField, new_gauge: str) -> "FormFieldSpec":
        k = self.weight

        def fn(coords):
            w = self.field.fn(coords)
            scale = factor.fn(coords) ** (k / 2.0)
            return _scale_tree(w, scale)

        return FormFieldSpec(
            Field(fn, shape=self.field.shape, analytic=self.field.analytic and factor.analytic,
                  name=self.field.name + "~regauged"),
            self.degree, self.weight, new_gauge,
        )


def _scale_tree(tree, scale):
    if isinstance(tree, (list, tuple)):
        return [_scale_tree(e, scale) for e in tree]
    return tree * scale


@dataclass
class WeylStructure:
    """Gauge metric, Lee form and chart; immutable after construction."""

    model: ModelSpace
    metric: MetricFamily
    lee: LeeFormField
    gauge: str = "g"

    def metric_field(self) -> Field:
        return self.metric.as_field()

    def lee_field(self) -> Field:
        return self.lee.as_field()

    def gram(self, coords) -> np.ndarray:
        return self.metric.as_field().values(coords)

    def point_metric(self, coords) -> PointMetric:
        return PointMetric.from_matrix(self.gram(coords))

    def theta(self, coords) -> np.ndarray:
        return self.lee.as_field().values(coords)

    def form(self, degree: int, weight: float, components) -> WeightedForm:
        return WeightedForm(self.model.dim, degree, weight, components, self.gauge)


# ---------------------------------------------------------------------------
# array primitives (form axes first, batch axes last)
# ---------------------------------------------------------------------------


def inv_gram(g: np.ndarray) -> np.ndarray:
    if g.ndim == 2:
        return np.linalg.inv(g)
    moved = np.moveaxis(g, (0, 1), (-2, -1))
    return np.moveaxis(np.linalg.inv(moved), (-2, -1), (0, 1))


def tdot(vec: np.ndarray, arr: np.ndarray, axis: int = 0) -> np.ndarray:
    """Contract a vector (n, batch) into the given tensor axis of arr."""
    moved = np.moveaxis(arr, axis, 0)
    return np.einsum("l...,l...->...", vec, moved)


def outer_front(vec: np.ndarray, arr: np.ndarray, nform: int) -> np.ndarray:
    """vec_i * arr_J with a new leading axis: shape (n,) + form + batch."""
    v = vec.reshape(vec.shape[:1] + (1,) * nform + vec.shape[1:])
    return v * arr[None, ...]


def insert_alt(block: np.ndarray, p: int) -> np.ndarray:
    """Alternating insertion of the leading slot into a p-form block.

    out[i0..ip] = sum_j (-1)^j block[i_j; i_0..^j..i_p]; this is the shuffle
    wedge of a covector slot with a p-form, and the frame assembly of d.
    """
    out = block.copy()
    for j in range(1, p + 1):
        out += (-1) ** j * np.moveaxis(block, 0, j)
    return out


def wedge_cov_into(slot_block: np.ndarray, q: int) -> np.ndarray:
    """Per-leading-index wedge: block[i; a; j1..jq] -> (theta ^ sigma_i)[i; ...]."""
    moved = np.moveaxis(slot_block, 0, q + 1)  # (a, j1..jq, i, batch)
    res = insert_alt(moved, q)
    return np.moveaxis(res, q + 1, 0)


# ---------------------------------------------------------------------------
# connections
# ---------------------------------------------------------------------------


def christoffel(engine: DerivativeEngine, model: ModelSpace, fam: MetricFamily, coords) -> np.ndarray:
    """Levi-Civita coefficients in the model frame: nabla_{E_i} E_j = G[i,j,k] E_k.

    Koszul formula with the frame structure constants; on the anholonomic
    Hopf frame the (i, j) asymmetry equals the structure constants
    (torsion-freeness), on holonomic frames the coefficients are symmetric.
    """
    coords = np.asarray(coords, dtype=float)
    model.require_in_chart(coords)
    g, dg = frame_jet1(engine, model, fam.as_field(), coords)
    C = model.structure_constants(coords)
    cg = np.einsum("ijl...,lk...->ijk...", C, g)
    low = dg + np.moveaxis(dg, (0, 1, 2), (1, 0, 2)) - np.moveaxis(dg, (0, 1, 2), (2, 1, 0))
    low = 0.5 * (low + cg - np.swapaxes(cg, 1, 2) - np.moveaxis(cg, 2, 0))
    return np.einsum("ijk...,kl...->ijl...", low, inv_gram(g))


def metric_compat_residual(engine: DerivativeEngine, model: ModelSpace, fam: MetricFamily, coords) -> float:
    """Max |nabla g| recomputed from the coefficients; zero up to derivative error."""
    g, dg = frame_jet1(engine, model, fam.as_field(), coords)
    gam = christoffel(engine, model, fam, coords)
    nabla = dg - np.einsum("ijl...,lk...->ijk...", gam, g) - np.einsum("ikl...,jl...->ijk...", gam, g)
    return float(np.max(np.abs(nabla)))


def weyl_coeffs(engine: DerivativeEngine, ws: WeylStructure, coords) -> np.ndarray:
    """Connection coefficients of D on TM: D_{E_i} E_j = W[i,j,k] E_k."""
    coords = np.asarray(coords, dtype=float)
    gam = christoffel(engine, ws.model, ws.metric, coords)
    g = ws.gram(coords)
    theta = ws.theta(coords)
    ginv = inv_gram(g)
    theta_sharp = np.einsum("kl...,l...->k...", ginv, theta)
    n = ws.model.dim
    batch = gam.shape[3:]
    eye = np.broadcast_to(np.eye(n).reshape((n, n) + (1,) * len(batch)), (n, n) + batch)
    W = gam.copy()
    W += np.einsum("i...,jk...->ijk...", theta, eye)
    W += np.einsum("j...,ik...->ijk...", theta, eye)
    W -= np.einsum("ij...,k...->ijk...", g, theta_sharp)
    return W


def weyl_connect_vec(engine: DerivativeEngine, ws: WeylStructure, x_field: Field, y_field: Field,
                     coords) -> np.ndarray:
    """D_Y X at a point, for vector fields given by frame-component evaluators."""
    coords = np.asarray(coords, dtype=float)
    W = weyl_coeffs(engine, ws, coords)
    xv, dx = frame_jet1(engine, ws.model, x_field, coords)
    yv = y_field.values(coords)
    directional = np.einsum("i...,ij...->j...", yv, dx)
    correction = np.einsum("i...,k...,ikj...->j...", yv, xv, W)
    return directional + correction


def lie_bracket(engine: DerivativeEngine, model: ModelSpace, x_field: Field, y_field: Field,
                coords) -> np.ndarray:
    """[X, Y] for frame-component vector fields, including the frame brackets."""
    coords = np.asarray(coords, dtype=float)
    xv, dx = frame_jet1(engine, model, x_field, coords)
    yv, dy = frame_jet1(engine, model, y_field, coords)
    out = np.einsum("i...,ij...->j...", xv, dy) - np.einsum("i...,ij...->j...", yv, dx)
    out += np.einsum("i...,j...,ijk...->k...", xv, yv, model.structure_constants(coords))
    return out


# ---------------------------------------------------------------------------
# covariant derivative blocks
# ---------------------------------------------------------------------------


def lc_form_block(dw: np.ndarray, w: np.ndarray, gam: np.ndarray, p: int) -> np.ndarray:
    """Riemannian covariant derivative of a p-form from its frame jet."""
    H = dw.copy()
    for s in range(p):
        wm = np.moveaxis(w, s, 0)  # (l, other form axes, batch)
        contr = np.einsum("ial...,l...->ia...", gam, wm)  # (i, a, other, batch)
        H -= np.moveaxis(contr, 1, 1 + s)
    return H


def covd_form_block(engine: DerivativeEngine, ws: WeylStructure, spec: FormFieldSpec, coords,
                    precomputed=None) -> np.ndarray:
    """All frame derivatives H[i; J] = (D_{E_i} w)_J of a weighted form."""
    if spec.gauge != ws.gauge:
        raise GaugeMismatchError(f"form in gauge {spec.gauge!r}, structure in gauge {ws.gauge!r}")
    coords = np.asarray(coords, dtype=float)
    p, k = spec.degree, spec.weight
    if precomputed is None:
        w, dw = frame_jet1(engine, ws.model, spec.field, coords)
        gam = christoffel(engine, ws.model, ws.metric, coords)
        g = ws.gram(coords)
        theta = ws.theta(coords)
    else:
        w, dw, gam, g, theta = precomputed
    H = lc_form_block(dw, w, gam, p)
    if k != 0 or p != 0:
        H = H + (k - p) * outer_front(theta, w, p)
    if p == 0:
        return H
    ginv = inv_gram(g)
    theta_sharp = np.einsum("ab...,b...->a...", ginv, theta)
    # - theta ^ (E_i _| w): per slot i, wedge theta into the (p-1)-form w[i, ...]
    block = np.moveaxis(outer_front(theta, w, p), 0, 1)  # (i, a, j2..jp, batch)
    H = H - wedge_cov_into(block, p - 1)
    # + (E_i)^flat ^ (theta# _| w)
    tw = tdot(theta_sharp, w, 0)  # (j2..jp, batch)
    H = H + wedge_cov_into(_outer_two(g, tw, p - 1), p - 1)
    return H


def _outer_two(g: np.ndarray, arr: np.ndarray, nform: int) -> np.ndarray:
    """g[i, a] * arr[J]: shape (n, n) + form + batch."""
    gg = g.reshape(g.shape[:2] + (1,) * nform + g.shape[2:])
    return gg * arr[(None, None) + (Ellipsis,)]


def covd_tensor_block(engine: DerivativeEngine, ws: WeylStructure, fld: Field, weight: float,
                      nslots: int, coords, wcoef: np.ndarray | None = None) -> np.ndarray:
    """Frame derivatives of a weight-k (0, q) tensor via slot insertions of D.

    (D_{E_a} S)[j1..jq] = E_a(S) + k theta_a S - sum_s W[a, j_s, l] S[.. l ..].
    For antisymmetric S this agrees with the wedge form of the derivative; the
    two code paths serve as mutual oracles.
    """
    coords = np.asarray(coords, dtype=float)
    S, dS = frame_jet1(engine, ws.model, fld, coords)
    W = weyl_coeffs(engine, ws, coords) if wcoef is None else wcoef
    theta = ws.theta(coords)
    out = dS + weight * outer_front(theta, S, nslots)
    for s in range(nslots):
        Sm = np.moveaxis(S, s, 0)
        contr = np.einsum("ial...,l...->ia...", W, Sm)
        out -= np.moveaxis(contr, 1, 1 + s)
    return out


# ---------------------------------------------------------------------------
# differential operators
# ---------------------------------------------------------------------------


def weyl_derivative_weighted(engine: DerivativeEngine, ws: WeylStructure, spec: FormFieldSpec,
                             x_vec: np.ndarray, coords) -> WeightedForm:
    """D_X w at a point; X given by constant frame components."""
    H = covd_form_block(engine, ws, spec, coords)
    comps = tdot(np.asarray(x_vec, dtype=float), H, 0)
    return ws.form(spec.degree, spec.weight, comps)


def dD(engine: DerivativeEngine, ws: WeylStructure, spec: FormFieldSpec, coords,
       block: np.ndarray | None = None) -> WeightedForm:
    """d^D w = sum_i e*_i ^ D_{E_i} w; degree rises, weight unchanged."""
    p = spec.degree
    if p >= ws.model.dim:
        raise DegreeError("d of a top-degree form")
    H = covd_form_block(engine, ws, spec, coords) if block is None else block
    return ws.form(p + 1, spec.weight, insert_alt(H, p))


def deltaD(engine: DerivativeEngine, ws: WeylStructure, spec: FormFieldSpec, coords,
           block: np.ndarray | None = None) -> WeightedForm:
    """delta^D w = -g^{ab} E_a _| D_{E_b} w; degree drops by 1, weight by 2."""
    p = spec.degree
    coords = np.asarray(coords, dtype=float)
    if p == 0:
        batch = coords.shape[1:]
        return ws.form(0, spec.weight - 2.0, np.zeros(batch))
    H = covd_form_block(engine, ws, spec, coords) if block is None else block
    ginv = inv_gram(ws.gram(coords))
    comps = -np.einsum("ab...,ab...->...", ginv, H)
    return ws.form(p - 1, spec.weight - 2.0, comps)


def form_field_of(ws: WeylStructure, fn: Callable, degree: int, weight: float,
                  analytic: bool = True, name: str = "") -> FormFieldSpec:
    n = ws.model.dim
    return FormFieldSpec(Field(fn, shape=(n,) * degree, analytic=analytic, name=name), degree, weight, ws.gauge)


def derived_form_field(engine: DerivativeEngine, ws: WeylStructure, spec: FormFieldSpec,
                       op: str) -> FormFieldSpec:
    """Lazy d^D / delta^D of a form field, as a new (non-analytic) field."""
    if op == "dD":
        degree, weight = spec.degree + 1, spec.weight
        fn = lambda coords: dD(engine, ws, spec, np.asarray(coords, dtype=float)).components
    elif op == "deltaD":
        degree, weight = spec.degree - 1, spec.weight - 2.0
        fn = lambda coords: deltaD(engine, ws, spec, np.asarray(coords, dtype=float)).components
    else:
        raise ValueError(f"unknown operator {op!r}")
    n = ws.model.dim
    return FormFieldSpec(
        Field(fn, shape=(n,) * degree, analytic=False, name=f"{op}({spec.field.name})"),
        degree, weight, ws.gauge,
    )


def covd_field(engine: DerivativeEngine, ws: WeylStructure, spec: FormFieldSpec) -> Field:
    """Lazy full derivative block H[i; J] of a weighted form field."""
    n = ws.model.dim

    def fn(coords):
        return covd_form_block(engine, ws, spec, np.asarray(coords, dtype=float))

    return Field(fn, shape=(n,) * (spec.degree + 1), analytic=False, name=f"D({spec.field.name})")


def laplacian_D(engine: DerivativeEngine, ws: WeylStructure, spec: FormFieldSpec, coords) -> WeightedForm:
    """Delta^D w = -tr_c(D(Dw)): connection-corrected double frame derivative."""
    coords = np.asarray(coords, dtype=float)
    H_field = covd_field(engine, ws, spec)
    DH = covd_tensor_block(engine, ws, H_field, spec.weight, spec.degree + 1, coords)
    ginv = inv_gram(ws.gram(coords))
    comps = -np.einsum("ab...,ab...->...", ginv, DH)
    return ws.form(spec.degree, spec.weight - 2.0, comps)


def dirac_D(engine: DerivativeEngine, ws: WeylStructure, spec: FormFieldSpec, coords):
    """(delta^D w, d^D w): the two graded pieces of the Dirac-type operator."""
    block = covd_form_block(engine, ws, spec, coords)
    return (deltaD(engine, ws, spec, coords, block=block), dD(engine, ws, spec, coords, block=block))


def faraday(engine: DerivativeEngine, ws: WeylStructure, coords) -> WeightedForm:
    """F^D = d(theta) in the frame, including the anholonomic bracket term."""
    coords = np.asarray(coords, dtype=float)
    theta, dtheta = frame_jet1(engine, ws.model, ws.lee_field(), coords)
    F = dtheta - np.swapaxes(dtheta, 0, 1)
    F -= np.einsum("ijl...,l...->ij...", ws.model.structure_constants(coords), theta)
    return ws.form(2, 0.0, F)


def frame_exterior_derivative(engine: DerivativeEngine, model: ModelSpace, fld: Field, degree: int,
                              coords) -> np.ndarray:
    """Plain d on low-degree frame forms; independent oracle for d^D at k = 0."""
    coords = np.asarray(coords, dtype=float)
    w, dw = frame_jet1(engine, model, fld, coords)
    C = model.structure_constants(coords)
    if degree == 0:
        return dw
    if degree == 1:
        out = dw - np.swapaxes(dw, 0, 1)
        out -= np.einsum("ijl...,l...->ij...", C, w)
        return out
    if degree == 2:
        out = dw - np.moveaxis(dw, (0, 1, 2), (1, 0, 2)) + np.moveaxis(dw, (0, 1, 2), (2, 0, 1))
        br = np.einsum("ijl...,lk...->ijk...", C, w)
        out -= br - np.moveaxis(br, (0, 1, 2), (0, 2, 1)) + np.moveaxis(br, (0, 1, 2), (1, 2, 0))
        return out
    # generic slow path: explicit sum over index tuples (test-scale only)
    n = model.dim
    batch = coords.shape[1:]
    out = np.zeros((n,) * (degree + 1) + batch)
    for idx in np.ndindex(*(n,) * (degree + 1)):
        acc = 0.0
        for j in range(degree + 1):
            rest = idx[:j] + idx[j + 1:]
            acc = acc + (-1) ** j * dw[(idx[j],) + rest]
        for j in range(degree + 1):
            for l in range(j + 1, degree + 1):
                rest = tuple(idx[s] for s in range(degree + 1) if s != j and s != l)
                wc = w[(slice(None),) + rest]
                bracket = np.einsum("c...,c...->...", C[idx[j], idx[l]], wc)
                acc = acc + (-1) ** (j + l) * bracket
        out[idx] = acc
    return out


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


@dataclass
class CurvatureBundle:
    """Curvature data of D at a point, all in the gauge frame."""

    R: np.ndarray            # R[i,j,k,m]: R(E_i,E_j)E_k = R[i,j,k,m] E_m
    R_antisym: np.ndarray    # metric-antisymmetric part, same index layout
    F: np.ndarray            # Faraday 2-form F[i,j]
    Ric: np.ndarray          # Ric[i,j] from the antisymmetric part (weight 0)
    Scal: float              # conformal trace of Ric; weight -2 in this gauge
    split_residual: float    # max |sym part of R - F (x) Id|

    scal_weight: float = -2.0


def lc_riemann(engine: DerivativeEngine, model: ModelSpace, fam: MetricFamily, coords) -> np.ndarray:
    """Riemann tensor of the Levi-Civita connection in the frame: R[i,j,k,m]."""
    coords = np.asarray(coords, dtype=float)
    n = model.dim

    def gam_fn(c):
        return christoffel(engine, model, fam, np.asarray(c, dtype=float))

    gam_field = Field(gam_fn, shape=(n, n, n), analytic=False, name=f"christoffel({fam.name})")
    return _coeff_curvature(engine, model, gam_field, coords)


def _coeff_curvature(engine: DerivativeEngine, model: ModelSpace, coeff_field: Field, coords) -> np.ndarray:
    """R[i,j,k,m] = E_i W[j,k,m] - E_j W[i,k,m] + W[j,k,l] W[i,l,m] - W[i,k,l] W[j,l,m] - C[i,j,l] W[l,k,m]."""
    W, dW = frame_jet1(engine, model, coeff_field, coords)
    C = model.structure_constants(coords)
    first = dW - np.swapaxes(dW, 0, 1)
    quad = np.einsum("jkl...,ilm...->ijkm...", W, W)
    quad = quad - np.swapaxes(quad, 0, 1)
    br = np.einsum("ijl...,lkm...->ijkm...", C, W)
    return first + quad - br


def weyl_curvature(engine: DerivativeEngine, ws: WeylStructure, coords) -> CurvatureBundle:
    """Full curvature bundle of D: tensor, split, Faraday, Ricci, scalar."""
    coords = np.asarray(coords, dtype=float)
    n = ws.model.dim

    def w_fn(c):
        return weyl_coeffs(engine, ws, np.asarray(c, dtype=float))

    w_field = Field(w_fn, shape=(n, n, n), analytic=False, name="weyl_coeffs")
    R = _coeff_curvature(engine, ws.model, w_field, coords)
    F = faraday(engine, ws, coords).components
    g = ws.gram(coords)
    ginv = inv_gram(g)

    low = np.einsum("ijkl...,lm...->ijkm...", R, g)        # g(R(Ei,Ej)Ek, Em)
    sym = 0.5 * (low + np.swapaxes(low, 2, 3))
    asym = 0.5 * (low - np.swapaxes(low, 2, 3))
    split = sym - np.einsum("ij...,km...->ijkm...", F, g)
    R_antisym = np.einsum("ijkl...,lm...->ijkm...", asym, ginv)
    ric = np.einsum("ab...,iabj...->ij...", ginv, asym)
    scal = np.einsum("ij...,ij...->...", ginv, ric)
    return CurvatureBundle(
        R=R, R_antisym=R_antisym, F=F, Ric=ric, Scal=scal,
        split_residual=float(np.max(np.abs(split))),
    )


def ricci_trace_convention(R: np.ndarray) -> np.ndarray:
    """Ric(X, Y) = trace(Z -> R(Z, X) Y); metric-free trace for diagnostics."""
    n = R.shape[0]
    out = 0.0
    for a in range(n):
        out = out + R[a, :, :, a]
    return out


# ---------------------------------------------------------------------------
# gauge change
# ---------------------------------------------------------------------------


def gauge_change(ws: WeylStructure, factor: ScalarField, new_gauge: str | None = None) -> WeylStructure:
    """Same Weyl connection in the gauge f*g: Lee form becomes theta - df/(2f)."""
    model = ws.model
    n = model.dim
    new_metric = conformal_sweep(ws.metric, factor)
    base_lee = ws.lee

    def lee_fn(coords):
        th = base_lee.fn(coords)
        f = factor.fn(coords)
        gf = factor.grad_fn(coords)
        return [th[i] - gf[i] / (2.0 * f) for i in range(n)]

    dec_t = base_lee.decay_theta
    if factor.decay_fm1 is not None and dec_t is not None:
        dec_t = max(dec_t, factor.decay_fm1 - 1)
    new_lee = LeeFormField(
        f"{base_lee.name}-dlog({factor.name})/2", model, lee_fn,
        params={**base_lee.params, "factor": factor.name},
        analytic=base_lee.analytic and factor.analytic,
        decay_theta=dec_t, decay_dtheta=base_lee.decay_dtheta,
    )
    return WeylStructure(model, new_metric, new_lee, new_gauge or (ws.gauge + "~" + factor.name))
