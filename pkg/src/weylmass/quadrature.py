"""Quadrature on spheres, fibers, radial shells and annuli of the chart.

Sphere rules return unit directions and weights summing to vol(S^(m-1)).
The default for m = 3 is the classic 26-point octahedral rule (exact through
degree 7), rotated by a fixed generic rotation so no node sits on the fiber
chart seam.  A Gauss-Jacobi x azimuth product rule covers arbitrary m and
arbitrary density (used for refined-quadrature cross checks).

Hypersurface fluxes over {r = const} use the product measure
r^(m-1) dsigma x dt, which is exact for the model metric; fluxes measured
with a curved metric g go through the Leray form sqrt(det G) g^{-1}(w, dr).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .model import ModelSpace

# 26-point octahedral rule on S^2: 6 axis points, 12 edge midpoints, 8 cube corners.
_W26 = (1.0 / 21.0, 4.0 / 105.0, 27.0 / 840.0)

# Fixed generic rotation keeping rule nodes off coordinate axes (and the Hopf seam).
_TILT = np.array([0.41, 0.79, 1.13])


def _rotation(m: int) -> np.ndarray:
    rot = np.eye(m)
    for axis, ang in zip(((0, 1), (1, 2), (0, 2)), _TILT):
        if axis[1] < m:
            R = np.eye(m)
            c, s = math.cos(ang), math.sin(ang)
            R[axis[0], axis[0]] = c
            R[axis[1], axis[1]] = c
            R[axis[0], axis[1]] = -s
            R[axis[1], axis[0]] = s
            rot = R @ rot
    return rot


def sphere_rule_oct26() -> tuple[np.ndarray, np.ndarray]:
    """26-node octahedral rule on S^2, weights scaled to total 4*pi."""
    pts, wts = [], []
    for i in range(3):
        for s in (-1.0, 1.0):
            u = np.zeros(3)
            u[i] = s
            pts.append(u)
            wts.append(_W26[0])
    inv = 1.0 / math.sqrt(2.0)
    for i in range(3):
        for j in range(i + 1, 3):
            for si in (-1.0, 1.0):
                for sj in (-1.0, 1.0):
                    u = np.zeros(3)
                    u[i], u[j] = si * inv, sj * inv
                    pts.append(u)
                    wts.append(_W26[1])
    inv3 = 1.0 / math.sqrt(3.0)
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            for sz in (-1.0, 1.0):
                pts.append(np.array([sx, sy, sz]) * inv3)
                wts.append(_W26[2])
    pts = np.array(pts) @ _rotation(3).T
    wts = np.array(wts) * (4.0 * math.pi)
    return pts.T, wts


def sphere_rule_product(m: int, n_polar: int) -> tuple[np.ndarray, np.ndarray]:
    """Recursive Gauss-Jacobi x trapezoid rule on S^(m-1); exact total measure."""
    if m == 2:
        n_az = max(4, 2 * n_polar)
        ang = 2.0 * math.pi * (np.arange(n_az) + 0.31) / n_az
        pts = np.stack([np.cos(ang), np.sin(ang)])
        wts = np.full(n_az, 2.0 * math.pi / n_az)
        return pts, wts
    alpha = (m - 3) / 2.0
    u, wu = roots_jacobi(n_polar, alpha, alpha)
    sub_pts, sub_wts = sphere_rule_product(m - 1, n_polar)
    sin_t = np.sqrt(1.0 - u**2)
    pts = np.concatenate(
        [sin_t[None, :, None] * sub_pts[:, None, :], np.broadcast_to(u[None, :, None], (1, len(u), sub_pts.shape[1]))],
        axis=0,
    )
    wts = wu[:, None] * sub_wts[None, :]
    pts = pts.reshape(m, -1)
    wts = wts.reshape(-1)
    if m > 3:
        return pts, wts
    rot = _rotation(3)
    return rot @ pts, wts


def sphere_rule(m: int, nodes: int = 26) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions (m, N) and weights (N,) summing to vol(S^(m-1))."""
    if m == 3 and nodes <= 26:
        return sphere_rule_oct26()
    n_polar = max(4, int(round(math.sqrt(nodes))))
    return sphere_rule_product(m, n_polar)


def fiber_rule(L: float, nodes: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Uniform periodic (trapezoid) rule on the fiber, spectrally accurate."""
    t = (np.arange(nodes) + 0.37) * (L / nodes)
    return t, np.full(nodes, L / nodes)


def gauss_legendre(a: float, b: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


@dataclass
class QuadratureSpec:
    """Node counts for the flux and annulus integrators."""

    sphere: int = 26
    fiber: int = 16
    radial: int = 8

    def as_dict(self) -> dict:
        return {"sphere": self.sphere, "fiber": self.fiber, "radial": self.radial}


def shell_nodes(model: ModelSpace, r: float, quad: QuadratureSpec):
    """Batched chart points on {|x| = r} with product weights (area = r^(m-1) w_s w_f)."""
    u, wu = sphere_rule(model.m, quad.sphere)
    t, wt = fiber_rule(model.L, quad.fiber)
    nu, nt = u.shape[1], t.shape[0]
    x = r * np.repeat(u, nt, axis=1)
    tt = np.tile(t, nu)
    pts = np.concatenate([x, tt[None, :]], axis=0)
    weights = r ** (model.m - 1) * np.repeat(wu, nt) * np.tile(wt, nu)
    normals = np.repeat(u, nt, axis=1)
    return pts, weights, normals


def flux_model_metric(model: ModelSpace, oneform_values: np.ndarray, normals: np.ndarray,
                      weights: np.ndarray) -> float:
    """Flux of a 1-form through the shell w.r.t. the model metric h."""
    contracted = np.sum(oneform_values[: model.m] * normals, axis=0)
    return float(np.sum(contracted * weights))


def flux_curved_metric(model: ModelSpace, oneform_values: np.ndarray, gram: np.ndarray,
                       normals: np.ndarray, weights: np.ndarray) -> float:
    """Flux of a 1-form through the shell w.r.t. a curved metric g.

    Uses the Leray identity: integrand = sqrt(det G) g^{-1}(w, dr) against the
    model product measure, equal to the hypersurface integral of *_g w with
    outward orientation.
    """
    moved = np.moveaxis(gram, (0, 1), (-2, -1))
    ginv = np.moveaxis(np.linalg.inv(moved), (-2, -1), (0, 1))
    dets = np.linalg.det(moved)
    dr = np.concatenate([normals, np.zeros((1, normals.shape[1]))], axis=0)
    contracted = np.einsum("ab...,a...,b...->...", ginv, oneform_values, dr)
    return float(np.sum(np.sqrt(dets) * contracted * weights))


def annulus_nodes(model: ModelSpace, r1: float, r2: float, quad: QuadratureSpec):
    """Batched chart points filling {r1 <= r <= r2} with model volume weights."""
    r, wr = gauss_legendre(r1, r2, quad.radial)
    u, wu = sphere_rule(model.m, quad.sphere)
    t, wt = fiber_rule(model.L, quad.fiber)
    R, U, T = np.meshgrid(np.arange(len(r)), np.arange(u.shape[1]), np.arange(len(t)), indexing="ij")
    R, U, T = R.ravel(), U.ravel(), T.ravel()
    x = r[R] * u[:, U]
    pts = np.concatenate([x, t[T][None, :]], axis=0)
    weights = r[R] ** (model.m - 1) * wr[R] * wu[U] * wt[T]
    return pts, weights


def volume_integral_curved(gram: np.ndarray, values: np.ndarray, weights: np.ndarray) -> float:
    """Integral of a scalar density component against vol_g = sqrt(det G) vol_h."""
    moved = np.moveaxis(gram, (0, 1), (-2, -1))
    dets = np.linalg.det(moved)
    return float(np.sum(values * np.sqrt(dets) * weights))
