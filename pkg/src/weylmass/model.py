"""Circle-fibered chart over the exterior of a ball, and its frame calculus.

The chart covers ``X -> R^m \\ B_R`` with fiber coordinate ``t`` of period
``L``.  Points are coordinate arrays ``(x_1..x_m, t)``.  All tensor fields
are expressed in the orthonormal coframe ``(dx_1..dx_m, eta)`` of the model
metric ``h = dx^2 + eta^2``, where ``eta = dt + A_a(x) dx^a`` is the fiber
connection with ``eta(T) = 1``.

The dual frame is ``X_a = d/dx_a - A_a d/dt`` and ``T = d/dt``.  For the
trivial fibration ``A = 0`` and the frame is holonomic.  For the Hopf
fibration (m = 3 only) the connection is the charge-one monopole potential,
whose curvature ``d eta`` integrates to ``L`` over the unit sphere; the
potential has a coordinate seam along the negative x3-axis, but ``d eta``
itself is seam-free and all bracket bookkeeping goes through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartDomainError

FIBRATIONS = ("trivial", "hopf")


def sphere_volume(m: int) -> float:
    """Volume of the unit sphere S^(m-1)."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


@dataclass(frozen=True)
class ModelSpace:
    """Fibered chart data: base dimension, excised radius, fiber length, fibration."""

    m: int = 3
    R: float = 1.0
    L: float = 2.0 * math.pi
    fibration: str = "trivial"

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"base dimension m must be >= 3, got {self.m}")
        if self.fibration not in FIBRATIONS:
            raise ValueError(f"unknown fibration {self.fibration!r}")
        if self.fibration == "hopf" and self.m != 3:
            raise ValueError("hopf fibration requires m = 3")
        if self.R <= 0 or self.L <= 0:
            raise ValueError("R and L must be positive")

    @property
    def dim(self) -> int:
        return self.m + 1

    # -- coordinates --------------------------------------------------------

    def split(self, coords):
        coords = np.asarray(coords, dtype=float)
        return coords[: self.m], coords[self.m]

    def radius(self, coords):
        x, _ = self.split(coords)
        return np.sqrt(np.sum(x * x, axis=0))

    def require_in_chart(self, coords):
        r = self.radius(coords)
        if np.any(r <= self.R):
            raise ChartDomainError(f"point at r={np.min(r):.6g} inside excised ball of radius {self.R}")

    def point(self, x, t: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, np.atleast_1d(float(t))])

    # -- fiber connection ----------------------------------------------------

    def connection_potential(self, x) -> np.ndarray:
        """Components A_a(x) of the horizontal part of eta (eta = dt + A_a dx^a)."""
        x = np.asarray(x, dtype=float)
        if self.fibration == "trivial":
            return np.zeros_like(x)
        r = np.sqrt(np.sum(x * x, axis=0))
        rho2 = x[0] ** 2 + x[1] ** 2
        if np.any(rho2 / np.maximum(r, 1e-300) ** 2 < 1e-24):
            raise ChartDomainError("point on the fiber-chart seam (x3-axis); move quadrature nodes off-axis")
        pref = (self.L / (4.0 * math.pi)) * (1.0 - x[2] / r) / rho2
        A = np.zeros_like(x)
        A[0] = -pref * x[1]
        A[1] = pref * x[0]
        return A

    def deta(self, x) -> np.ndarray:
        """Curvature 2-form d(eta) on frame pairs: omega[a, b] = d(eta)(X_a, X_b)."""
        x = np.asarray(x, dtype=float)
        batch = x.shape[1:]
        omega = np.zeros((self.m, self.m) + batch)
        if self.fibration == "hopf":
            r3 = np.sum(x * x, axis=0) ** 1.5
            c = self.L / (4.0 * math.pi)
            omega[0, 1] = c * x[2] / r3
            omega[1, 2] = c * x[0] / r3
            omega[2, 0] = c * x[1] / r3
            omega[1, 0] = -omega[0, 1]
            omega[2, 1] = -omega[1, 2]
            omega[0, 2] = -omega[2, 0]
        return omega

    def structure_constants(self, coords) -> np.ndarray:
        """Frame brackets: [E_i, E_j] = C[i, j, k] E_k.  Only [X_a, X_b] = -omega_ab T."""
        coords = np.asarray(coords, dtype=float)
        x, _ = self.split(coords)
        batch = coords.shape[1:]
        n = self.dim
        C = np.zeros((n, n, n) + batch)
        if self.fibration == "hopf":
            C[: self.m, : self.m, self.m] = -self.deta(x)
        return C

    def lc_coeffs_h(self, coords) -> np.ndarray:
        """Levi-Civita coefficients of h in the frame: nabla^h_{E_i} E_j = G[i,j,k] E_k.

        h has constant (identity) frame components, so only bracket terms
        survive the Koszul formula.
        """
        C = self.structure_constants(coords)
        return 0.5 * (C - np.swapaxes(C, 1, 2) - np.moveaxis(C, 2, 0))

    # -- frame derivatives ----------------------------------------------------

    def frame_from_coord(self, coord_derivs: np.ndarray, x) -> np.ndarray:
        """Convert coordinate-derivative axes (leading) to frame directions.

        ``E_a F = dF/dx_a - A_a dF/dt`` and ``T F = dF/dt``.  The potential is
        only evaluated when fiber dependence is actually present, keeping the
        Hopf seam out of computations with invariant fields.
        """
        out = np.array(coord_derivs, dtype=float, copy=True)
        dt = coord_derivs[self.m]
        if self.fibration != "trivial" and np.any(dt != 0.0):
            A = self.connection_potential(np.asarray(x, dtype=float))
            for a in range(self.m):
                out[a] = out[a] - A[a] * dt
        return out
