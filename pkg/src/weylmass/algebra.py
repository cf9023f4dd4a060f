"""Pointwise multilinear algebra over a frame at a single chart point.

Tensors are dense component arrays in a fixed frame.  Differential forms are
stored as fully antisymmetric arrays with the determinant (shuffle) wedge
convention and no 1/p!q! prefactors, so ``(dx1 ^ dx2)(e1, e2) = 1``.  The
inner product on p-forms is the Gram-determinant product, which makes
``a ^ star(b) = <a, b> vol`` hold exactly.

Weighted forms carry a conformal weight ``k`` and the name of the metric
gauge that trivializes them; rescaling the gauge metric by a positive factor
``f`` multiplies the components by ``f**(k/2)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegreeError, DimensionMismatchError, GaugeMismatchError

_ATOL = 1e-12


@dataclass(frozen=True)
class TensorValue:
    """Pointwise multilinear array: ``p`` contravariant and ``q`` covariant slots."""

    dim: int
    p: int
    q: int
    components: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", comps)
        if comps.shape != (self.dim,) * (self.p + self.q):
            raise DimensionMismatchError(
                f"components shape {comps.shape} does not match valence ({self.p},{self.q}) in dim {self.dim}"
            )

    @classmethod
    def vector(cls, comps) -> "TensorValue":
        comps = np.asarray(comps, dtype=float)
        return cls(comps.shape[0], 1, 0, comps)

    @classmethod
    def covector(cls, comps) -> "TensorValue":
        comps = np.asarray(comps, dtype=float)
        return cls(comps.shape[0], 0, 1, comps)


@dataclass(frozen=True)
class PointMetric:
    """Metric at a point: matrix, inverse, determinant and orientation."""

    dim: int
    g: np.ndarray
    g_inv: np.ndarray
    det: float
    orientation: int = 1

    @classmethod
    def from_matrix(cls, g, orientation: int = 1) -> "PointMetric":
        g = np.asarray(g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionMismatchError(f"metric matrix must be square, got {g.shape}")
        if np.max(np.abs(g - g.T)) > _ATOL:
            raise ValueError("metric matrix is not symmetric within 1e-12")
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise ValueError("metric matrix is not positive definite") from exc
        det = float(np.linalg.det(g))
        return cls(g.shape[0], g, np.linalg.inv(g), det, orientation)

    @property
    def sqrt_det(self) -> float:
        return math.sqrt(self.det)


@dataclass(frozen=True)
class WeightedForm:
    """Antisymmetric form plus conformal weight and trivializing gauge tag."""

    dim: int
    degree: int
    weight: float
    components: np.ndarray
    gauge: str = "g"

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", comps)
        if self.degree > self.dim:
            raise DegreeError(f"degree {self.degree} exceeds dimension {self.dim}")
        if comps.shape[: self.degree] != (self.dim,) * self.degree:
            raise DimensionMismatchError(
                f"components shape {comps.shape} does not match degree {self.degree} in dim {self.dim}"
            )

    def regauge(self, factor: float, new_gauge: str) -> "WeightedForm":
        """Components in the gauge ``f*g``: multiply by ``f**(k/2)``."""
        return WeightedForm(
            self.dim, self.degree, self.weight, self.components * factor ** (self.weight / 2.0), new_gauge
        )

    def antisymmetry_defect(self) -> float:
        if self.degree < 2:
            return 0.0
        c = self.components
        worst = 0.0
        for i in range(self.degree - 1):
            axes = list(range(self.degree))
            axes[i], axes[i + 1] = axes[i + 1], axes[i]
            worst = max(worst, float(np.max(np.abs(c + np.transpose(c, axes)))))
        return worst


def antisymmetrize(arr: np.ndarray) -> np.ndarray:
    """Full alternation: average over index permutations with signs."""
    k = arr.ndim
    out = np.zeros_like(arr)
    for perm in itertools.permutations(range(k)):
        out += _perm_sign(perm) * np.transpose(arr, perm)
    return out / math.factorial(k)


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, cycle = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            cycle += 1
        if cycle % 2 == 0:
            sign = -sign
    return sign


@lru_cache(maxsize=8)
def levi_civita(dim: int) -> np.ndarray:
    eps = np.zeros((dim,) * dim)
    for perm in itertools.permutations(range(dim)):
        eps[perm] = _perm_sign(perm)
    return eps


def sharp(alpha: TensorValue, metric: PointMetric) -> TensorValue:
    """Raise a covector with the inverse metric."""
    if alpha.p != 0 or alpha.q != 1:
        raise DimensionMismatchError("sharp expects a degree-1 covariant tensor")
    if alpha.dim != metric.dim:
        raise DimensionMismatchError(f"covector dim {alpha.dim} != metric dim {metric.dim}")
    return TensorValue.vector(metric.g_inv @ alpha.components)


def flat(vec: TensorValue, metric: PointMetric) -> TensorValue:
    """Lower a vector with the metric."""
    if vec.p != 1 or vec.q != 0:
        raise DimensionMismatchError("flat expects a degree-1 contravariant tensor")
    if vec.dim != metric.dim:
        raise DimensionMismatchError(f"vector dim {vec.dim} != metric dim {metric.dim}")
    return TensorValue.covector(metric.g @ vec.components)


def wedge(a: WeightedForm, b: WeightedForm) -> WeightedForm:
    """Shuffle-convention wedge; weights add, gauges must agree."""
    if a.gauge != b.gauge:
        raise GaugeMismatchError(f"gauge mismatch: {a.gauge!r} vs {b.gauge!r} (regauge first)")
    if a.dim != b.dim:
        raise DimensionMismatchError("wedge operands live in different dimensions")
    p, q = a.degree, b.degree
    if p + q > a.dim:
        raise DegreeError(f"degree {p}+{q} exceeds dimension {a.dim}")
    if p == 0:
        comps = float(a.components) * b.components
    elif q == 0:
        comps = float(b.components) * a.components
    else:
        outer = np.multiply.outer(a.components, b.components)
        comps = antisymmetrize(outer) * (math.factorial(p + q) / (math.factorial(p) * math.factorial(q)))
    return WeightedForm(a.dim, p + q, a.weight + b.weight, comps, a.gauge)


def interior(vec: TensorValue, w: WeightedForm) -> WeightedForm:
    """Interior product: contract the vector into the first slot."""
    if vec.p != 1 or vec.q != 0:
        raise DimensionMismatchError("interior product expects a vector")
    if w.degree == 0:
        raise DegreeError("interior product of a 0-form is undefined")
    if vec.dim != w.dim:
        raise DimensionMismatchError("vector and form dimensions differ")
    comps = np.tensordot(vec.components, w.components, axes=(0, 0))
    return WeightedForm(w.dim, w.degree - 1, w.weight, comps, w.gauge)


def volume_form(metric: PointMetric, gauge: str = "g") -> WeightedForm:
    n = metric.dim
    comps = metric.orientation * metric.sqrt_det * levi_civita(n)
    return WeightedForm(n, n, 0.0, comps, gauge)


def raise_all(comps: np.ndarray, metric: PointMetric) -> np.ndarray:
    out = comps
    for axis in range(comps.ndim):
        out = np.moveaxis(np.tensordot(metric.g_inv, out, axes=(1, axis)), 0, axis)
    return out


def form_inner(a: WeightedForm, b: WeightedForm, metric: PointMetric) -> float:
    """Gram inner product of same-degree forms: <dx^I, dx^I> = 1 for orthonormal frames."""
    if a.degree != b.degree:
        raise DegreeError(f"degree mismatch: {a.degree} vs {b.degree}")
    if a.gauge != b.gauge:
        raise GaugeMismatchError(f"gauge mismatch: {a.gauge!r} vs {b.gauge!r}")
    if a.degree == 0:
        return float(a.components) * float(b.components)
    raised = raise_all(b.components, metric)
    return float(np.tensordot(a.components, raised, axes=a.degree)) / math.factorial(a.degree)


def hodge_star(w: WeightedForm, metric: PointMetric) -> WeightedForm:
    """Hodge dual pinned by ``a ^ star(b) = <a, b> vol``."""
    if w.dim != metric.dim:
        raise DimensionMismatchError("form and metric dimensions differ")
    n, p = w.dim, w.degree
    eps = levi_civita(n)
    if p == 0:
        comps = float(w.components) * metric.sqrt_det * eps * metric.orientation
        return WeightedForm(n, n, w.weight, comps, w.gauge)
    raised = raise_all(w.components, metric)
    comps = np.tensordot(raised, eps, axes=(tuple(range(p)), tuple(range(p))))
    comps *= metric.orientation * metric.sqrt_det / math.factorial(p)
    return WeightedForm(n, n - p, w.weight, comps, w.gauge)
