"""Numerical Weyl-connection calculus and ALF-type mass integrals.

The package builds circle-fibered model charts, differentiates analytic
tensor fields on them exactly (dual numbers) or by Richardson-extrapolated
finite differences, realizes the conformal-connection operators d^D,
delta^D, Lap^D and their curvatures, and verifies the Bochner-type
identities and mass gauge laws by independent numerical paths.
"""

from .algebra import PointMetric, TensorValue, WeightedForm, flat, form_inner, hodge_star, interior, sharp, wedge
from .engine import DerivativeEngine, Field
from .errors import (ChartDomainError, ConfigError, DegreeError, DimensionMismatchError,
                     GaugeMismatchError, MassNotDefinedError)
from .families import LeeFormField, MetricFamily, ScalarField, build_lee, build_metric, build_scalar
from .model import ModelSpace, sphere_volume
from .weyl import FormFieldSpec, WeylStructure, gauge_change

__version__ = "0.1.0"

__all__ = [
    "ChartDomainError",
    "ConfigError",
    "DegreeError",
    "DerivativeEngine",
    "DimensionMismatchError",
    "Field",
    "FormFieldSpec",
    "GaugeMismatchError",
    "LeeFormField",
    "MassNotDefinedError",
    "MetricFamily",
    "ModelSpace",
    "PointMetric",
    "ScalarField",
    "TensorValue",
    "WeightedForm",
    "WeylStructure",
    "build_lee",
    "build_metric",
    "build_scalar",
    "flat",
    "form_inner",
    "gauge_change",
    "hodge_star",
    "interior",
    "sharp",
    "sphere_volume",
    "wedge",
]
