"""Identity suite behavior: residuals, sign resolution, quadrature order."""

import numpy as np
import pytest

from weylmass.families import flat_product, zero_lee
from weylmass.identities import (IdentityReport, _rng, bochner_divergence_residual,
                                 bochner_integral_sides, bochner_pointwise_residual,
                                 check_bochner_integral, check_bochner_pointwise,
                                 check_codifferential_transform, check_curvature_split,
                                 check_d_squared, check_d_transform, check_torsion,
                                 check_weighted_derivative_oracle, random_form_field,
                                 resolve_bochner_sign, run_suite, trial_point, trial_structure)
from weylmass.quadrature import QuadratureSpec
from weylmass.weyl import WeylStructure, form_field_of


def test_identity_report_pass_iff_within_tolerance():
    rep = IdentityReport("x", 3, 2e-6, 1e-6, 2e-6 < 1e-6)
    assert not rep.passed
    rep2 = IdentityReport("x", 3, 5e-7, 1e-6, True)
    assert rep2.passed


def test_operator_identity_checks_small_runs(engine, model):
    for check in (check_torsion, check_d_transform, check_codifferential_transform,
                  check_d_squared, check_curvature_split, check_weighted_derivative_oracle):
        rep = check(engine, model, seed=3, trials=12, tolerance=1e-6)
        assert rep.passed, f"{rep.identity}: {rep.max_residual}"


def test_bochner_flat_trivial_case(engine, model):
    ws = WeylStructure(model, flat_product(model), zero_lee(model))
    spec = form_field_of(ws, lambda c: [1.0, 0.0, 0.0, 0.0], degree=1, weight=0.0)
    p = model.point([2.0, 0.4, -0.6], 0.2)
    for sign in (+1.0, -1.0):
        res, ric_mag, f_term = bochner_pointwise_residual(engine, ws, spec, p, sign)
        assert res < 1e-10 and ric_mag < 1e-12 and f_term < 1e-12
    assert bochner_divergence_residual(engine, ws, spec, p) < 1e-10


def test_bochner_sign_unique_and_stable(engine, model):
    rep = resolve_bochner_sign(engine, model, seed=11, trials=8)
    assert rep.passed
    assert rep.details["resolved_sign"] == 1.0
    assert rep.details["min_loser_winner_ratio"] > 100.0


def test_bochner_loser_residual_tracks_twice_ricci(engine, model):
    rng = _rng(31, 17, 2)
    ws = trial_structure(model, 31, 2, with_lee=False)
    spec = random_form_field(ws, rng, 1, 0.0)
    p = trial_point(model, rng)
    r_plus, ric_mag, _ = bochner_pointwise_residual(engine, ws, spec, p, +1.0)
    r_minus, _, _ = bochner_pointwise_residual(engine, ws, spec, p, -1.0)
    assert r_plus < 1e-8
    assert r_minus == pytest.approx(2.0 * ric_mag, rel=1e-6)


def test_contracted_faraday_term_vanishes(engine, model):
    worst = 0.0
    for trial in range(6):
        rng = _rng(32, 18, trial)
        ws = trial_structure(model, 32, trial)
        spec = random_form_field(ws, rng, 1, 1.0)
        _, _, f_term = bochner_pointwise_residual(engine, ws, spec, trial_point(model, rng), +1.0)
        worst = max(worst, f_term)
    assert worst < 1e-10


@pytest.mark.parametrize("weight", [-2.0, 0.0, 0.5, 1.0])
def test_bochner_divergence_holds_at_any_weight(engine, model, weight):
    rng = _rng(33, 19, int(weight * 10) % 97)
    ws = trial_structure(model, 33, 1)
    spec = random_form_field(ws, rng, 1, weight)
    res = bochner_divergence_residual(engine, ws, spec, trial_point(model, rng))
    assert res < 1e-8


def test_bochner_integral_compact_support(engine, model):
    """Compactly supported alpha: both sides vanish together."""
    ws = trial_structure(model, 34, 1, wave_scale=0.4)
    n = model.dim

    def bump_fn(c):
        c = [np.asarray(ci, dtype=float) for ci in c]
        r = np.sqrt(c[0] ** 2 + c[1] ** 2 + c[2] ** 2)
        s = (2.0 * r - (1.9 + 2.3)) / (2.3 - 1.9)
        bump = np.where(np.abs(s) < 1.0, np.maximum(1.0 - s**2, 0.0) ** 5, 0.0)
        zero = np.zeros_like(bump)
        return [bump, 0.3 * bump, zero, zero]

    from weylmass.engine import Field
    from weylmass.weyl import FormFieldSpec

    spec = FormFieldSpec(Field(bump_fn, shape=(n,), analytic=False), 1, 0.0, ws.gauge)
    # annulus strictly containing the support
    vol, bnd = bochner_integral_sides(engine, ws, spec, 1.6, 2.6, QuadratureSpec(64, 8, 48))
    assert abs(bnd) < 1e-12
    assert abs(vol) < 1e-4


def test_bochner_integral_flat_harmonic(engine, model):
    ws = WeylStructure(model, flat_product(model), zero_lee(model))
    spec = form_field_of(ws, lambda c: [1.0, 0.0, 0.0, 0.0], degree=1, weight=0.0)
    vol, bnd = bochner_integral_sides(engine, ws, spec, 1.6, 2.4, QuadratureSpec(26, 8, 6))
    assert abs(vol) < 1e-10 and abs(bnd) < 1e-10


def test_bochner_integral_random_trials(engine, model):
    rep = check_bochner_integral(engine, model, seed=42, trials=2)
    assert rep.passed
    assert rep.max_residual < 1e-4


def test_bochner_integral_quadrature_order(engine, model):
    coarse = check_bochner_integral(engine, model, seed=42, trials=2,
                                    quad=QuadratureSpec(sphere=30, fiber=6, radial=4))
    fine = check_bochner_integral(engine, model, seed=42, trials=2)
    assert fine.max_residual < coarse.max_residual / 4.0


def test_run_suite_passes_and_serializes(engine, model):
    reports = run_suite(engine, model, seed=4, trials=6, bochner_trials=3, integral_trials=1)
    assert all(r.passed for r in reports)
    names = [r.identity for r in reports]
    assert names == ["torsion_free", "d_transform", "codifferential_transform",
                     "d_squared_curvature", "curvature_split", "bochner_sign",
                     "bochner_pointwise", "bochner_divergence", "bochner_integral"]
    for r in reports:
        d = r.as_dict()
        assert d["passed"] == r.passed and "max_residual" in d


def test_run_suite_corrupted_sign_fails(engine, model):
    reports = run_suite(engine, model, seed=4, trials=4, bochner_trials=3, integral_trials=1,
                        corrupt_bochner_sign=True)
    failed = {r.identity for r in reports if not r.passed}
    assert "bochner_pointwise" in failed
    assert "bochner_divergence" in failed


def test_fd_mode_meets_relaxed_tolerance(fd_engine, model):
    for check in (check_torsion, check_d_transform, check_codifferential_transform,
                  check_d_squared, check_curvature_split):
        rep = check(fd_engine, model, seed=3, trials=8, tolerance=1e-5)
        assert rep.passed, f"{rep.identity}: {rep.max_residual}"
    rep = check_bochner_pointwise(fd_engine, model, seed=3, trials=3, tolerance=1e-5)
    assert rep.passed
