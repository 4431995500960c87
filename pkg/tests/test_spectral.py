import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slcones import integrable as ig
from slcones import spectral as sp
from slcones.cone2 import build_strands, derive_params, natural_periods
from slcones.errors import ConstancyViolationError

POINTS = [(0.7, 1.9), (2.9, 0.4), (1.6, 3.3), (3.8, 4.4)]


def test_closed_forms():
    for theta, B, C in ((0.3, 0.2, 0.9), (2.0, -0.5, 0.1)):
        D, _ = sp.closed_form_constants(derive_params(theta, B, C))
        assert abs(D - 1 / 12) < 1e-15
    _, E = sp.closed_form_constants(derive_params(0.0, 0.0, 0.5))
    assert abs(E + 1 / 144) < 1e-15
    assert sp.closed_form_constants(derive_params(0.7, 1.0, -1.0))[1] == 0.0


def test_pointwise_constants_are_constant(generic_cone):
    p, strands, *_ = generic_cone
    sc = sp.spectral_constants(p, strands, POINTS)
    assert sc.D_spread < 1e-10 and sc.E_spread < 1e-10
    assert sc.D_defect < 1e-10
    assert sc.E_defect_negated < 1e-10


def test_spread_violation(monkeypatch, generic_cone):
    p, strands, *_ = generic_cone
    vals = iter([(0.1, 0.0), (0.2, 0.0)])
    monkeypatch.setattr(sp, "pointwise_constants", lambda kf, xi: next(vals))
    with pytest.raises(ConstancyViolationError):
        sp.spectral_constants(p, strands, POINTS[:2])


def test_char_poly_and_cubic(generic_cone):
    p, strands, *_ = generic_cone
    xi, _ = ig.xi_and_classify(p)
    sc = sp.spectral_constants(p, strands, POINTS)
    kf = ig.killing_field(p, strands, *POINTS[1])
    lam = np.exp(1j * np.pi / 7)
    assert sp.char_poly_check(kf, sc.D, sc.E, xi, lam) < 1e-9
    assert sp.char_poly_check(kf, sc.D, sc.E, xi, 1.3 * lam) < 1e-9
    r1 = sp.cubic_identity_residual(kf, sc.D, sc.E, xi, lam)
    r2 = sp.cubic_identity_residual(kf, sc.D, sc.E, xi, ig.ZETA * lam)
    assert r1 < 1e-9 and r2 < 1e-9
    c1 = sp.char_poly_coefficients(kf(lam))
    c2 = sp.char_poly_coefficients(kf(ig.ZETA * lam))
    assert np.allclose(c1, c2, atol=1e-12)


def test_constant_case_cubic():
    p = derive_params(0.9, 1.0, 1.0)
    strands = build_strands(p, (0, 6), (0, 6))
    xi, _ = ig.xi_and_classify(p)
    sc = sp.spectral_constants(p, strands, POINTS)
    assert abs(sc.E) < 1e-12
    kf = ig.killing_field(p, strands, 1.0, 1.0)
    for lam in ig.unit_circle_samples(8):
        assert sp.cubic_identity_residual(kf, sc.D, sc.E, xi, lam) < 1e-10


@settings(max_examples=80, deadline=None)
@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_cubic_roots_against_numpy(p, q):
    ours = sp.cubic_roots(p, q)
    ref = np.roots([1, 0, p, q])
    scale = max(1.0, abs(p) ** 0.5, abs(q) ** (1 / 3))
    assert sp.multiset_distance(ours, ref) < 1e-6 * scale


def test_back_substitution_example():
    D, E, xi = 1 / 12, 0.0, 0.05
    s = sp.curve_samples(D, E, xi, [1j])[0]
    assert s.residual < 1e-12
    assert np.max(np.abs(s.mu_roots ** 3 + D * s.mu_roots + 1j * (E - 2 * xi ** 2))) < 1e-12


def test_involutions(generic_cone):
    p, strands, *_ = generic_cone
    xi, _ = ig.xi_and_classify(p)
    sc = sp.spectral_constants(p, strands, POINTS)
    samples = sp.curve_samples(sc.D, sc.E, xi, sp.default_lambda_grid(128))
    rep = sp.involution_checks(sc.D, sc.E, xi, samples)
    assert rep.rho < 1e-9 and rep.sigma < 1e-9 and rep.samples == 144


def test_zero_lambda_rejected():
    with pytest.raises(ValueError):
        sp.curve_samples(0.1, 0.0, 0.1, [0.0])


def test_multiset_distance():
    assert sp.multiset_distance([1, 2, 3], [3, 1, 2]) == 0.0
    assert sp.multiset_distance([0, 0, 1], [0, 1, 1]) == 1.0


def test_curve_export(tmp_path):
    samples = sp.curve_samples(1 / 12, 0.01, 0.03 + 0.01j, sp.default_lambda_grid(8))
    rep = sp.involution_checks(1 / 12, 0.01, 0.03 + 0.01j, samples)
    sp.export_curve(samples, tmp_path / "c.csv", tmp_path / "c.json", 1 / 12, 0.01,
                    0.03 + 0.01j, rep)
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0].startswith("lambda_re,lambda_im,mu1_re") and len(lines) == 1 + len(samples)
    assert '"schema_version"' in (tmp_path / "c.json").read_text()
