import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slcones.cone3 import (GridSpec3, TripleParams, build_triple_strands, canonical_pair,
                           default_r_range, expected_quadric_det, immersion3, maximal_interval,
                           normalize_signs, quadric_form, random_admissible, solve_bg_from_alpha,
                           verify_sl3)
from slcones.errors import CannotNormalizeError, DegenerateAlphaError
from slcones.strands import StrandCoefficients, StrandState, initial_state


def _null_pair_oracle(alpha):
    """Null directions of the quadric on alpha-perp from an SVD basis and eigh."""
    M = quadric_form(alpha).matrix
    basis = np.linalg.svd(alpha[None, :])[2][1:]
    w, V = np.linalg.eigh(basis @ M @ basis.T)
    up, um = basis.T @ V[:, 1], basis.T @ V[:, 0]
    return canonical_pair((up + um) / math.sqrt(2), (up - um) / math.sqrt(2))


def test_solve_bg_example():
    alpha = np.array([1.0, 2.0, 3.0]) / math.sqrt(14)
    beta, gamma = solve_bg_from_alpha(alpha)
    ob, og = _null_pair_oracle(alpha)
    assert np.allclose(beta, ob, atol=1e-12) and np.allclose(gamma, og, atol=1e-12)
    rel = TripleParams(tuple(alpha), tuple(beta), tuple(gamma), 0, 0, 0).relation_residuals()
    assert max(rel.values()) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 1.0), min_size=3, max_size=3))
def test_solve_bg_relations(raw):
    alpha = np.array(raw)
    alpha /= np.linalg.norm(alpha)
    if min(abs(alpha[i] - alpha[j]) for i, j in ((0, 1), (1, 2), (0, 2))) < 1e-3:
        return
    beta, gamma = solve_bg_from_alpha(alpha)
    rel = TripleParams(tuple(alpha), tuple(beta), tuple(gamma), 0, 0, 0).relation_residuals()
    assert max(rel.values()) < 1e-12
    assert abs(np.linalg.norm(beta) - 1) < 1e-12 and abs(np.linalg.norm(gamma) - 1) < 1e-12
    assert abs(quadric_form(alpha).det - expected_quadric_det(alpha)) < 1e-12


@pytest.mark.parametrize("alpha", [(1, 1, 1), (1, 0, 1), (2, 2, 1)])
def test_degenerate_alpha(alpha):
    with pytest.raises(DegenerateAlphaError):
        solve_bg_from_alpha(alpha)


def test_normalize_signs_examples():
    rng = np.random.default_rng(8)
    p = random_admissible(rng)
    al, be, ga = (np.array(v) for v in (p.alpha, p.beta, p.gamma))
    *_, log = normalize_signs(al, be, ga)
    assert log.is_identity and log.reached
    a2, b2, g2, log = normalize_signs(al, -be, ga)
    assert log.permutation == (0, 1, 2) and log.flips.count(-1) == 1
    assert np.allclose(b2, be)
    with pytest.raises(CannotNormalizeError):
        normalize_signs(al, np.array([0.0, 1, -1]), ga)


def test_intervals():
    zero_sum = StrandCoefficients.of((1.0, -0.5, -0.5))
    assert maximal_interval(zero_sum, initial_state(zero_sum, 0.2)) == (-math.inf, math.inf)
    ones = StrandCoefficients.of((1.0, 1.0, 1.0))
    # x_j = 1 / (1 - r) solves x' = x^2 with x(0) = 1
    lo, hi = maximal_interval(ones, initial_state(ones, 0.0))
    assert lo == -math.inf and abs(hi - 1.0) < 1e-8
    big = StrandState([2.0, 2.0, 2.0], 3.0)
    _, hi_big = maximal_interval(ones, big)
    assert abs(hi_big - 0.5) < 1e-8 and hi_big < hi


def test_immersion_at_initial_points():
    p = random_admissible(np.random.default_rng(4))
    strands = build_triple_strands(p, (-0.1, 0.1))
    x = immersion3(p, strands, 0.0, 0.0, 0.0)
    expected = np.prod([initial_state(c, lev).y for c, lev in zip(p.coeffs(), (p.A, p.B, p.C))],
                       axis=0)
    assert np.allclose(x, expected, atol=1e-15)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_verify_three_variable(seed):
    p = random_admissible(np.random.default_rng(seed))
    rep = verify_sl3(p, tol=1e-9)
    assert rep.passed, rep.residuals
    assert max(rep.residuals[k] for k in ("g_rs", "g_rt", "g_st")) < 1e-9


def test_violated_triple_relation_is_detected():
    p = random_admissible(np.random.default_rng(11))
    ga = np.array(p.gamma) + 1e-3 * np.array(p.alpha) * np.array(p.beta)
    bad = TripleParams(p.alpha, p.beta, tuple(ga), p.A, p.B, p.C)
    ca = p.coeffs()[0]
    grid = GridSpec3(default_r_range(maximal_interval(ca, initial_state(ca, p.A))), n=5)
    assert not verify_sl3(bad, grid, tol=1e-9).passed
