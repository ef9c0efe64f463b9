"""Fibering roots, projection and closed-form thresholds."""
import math

import pytest
from numpy.testing import assert_allclose

from nehari4.domain import bubble, nehari
from nehari4.domain.entities import Branch, Field, Problem, Sign
from nehari4.domain.errors import ConfigError, RayMissesManifoldError
from nehari4.domain.functionals import evaluate
from nehari4.domain.spectral_core import apply_P

pytestmark = pytest.mark.unit


def fibering(t, A, B, C, lam, q, N):
    return t * t * A - lam * t ** q * B - t ** N * C


def test_single_root_without_concave_term():
    roots = nehari.solve_fibering(2.0, 1.0, 3.0, lam=0.0, q=1.5, N=10.0)
    assert roots.t_small is None
    assert roots.t_large == pytest.approx((2.0 / 3.0) ** (1.0 / 8.0), rel=1e-14)


@pytest.mark.parametrize("scale", [1e-3, 1.0, 1e3])
def test_two_roots_for_small_lambda(scale):
    A, B, C, lam, q, N = 1.0 * scale ** 2, 1.0 * scale ** 1.5, 1.0 * scale ** 10, 0.1, 1.5, 10.0
    roots = nehari.solve_fibering(A, B, C, lam, q, N)
    assert roots.t_small < roots.t_large
    for t in (roots.t_small, roots.t_large):
        assert abs(fibering(t, A, B, C, lam, q, N)) <= 1e-10 * t * t * A


def test_large_lambda_misses_manifold():
    with pytest.raises(RayMissesManifoldError, match="ray misses"):
        nehari.solve_fibering(1.0, 1.0, 1.0, lam=10.0, q=1.5, N=10.0)
    with pytest.raises(RayMissesManifoldError):
        nehari.solve_fibering(1.0, 1.0, 0.0, lam=0.0, q=1.5, N=10.0)


def test_small_branch_needs_positive_lambda(grid, noise):
    problem = Problem.constant(grid, alpha=2.0, beta=1.0, lam=0.0, q=1.5)
    with pytest.raises(RayMissesManifoldError, match="small branch"):
        nehari.nehari_point(problem, noise, Branch.SMALL)


def test_both_branches_land_on_manifold(problem, noise):
    for branch in (Branch.SMALL, Branch.LARGE):
        u, _, _ = nehari.nehari_point(problem, noise, branch)
        energy = evaluate(problem, u)
        assert abs(energy.Q) <= 1e-9 * energy.norm_sq
    small = evaluate(problem, nehari.nehari_point(problem, noise, Branch.SMALL)[0])
    large = evaluate(problem, nehari.nehari_point(problem, noise, Branch.LARGE)[0])
    assert small.norm_sq < large.norm_sq
    assert small.J < 0.0 < large.J


def test_thresholds_match_closed_forms(grid):
    problem = Problem.constant(grid, alpha=2.0, beta=1.0, lam=0.0, q=1.5)
    K0 = bubble.K0_estimate(5)
    thresholds = nehari.compute_thresholds(problem, K0)
    V, N, q = grid.volume, grid.critical_exponent, 1.5
    M = 1.1 * K0
    expected_lambda0 = ((2.0 ** (q - 2.0) - 2.0 ** (q - N)) * V ** (1.0 - 2.0 / N)
                        / M ** ((q - 2.0) / (N - 2.0)))
    assert thresholds.lambda0 == pytest.approx(expected_lambda0, rel=1e-12)
    assert thresholds.c_star == pytest.approx(2.0 / (5.0 * K0 ** 1.25), rel=1e-12)
    assert thresholds.rho == pytest.approx(
        0.5 / M ** (N / (2.0 * (N - 2.0))), rel=1e-12)
    assert thresholds.lambda1_variants["statement"] == thresholds.lambda1
    assert nehari.resolve_lambda(thresholds) == pytest.approx(
        0.9 * min(thresholds.lambda0, thresholds.lambda1))


def test_lambda_window_is_open(problem):
    K0 = bubble.K0_estimate(5)
    thresholds = nehari.compute_thresholds(problem, K0)
    assert nehari.lambda_in_window(0.5 * thresholds.lambda_window, thresholds)
    assert not nehari.lambda_in_window(0.0, thresholds)
    assert not nehari.lambda_in_window(thresholds.lambda_window, thresholds)


def test_norm_equivalence_bounds_bracket_the_symbol(problem):
    bounds = nehari.norm_equivalence_constants(problem)
    assert 0.0 < bounds["Lambda_low"] <= bounds["Lambda_up"]
    # σ = |k|⁴ + 2|k|² + 1 against 1 + |k|² + |k|⁴ stays within [1, 4/3]
    assert bounds["Lambda_low"] == pytest.approx(1.0)
    assert bounds["Lambda_up"] <= 4.0 / 3.0 + 1e-12


def test_maximum_principle_split_factorizes_operator(grid, noise):
    alpha, beta = 3.0, 1.25
    x1, x2 = nehari.maximum_principle_split(alpha, beta)
    assert x1 <= x2
    assert x1 + x2 == pytest.approx(alpha)
    assert x1 * x2 == pytest.approx(beta)
    problem = Problem.constant(grid, alpha=alpha, beta=beta, lam=0.0, q=1.5)
    assert_allclose(nehari.factorized_operator(x1, x2, noise).values,
                    apply_P(problem, noise).values, atol=1e-12)


def test_maximum_principle_split_needs_real_roots():
    with pytest.raises(ConfigError, match="factorization"):
        nehari.maximum_principle_split(2.0, 1.0)


def test_energy_threshold_scales_with_maxf():
    K0 = bubble.K0_estimate(6)
    assert nehari.energy_threshold(6, K0, 2.0) == pytest.approx(
        nehari.energy_threshold(6, K0, 1.0) / math.sqrt(2.0))


def test_projection_warns_below_rho(problem, noise, caplog):
    u = nehari.project_to_nehari(problem, noise, rho=1e12)
    assert "below rho" in caplog.text
    assert isinstance(u, Field)


def test_fibering_roots_follow_the_ray(problem, noise):
    roots = nehari.fibering_roots(problem, noise)
    assert 0.0 < roots.t_small < roots.t_large
    _, t, _ = nehari.nehari_point(problem, noise)
    assert t == roots.t_large
    for root in (roots.t_small, roots.t_large):
        energy = evaluate(problem, noise * root)
        assert abs(energy.Q) <= 1e-10 * energy.norm_sq


def test_fibering_roots_on_a_degenerate_signed_ray(problem):
    positive = Field.constant(problem.grid, 1.0)
    with pytest.raises(RayMissesManifoldError, match="ray misses M_λ-"):
        nehari.fibering_roots(problem, positive, Sign.MINUS)


def test_projection_is_scale_invariant_and_idempotent(problem, noise):
    u = nehari.project_to_nehari(problem, noise)
    for s in (1e-3, 0.5, 40.0):
        assert_allclose(nehari.project_to_nehari(problem, noise * s).values, u.values,
                        rtol=1e-10, atol=1e-12 * u.max())
    again, t, _ = nehari.nehari_point(problem, u)
    assert t == pytest.approx(1.0, rel=1e-10)
    assert_allclose(again.values, u.values, rtol=1e-10)


def test_lambda0_closed_form_example():
    value = nehari.lambda0(V=1.0, maxf=1.0, K0=1.0, A_eps=1.0, sobolev_slack=0.0,
                           q=1.5, N=10.0)
    assert value == pytest.approx(2.0 ** -0.5 - 2.0 ** -8.5, rel=1e-14)
    assert value == pytest.approx(0.70435, abs=1e-5)
    doubled = nehari.lambda0(2.0, 1.0, 1.0, 1.0, 0.0, 1.5, 10.0)
    assert doubled == pytest.approx(value * 2.0 ** 0.8, rel=1e-14)


def test_lambda0_grows_with_maxf():
    at = {maxf: nehari.lambda0(1.0, maxf, 1.0, 1.0, 0.0, 1.5, 10.0) for maxf in (1.0, 4.0)}
    assert at[4.0] > at[1.0]
    assert at[4.0] == pytest.approx(at[1.0] * 4.0 ** (0.5 / 8.0), rel=1e-14)
    assert at[4.0] == pytest.approx(0.7681, abs=5e-5)


def test_lambda1_closed_form_example():
    value = nehari.lambda1(V=1.0, K0=1.0, A_eps=1.0, sobolev_slack=0.0, rho=1.0,
                           q=1.5, N=10.0, Lambda_equiv=1.0)
    assert value == pytest.approx(8.0 / 17.0, rel=1e-14)
    scaled = nehari.lambda1(1.0, 1.0, 1.0, 0.0, 1.0, 1.5, 10.0, Lambda_equiv=4.0)
    assert scaled / value == pytest.approx(4.0 ** -0.75, rel=1e-14)
    assert nehari.lambda1(1.0, 1.0, 1.0, 0.0, 2.0, 1.5, 10.0, 1.0) > value


@pytest.mark.parametrize(("alpha", "beta", "expected"), [(3.0, 2.0, (1.0, 2.0))])
def test_maximum_principle_split_example(alpha, beta, expected):
    assert nehari.maximum_principle_split(alpha, beta) == pytest.approx(expected, rel=1e-14)


def test_maximum_principle_split_near_degenerate():
    beta = 1.0 - 1e-8
    x1, x2 = nehari.maximum_principle_split(2.0, beta)
    assert 0.0 < x1 <= x2
    assert x1 == pytest.approx(1.0, abs=1e-3) and x2 == pytest.approx(1.0, abs=1e-3)
    assert x1 + x2 == pytest.approx(2.0, rel=1e-7)
    assert x1 * x2 == pytest.approx(beta, rel=1e-7)
