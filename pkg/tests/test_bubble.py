"""Bubble profile, beta integrals, Sobolev constant and expansion fits."""
import math

import numpy as np
import pytest
from scipy import special

from nehari4.domain import bubble
from nehari4.domain.entities import BubbleParams, ExpansionModel
from nehari4.domain.errors import FitError


def sharp_constant(n: int) -> float:
    """Best constant of ‖u‖_N² ≤ K‖Δu‖² on ℝⁿ in closed form"""
    S = (math.pi ** 2 * n * (n - 4.0) * (n * n - 4.0)
         * (special.gamma(n / 2.0) / special.gamma(n)) ** (4.0 / n))
    return 1.0 / S


@pytest.mark.unit
@pytest.mark.parametrize(("p", "q"), [(5.0, 1.5), (6.0, 2.0), (3.5, 0.0), (11.0, 1.0),
                                      (8.0, 3.0)])
def test_beta_integral_matches_gamma_oracle(p, q):
    assert bubble.I_pq(p, q) == pytest.approx(bubble.I_pq_oracle(p, q), rel=1e-9)


@pytest.mark.unit
def test_beta_integral_recursions():
    residuals = bubble.I_pq_recursions(7.0, 2.5)
    assert residuals["p_step"] <= 1e-9
    assert residuals["pq_step"] <= 1e-9


@pytest.mark.unit
def test_beta_integral_rejects_divergent_pairs():
    with pytest.raises(ValueError, match="diverges"):
        bubble.I_pq(2.0, 1.0)
    with pytest.raises(ValueError):
        bubble.I_pq(5.0, -1.0)


@pytest.mark.unit
@pytest.mark.parametrize("n", [5, 6, 8])
def test_K0_matches_sharp_constant(n):
    assert bubble.K0_estimate(n) == pytest.approx(sharp_constant(n), rel=1e-8)


@pytest.mark.unit
@pytest.mark.parametrize(("n", "r"), [(6, 0.0), (6, 1.0), (8, 0.5), (10, 2.0)])
def test_bubble_solves_critical_equation(n, r):
    lhs = bubble.radial_bilaplacian_fd(lambda x: bubble.bubble_profile(n, x), r, n)
    U = float(bubble.bubble_profile(n, r))
    rhs = n * (n - 4.0) * (n * n - 4.0) * U ** ((n + 4.0) / (n - 4.0))
    assert lhs == pytest.approx(rhs, rel=1e-6)


@pytest.mark.unit
def test_sphere_area_in_low_dimensions():
    assert bubble.sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert bubble.sphere_area(3) == pytest.approx(4.0 * math.pi)


@pytest.mark.unit
def test_fit_recovers_exact_expansion():
    eps = np.array([0.04, 0.03, 0.02, 0.015, 0.01])
    values = 3.0 - 7.0 * eps ** 2
    fit = bubble.fit_expansion(zip(eps, values), ExpansionModel.EPS2)
    assert fit.c0 == pytest.approx(3.0, rel=1e-12)
    assert fit.c2 == pytest.approx(-7.0, rel=1e-8)
    assert fit.stderr < 1e-12


@pytest.mark.unit
def test_fit_recovers_logarithmic_expansion():
    eps = np.array([0.04, 0.03, 0.02, 0.015, 0.01])
    values = 2.0 + 0.5 * eps ** 2 * np.log(1.0 / eps ** 2)
    fit = bubble.fit_expansion(zip(eps, values), ExpansionModel.EPS2LOG)
    assert fit.c2 == pytest.approx(0.5, rel=1e-8)


@pytest.mark.unit
def test_fit_preconditions():
    with pytest.raises(FitError, match="at least 4"):
        bubble.fit_expansion([(0.1, 1.0), (0.05, 1.0), (0.02, 1.0)], ExpansionModel.EPS2)
    with pytest.raises(FitError, match="strictly decreasing"):
        bubble.fit_expansion([(0.01, 1.0), (0.02, 1.0), (0.03, 1.0), (0.04, 1.0)],
                             ExpansionModel.EPS2)


@pytest.mark.unit
def test_existence_condition_margins():
    six = bubble.existence_condition(6, 1.0, 1.0, 1.0, 0.0)
    assert six.holds and six.margin == pytest.approx(4.0)
    assert not bubble.existence_condition(6, -1.0, 0.0, 1.0, 0.0).holds
    assert bubble.existence_condition(8, 2.0, 0.0, 1.0, 0.0).holds
    assert not bubble.existence_condition(8, 0.0, 0.0, 1.0, 1.0).holds
    with pytest.raises(ValueError):
        bubble.existence_condition(5, 1.0, 0.0, 1.0, 0.0)
    variants = bubble.existence_condition_variants(8, 2.0, 0.0, 1.0, 0.0)
    assert set(variants) == {"statement", "proof"}


@pytest.mark.unit
def test_predicted_mass_coefficient():
    predicted = bubble.predicted_coefficients(8, S_g0=2.0, a0=0.0, f0=1.0, laplacian_f0=0.0)
    assert predicted["massN"] == pytest.approx(2.0 / 36.0)
    assert "bilapSq" in predicted and "gradSq" in predicted
    assert "quadratic_form" in bubble.predicted_coefficients(6, 1.0, 0.0, 1.0, 0.0)


@pytest.mark.unit
def test_flat_bubble_mass_tends_to_leading_constant():
    n = 8
    K0 = bubble.K0_estimate(n)
    params = BubbleParams(n=n, bubble_eps=0.01, delta=1.0)
    integrals = bubble.bubble_integrals(params)
    leading = bubble.leading_constant(n, K0, 1.0)
    assert integrals.massN == pytest.approx(leading, rel=1e-3)
    assert integrals.bilapSq == pytest.approx(leading, rel=1e-3)
    assert not integrals.g_clamped


@pytest.mark.slow
def test_expansion_report_tracks_predictions_above_dimension_six():
    params = BubbleParams(n=8, bubble_eps=0.02, delta=1.0, f0=1.0, laplacian_f0=1.0,
                          S_g0=1.0, a0=1.0, b0=1.0)
    eps = (0.02, 0.015, 0.01, 0.0075, 0.005)
    report = bubble.expansion_report(params, eps, bubble.K0_estimate(8))
    for name in ("massN", "bilapSq", "gradSq"):
        assert report[name]["relative_deviation"] <= 0.02, name


@pytest.mark.slow
def test_threshold_gap_below_c_star_for_positive_curvature():
    n = 8
    params = BubbleParams(n=n, bubble_eps=0.04, delta=1.0, S_g0=2.0)
    gap = bubble.threshold_gap_report(params, bubble.K0_estimate(n), 0.0,
                                      (0.04, 0.03, 0.02, 0.015, 0.01))
    assert gap.fit is not None and gap.fit.c2 < 0.0
    assert all(b < gap.c_star for e, b in zip(gap.eps_values, gap.bounds) if e <= 0.02)


@pytest.mark.unit
def test_fit_recovers_decreasing_logarithmic_expansion():
    eps = np.array([0.02, 0.015, 0.01, 0.0075, 0.005])
    values = 1.0 - 2.0 * eps ** 2 * np.log(1.0 / eps ** 2)
    fit = bubble.fit_expansion(zip(eps, values), ExpansionModel.EPS2LOG)
    assert fit.c0 == pytest.approx(1.0, rel=1e-10)
    assert fit.c2 == pytest.approx(-2.0, rel=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize(("S_g0", "a0"), [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)])
def test_dimension_six_quadratic_form_follows_logarithmic_model(S_g0, a0):
    n = 6
    params = BubbleParams(n=n, bubble_eps=0.02, delta=1.0, S_g0=S_g0, a0=a0)
    eps = (0.02, 0.015, 0.01, 0.0075, 0.005)
    report = bubble.expansion_report(params, eps, bubble.K0_estimate(n))["quadratic_form"]
    fit = report["fit"]
    assert fit["stderr"] <= 1e-3 * abs(fit["c0"])
    assert np.sign(fit["c2"]) == -np.sign(2.0 / n * S_g0 + a0)
    assert report["flags"] == ["undefined_t0_factor"]
