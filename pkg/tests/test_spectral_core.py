"""Transforms, multipliers and quadrature on the periodic grid."""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nehari4.domain.entities import Field, GridSpec, Problem, Spectrum
from nehari4.domain.errors import CoercivityError, GridError, ResourceCapError
from nehari4.domain.spectral_core import (
    apply_P,
    band_limited_noise,
    bilaplacian,
    divergence,
    gradient,
    inner,
    integrate,
    inverse_transform,
    invert_P,
    laplacian,
    pointwise_power,
    spectral_inner,
    spectral_tail,
    transform,
)

pytestmark = pytest.mark.unit


def test_cosine_has_half_coefficient_at_both_wavenumbers(grid, cosine):
    spec = transform(cosine(grid, 0, 1))
    index_plus = (1,) + (0,) * (grid.n - 1)
    index_minus = (grid.m - 1,) + (0,) * (grid.n - 1)
    assert spec.coefficients[index_plus] == pytest.approx(0.5, abs=1e-14)
    assert spec.coefficients[index_minus] == pytest.approx(0.5, abs=1e-14)
    others = np.abs(spec.coefficients).sum() - 1.0
    assert others == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(("axis", "k"), [(0, 1), (2, 2), (4, 1)])
def test_laplacian_uses_positive_symbol(grid, cosine, axis, k):
    u = cosine(grid, axis, k)
    assert_allclose(laplacian(u).values, k ** 2 * u.values, atol=1e-12)
    assert_allclose(bilaplacian(u).values, k ** 4 * u.values, atol=1e-11)


def test_divergence_of_gradient_is_minus_laplacian(noise):
    assert_allclose(divergence(gradient(noise)).values, -laplacian(noise).values, atol=1e-12)


def test_inverse_transform_rejects_non_hermitian_spectrum(grid):
    coefficients = np.zeros(grid.shape, dtype=complex)
    coefficients[(1,) + (0,) * (grid.n - 1)] = 1j
    with pytest.raises(GridError, match="not Hermitian"):
        inverse_transform(Spectrum(coefficients, grid))


def test_inverse_transform_recovers_field(noise):
    assert_allclose(inverse_transform(transform(noise)).values, noise.values, atol=1e-13)


def test_plancherel_matches_quadrature(grid, rng):
    u = band_limited_noise(grid, rng)
    v = band_limited_noise(grid, rng)
    assert spectral_inner(u, v) == pytest.approx(inner(u, v), rel=1e-12, abs=1e-12)


def test_invert_P_undoes_apply_P(problem, noise):
    assert_allclose(invert_P(problem, apply_P(problem, noise)).values, noise.values,
                    atol=1e-12)


def test_variable_coefficients_match_constant_operator(grid, noise):
    alpha, beta = 2.0, 1.0
    constant = Problem.constant(grid, alpha=alpha, beta=beta, lam=0.0, q=1.5)
    variable = Problem(grid=grid, f=Field.constant(grid, 1.0), lam=0.0, q=1.5,
                       a=Field.constant(grid, -alpha), b=Field.constant(grid, beta))
    assert_allclose(apply_P(variable, noise).values, apply_P(constant, noise).values,
                    atol=1e-11)


def test_non_coercive_symbol_is_rejected(grid):
    with pytest.raises(CoercivityError, match="not coercive"):
        Problem.constant(grid, alpha=-2.5, beta=1.0, lam=0.0, q=1.5)


def test_grid_preconditions():
    with pytest.raises(GridError):
        GridSpec(n=5, m=5)
    with pytest.raises(GridError):
        GridSpec(n=4, m=6)
    with pytest.raises(ResourceCapError, match="cap is"):
        GridSpec(n=5, m=16, max_nodes=1000)


def test_spectral_tail_separates_low_and_high_modes(cosine, rng):
    grid = GridSpec(n=5, m=8)
    assert spectral_tail(band_limited_noise(grid, rng)) < 1e-20
    assert spectral_tail(cosine(grid, 1, 3)) == pytest.approx(1.0, abs=1e-12)
    assert spectral_tail(Field.zeros(grid)) == 0.0


def test_band_limited_noise_is_normalised_and_deterministic(grid):
    first = band_limited_noise(grid, np.random.default_rng(5))
    second = band_limited_noise(grid, np.random.default_rng(5))
    assert np.max(np.abs(first.values)) == pytest.approx(1.0)
    assert np.array_equal(first.values, second.values)


@pytest.mark.parametrize(("build", "expected"), [
    (lambda g, cos: Field.constant(g, 1.0), (2.0 * math.pi) ** 5),
    (lambda g, cos: cos(g, 0, 1), 0.0),
    (lambda g, cos: cos(g, 0, 1) * cos(g, 0, 1), 0.5 * (2.0 * math.pi) ** 5),
])
def test_integrate_trigonometric_examples(grid, cosine, build, expected):
    assert integrate(build(grid, cosine)) == pytest.approx(expected, rel=1e-12, abs=1e-9)


@pytest.mark.parametrize(("value", "p", "odd", "expected"), [
    (-2.0, 3.0, True, -8.0),
    (0.0, 0.5, True, 0.0),
    (-2.0, 0.5, False, math.sqrt(2.0)),
])
def test_pointwise_power_examples(grid, value, p, odd, expected):
    result = pointwise_power(Field.constant(grid, value), p, odd)
    assert_allclose(result.values, expected, rtol=1e-14, atol=0.0)


def test_pointwise_power_rejects_non_positive_exponent(grid):
    with pytest.raises(ValueError, match="p > 0"):
        pointwise_power(Field.constant(grid, 1.0), 0.0, True)
