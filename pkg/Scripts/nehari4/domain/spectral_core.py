"""
Spectral core - Periodic pseudospectral transforms, operators and quadrature

Conventions: Δ is the geometer's Laplacian -div∇ with symbol |k|², so the
constant-coefficient operator Δ² + αΔ + β has symbol σ(k) = |k|⁴ + α|k|² + β.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from .entities import Field, GridSpec, Problem, Spectrum
from .errors import CoercivityError, GridError

logger = logging.getLogger(__name__)

IMAG_TOLERANCE = 1e-10
PRECONDITIONER_BETA_FLOOR = 1e-3
PRECONDITIONER_ALPHA_RATIO = 1.8


def _forward(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values) / values.size


def _backward(coefficients: np.ndarray) -> np.ndarray:
    return sfft.ifftn(coefficients * coefficients.size).real


def transform(u: Field) -> Spectrum:
    """Normalised forward transform: cos(x₁) has coefficient ½ at k = ±e₁"""
    if not np.all(np.isfinite(u.values)):
        raise GridError("cannot transform a field with non-finite values")
    return Spectrum(_forward(u.values), u.grid)


def inverse_transform(spec: Spectrum) -> Field:
    values = sfft.ifftn(spec.coefficients * spec.coefficients.size)
    scale = max(1.0, float(np.max(np.abs(values.real))))
    residue = float(np.max(np.abs(values.imag)))
    if residue > IMAG_TOLERANCE * scale:
        raise GridError(
            f"spectrum is not Hermitian: imaginary residue {residue:.3e} after inversion"
        )
    return Field(values.real, spec.grid)


def derivative_wavenumbers(grid: GridSpec, axis: int) -> np.ndarray:
    """Wavenumbers for odd derivatives along one axis, Nyquist mode removed"""
    k = np.array(grid.axis_wavenumbers())
    k[grid.m // 2] = 0.0
    return k.reshape(grid.axis_shape(axis))


def integer_frequencies(grid: GridSpec) -> np.ndarray:
    return np.rint(np.fft.fftfreq(grid.m, d=1.0 / grid.m)).astype(int)


def apply_multiplier(u: Field, multiplier: np.ndarray) -> Field:
    return Field(_backward(multiplier * _forward(u.values)), u.grid)


def laplacian(u: Field) -> Field:
    return apply_multiplier(u, u.grid.k_squared())


def bilaplacian(u: Field) -> Field:
    return apply_multiplier(u, u.grid.k_squared() ** 2)


def gradient(u: Field) -> List[Field]:
    u_hat = _forward(u.values)
    return [
        Field(_backward(1j * derivative_wavenumbers(u.grid, axis) * u_hat), u.grid)
        for axis in range(u.grid.n)
    ]


def divergence(components: Sequence[Field]) -> Field:
    grid = components[0].grid
    if len(components) != grid.n:
        raise GridError(f"divergence needs {grid.n} components, got {len(components)}")
    total = np.zeros(grid.shape, dtype=complex)
    for axis, component in enumerate(components):
        if not grid.compatible(component.grid):
            raise GridError("divergence components live on different grids")
        total += 1j * derivative_wavenumbers(grid, axis) * _forward(component.values)
    return Field(_backward(total), grid)


def preconditioner_coefficients(problem: Problem) -> Tuple[float, float]:
    """(α, β) of the constant-coefficient operator used as preconditioner"""
    if problem.constant_coefficients:
        return float(problem.alpha), float(problem.beta)
    alpha = -float(problem.a.values.mean())
    beta = float(problem.b.values.mean())
    clamped_beta = max(beta, PRECONDITIONER_BETA_FLOOR)
    clamped_alpha = max(alpha, -PRECONDITIONER_ALPHA_RATIO * np.sqrt(clamped_beta))
    if (clamped_alpha, clamped_beta) != (alpha, beta):
        logger.warning(
            f"Preconditioner clamped from (alpha={alpha:.4g}, beta={beta:.4g}) "
            f"to (alpha={clamped_alpha:.4g}, beta={clamped_beta:.4g})"
        )
    return clamped_alpha, clamped_beta


def symbol(problem: Problem) -> np.ndarray:
    """σ(k) of the operator (constant) or of its preconditioner (variable)"""
    alpha, beta = preconditioner_coefficients(problem)
    ksq = problem.grid.k_squared()
    return ksq ** 2 + alpha * ksq + beta


def apply_P(problem: Problem, u: Field) -> Field:
    """Δ²u + div(a∇u) + b u"""
    if not problem.grid.compatible(u.grid):
        raise GridError("field and problem live on different grids")
    if problem.constant_coefficients:
        return apply_multiplier(u, symbol(problem))
    flux = [problem.a * component for component in gradient(u)]
    return bilaplacian(u) + divergence(flux) + problem.b * u


def _checked_inverse(sigma: np.ndarray, v: Field) -> Field:
    sigma_min = float(np.min(sigma))
    if sigma_min <= 0.0:
        raise CoercivityError(f"operator symbol not coercive: min sigma = {sigma_min:.3e}")
    return apply_multiplier(v, 1.0 / sigma)


def invert_P(problem: Problem, v: Field) -> Field:
    if not problem.constant_coefficients:
        raise CoercivityError("invert_P needs constant coefficients; use invert_preconditioner")
    if not problem.grid.compatible(v.grid):
        raise GridError("field and problem live on different grids")
    return _checked_inverse(symbol(problem), v)


def invert_preconditioner(problem: Problem, v: Field) -> Field:
    return _checked_inverse(symbol(problem), v)


def integrate(u: Field) -> float:
    """Uniform-weight quadrature; numpy pairwise summation fixes the reduction order"""
    return float(np.sum(u.values) * u.grid.cell_volume)


def inner(u: Field, v: Field) -> float:
    if not u.grid.compatible(v.grid):
        raise GridError("inner product of fields from different grids")
    return float(np.sum(u.values * v.values) * u.grid.cell_volume)


def l2_norm(u: Field) -> float:
    return float(np.sqrt(inner(u, u)))


def spectral_inner(u: Field, v: Field, multiplier: np.ndarray = None) -> float:
    """V·Σ_k m(k) û(k) conj(v̂(k)); with m ≡ 1 this is the Plancherel side of inner()"""
    product = _forward(u.values) * np.conj(_forward(v.values))
    if multiplier is not None:
        product = multiplier * product
    return float(np.sum(product).real * u.grid.volume)


def pointwise_power(u: Field, p: float, odd: bool) -> Field:
    """sign(u)|u|^p when odd, |u|^p otherwise; 0 at u = 0"""
    if p <= 0:
        raise ValueError(f"pointwise_power needs p > 0, got {p}")
    return Field(power_values(u.values, p, odd), u.grid)


def power_values(values: np.ndarray, p: float, odd: bool) -> np.ndarray:
    magnitude = np.abs(values) ** p
    return np.sign(values) * magnitude if odd else magnitude


def spectral_tail(u: Field) -> float:
    """Fraction of spectral energy in modes with max_i |k_i| > m/3"""
    energy = np.abs(_forward(u.values)) ** 2
    total = float(np.sum(energy))
    if total == 0.0:
        return 0.0
    freq = np.abs(integer_frequencies(u.grid))
    outer = np.zeros(u.grid.shape, dtype=bool)
    for axis in range(u.grid.n):
        outer |= (freq > u.grid.m / 3).reshape(u.grid.axis_shape(axis))
    return float(np.sum(energy[outer]) / total)


def band_limited_noise(grid: GridSpec, rng: np.random.Generator, shells: int = 3,
                       amplitude: float = 1.0) -> Field:
    """Random real field supported on integer modes with |k|² ≤ shells"""
    freq = integer_frequencies(grid)
    shell = np.zeros(grid.shape, dtype=int)
    for axis in range(grid.n):
        shell = shell + (freq ** 2).reshape(grid.axis_shape(axis))
    coefficients = _forward(rng.standard_normal(grid.shape))
    coefficients[shell > shells] = 0.0
    values = _backward(coefficients)
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        return Field.constant(grid, amplitude)
    return Field(values * (amplitude / peak), grid)
