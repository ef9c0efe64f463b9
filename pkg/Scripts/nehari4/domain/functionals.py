"""
Functionals - Energies, Nehari constraints, Sobolev gradients and residuals

J_λ(u) = ½‖u‖² − (λ/q)∫|u|^q − (1/N)∫f|u|^N and Q_λ(u) = ⟨∇J_λ(u), u⟩.
The signed variants J_λ± replace u by u⁺ = max(u,0) or u⁻ = min(u,0) in the
two nonlinear terms and keep the quadratic part.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from .entities import EnergyBreakdown, Field, Problem, Sign
from .errors import GridError
from .spectral_core import (
    apply_P,
    inner,
    invert_P,
    invert_preconditioner,
    l2_norm,
    power_values,
    spectral_inner,
    symbol,
)

logger = logging.getLogger(__name__)


def _check_grid(problem: Problem, u: Field) -> None:
    if not problem.grid.compatible(u.grid):
        raise GridError("field and problem live on different grids")


def signed_values(u: Field, sign: Optional[Sign]) -> np.ndarray:
    """Values entering the nonlinear terms: u, u⁺ or u⁻"""
    if sign is None:
        return u.values
    if sign is Sign.PLUS:
        return np.maximum(u.values, 0.0)
    return np.minimum(u.values, 0.0)


def nonlinear_terms(problem: Problem, u: Field,
                    sign: Optional[Sign] = None) -> Tuple[float, float]:
    """(∫|w|^q, ∫f|w|^N) for the signed part w of u"""
    magnitude = np.abs(signed_values(u, sign))
    cell = problem.grid.cell_volume
    q_term = float(np.sum(magnitude ** problem.q) * cell)
    crit_term = float(np.sum(problem.f.values * magnitude ** problem.N) * cell)
    return q_term, crit_term


def nonlinearity(problem: Problem, u: Field, sign: Optional[Sign] = None) -> Field:
    """λ|w|^{q−2}w + f|w|^{N−2}w"""
    w = signed_values(u, sign)
    values = (problem.lam * power_values(w, problem.q - 1.0, odd=True)
              + problem.f.values * power_values(w, problem.N - 1.0, odd=True))
    return Field(values, u.grid)


def sobolev_inner(problem: Problem, u: Field, v: Field) -> float:
    """⟨u, v⟩ = ∫Δu Δv − ∫a ∇u·∇v + ∫b u v"""
    _check_grid(problem, u)
    if problem.constant_coefficients:
        return spectral_inner(u, v, symbol(problem))
    return inner(apply_P(problem, u), v)


def sobolev_norm_sq(problem: Problem, u: Field) -> float:
    return sobolev_inner(problem, u, u)


def gradient_inner(problem: Problem, u: Field, v: Field) -> float:
    """Metric in which sobolev_gradient is the Riesz representative of dJ

    Equals sobolev_inner for constant coefficients; for variable ones it is
    the inner product of the constant-coefficient preconditioner.
    """
    _check_grid(problem, u)
    return spectral_inner(u, v, symbol(problem))


def evaluate(problem: Problem, u: Field) -> EnergyBreakdown:
    return evaluate_signed(problem, u, None)


def evaluate_signed(problem: Problem, u: Field, sign: Optional[Sign]) -> EnergyBreakdown:
    norm_sq = sobolev_norm_sq(problem, u)
    q_term, crit_term = nonlinear_terms(problem, u, sign)
    return EnergyBreakdown.compose(norm_sq, q_term, crit_term,
                                   problem.lam, problem.q, problem.N)


def euler_lagrange_residual(problem: Problem, u: Field,
                            sign: Optional[Sign] = None) -> Field:
    """P(u) − λ|w|^{q−2}w − f|w|^{N−2}w"""
    _check_grid(problem, u)
    return apply_P(problem, u) - nonlinearity(problem, u, sign)


def residual_rel(problem: Problem, u: Field, sign: Optional[Sign] = None) -> float:
    """‖P(u) − F(u)‖₂ / max(‖P(u)‖₂, ‖F(u)‖₂); 0 for the trivial solution"""
    operator = apply_P(problem, u)
    force = nonlinearity(problem, u, sign)
    scale = max(l2_norm(operator), l2_norm(force))
    if scale == 0.0:
        return 0.0
    return l2_norm(operator - force) / scale


def sobolev_gradient(problem: Problem, u: Field, sign: Optional[Sign] = None) -> Field:
    force = nonlinearity(problem, u, sign)
    if problem.constant_coefficients:
        return u - invert_P(problem, force)
    return invert_preconditioner(problem, apply_P(problem, u) - force)


def nehari_derivative(problem: Problem, u: Field, sign: Optional[Sign] = None) -> float:
    """⟨∇Q_λ(u), u⟩ = 2‖u‖² − λq∫|w|^q − N∫f|w|^N"""
    energy = evaluate_signed(problem, u, sign)
    return (2.0 * energy.norm_sq - problem.lam * problem.q * energy.q_term
            - problem.N * energy.crit_term)


def nehari_derivative_on_manifold(norm_sq: float, q_term: float, lam: float,
                                  q: float, N: float) -> float:
    """⟨∇Q_λ(u), u⟩ after eliminating ∫f|u|^N with Q_λ(u) = 0"""
    return (2.0 - N) * norm_sq + lam * (N - q) * q_term


def manifold_energy(norm_sq: float, q_term: float, lam: float, q: float, N: float) -> float:
    """J_λ restricted to Q_λ = 0"""
    return (N - 2.0) / (2.0 * N) * norm_sq - lam * (N - q) / (N * q) * q_term


def directional_derivative(problem: Problem, u: Field, v: Field,
                           sign: Optional[Sign] = None) -> float:
    """dJ(u)[v] as the pairing of the Sobolev gradient with v"""
    return gradient_inner(problem, sobolev_gradient(problem, u, sign), v)
