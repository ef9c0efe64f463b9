"""
Nehari - Fibering maps, projection onto M_λ and the closed-form thresholds

Along a ray t ↦ t·u the constraint reads φ(t) = t²A − λt^qB − t^NC with
A = ‖u‖², B = ∫|u|^q and C = ∫f|u|^N. For 1 < q < 2 < N the rescaled map
φ(t)/t^q is unimodal, so a ray meets M_λ at most twice.
"""
import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .entities import Branch, EnergyBreakdown, FiberingRoots, Field, Problem, Sign, Thresholds
from .errors import CoercivityError, ConfigError, RayMissesManifoldError
from .functionals import evaluate_signed
from .spectral_core import apply_multiplier, symbol

logger = logging.getLogger(__name__)

BRACKET_DECADES = (-6.0, 6.0)
BRACKET_POINTS = 1201
ROOT_RTOL = 1e-14
DEFAULT_SOBOLEV_SLACK = 0.1
AUTO_LAMBDA_FACTOR = 0.9


def _manifold_label(sign: Optional[Sign]) -> str:
    return "M_λ" if sign is None else f"M_λ{sign.value}"


def solve_fibering(A: float, B: float, C: float, lam: float, q: float, N: float,
                   label: str = "M_λ") -> FiberingRoots:
    """Positive roots of t²A − λt^qB − t^NC

    The ray is first rescaled to unit norm; roots are bracketed by sign
    changes on a geometric grid and refined with Brent's method.
    """
    if A <= 0.0:
        raise RayMissesManifoldError(f"ray misses {label}: the zero field has no fibering map")
    if C <= 0.0:
        raise RayMissesManifoldError(
            f"ray misses {label}: critical term ∫f|u|^N = {C:.3e} is not positive"
        )
    if lam < 0.0 or B < 0.0:
        raise ConfigError(f"fibering needs lambda >= 0 and B >= 0, got {lam}, {B}")

    scale = math.sqrt(A)
    b = B / scale ** q
    c = C / scale ** N

    if lam == 0.0 or b == 0.0:
        return FiberingRoots(t_small=None, t_large=(1.0 / c) ** (1.0 / (N - 2.0)) / scale)

    def psi(tau: float) -> float:
        return tau ** (2.0 - q) - lam * b - c * tau ** (N - q)

    peak = ((2.0 - q) / (c * (N - q))) ** (1.0 / (N - 2.0))
    if psi(peak) <= 0.0:
        raise RayMissesManifoldError(
            f"ray misses {label}: max of φ(t)/t^q is {psi(peak):.3e} for lambda={lam:.6g}"
        )

    points = np.unique(np.concatenate((
        [0.0], np.logspace(*BRACKET_DECADES, BRACKET_POINTS), [peak],
    )))
    while psi(float(points[-1])) >= 0.0:
        points = np.append(points, points[-1] * 1e3)
    values = np.array([psi(float(t)) for t in points])
    changes = np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]

    roots = []
    for index in (changes[0], changes[-1]):
        lo, hi = float(points[index]), float(points[index + 1])
        if values[index] == 0.0:
            roots.append(lo)
        elif values[index + 1] == 0.0:
            roots.append(hi)
        else:
            roots.append(brentq(psi, lo, hi, xtol=1e-300, rtol=ROOT_RTOL, maxiter=200))

    return FiberingRoots(t_small=roots[0] / scale, t_large=roots[1] / scale)


def fibering_roots(problem: Problem, u: Field, sign: Optional[Sign] = None) -> FiberingRoots:
    energy = evaluate_signed(problem, u, sign)
    return solve_fibering(energy.norm_sq, energy.q_term, energy.crit_term,
                          problem.lam, problem.q, problem.N, _manifold_label(sign))


def scale_energy(energy: EnergyBreakdown, t: float, problem: Problem) -> EnergyBreakdown:
    """Energy components of t·u from those of u"""
    return EnergyBreakdown.compose(
        energy.norm_sq * t ** 2,
        energy.q_term * t ** problem.q,
        energy.crit_term * t ** problem.N,
        problem.lam, problem.q, problem.N,
    )


def nehari_point(problem: Problem, u: Field, branch: Branch = Branch.LARGE,
                 sign: Optional[Sign] = None) -> Tuple[Field, float, EnergyBreakdown]:
    """(t*·u, t*, energy of t*·u) for the requested branch"""
    energy = evaluate_signed(problem, u, sign)
    roots = solve_fibering(energy.norm_sq, energy.q_term, energy.crit_term,
                           problem.lam, problem.q, problem.N, _manifold_label(sign))
    t = roots.t_large if branch is Branch.LARGE else roots.t_small
    if t is None:
        raise RayMissesManifoldError(
            f"ray meets {_manifold_label(sign)} only once; no small branch when lambda = 0"
        )
    return u * t, t, scale_energy(energy, t, problem)


def project_to_nehari(problem: Problem, u: Field, branch: Branch = Branch.LARGE,
                      sign: Optional[Sign] = None, rho: Optional[float] = None) -> Field:
    projected, _, energy = nehari_point(problem, u, branch, sign)
    if rho is not None and math.sqrt(energy.norm_sq) < rho:
        logger.warning(
            f"Projected field has norm {math.sqrt(energy.norm_sq):.4g} below rho={rho:.4g}"
        )
    return projected


def lambda0(V: float, maxf: float, K0: float, A_eps: float, sobolev_slack: float,
            q: float, N: float) -> float:
    M = max((1.0 + sobolev_slack) * K0, A_eps)
    exponent = (q - 2.0) / (N - 2.0)
    return ((2.0 ** (q - 2.0) - 2.0 ** (q - N)) * V ** (1.0 - 2.0 / N)
            / (maxf ** exponent * M ** exponent))


def lambda1(V: float, K0: float, A_eps: float, sobolev_slack: float, rho: float,
            q: float, N: float, Lambda_equiv: float) -> float:
    M = max((1.0 + sobolev_slack) * K0, A_eps)
    numerator = (N - 2.0) * Lambda_equiv ** (-q / 2.0) / (2.0 * (N - q))
    return numerator / (V ** (1.0 - 2.0 / N) * M ** (q / 2.0) * rho ** (q - 2.0))


def lambda1_variants(V: float, K0: float, A_eps: float, sobolev_slack: float, rho: float,
                     q: float, N: float, Lambda_equiv: float) -> Dict[str, float]:
    """λ₁ as stated, as used in the compactness argument, and as implied by ⟨∇Q,u⟩ < 0"""
    M = max((1.0 + sobolev_slack) * K0, A_eps)
    common = M ** (q / 2.0) * rho ** (q - 2.0)
    return {
        "statement": lambda1(V, K0, A_eps, sobolev_slack, rho, q, N, Lambda_equiv),
        "compactness": ((N - 2.0) * q / (2.0 * (N - q)) * Lambda_equiv ** (-q / 2.0)
                        / (V ** (1.0 - q / N) * common)),
        "derivative_sign": ((N - 2.0) / (N - q) * Lambda_equiv ** (2.0 - q)
                            / (V ** (1.0 - 2.0 / N) * common)),
    }


def normalization_radius(maxf: float, K0: float, A_eps: float, sobolev_slack: float,
                         N: float) -> float:
    """Norm at which the critical-term bound makes the fibering root equal 1"""
    M = max((1.0 + sobolev_slack) * K0, A_eps)
    return 1.0 / (maxf ** (1.0 / (N - 2.0)) * M ** (N / (2.0 * (N - 2.0))))


def norm_equivalence_constants(problem: Problem) -> Dict[str, float]:
    """Bounds of σ(k)/(1 + |k|² + |k|⁴) over the resolved frequencies"""
    ksq = problem.grid.k_squared()
    ratio = symbol(problem) / (1.0 + ksq + ksq ** 2)
    low, up = float(np.min(ratio)), float(np.max(ratio))
    if low <= 0.0:
        raise CoercivityError(f"norm equivalence fails: min symbol ratio {low:.3e}")
    return {"Lambda_low": low, "Lambda_up": up}


def energy_threshold(n: int, K0: float, maxf: float) -> float:
    return 2.0 / (n * K0 ** (n / 4.0) * maxf ** ((n - 4.0) / 4.0))


def maximum_principle_split(alpha: float, beta: float) -> Tuple[float, float]:
    """x₁ ≤ x₂ with x₁ + x₂ = α, x₁x₂ = β"""
    discriminant = alpha * alpha - 4.0 * beta
    if alpha <= 0.0 or discriminant <= 0.0:
        raise ConfigError(
            f"factorization needs alpha > 0 and alpha^2 > 4 beta, got alpha={alpha}, beta={beta}"
        )
    x2 = 0.5 * (alpha + math.sqrt(discriminant))
    return beta / x2, x2


def factorized_operator(x1: float, x2: float, u: Field) -> Field:
    """(Δ + x₁)(Δ + x₂)u"""
    ksq = u.grid.k_squared()
    return apply_multiplier(u, (ksq + x1) * (ksq + x2))


def compute_thresholds(problem: Problem, K0: float,
                       sobolev_slack: float = DEFAULT_SOBOLEV_SLACK,
                       A_eps: Optional[float] = None,
                       rho: Optional[float] = None) -> Thresholds:
    if K0 <= 0.0 or sobolev_slack < 0.0:
        raise ConfigError(f"thresholds need K0 > 0 and slack >= 0, got {K0}, {sobolev_slack}")
    A_eps = (1.0 + sobolev_slack) * K0 if A_eps is None else A_eps
    V, maxf, q, N = problem.volume, problem.maxf, problem.q, problem.N
    if rho is None:
        rho = 0.5 * normalization_radius(maxf, K0, A_eps, sobolev_slack, N)
    bounds = norm_equivalence_constants(problem)
    Lambda_equiv = bounds["Lambda_low"]
    thresholds = Thresholds(
        lambda0=lambda0(V, maxf, K0, A_eps, sobolev_slack, q, N),
        lambda1=lambda1(V, K0, A_eps, sobolev_slack, rho, q, N, Lambda_equiv),
        rho=rho,
        K0=K0,
        A_eps=A_eps,
        sobolev_slack=sobolev_slack,
        Lambda_equiv=Lambda_equiv,
        c_star=energy_threshold(problem.n, K0, maxf),
        Lambda_up=bounds["Lambda_up"],
        volume=V,
        maxf=maxf,
        lambda1_variants=lambda1_variants(V, K0, A_eps, sobolev_slack, rho, q, N,
                                          Lambda_equiv),
    )
    logger.debug(f"Thresholds: {thresholds.to_record()}")
    return thresholds


def resolve_lambda(thresholds: Thresholds, factor: float = AUTO_LAMBDA_FACTOR) -> float:
    return factor * thresholds.lambda_window


def lambda_in_window(lam: float, thresholds: Thresholds) -> bool:
    inside = 0.0 < lam < thresholds.lambda_window
    if not inside:
        logger.warning(
            f"lambda={lam:.6g} outside the guaranteed window (0, {thresholds.lambda_window:.6g})"
        )
    return inside
