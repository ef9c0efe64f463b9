"""
Bubble - Radial test-function integrals, Beta identities and expansion fits

All integrals are one-dimensional: a radial function v(r) on a synthetic
metric with volume density r^{n−1}G(r), G(r) = 1 − S_g(x₀)r²/(6n), is
integrated as ω_{n−1}∫₀^{2δ} v(r) r^{n−1} G(r) dr.
"""
import logging
import math
import warnings
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special
from scipy.integrate import IntegrationWarning, quad

from .entities import (
    BubbleIntegrals,
    BubbleParams,
    ExistenceCondition,
    ExpansionFit,
    ExpansionModel,
    ThresholdGap,
)
from .errors import FitError, QuadratureError
from .nehari import energy_threshold

logger = logging.getLogger(__name__)

QUAD_RTOL = 1e-11
QUAD_LIMIT = 200
MAX_SPLITS = 4
DEFAULT_EPS_SWEEP = (0.04, 0.03, 0.02, 0.015, 0.01)
DEFAULT_DELTA = 0.5

# Central-difference stencils on offsets -4..4
D1_STENCIL = np.array([1/280, -4/105, 1/5, -4/5, 0.0, 4/5, -1/5, 4/105, -1/280])
D2_STENCIL = np.array([-1/560, 8/315, -1/5, 8/5, -205/72, 8/5, -1/5, 8/315, -1/560])
D3_STENCIL = np.array([-7/240, 3/10, -169/120, 61/30, 0.0, -61/30, 169/120, -3/10, 7/240])
D4_STENCIL = np.array([7/240, -2/5, 169/60, -122/15, 91/8, -122/15, 169/60, -2/5, 7/240])
STENCIL_OFFSETS = np.arange(-4, 5)


def _quad_once(fn: Callable[[float], float], lo: float, hi: float, **kwargs) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        value, _ = quad(fn, lo, hi, epsabs=0.0, epsrel=QUAD_RTOL, limit=QUAD_LIMIT, **kwargs)
    return value


def adaptive_integral(fn: Callable[[float], float], lo: float, hi: float, label: str,
                      depth: int = 0, trace: Optional[List[str]] = None) -> float:
    """quad with interval bisection on non-convergence; the trace travels with the error"""
    trace = [] if trace is None else trace
    try:
        return _quad_once(fn, lo, hi)
    except IntegrationWarning as exc:
        trace.append(f"[{lo:.6g}, {hi:.6g}] depth {depth}: {exc}")
        if depth >= MAX_SPLITS:
            raise QuadratureError(f"{label}: quadrature did not converge", details=trace)
        mid = 0.5 * (lo + hi)
        return (adaptive_integral(fn, lo, mid, label, depth + 1, trace)
                + adaptive_integral(fn, mid, hi, label, depth + 1, trace))


def half_line_integral(fn: Callable[[float], float], label: str) -> float:
    """∫₀^∞ fn(r) dr through r = s/(1−s)"""
    def mapped(s: float) -> float:
        if s >= 1.0:
            return 0.0
        return fn(s / (1.0 - s)) / (1.0 - s) ** 2
    return adaptive_integral(mapped, 0.0, 1.0, label)


def sphere_area(n: int) -> float:
    """ω_{n−1}, area of the unit sphere in ℝⁿ"""
    return 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)


def bubble_constant(n: int) -> float:
    """(n−4)n(n²−4)"""
    return (n - 4.0) * n * (n * n - 4.0)


def bubble_profile(n: int, r: np.ndarray) -> np.ndarray:
    return (1.0 + np.square(r)) ** (-(n - 4.0) / 2.0)


def cutoff_eta(r: np.ndarray, delta: float) -> np.ndarray:
    """Quintic smoothstep: 1 on [0, δ], 0 on [2δ, ∞)"""
    if delta <= 0.0:
        raise ValueError(f"cutoff radius must be positive, got {delta}")
    s = np.clip((np.asarray(r, dtype=float) - delta) / delta, 0.0, 1.0)
    return 1.0 - (10.0 * s ** 3 - 15.0 * s ** 4 + 6.0 * s ** 5)


def _cutoff_with_derivatives(r: float, delta: float) -> Tuple[float, float, float]:
    if r <= delta:
        return 1.0, 0.0, 0.0
    if r >= 2.0 * delta:
        return 0.0, 0.0, 0.0
    s = (r - delta) / delta
    eta = 1.0 - (10.0 * s ** 3 - 15.0 * s ** 4 + 6.0 * s ** 5)
    d1 = -(30.0 * s ** 2 - 60.0 * s ** 3 + 30.0 * s ** 4) / delta
    d2 = -(60.0 * s - 180.0 * s ** 2 + 120.0 * s ** 3) / delta ** 2
    return eta, d1, d2


def bubble_prefactor(n: int, bubble_eps: float, f0: float) -> float:
    return (bubble_constant(n) * bubble_eps ** 4 / f0) ** ((n - 4.0) / 8.0)


def standard_bubble(n: int, bubble_eps: float, f0: float, r: np.ndarray,
                    delta: float = DEFAULT_DELTA) -> np.ndarray:
    """u_ε(r) = ((n−4)n(n²−4)ε⁴/f0)^{(n−4)/8} η(r) / (r² + ε²)^{(n−4)/2}"""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("radius must be non-negative")
    return (bubble_prefactor(n, bubble_eps, f0) * cutoff_eta(r, delta)
            / (np.square(r) + bubble_eps ** 2) ** ((n - 4.0) / 2.0))


def _bubble_derivatives(params: BubbleParams, r: float) -> Tuple[float, float, float]:
    """u_ε, u_ε′, u_ε″ by the chain rule on the closed form"""
    m = (params.n - 4.0) / 2.0
    base = r * r + params.bubble_eps ** 2
    w = base ** (-m)
    w1 = -2.0 * m * r * base ** (-m - 1.0)
    w2 = -2.0 * m * base ** (-m - 1.0) + 4.0 * m * (m + 1.0) * r * r * base ** (-m - 2.0)
    eta, eta1, eta2 = _cutoff_with_derivatives(r, params.delta)
    scale = bubble_prefactor(params.n, params.bubble_eps, params.f0)
    return (scale * eta * w,
            scale * (eta1 * w + eta * w1),
            scale * (eta2 * w + 2.0 * eta1 * w1 + eta * w2))


def metric_volume_factor(r: float, S_g0: float, n: int, floor: float = 1e-6) -> float:
    """Truncated G(r) = 1 − S_g0 r²/(6n), held at or above floor"""
    return _metric(r, S_g0, floor, n)[0]


def _metric(r: float, S_g0: float, floor: float, n: int) -> Tuple[float, float, bool]:
    """(G, G′, clamped)"""
    value = 1.0 - S_g0 * r * r / (6.0 * n)
    if value < floor:
        return floor, 0.0, True
    return value, -S_g0 * r / (3.0 * n), False


def _radial_model_f(params: BubbleParams, r: float) -> float:
    """f0 − Δf0 r²/(2n); Δ is the positive geometer's Laplacian"""
    return params.f0 - params.laplacian_f0 * r * r / (2.0 * params.n)


def _breakpoints(params: BubbleParams) -> List[float]:
    points = [0.0]
    r = params.bubble_eps
    while r < params.delta:
        points.append(r)
        r *= 4.0
    points.extend([params.delta, 2.0 * params.delta])
    return points


def bubble_integrals(params: BubbleParams) -> BubbleIntegrals:
    n, omega = params.n, sphere_area(params.n)
    N = 2.0 * n / (n - 4.0)
    clamped: List[bool] = []

    def measure(r: float) -> Tuple[float, float]:
        g, dg, was_clamped = _metric(r, params.S_g0, params.g_floor, n)
        if was_clamped:
            clamped.append(True)
        return r ** (n - 1) * g, (dg / g if r > 0.0 else 0.0)

    def mass(r: float) -> float:
        u, _, _ = _bubble_derivatives(params, r)
        return measure(r)[0] * _radial_model_f(params, r) * abs(u) ** N

    def q_mass(r: float) -> float:
        u, _, _ = _bubble_derivatives(params, r)
        return measure(r)[0] * abs(u) ** params.q

    def grad(r: float) -> float:
        _, u1, _ = _bubble_derivatives(params, r)
        return measure(r)[0] * params.a0 * u1 * u1

    def bilap(r: float) -> float:
        _, u1, u2 = _bubble_derivatives(params, r)
        weight, log_dg = measure(r)
        if r == 0.0:
            return 0.0
        lap = -(u2 + (n - 1.0) / r * u1 + log_dg * u1)
        return weight * lap * lap

    def b_mass(r: float) -> float:
        u, _, _ = _bubble_derivatives(params, r)
        return measure(r)[0] * params.b0 * u * u

    points = _breakpoints(params)

    def integral(fn: Callable[[float], float], label: str) -> float:
        total = 0.0
        for lo, hi in zip(points[:-1], points[1:]):
            total += adaptive_integral(fn, lo, hi, f"{label} (eps={params.bubble_eps:g})")
        return omega * total

    result = BubbleIntegrals(
        bubble_eps=params.bubble_eps,
        massN=integral(mass, "massN"),
        gradSq=0.0 if params.a0 == 0.0 else integral(grad, "gradSq"),
        bilapSq=integral(bilap, "bilapSq"),
        bTerm=0.0 if params.b0 == 0.0 else integral(b_mass, "bTerm"),
        qTerm=integral(q_mass, "qTerm"),
        g_clamped=bool(clamped),
    )
    if result.g_clamped:
        logger.warning(f"G(r) clamped to {params.g_floor:g} on [0, 2δ] for S_g0={params.S_g0}")
    return result


def sweep_integrals(params: BubbleParams,
                    eps_values: Sequence[float] = DEFAULT_EPS_SWEEP) -> List[BubbleIntegrals]:
    rows = []
    for eps in eps_values:
        if eps > params.delta / 10.0:
            logger.warning(f"eps={eps:g} exceeds delta/10; expansion may not apply")
        rows.append(bubble_integrals(params.with_eps(eps)))
    return rows


def I_pq(p: float, q: float) -> float:
    """∫₀^∞ t^q/(1+t)^p dt; t = s/(1−s) turns it into an algebraic-weight integral on [0,1]"""
    if not (q > -1.0 and p - q > 1.0):
        raise ValueError(f"I_pq diverges unless q > -1 and p - q > 1, got p={p}, q={q}")
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, _ = quad(lambda s: 1.0, 0.0, 1.0, weight="alg", wvar=(q, p - q - 2.0),
                            epsabs=0.0, epsrel=QUAD_RTOL, limit=QUAD_LIMIT)
        except IntegrationWarning as exc:
            raise QuadratureError(f"I_pq({p}, {q}) did not converge", details=[str(exc)])
    return value


def I_pq_oracle(p: float, q: float) -> float:
    """Γ(q+1)Γ(p−q−1)/Γ(p)"""
    return float(special.beta(q + 1.0, p - q - 1.0))


def I_pq_recursions(p: float, q: float) -> Dict[str, float]:
    """Relative residuals of the step-in-p and step-in-(p,q) recursions, by quadrature"""
    base = I_pq(p, q)
    step_p = I_pq(p + 1.0, q)
    step_pq = I_pq(p + 1.0, q + 1.0)
    expected_p = (p - q - 1.0) / p * base
    expected_pq = (q + 1.0) / (p - q - 1.0) * step_p
    return {
        "p_step": abs(step_p - expected_p) / abs(expected_p),
        "pq_step": abs(step_pq - expected_pq) / abs(expected_pq),
    }


def K0_estimate(n: int) -> float:
    """‖U‖_N²/‖ΔU‖₂² for U = (1+r²)^{−(n−4)/2} on ℝⁿ"""
    if n <= 4:
        raise ValueError(f"K0 needs n > 4, got {n}")
    omega, N = sphere_area(n), 2.0 * n / (n - 4.0)

    def mass(r: float) -> float:
        return r ** (n - 1) * (1.0 + r * r) ** (-n)

    def bilap(r: float) -> float:
        lap = (n - 4.0) * (1.0 + r * r) ** (-n / 2.0) * (n + 2.0 * r * r)
        return r ** (n - 1) * lap * lap

    mass_total = omega * half_line_integral(mass, "K0 mass")
    bilap_total = omega * half_line_integral(bilap, "K0 bilaplacian")
    return mass_total ** (2.0 / N) / bilap_total


def leading_constant(n: int, K0: float, f0: float) -> float:
    """1/(K0^{n/4} f0^{(n−4)/4}), the ε → 0 limit of massN and bilapSq"""
    return 1.0 / (K0 ** (n / 4.0) * f0 ** ((n - 4.0) / 4.0))


def radial_derivatives_fd(fn: Callable[[np.ndarray], np.ndarray], r: float,
                          h: float) -> Tuple[float, float, float, float]:
    samples = fn(r + h * STENCIL_OFFSETS)
    return (float(D1_STENCIL @ samples) / h, float(D2_STENCIL @ samples) / h ** 2,
            float(D3_STENCIL @ samples) / h ** 3, float(D4_STENCIL @ samples) / h ** 4)


def radial_bilaplacian_fd(fn: Callable[[np.ndarray], np.ndarray], r: float, n: int,
                          h: float = 0.02) -> float:
    """Δ² of a radial function of an even extension in r, by central differences"""
    d1, d2, d3, d4 = radial_derivatives_fd(fn, r, h)
    if r == 0.0:
        return n * (n + 2.0) / 3.0 * d4
    c = (n - 1.0) * (n - 3.0)
    return d4 + 2.0 * (n - 1.0) / r * d3 + c / r ** 2 * d2 - c / r ** 3 * d1


def nuisance_powers_for(n: int) -> Tuple[float, ...]:
    """ε-powers at which cutoff and truncated metric contaminate the fits"""
    if n == 6:
        return (2.0,)
    return tuple(sorted({p for p in (4.0, float(n - 4)) if p > 2.0}))


def _basis(model: ExpansionModel, eps: np.ndarray) -> np.ndarray:
    if model is ExpansionModel.EPS2LOG:
        return eps ** 2 * np.log(1.0 / eps ** 2)
    return eps ** 2


def fit_expansion(data: Iterable[Tuple[float, float]], model: ExpansionModel,
                  nuisance_powers: Sequence[float] = ()) -> ExpansionFit:
    """Least squares for value ≈ c0 + c2·φ(ε) (+ Σ c_p ε^p)"""
    pairs = list(data)
    if len(pairs) < 4:
        raise FitError(f"expansion fit needs at least 4 points, got {len(pairs)}")
    eps = np.array([p[0] for p in pairs], dtype=float)
    values = np.array([p[1] for p in pairs], dtype=float)
    if np.any(np.diff(eps) >= 0.0) or np.any(eps <= 0.0):
        raise FitError("eps values must be positive and strictly decreasing")

    columns = [np.ones_like(eps), _basis(model, eps)] + [eps ** p for p in nuisance_powers]
    design = np.column_stack(columns)
    scales = np.max(np.abs(design), axis=0)
    coeffs, _, rank, _ = np.linalg.lstsq(design / scales, values, rcond=None)
    if rank < design.shape[1]:
        raise FitError(f"rank-deficient expansion design (rank {rank} < {design.shape[1]})")
    coeffs = coeffs / scales

    residual = design @ coeffs - values
    dof = max(len(values) - design.shape[1], 1)
    stderr = float(np.sqrt(np.sum(residual ** 2) / dof))
    fit = ExpansionFit(
        c0=float(coeffs[0]),
        c2=float(coeffs[1]),
        model=model,
        stderr=stderr,
        eps_values=tuple(float(e) for e in eps),
        nuisance={float(p): float(c) for p, c in zip(nuisance_powers, coeffs[2:])},
    )
    if stderr > 1e-3 * abs(fit.c0):
        logger.debug(f"Fit stderr {stderr:.3e} exceeds 1e-3·|c0| = {1e-3 * abs(fit.c0):.3e}")
    return fit


def predicted_coefficients(n: int, S_g0: float, a0: float, f0: float,
                           laplacian_f0: float) -> Dict[str, float]:
    """Subleading coefficients of the ε-expansions, relative to the leading constant"""
    predictions: Dict[str, float] = {
        "massN": laplacian_f0 / (2.0 * (n - 2.0) * f0) + S_g0 / (6.0 * (n - 2.0)),
    }
    if n > 6:
        predictions["bilapSq"] = (n * n + 4.0 * n - 20.0) * S_g0 / (
            6.0 * (n * n - 4.0) * (n - 6.0))
        predictions["gradSq"] = 4.0 * (n - 1.0) * a0 / ((n * n - 4.0) * (n - 6.0))
    else:
        beta = special.beta(n / 2.0, n / 2.0)
        predictions["quadratic_form"] = -(n - 4.0) ** 2 / (bubble_constant(n) * beta) * (
            2.0 / n * S_g0 + a0)
    return predictions


def expansion_report(base: BubbleParams, eps_values: Sequence[float], K0: float,
                     nuisance_powers: Optional[Sequence[float]] = None,
                     rows: Optional[Sequence[BubbleIntegrals]] = None) -> Dict[str, Dict]:
    """Fits of each bubble integral with predicted and observed normalised coefficients

    For n > 6: −c2/c0 for massN and bilapSq, c2/L for gradSq. For n = 6 the
    assembled quadratic form is fitted in the ε² log(1/ε²) model and c2/L is
    compared with the curvature-plus-potential combination.
    """
    n = base.n
    powers = nuisance_powers_for(n) if nuisance_powers is None else tuple(nuisance_powers)
    rows = list(rows) if rows is not None else sweep_integrals(base, eps_values)
    L = leading_constant(n, K0, base.f0)
    predicted = predicted_coefficients(n, base.S_g0, base.a0, base.f0, base.laplacian_f0)

    def entry(name: str, series: Sequence[float], model: ExpansionModel,
              observed_of: Callable[[ExpansionFit], float]) -> Dict:
        fit = fit_expansion(zip(eps_values, series), model, powers)
        observed = observed_of(fit)
        expected = predicted[name]
        deviation = abs(observed - expected) / abs(expected) if expected != 0.0 else abs(observed)
        return {"fit": fit.to_record(), "observed": observed, "predicted": expected,
                "relative_deviation": deviation}

    report: Dict[str, Dict] = {
        "massN": entry("massN", [r.massN for r in rows], ExpansionModel.EPS2,
                       lambda fit: -fit.c2 / fit.c0),
    }
    if n > 6:
        report["bilapSq"] = entry("bilapSq", [r.bilapSq for r in rows], ExpansionModel.EPS2,
                                  lambda fit: -fit.c2 / fit.c0)
        if base.a0 != 0.0:
            report["gradSq"] = entry("gradSq", [r.gradSq for r in rows], ExpansionModel.EPS2,
                                     lambda fit: fit.c2 / L)
    else:
        report["quadratic_form"] = entry(
            "quadratic_form", [r.quadratic_form for r in rows], ExpansionModel.EPS2LOG,
            lambda fit: fit.c2 / L)
        # t0 squared factor omitted from the prediction
        report["quadratic_form"]["flags"] = ["undefined_t0_factor"]
    report["bTerm"] = {"ratios": [r.bTerm / r.bubble_eps ** 2 for r in rows]}
    report["leading_constant"] = {"value": L, "K0": K0}
    return report


def existence_condition(n: int, S_g0: float, a0: float, f0: float,
                        laplacian_f0: float) -> ExistenceCondition:
    """Geometric condition under which the bubble pushes J_λ below c_star"""
    if n < 6:
        raise ValueError(f"existence condition is stated for n >= 6, got {n}")
    if n == 6:
        margin = S_g0 + 3.0 * a0
    else:
        margin = (n * (n * n + 4.0 * n - 20.0) / (2.0 * (n - 2.0) * (n * n - 4.0)) * S_g0
                  + n * (n - 6.0) / ((n - 2.0) * (n * n - 4.0)) * a0
                  - n / (8.0 * (n - 2.0)) * laplacian_f0 / f0)
    return ExistenceCondition(holds=margin > 0.0, margin=margin)


def existence_condition_variants(n: int, S_g0: float, a0: float, f0: float,
                                 laplacian_f0: float) -> Dict[str, ExistenceCondition]:
    """Stated bracket and the bracket assembled in the expansion argument"""
    statement = existence_condition(n, S_g0, a0, f0, laplacian_f0)
    if n == 6:
        return {"statement": statement,
                "proof": ExistenceCondition(statement.holds, statement.margin, "proof")}
    proof_margin = ((n * n + 4.0 * n - 20.0) * n / (2.0 * (n * n - 4.0) * (n - 6.0)) * S_g0
                    + (n - 1.0) * n / ((n * n - 4.0) * (n - 6.0)) * a0
                    - n / (8.0 * (n - 2.0)) * laplacian_f0 / f0)
    return {"statement": statement,
            "proof": ExistenceCondition(proof_margin > 0.0, proof_margin, "proof")}


def threshold_gap_report(params: BubbleParams, K0: float, lam: float,
                         eps_values: Sequence[float] = DEFAULT_EPS_SWEEP,
                         rows: Optional[Sequence[BubbleIntegrals]] = None) -> ThresholdGap:
    """Compare ½‖u_ε‖² − (1/N)∫f|u_ε|^N (and its λ-retaining refinement) with c_star"""
    if lam < 0.0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    n = params.n
    N = 2.0 * n / (n - 4.0)
    rows = list(rows) if rows is not None else sweep_integrals(params, eps_values)
    c_star = energy_threshold(n, K0, params.f0)
    bounds = tuple(0.5 * r.quadratic_form - r.massN / N for r in rows)
    lambda_bounds = tuple(b - lam / params.q * r.qTerm for b, r in zip(bounds, rows))
    below = [r.bubble_eps for r, b in zip(rows, bounds) if b < c_star]

    fit = None
    if len(rows) >= 4:
        model = ExpansionModel.EPS2LOG if n == 6 else ExpansionModel.EPS2
        fit = fit_expansion(zip([r.bubble_eps for r in rows], bounds), model,
                            nuisance_powers_for(n))
    return ThresholdGap(
        c_star=c_star,
        lam=lam,
        eps_values=tuple(r.bubble_eps for r in rows),
        bounds=bounds,
        lambda_bounds=lambda_bounds,
        smallest_eps_below=min(below) if below else None,
        fit=fit,
    )
