"""
Solvers - Constrained minimization on M_λ / M_λ± and the mountain-pass string

Every iterate lives on the Nehari manifold: a Sobolev-gradient step is taken
and the result is pulled back along its ray to the large fibering root.
"""
import logging
import math
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .bubble import standard_bubble
from .entities import (
    Branch,
    EnergyBreakdown,
    Field,
    GridSpec,
    LocalMinimumAudit,
    MultistartReport,
    PalaisSmaleCheck,
    PathReport,
    Problem,
    Sign,
    SolveOptions,
    SolveReport,
    Thresholds,
)
from .errors import ConfigError, ConvergenceError, PathError, RayMissesManifoldError
from .functionals import (
    evaluate,
    gradient_inner,
    residual_rel,
    sobolev_gradient,
    sobolev_norm_sq,
)
from .nehari import lambda_in_window, nehari_point
from .spectral_core import band_limited_noise, spectral_tail

logger = logging.getLogger(__name__)

MAX_RESEEDS = 3
RESEED_SCALE = 1e-2
SIGN_AUDIT_TOL = 1e-8
MANIFOLD_TOL = 1e-8
LOCAL_MIN_TOL = 1e-8
COLLAPSE_TOL = 1e-10
SADDLE_TOL = 1e-4
SADDLE_LEVEL_TOL = 1e-3
TRANSVERSE_TOL = 1e-3
PATH_BUMP = 0.25
INITIAL_GUESS_KINDS = ("noise", "positive", "negative", "bubble")


def initial_guess(grid: GridSpec, seed: int, kind: str = "noise",
                  bubble_eps: float = 0.3, f0: float = 1.0) -> Field:
    """Deterministic starting field for a solve"""
    rng = np.random.default_rng(seed)
    if kind == "noise":
        return band_limited_noise(grid, rng)
    if kind == "positive":
        return 1.0 + 0.5 * band_limited_noise(grid, rng)
    if kind == "negative":
        return -(1.0 + 0.5 * band_limited_noise(grid, rng))
    if kind == "bubble":
        center = 0.5 * grid.L
        r_sq = np.zeros(grid.shape)
        for x in grid.coordinates():
            offset = np.abs(x - center)
            r_sq = r_sq + np.minimum(offset, grid.L - offset) ** 2
        values = standard_bubble(grid.n, bubble_eps, f0, np.sqrt(r_sq), delta=grid.L / 4.0)
        return Field(values, grid)
    raise ConfigError(f"unknown initial guess '{kind}', expected one of {INITIAL_GUESS_KINDS}")


def _project_with_reseed(problem: Problem, u0: Field, sign: Optional[Sign],
                         rng: np.random.Generator) -> Tuple[Field, EnergyBreakdown]:
    candidate, attempt = u0, 0
    while True:
        try:
            projected, _, energy = nehari_point(problem, candidate, Branch.LARGE, sign)
            return projected, energy
        except RayMissesManifoldError as exc:
            attempt += 1
            if attempt > MAX_RESEEDS:
                raise
            logger.warning(f"Projection failed ({exc}); reseeding, attempt {attempt}")
            size = RESEED_SCALE * float(np.max(np.abs(u0.values)))
            candidate = u0 + size * band_limited_noise(u0.grid, rng)


def sign_audit(problem: Problem, u: Field, sign: Optional[Sign],
               tol: float = SIGN_AUDIT_TOL) -> Optional[bool]:
    """Discrete maximum-principle check; None where the factorization hypotheses fail"""
    if sign is None or not problem.constant_coefficients:
        return None
    if problem.alpha <= 0.0 or problem.alpha ** 2 <= 4.0 * problem.beta:
        return None
    if sign is Sign.PLUS:
        return u.min() >= -tol * max(u.max(), 0.0)
    return u.max() <= tol * max(-u.min(), 0.0)


def _build_report(problem: Problem, u: Field, energy: EnergyBreakdown, sign: Optional[Sign],
                  iters: int, trace: Sequence[float], converged: bool,
                  thresholds: Optional[Thresholds], flags: List[str]) -> SolveReport:
    norm = math.sqrt(max(energy.norm_sq, 0.0))
    in_manifold = abs(energy.Q) <= MANIFOLD_TOL * energy.norm_sq
    below = None
    if thresholds is not None:
        in_manifold = in_manifold and norm >= thresholds.rho
        below = energy.J < thresholds.c_star
        if norm < thresholds.rho:
            flags.append("norm_below_rho")
    audit = sign_audit(problem, u, sign)
    if audit is False:
        flags.append("sign_audit_failed")
    return SolveReport(
        u=u, J=energy.J, Q=energy.Q, residual_rel=residual_rel(problem, u, sign),
        iters=iters, energy_trace=tuple(trace), below_threshold=below,
        spectral_tail=spectral_tail(u), norm=norm, converged=converged,
        in_manifold=in_manifold, sign=sign, min_u=u.min(), max_u=u.max(),
        sign_audit_passed=audit, flags=tuple(flags),
    )


def _descend(problem: Problem, u0: Field, opts: SolveOptions, sign: Optional[Sign],
             thresholds: Optional[Thresholds]) -> SolveReport:
    if not np.any(u0.values):
        raise ConfigError("initial guess must be a nonzero field")
    flags: List[str] = []
    if thresholds is not None and not lambda_in_window(problem.lam, thresholds):
        flags.append("lambda_outside_window")

    rng = np.random.default_rng(opts.seed)
    u, energy = _project_with_reseed(problem, u0, sign, rng)
    trace = [energy.J]
    step, stall, iters, converged = opts.step, 0, 0, False

    while True:
        if residual_rel(problem, u, sign) <= opts.tol_residual:
            converged = True
            break
        if iters >= opts.max_iters:
            flags.append("iteration_cap")
            break
        g = sobolev_gradient(problem, u, sign)
        g_sq = gradient_inner(problem, g, g)
        accepted = None
        for _ in range(opts.max_backtracks):
            try:
                trial, _, trial_energy = nehari_point(problem, u - step * g, Branch.LARGE, sign)
            except RayMissesManifoldError:
                step *= opts.step_shrink
                continue
            if trial_energy.J <= energy.J - opts.armijo * step * g_sq:
                accepted = (trial, trial_energy)
                break
            step *= opts.step_shrink
        if accepted is None:
            flags.append("line_search_failed")
            logger.info(f"Line search failed at iteration {iters}, J={energy.J:.12g}")
            break

        iters += 1
        drop = energy.J - accepted[1].J
        u, energy = accepted
        trace.append(energy.J)
        logger.debug(f"iter {iters}: J={energy.J:.12g} step={step:.3g} |g|^2={g_sq:.3e}")
        step = min(step / opts.step_shrink, opts.step)
        stall = stall + 1 if drop <= opts.tol_energy * max(1.0, abs(energy.J)) else 0
        if stall >= opts.stall_window:
            flags.append("energy_stalled")
            break

    if energy.J > trace[0] + opts.tol_energy * max(1.0, abs(trace[0])):
        raise ConvergenceError(
            f"descent ended above its initial energy ({energy.J:.6g} > {trace[0]:.6g})"
        )
    report = _build_report(problem, u, energy, sign, iters, trace, converged,
                           thresholds, flags)
    logger.info(
        f"Solve{' ' + sign.value if sign else ''}: converged={converged} iters={iters} "
        f"J={report.J:.10g} residual_rel={report.residual_rel:.3e}"
    )
    return report


def minimize_on_nehari(problem: Problem, u0: Field, opts: SolveOptions,
                       thresholds: Optional[Thresholds] = None) -> SolveReport:
    return _descend(problem, u0, opts, None, thresholds)


def minimize_signed(problem: Problem, sign: Sign, u0: Field, opts: SolveOptions,
                    thresholds: Optional[Thresholds] = None) -> SolveReport:
    return _descend(problem, u0, opts, sign, thresholds)


def multistart(problem: Problem, opts: SolveOptions, restarts: int = 10,
               kind: str = "noise", sign: Optional[Sign] = None,
               thresholds: Optional[Thresholds] = None) -> MultistartReport:
    """Independent solves from seeds opts.seed + i, kept in seed order"""
    if restarts < 1:
        raise ConfigError(f"multistart needs at least one restart, got {restarts}")
    seeds = tuple(opts.seed + i for i in range(restarts))
    reports = []
    for seed in seeds:
        seeded = replace(opts, seed=seed)
        u0 = initial_guess(problem.grid, seed, kind)
        reports.append(_descend(problem, u0, seeded, sign, thresholds))
    return MultistartReport(reports=tuple(reports), seeds=seeds)


def local_minimum_audit(problem: Problem, report: SolveReport, samples: int = 20,
                        rel_size: float = 1e-2, seed: int = 0,
                        tol: float = LOCAL_MIN_TOL) -> LocalMinimumAudit:
    """Perturb, project back to M_λ and require J not to drop below J(u)

    Signed solutions are audited against the unsigned functional as well.
    """
    rng = np.random.default_rng(seed)
    u = report.u
    base = evaluate(problem, u).J
    size = rel_size * float(np.max(np.abs(u.values)))
    worst = -math.inf
    for _ in range(samples):
        perturbed = u + size * band_limited_noise(u.grid, rng)
        _, _, energy = nehari_point(problem, perturbed, Branch.LARGE)
        worst = max(worst, base - energy.J)
    return LocalMinimumAudit(passed=worst <= tol, worst_drop=worst,
                             samples=samples, rel_size=rel_size)


def report_level(report: Union[SolveReport, PathReport, float]) -> float:
    """Energy of a SolveReport, barrier level of a PathReport"""
    if isinstance(report, PathReport):
        return report.c_lambda
    if isinstance(report, SolveReport):
        return report.J
    return float(report)


def verify_palais_smale_level(report: Union[SolveReport, PathReport, float],
                              thresholds: Thresholds) -> PalaisSmaleCheck:
    """Strict comparison of an energy level with c_star"""
    value = report_level(report)
    margin = thresholds.c_star - value
    return PalaisSmaleCheck(passed=margin > 0.0, value=value,
                            c_star=thresholds.c_star, margin=margin)


def _path_lengths(problem: Problem, nodes: Sequence[Field]) -> np.ndarray:
    lengths = [0.0]
    for a, b in zip(nodes[:-1], nodes[1:]):
        lengths.append(lengths[-1] + math.sqrt(max(sobolev_norm_sq(problem, b - a), 0.0)))
    return np.array(lengths)


def redistribute(problem: Problem, nodes: Sequence[Field]) -> List[Field]:
    """Equal-arclength reparameterization in ‖·‖ by piecewise-linear interpolation"""
    lengths = _path_lengths(problem, nodes)
    total = lengths[-1]
    if total <= COLLAPSE_TOL:
        raise PathError("path collapsed to a point")
    collapsed = int(np.count_nonzero(np.diff(lengths) <= COLLAPSE_TOL))
    if collapsed:
        logger.debug(f"Re-spreading {collapsed} collapsed path segment(s)")
    count = len(nodes)
    spread = [nodes[0]]
    for i in range(1, count - 1):
        target = i * total / (count - 1)
        j = int(np.searchsorted(lengths, target, side="right")) - 1
        j = min(max(j, 0), count - 2)
        span = lengths[j + 1] - lengths[j]
        weight = 0.0 if span <= COLLAPSE_TOL else float((target - lengths[j]) / span)
        spread.append(nodes[j] + (nodes[j + 1] - nodes[j]) * weight)
    spread.append(nodes[-1])
    return spread


def _unit_tangent(problem: Problem, before: Field, after: Field) -> Optional[Field]:
    chord = after - before
    norm = math.sqrt(max(gradient_inner(problem, chord, chord), 0.0))
    return None if norm <= COLLAPSE_TOL else chord / norm


def _place(problem: Problem, u: Field, respect_manifold: bool) -> Tuple[Field, EnergyBreakdown]:
    if respect_manifold:
        projected, _, energy = nehari_point(problem, u, Branch.LARGE)
        return projected, energy
    return u, evaluate(problem, u)


def _relax_node(problem: Problem, node: Field, energy: EnergyBreakdown, step: float,
                opts: SolveOptions, respect_manifold: bool) -> Tuple[Field, EnergyBreakdown]:
    g = sobolev_gradient(problem, node)
    for _ in range(opts.max_backtracks):
        try:
            trial, trial_energy = _place(problem, node - step * g, respect_manifold)
        except RayMissesManifoldError:
            step *= opts.step_shrink
            continue
        if trial_energy.J < energy.J:
            return trial, trial_energy
        step *= opts.step_shrink
    return node, energy


def _refine_saddle(problem: Problem, nodes: List[Field], index: int, energies: Sequence[float],
                   opts: SolveOptions, respect_manifold: bool,
                   thresholds: Optional[Thresholds]) -> SolveReport:
    """Climbing descent at the barrier node

    Accepted steps lower the residual and keep J(w) between the neighbouring
    energies and the barrier level c_λ (up to SADDLE_LEVEL_TOL).
    """
    w = nodes[index]
    energy = evaluate(problem, w)
    floor = max(energies[0], energies[-1], energies[index - 1], energies[index + 1])
    ceiling = energies[index] + SADDLE_LEVEL_TOL * max(1.0, abs(energies[index]))
    tangent = _unit_tangent(problem, nodes[index - 1], nodes[index + 1])
    residual = residual_rel(problem, w)
    trace = [energy.J]
    step, iters = opts.step, 0
    while residual > SADDLE_TOL and iters < opts.max_iters:
        g = sobolev_gradient(problem, w)
        if tangent is not None:
            g = g - 2.0 * gradient_inner(problem, g, tangent) * tangent
        moved = False
        for _ in range(opts.max_backtracks):
            try:
                trial, trial_energy = _place(problem, w - step * g, respect_manifold)
            except RayMissesManifoldError:
                step *= opts.step_shrink
                continue
            trial_residual = residual_rel(problem, trial)
            if trial_residual < residual and floor < trial_energy.J <= ceiling:
                w, energy, residual, moved = trial, trial_energy, trial_residual, True
                break
            step *= opts.step_shrink
        if not moved:
            break
        iters += 1
        trace.append(energy.J)
        step = min(step / opts.step_shrink, opts.step)
    flags: List[str] = ["saddle_refinement_approximate"]
    return _build_report(problem, w, energy, None, iters, trace, residual <= SADDLE_TOL,
                         thresholds, flags)


def mountain_pass(problem: Problem, u_plus: Field, u_minus: Field, opts: SolveOptions,
                  path_nodes: int = 9, respect_manifold: bool = True,
                  thresholds: Optional[Thresholds] = None,
                  tol_transverse: float = TRANSVERSE_TOL) -> PathReport:
    """String method between the signed minimizers; γ(0) = u⁻ and γ(1) = u⁺"""
    if not problem.constant_coefficients:
        raise ConfigError("mountain pass is available for constant coefficients only")
    if path_nodes < 9 or path_nodes % 2 == 0:
        raise ConfigError(f"path_nodes must be odd and >= 9, got {path_nodes}")

    rng = np.random.default_rng(opts.seed)
    amplitude = PATH_BUMP * max(float(np.max(np.abs(u_plus.values))),
                                float(np.max(np.abs(u_minus.values))))
    bump = amplitude * band_limited_noise(problem.grid, rng)
    nodes: List[Field] = [u_minus]
    node_energy: List[EnergyBreakdown] = [evaluate(problem, u_minus)]
    for s in np.linspace(0.0, 1.0, path_nodes)[1:-1].tolist():
        seed_node = (1.0 - s) * u_minus + s * u_plus + math.sin(math.pi * s) * bump
        placed, energy = _place(problem, seed_node, respect_manifold)
        nodes.append(placed)
        node_energy.append(energy)
    nodes.append(u_plus)
    node_energy.append(evaluate(problem, u_plus))

    c_trace: List[float] = []
    step, converged, transverse, iteration = opts.step, False, math.inf, 0
    for iteration in range(1, opts.max_iters + 1):
        energies = [e.J for e in node_energy]
        index = int(np.argmax(energies))
        c_trace.append(energies[index])
        if index in (0, path_nodes - 1):
            raise PathError("no interior barrier found: path maximum sits at an endpoint")

        g = sobolev_gradient(problem, nodes[index])
        tangent = _unit_tangent(problem, nodes[index - 1], nodes[index + 1])
        if tangent is not None:
            g = g - gradient_inner(problem, g, tangent) * tangent
        scale = math.sqrt(max(gradient_inner(problem, nodes[index], nodes[index]), 1e-300))
        transverse = math.sqrt(max(gradient_inner(problem, g, g), 0.0)) / scale
        if transverse <= tol_transverse:
            converged = True
            break

        for i in range(1, path_nodes - 1):
            nodes[i], node_energy[i] = _relax_node(problem, nodes[i], node_energy[i], step,
                                                   opts, respect_manifold)
        spread = redistribute(problem, nodes)
        for i in range(1, path_nodes - 1):
            nodes[i], node_energy[i] = _place(problem, spread[i], respect_manifold)
        logger.debug(f"path iter {iteration}: c={energies[index]:.10g} "
                     f"transverse={transverse:.3e} argmax={index}")

    energies = [e.J for e in node_energy]
    index = int(np.argmax(energies))
    if index in (0, path_nodes - 1):
        raise PathError("no interior barrier found: path maximum sits at an endpoint")
    flags = [] if converged else ["path_not_converged"]
    saddle = _refine_saddle(problem, nodes, index, energies, opts, respect_manifold,
                            thresholds)
    for name, endpoint in (("u_minus", u_minus), ("u_plus", u_plus)):
        gap = math.sqrt(max(sobolev_norm_sq(problem, saddle.u - endpoint), 0.0))
        if gap < 1e-2 * max(saddle.norm, 1e-300):
            flags.append(f"saddle_near_{name}")
    logger.info(f"Mountain pass: c_lambda={max(energies):.10g} iterations={iteration} "
                f"converged={converged} saddle residual={saddle.residual_rel:.3e}")
    return PathReport(
        nodes=tuple(nodes), c_lambda=max(energies), saddle=saddle,
        node_energies=tuple(energies), c_trace=tuple(c_trace), iterations=iteration,
        converged=converged, respect_manifold=respect_manifold, argmax_index=index,
        transverse_gradient=transverse, flags=tuple(flags),
    )
