"""
Application layer - One use case per subcommand

Use cases assemble domain results into report sections; every number they
return comes from a domain operation.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..core.ports import IDisplayService, IReportRepository
from ..domain import bubble, nehari, solvers
from ..domain.entities import Field, Problem, Sign, SolveReport, Thresholds
from ..domain.errors import ConfigError, ConvergenceError, GridError, Nehari4Error
from ..domain.spectral_core import apply_P, band_limited_noise, l2_norm
from ..infrastructure.config import RunConfig

logger = logging.getLogger(__name__)


@dataclass
class WorkflowOutcome:
    """Report section of one workflow; failure set when the run must exit nonzero"""
    record: Dict[str, Any]
    failure: Optional[Nehari4Error] = None
    meta: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ProblemContext:
    problem: Problem
    thresholds: Thresholds
    lambda_auto: bool
    in_window: bool = True
    flags: List[str] = field(default_factory=list)

    def to_record(self) -> Dict[str, Any]:
        return {
            "problem": self.problem.to_record(),
            "thresholds": self.thresholds.to_record(),
            "lambda": self.problem.lam,
            "lambda_auto": self.lambda_auto,
            "lambda_in_window": self.in_window,
            "flags": list(self.flags),
        }


def _coefficient(repository: IReportRepository, name: str, path: str, config: RunConfig) -> Field:
    value = repository.read_field(Path(path))
    if not value.grid.compatible(config.grid()):
        raise GridError(f"coefficient {name} from {path} does not match the configured grid")
    return Field(value.values, config.grid())


def build_problem(config: RunConfig, repository: Optional[IReportRepository] = None,
                  lam: float = 0.0) -> Problem:
    grid = config.grid()
    f = config.f.build(grid)
    if not config.variable_coefficients:
        return Problem.constant(grid, config.alpha, config.beta, lam, config.q, f=f)
    if repository is None:
        raise ConfigError("variable coefficients need a repository to read a_file and b_file")
    return Problem(grid=grid, f=f, lam=float(lam), q=config.q,
                   a=_coefficient(repository, "a", config.a_file, config),
                   b=_coefficient(repository, "b", config.b_file, config))


def prepare_problem(config: RunConfig,
                    repository: Optional[IReportRepository] = None) -> ProblemContext:
    """Problem with λ resolved; "auto" becomes lambda_factor·min(λ₀, λ₁)"""
    problem = build_problem(config, repository)
    K0 = bubble.K0_estimate(config.n)
    thresholds = nehari.compute_thresholds(problem, K0, config.sobolev_slack,
                                           config.A_eps, config.rho)
    auto = config.lam == "auto"
    lam = nehari.resolve_lambda(thresholds, config.lambda_factor) if auto else float(config.lam)
    in_window = nehari.lambda_in_window(lam, thresholds)
    flags = [] if in_window else ["lambda_outside_window"]
    logger.info(f"lambda={lam:.6g} ({'auto' if auto else 'given'}), "
                f"window={thresholds.lambda_window:.6g}, c_star={thresholds.c_star:.6g}")
    return ProblemContext(problem.with_lambda(lam), thresholds, auto, in_window, flags)


def _trace_rows(report: SolveReport) -> List[Dict[str, Any]]:
    return [{"iteration": i, "J": J} for i, J in enumerate(report.energy_trace)]


def _solve_summary(report: SolveReport, label: str) -> Dict[str, Any]:
    return {"solution": label, "J": report.J, "residual_rel": report.residual_rel,
            "iters": report.iters, "converged": report.converged,
            "min_u": report.min_u, "max_u": report.max_u}


class ThresholdsUseCase:
    """λ₀, λ₁, ρ, K₀, Λ bounds, c_star and the condition margins in one record"""

    def __init__(self, display_service: IDisplayService, repository: IReportRepository):
        self.display = display_service
        self.repository = repository

    def execute(self, config: RunConfig) -> WorkflowOutcome:
        context = prepare_problem(config, self.repository)
        record = context.to_record()
        record["maximum_principle"] = self._maximum_principle(context.problem, config.seed)
        if config.n >= 6:
            b = config.bubble
            record["existence_condition"] = {
                name: condition.to_record()
                for name, condition in bubble.existence_condition_variants(
                    config.n, b.S_g0, b.a0, b.f0, b.laplacian_f0).items()
            }
        rows = [{"quantity": k, "value": v} for k, v in context.thresholds.to_record().items()
                if isinstance(v, float)]
        rows.append({"quantity": "lambda", "value": context.problem.lam})
        self.display.display_table(rows, title="Thresholds")
        return WorkflowOutcome(record)

    def _maximum_principle(self, problem: Problem, seed: int) -> Dict[str, Any]:
        if not problem.constant_coefficients:
            return {"applicable": False, "reason": "variable coefficients"}
        try:
            x1, x2 = nehari.maximum_principle_split(problem.alpha, problem.beta)
        except ConfigError as exc:
            return {"applicable": False, "reason": exc.message}
        sample = band_limited_noise(problem.grid, np.random.default_rng(seed))
        direct = apply_P(problem, sample)
        factored = nehari.factorized_operator(x1, x2, sample)
        mismatch = l2_norm(direct - factored) / max(l2_norm(direct), 1e-300)
        return {"applicable": True, "x1": x1, "x2": x2, "factorization_mismatch": mismatch}


class BubbleUseCase:
    """ε sweep of the test-function integrals, fits and the threshold gap"""

    def __init__(self, display_service: IDisplayService, repository: IReportRepository):
        self.display = display_service
        self.repository = repository

    def execute(self, config: RunConfig) -> WorkflowOutcome:
        params = config.bubble_params()
        eps_values = config.bubble.eps_values
        K0 = bubble.K0_estimate(config.n)
        rows = bubble.sweep_integrals(params, eps_values)
        self.repository.write_csv("bubble_integrals", [r.to_record() for r in rows])

        if config.lam == "auto":
            lam = prepare_problem(config, self.repository).problem.lam
        else:
            lam = float(config.lam)

        record: Dict[str, Any] = {
            "K0": K0,
            "c_star": nehari.energy_threshold(config.n, K0, params.f0),
            "lambda": lam,
            "integrals": [r.to_record() for r in rows],
            "expansion": bubble.expansion_report(params, eps_values, K0, rows=rows),
            "threshold_gap": bubble.threshold_gap_report(params, K0, lam, eps_values,
                                                         rows=rows).to_record(),
            "clamped_metric": any(r.g_clamped for r in rows),
        }
        if config.n >= 6:
            record["existence_condition"] = {
                name: condition.to_record()
                for name, condition in bubble.existence_condition_variants(
                    config.n, params.S_g0, params.a0, params.f0, params.laplacian_f0).items()
            }

        self.display.display_table(
            [{"integral": name, "observed": entry["observed"], "predicted": entry["predicted"],
              "deviation": entry["relative_deviation"]}
             for name, entry in record["expansion"].items() if "observed" in entry],
            title=f"Bubble expansion, n={config.n}",
        )
        return WorkflowOutcome(record)


class SolveUseCase:
    """Minimization of J_λ on M_λ, single start or multistart"""

    def __init__(self, display_service: IDisplayService, repository: IReportRepository):
        self.display = display_service
        self.repository = repository

    def execute(self, config: RunConfig) -> WorkflowOutcome:
        context = prepare_problem(config, self.repository)
        problem, thresholds = context.problem, context.thresholds
        opts = config.solve_options()
        record = context.to_record()

        if config.solver.restarts > 1:
            runs = solvers.multistart(problem, opts, config.solver.restarts,
                                      config.solver.initial_guess, None, thresholds)
            record["multistart"] = runs.to_record()
            report = runs.best
        else:
            u0 = solvers.initial_guess(problem.grid, config.seed, config.solver.initial_guess)
            report = solvers.minimize_on_nehari(problem, u0, opts, thresholds)

        record["solution"] = report.to_record()
        record["palais_smale"] = solvers.verify_palais_smale_level(report, thresholds).to_record()
        self.repository.write_field("u", report.u)
        self.repository.write_slice("u", report.u)
        self.repository.write_csv("energy_trace", _trace_rows(report))
        self.display.display_table([_solve_summary(report, "u")], title="Nehari minimizer")

        failure = None
        if not report.converged:
            failure = ConvergenceError(
                f"minimization stopped with residual_rel={report.residual_rel:.3e} "
                f"(flags: {', '.join(report.flags) or 'none'})"
            )
        return WorkflowOutcome(record, failure)


def solve_both_signs(config: RunConfig, context: ProblemContext) -> Dict[Sign, SolveReport]:
    """u⁺ from a positive start, u⁻ from a negative one"""
    opts = config.solve_options()
    reports = {}
    for sign, kind in ((Sign.PLUS, "positive"), (Sign.MINUS, "negative")):
        u0 = solvers.initial_guess(context.problem.grid, config.seed, kind)
        reports[sign] = solvers.minimize_signed(context.problem, sign, u0, opts,
                                                context.thresholds)
    return reports


def _signed_failure(reports: Dict[Sign, SolveReport]) -> Optional[Nehari4Error]:
    stalled = [s.value for s, r in reports.items() if not r.converged]
    if not stalled:
        return None
    return ConvergenceError(f"signed minimization did not converge for sign(s) {stalled}")


class SolveSignedUseCase:
    """u⁺ and u⁻ with sign audits, local-minimum audits and level checks"""

    NAMES = {Sign.PLUS: "u_plus", Sign.MINUS: "u_minus"}

    def __init__(self, display_service: IDisplayService, repository: IReportRepository):
        self.display = display_service
        self.repository = repository

    def execute(self, config: RunConfig) -> WorkflowOutcome:
        context = prepare_problem(config, self.repository)
        record = context.to_record()
        reports = solve_both_signs(config, context)
        for sign, report in reports.items():
            name = self.NAMES[sign]
            record[name] = report.to_record()
            record[name]["palais_smale"] = solvers.verify_palais_smale_level(
                report, context.thresholds).to_record()
            record[name]["local_minimum"] = solvers.local_minimum_audit(
                context.problem, report, seed=config.seed).to_record()
            self.repository.write_field(name, report.u)
            self.repository.write_csv(f"energy_trace_{name}", _trace_rows(report))
        self.display.display_table(
            [_solve_summary(reports[s], self.NAMES[s]) for s in (Sign.PLUS, Sign.MINUS)],
            title="Signed minimizers",
        )
        return WorkflowOutcome(record, _signed_failure(reports))


class MountainPassUseCase:
    """Signed minimizers, then the string between them and the refined saddle"""

    def __init__(self, display_service: IDisplayService, repository: IReportRepository):
        self.display = display_service
        self.repository = repository

    def execute(self, config: RunConfig) -> WorkflowOutcome:
        context = prepare_problem(config, self.repository)
        record = context.to_record()
        reports = solve_both_signs(config, context)
        for sign, report in reports.items():
            name = SolveSignedUseCase.NAMES[sign]
            record[name] = report.to_record()
            self.repository.write_field(name, report.u)
        failure = _signed_failure(reports)
        if failure is not None:
            return WorkflowOutcome(record, failure)

        path = solvers.mountain_pass(
            context.problem, reports[Sign.PLUS].u, reports[Sign.MINUS].u,
            config.solve_options(), config.path.nodes, config.path.respect_manifold,
            context.thresholds, config.path.tol_transverse,
        )
        record["mountain_pass"] = path.to_record()
        record["mountain_pass"]["palais_smale"] = solvers.verify_palais_smale_level(
            path, context.thresholds).to_record()
        self.repository.write_field("saddle", path.saddle.u)
        self.repository.write_slice("saddle", path.saddle.u)
        self.repository.write_csv("c_trace", [{"iteration": i + 1, "c_lambda": c}
                                              for i, c in enumerate(path.c_trace)])
        self.repository.write_csv("path_energies", [{"node": i, "J": J}
                                                    for i, J in enumerate(path.node_energies)])
        self.display.display_table(
            [_solve_summary(reports[Sign.PLUS], "u_plus"),
             _solve_summary(reports[Sign.MINUS], "u_minus"),
             _solve_summary(path.saddle, "saddle")],
            title=f"Mountain pass, c_lambda={path.c_lambda:.6g}",
        )
        if path.saddle.residual_rel > solvers.SADDLE_TOL:
            failure = ConvergenceError(
                f"saddle residual {path.saddle.residual_rel:.3e} above {solvers.SADDLE_TOL:g}"
            )
        return WorkflowOutcome(record, failure)
