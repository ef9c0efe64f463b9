"""
Acceptance suite behind verify-all

Each criterion builds its own problem from fixed parameters; only grid sizes,
sample counts and the seed come from the run document.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..core.ports import IDisplayService, IReportRepository
from ..domain import bubble, functionals, nehari, solvers
from ..domain.entities import BubbleParams, GridSpec, Problem, Sign, Thresholds
from ..domain.errors import AcceptanceError, Nehari4Error
from ..domain.spectral_core import band_limited_noise
from ..infrastructure.config import RunConfig
from ..infrastructure.filesystem import render_json
from .use_cases import MountainPassUseCase, WorkflowOutcome

logger = logging.getLogger(__name__)

CRITERIA = {
    1: "nehari identities",
    2: "positive energy on the manifold",
    3: "sobolev gradient consistency",
    4: "beta integrals and recursions",
    5: "bubble normalization",
    6: "expansion coefficients above dimension six",
    7: "logarithmic regime in dimension six",
    8: "threshold gap",
    9: "three solutions",
    10: "multistart robustness",
    11: "determinism",
}

IDENTITY_TOL = 1e-10
DERIVATIVE_TOL = 1e-9
FD_STEPS = (1e-3, 1e-4)
FD_MIN_RATIO = 50.0
BETA_TOL = 1e-9
NORMALIZATION_TOL = 1e-6
NORMALIZATION_DIMS = (6, 8, 10)
NORMALIZATION_RADII = (0.0, 0.5, 1.0, 2.0)
EXPANSION_TOL = 0.02
EXPANSION_DELTA = 1.0
EXPANSION_EPS = (0.02, 0.015, 0.01, 0.0075, 0.005)
GAP_EPS = (0.04, 0.03, 0.02, 0.015, 0.01, 0.0075, 0.005)
GAP_EPS_LIMIT = 0.02
LOG_REGIME_STDERR = 1e-3
LOG_REGIME_CONFIGS = ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0))
THREE_SOLUTION_L = 3.6
THREE_SOLUTION_RESIDUAL = 1e-6
SADDLE_RESIDUAL = 1e-4
SADDLE_SEPARATION = 1e-2
MULTISTART_TOL = 1e-4
MULTISTART_SHARE = 0.8


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> Dict[str, Any]:
        return {"id": self.id, "name": self.name, "passed": self.passed,
                "details": self.details}


def beta_pairs(count: int) -> List[Tuple[float, float]]:
    """(n, n/2 − 1) for the dimensions in use, then a fixed lattice"""
    pairs = [(float(n), n / 2.0 - 1.0) for n in range(5, 15)]
    pairs += [(p, q) for p in (3.5, 5.0, 6.0, 8.0, 11.0) for q in (0.0, 1.0)]
    while len(pairs) < count:
        p = 4.0 + 0.75 * len(pairs)
        pairs.append((p, 0.25 * p))
    return pairs[:count]


class VerifyAllUseCase:
    """Runs the selected criteria and fails the run when any of them fails"""

    def __init__(self, display_service: IDisplayService, repository: IReportRepository):
        self.display = display_service
        self.repository = repository
        self._runners: Dict[int, Callable[[RunConfig], CriterionResult]] = {
            1: self._nehari_identities,
            2: self._positive_energy,
            3: self._gradient_consistency,
            4: self._beta_integrals,
            5: self._bubble_normalization,
            6: self._expansion_coefficients,
            7: self._log_regime,
            8: self._threshold_gap,
            9: self._three_solutions,
            10: self._multistart,
            11: self._determinism,
        }
        self._cache: Dict[str, Any] = {}

    def execute(self, config: RunConfig) -> WorkflowOutcome:
        selected = config.acceptance.criteria
        results: List[CriterionResult] = []
        timings: Dict[str, float] = {}
        for position, cid in enumerate(selected, 1):
            self.display.display_progress(position, len(selected), CRITERIA[cid])
            start = time.perf_counter()
            try:
                result = self._runners[cid](config)
            except (Nehari4Error, ValueError) as exc:
                logger.error(f"Criterion {cid} raised {type(exc).__name__}: {exc}")
                result = CriterionResult(cid, CRITERIA[cid], False,
                                         {"error": f"{type(exc).__name__}: {exc}"})
            timings[str(cid)] = time.perf_counter() - start
            logger.info(f"Criterion {cid} ({CRITERIA[cid]}): "
                        f"{'passed' if result.passed else 'FAILED'} in {timings[str(cid)]:.1f}s")
            results.append(result)

        self.repository.write_csv("acceptance", [
            {"id": r.id, "name": r.name, "passed": r.passed} for r in results
        ])
        self.display.display_table(
            [{"criterion": r.id, "name": r.name, "passed": r.passed} for r in results],
            title="Acceptance",
        )
        failed = [r.id for r in results if not r.passed]
        record = {"criteria": [r.to_record() for r in results], "passed": not failed}
        failure = AcceptanceError(f"acceptance criteria failed: {failed}") if failed else None
        return WorkflowOutcome(record, failure, meta={"criterion_seconds": timings})

    def _identity_problem(self, config: RunConfig) -> Tuple[Problem, Thresholds]:
        if "identity_problem" not in self._cache:
            grid = GridSpec(n=5, m=config.acceptance.m, max_nodes=config.max_nodes)
            problem = Problem.constant(grid, alpha=2.0, beta=1.0, lam=0.0, q=1.5)
            thresholds = nehari.compute_thresholds(problem, bubble.K0_estimate(5),
                                                   config.sobolev_slack)
            lam = nehari.resolve_lambda(thresholds)
            self._cache["identity_problem"] = (problem.with_lambda(lam), thresholds)
        return self._cache["identity_problem"]

    def _identity_sample(self, config: RunConfig) -> List[Dict[str, float]]:
        if "identity_sample" in self._cache:
            return self._cache["identity_sample"]
        problem, thresholds = self._identity_problem(config)
        lam, q, N = problem.lam, problem.q, problem.N
        rows = []
        for i in range(config.acceptance.samples):
            u0 = solvers.initial_guess(problem.grid, config.seed + i, "noise")
            u, _, _ = nehari.nehari_point(problem, u0)
            energy = functionals.evaluate(problem, u)
            reduced = functionals.manifold_energy(energy.norm_sq, energy.q_term, lam, q, N)
            derivative = functionals.nehari_derivative(problem, u)
            reduced_derivative = functionals.nehari_derivative_on_manifold(
                energy.norm_sq, energy.q_term, lam, q, N)
            rows.append({
                "Q_rel": abs(energy.Q) / energy.norm_sq,
                "J_identity_rel": abs(energy.J - reduced) / abs(reduced),
                "derivative": derivative,
                "derivative_gap": abs(derivative - reduced_derivative) / energy.norm_sq,
                "J": energy.J,
                "norm": math.sqrt(energy.norm_sq),
                "above_rho": math.sqrt(energy.norm_sq) >= thresholds.rho,
            })
        self._cache["identity_sample"] = rows
        return rows

    def _nehari_identities(self, config: RunConfig) -> CriterionResult:
        rows = self._identity_sample(config)
        problem, thresholds = self._identity_problem(config)
        details = {
            "samples": len(rows),
            "lambda": problem.lam,
            "max_Q_rel": max(r["Q_rel"] for r in rows),
            "max_J_identity_rel": max(r["J_identity_rel"] for r in rows),
            "max_derivative_gap": max(r["derivative_gap"] for r in rows),
            "max_derivative": max(r["derivative"] for r in rows),
            "share_above_rho": sum(r["above_rho"] for r in rows) / len(rows),
        }
        passed = (details["max_Q_rel"] <= IDENTITY_TOL
                  and details["max_J_identity_rel"] <= IDENTITY_TOL
                  and details["max_derivative_gap"] <= DERIVATIVE_TOL
                  and details["max_derivative"] < 0.0)
        return CriterionResult(1, CRITERIA[1], passed, details)

    def _positive_energy(self, config: RunConfig) -> CriterionResult:
        rows = self._identity_sample(config)
        problem, thresholds = self._identity_problem(config)
        min_J = min(r["J"] for r in rows)
        details = {"min_J": min_J, "lambda": problem.lam,
                   "lambda_window": thresholds.lambda_window}
        passed = min_J > 0.0 and problem.lam < thresholds.lambda_window
        return CriterionResult(2, CRITERIA[2], passed, details)

    def _gradient_consistency(self, config: RunConfig) -> CriterionResult:
        """Sign-definite base points keep |u|^q smooth along each difference stencil"""
        problem, _ = self._identity_problem(config)
        grid = problem.grid
        pairs = []
        for i in range(config.acceptance.gradient_pairs):
            v = 1.0 + band_limited_noise(grid, np.random.default_rng(config.seed + 1000 + i))
            for sign, kind in ((None, "positive"), (Sign.PLUS, "positive"),
                               (Sign.MINUS, "negative")):
                u = solvers.initial_guess(grid, config.seed + i, kind)
                exact = functionals.directional_derivative(problem, u, v, sign)
                errors = []
                for h in FD_STEPS:
                    plus = functionals.evaluate_signed(problem, u + h * v, sign).J
                    minus = functionals.evaluate_signed(problem, u - h * v, sign).J
                    errors.append(abs((plus - minus) / (2.0 * h) - exact))
                ratio = errors[0] / errors[1] if errors[1] > 0.0 else math.inf
                pairs.append({"pair": i, "sign": sign.value if sign else "none",
                              "exact": exact, "errors": errors, "ratio": ratio})
        passed = all(p["ratio"] >= FD_MIN_RATIO for p in pairs)
        return CriterionResult(3, CRITERIA[3], passed,
                               {"min_ratio": min(p["ratio"] for p in pairs), "pairs": pairs})

    def _beta_integrals(self, config: RunConfig) -> CriterionResult:
        rows = []
        for p, q in beta_pairs(config.acceptance.pairs):
            value, oracle = bubble.I_pq(p, q), bubble.I_pq_oracle(p, q)
            recursions = bubble.I_pq_recursions(p, q)
            rows.append({"p": p, "q": q, "quadrature": value, "oracle": oracle,
                         "oracle_rel": abs(value - oracle) / oracle, **recursions})
        worst = max(max(r["oracle_rel"], r["p_step"], r["pq_step"]) for r in rows)
        return CriterionResult(4, CRITERIA[4], worst <= BETA_TOL,
                               {"worst_relative": worst, "pairs": rows})

    def _bubble_normalization(self, config: RunConfig) -> CriterionResult:
        rows = []
        for n in NORMALIZATION_DIMS:
            exponent = (n + 4.0) / (n - 4.0)
            for r in NORMALIZATION_RADII:
                lhs = bubble.radial_bilaplacian_fd(lambda x, n=n: bubble.bubble_profile(n, x),
                                                   r, n)
                rhs = n * (n - 4.0) * (n * n - 4.0) * float(bubble.bubble_profile(n, r)) ** exponent
                rows.append({"n": n, "r": r, "fd": lhs, "closed_form": rhs,
                             "relative": abs(lhs - rhs) / abs(rhs)})
        worst = max(r["relative"] for r in rows)
        return CriterionResult(5, CRITERIA[5], worst <= NORMALIZATION_TOL,
                               {"worst_relative": worst, "points": rows})

    def _expansion_coefficients(self, config: RunConfig) -> CriterionResult:
        details: Dict[str, Any] = {}
        passed = True
        for n in config.acceptance.expansion_dims:
            params = BubbleParams(n=n, bubble_eps=EXPANSION_EPS[0], delta=EXPANSION_DELTA,
                                  f0=1.0, laplacian_f0=1.0, S_g0=1.0, a0=1.0, b0=1.0)
            report = bubble.expansion_report(params, EXPANSION_EPS, bubble.K0_estimate(n))
            deviations = {name: report[name]["relative_deviation"]
                          for name in ("massN", "bilapSq", "gradSq")}
            ratios = np.abs(report["bTerm"]["ratios"])
            vanishing = bool(np.all(np.diff(ratios) < 0.0))
            passed = passed and vanishing and all(d <= EXPANSION_TOL for d in deviations.values())
            details[str(n)] = {"relative_deviation": deviations,
                               "bTerm_ratios": ratios.tolist(),
                               "bTerm_vanishing": vanishing}
        return CriterionResult(6, CRITERIA[6], passed, details)

    def _log_regime(self, config: RunConfig) -> CriterionResult:
        n = 6
        K0 = bubble.K0_estimate(n)
        rows = []
        for S, a in LOG_REGIME_CONFIGS:
            params = BubbleParams(n=n, bubble_eps=EXPANSION_EPS[0], delta=EXPANSION_DELTA,
                                  S_g0=S, a0=a)
            fit = bubble.expansion_report(params, EXPANSION_EPS, K0)["quadratic_form"]["fit"]
            combination = 2.0 / n * S + a
            rows.append({
                "S_g0": S, "a0": a, "c0": fit["c0"], "c2": fit["c2"], "stderr": fit["stderr"],
                "tight": fit["stderr"] <= LOG_REGIME_STDERR * abs(fit["c0"]),
                "sign_matches": np.sign(fit["c2"]) == -np.sign(combination),
            })
        passed = all(r["tight"] and r["sign_matches"] for r in rows)
        return CriterionResult(7, CRITERIA[7], passed, {"configurations": rows})

    def _threshold_gap(self, config: RunConfig) -> CriterionResult:
        n = 8
        K0 = bubble.K0_estimate(n)
        condition = bubble.existence_condition(n, 2.0, 0.0, 1.0, 0.0)
        base = BubbleParams(n=n, bubble_eps=GAP_EPS[0], delta=EXPANSION_DELTA, S_g0=2.0)
        favourable = bubble.threshold_gap_report(base, K0, 0.0, GAP_EPS)
        adverse = bubble.threshold_gap_report(
            BubbleParams(n=n, bubble_eps=GAP_EPS[0], delta=EXPANSION_DELTA, S_g0=-10.0),
            K0, 0.0, GAP_EPS)
        below = all(b < favourable.c_star
                    for e, b in zip(favourable.eps_values, favourable.bounds) if e <= GAP_EPS_LIMIT)
        flipped = (favourable.fit.c2 != 0.0
                   and np.sign(favourable.fit.c2) == -np.sign(adverse.fit.c2))
        details = {"existence_condition": condition.to_record(),
                   "favourable": favourable.to_record(), "adverse": adverse.to_record(),
                   "below_for_small_eps": below, "correction_flips": bool(flipped)}
        return CriterionResult(8, CRITERIA[8], condition.holds and below and bool(flipped),
                               details)

    def _three_solution_config(self, config: RunConfig) -> RunConfig:
        return RunConfig.model_validate({
            "subcommand": "mpass", "n": 5, "m": config.acceptance.m, "L": THREE_SOLUTION_L,
            "alpha": 2.0, "beta": 0.5, "q": 1.5, "lambda": "auto", "seed": config.seed,
            "sobolev_slack": config.sobolev_slack, "max_nodes": config.max_nodes,
            "solver": config.solver.model_dump(), "path": config.path.model_dump(),
        })

    def _three_solution_run(self, config: RunConfig, name: str) -> Tuple[str, WorkflowOutcome]:
        run_config = self._three_solution_config(config)
        repository = self.repository.child(name)
        outcome = MountainPassUseCase(self.display, repository).execute(run_config)
        document = {"config": run_config.resolved(), "subcommand": "mpass",
                    "complete": outcome.failure is None, "result": outcome.record}
        repository.write_report(document)
        return render_json(document), outcome

    def _three_solutions(self, config: RunConfig) -> CriterionResult:
        rendered, outcome = self._three_solution_run(config, "three_solution")
        self._cache["three_solution_report"] = rendered
        record = outcome.record
        c_star = record["thresholds"]["c_star"]
        signed = {name: record[name] for name in ("u_plus", "u_minus")}
        signed_ok = all(
            s["converged"] and s["residual_rel"] <= THREE_SOLUTION_RESIDUAL
            and s["sign_audit_passed"] is True and 0.0 < s["J"] < c_star
            for s in signed.values()
        )
        details: Dict[str, Any] = {"signed_ok": signed_ok, "c_star": c_star,
                                   "J_plus": signed["u_plus"]["J"],
                                   "J_minus": signed["u_minus"]["J"]}
        path: Optional[Dict[str, Any]] = record.get("mountain_pass")
        saddle_ok = False
        if path is not None:
            saddle = path["saddle"]
            separated = not any(f.startswith("saddle_near") for f in path["flags"])
            saddle_ok = (saddle["residual_rel"] <= SADDLE_RESIDUAL
                         and saddle["J"] > max(details["J_plus"], details["J_minus"])
                         and separated)
            details.update(saddle_residual=saddle["residual_rel"], saddle_J=saddle["J"],
                           separated=separated, c_lambda=path["c_lambda"],
                           c_lambda_below_c_star=path["palais_smale"]["passed"])
        details["saddle_ok"] = saddle_ok
        return CriterionResult(9, CRITERIA[9], signed_ok and saddle_ok, details)

    def _multistart(self, config: RunConfig) -> CriterionResult:
        problem, thresholds = self._identity_problem(config)
        restarts = config.acceptance.restarts
        runs = solvers.multistart(problem, config.solve_options(), restarts, "noise", None,
                                  thresholds)
        tol = MULTISTART_TOL * max(1.0, abs(runs.best.J))
        agreeing = runs.agreeing(tol)
        monotone = all(bool(np.all(np.diff(r.energy_trace) <= 0.0)) for r in runs.reports)
        details = {**runs.to_record(), "agreeing": agreeing, "tolerance": tol,
                   "monotone": monotone}
        passed = agreeing >= math.ceil(MULTISTART_SHARE * restarts) and monotone
        return CriterionResult(10, CRITERIA[10], passed, details)

    def _determinism(self, config: RunConfig) -> CriterionResult:
        first = self._cache.get("three_solution_report")
        if first is None:
            first, _ = self._three_solution_run(config, "three_solution")
        second, _ = self._three_solution_run(config, "three_solution_rerun")
        identical = first.encode("utf-8") == second.encode("utf-8")
        return CriterionResult(11, CRITERIA[11], identical,
                               {"bytes": len(first.encode("utf-8")), "identical": identical})
