"""Constrained descent, multistart, audits and the string method."""
import logging
import math
from dataclasses import replace

import numpy as np
import pytest

from nehari4.domain import bubble, nehari, solvers
from nehari4.domain.entities import Field, Problem, Sign, SolveOptions
from nehari4.domain.errors import ConfigError, PathError
from nehari4.domain.functionals import evaluate, sobolev_norm_sq

FAST = SolveOptions(max_iters=40, tol_residual=1e-6, seed=0)


@pytest.mark.unit
@pytest.mark.parametrize("kind", solvers.INITIAL_GUESS_KINDS)
def test_initial_guess_is_deterministic(grid, kind):
    first = solvers.initial_guess(grid, 11, kind)
    second = solvers.initial_guess(grid, 11, kind)
    assert np.array_equal(first.values, second.values)
    assert np.any(first.values)


@pytest.mark.unit
def test_signed_initial_guesses_have_definite_sign(grid):
    assert solvers.initial_guess(grid, 2, "positive").min() >= 0.5
    assert solvers.initial_guess(grid, 2, "negative").max() <= -0.5
    with pytest.raises(ConfigError, match="unknown initial guess"):
        solvers.initial_guess(grid, 2, "uniform")


@pytest.mark.unit
def test_descent_stays_on_manifold_and_never_climbs(coarse_grid, make_problem):
    problem = make_problem(coarse_grid)
    u0 = solvers.initial_guess(coarse_grid, 0, "noise")
    report = solvers.minimize_on_nehari(problem, u0, FAST)
    assert np.all(np.diff(report.energy_trace) <= 0.0)
    assert abs(report.Q) <= solvers.MANIFOLD_TOL * report.norm ** 2
    assert report.J <= report.energy_trace[0]
    assert report.iters <= FAST.max_iters
    assert report.converged or {"iteration_cap", "line_search_failed",
                                "energy_stalled"} & set(report.flags)


@pytest.mark.unit
def test_zero_initial_guess_is_rejected(coarse_grid, make_problem):
    problem = make_problem(coarse_grid)
    with pytest.raises(ConfigError, match="nonzero"):
        solvers.minimize_on_nehari(problem, Field.zeros(coarse_grid), FAST)


@pytest.mark.unit
def test_signed_descent_keeps_sign(coarse_grid, make_problem):
    problem = make_problem(coarse_grid, alpha=2.0, beta=0.5)
    u0 = solvers.initial_guess(coarse_grid, 1, "negative")
    report = solvers.minimize_signed(problem, Sign.MINUS, u0, FAST)
    assert report.sign is Sign.MINUS
    assert report.J <= report.energy_trace[0]
    assert report.sign_audit_passed in (True, False)


@pytest.mark.unit
def test_multistart_uses_consecutive_seeds(coarse_grid, make_problem):
    problem = make_problem(coarse_grid)
    opts = SolveOptions(max_iters=5, seed=4)
    runs = solvers.multistart(problem, opts, restarts=3)
    assert runs.seeds == (4, 5, 6)
    assert len(runs.reports) == 3
    assert runs.best.J == min(runs.energies)
    assert 1 <= runs.agreeing(math.inf) == 3
    with pytest.raises(ConfigError):
        solvers.multistart(problem, opts, restarts=0)


@pytest.mark.unit
def test_sign_audit_needs_real_factorization(grid):
    positive = solvers.initial_guess(grid, 0, "positive")
    degenerate = Problem.constant(grid, alpha=2.0, beta=1.0, lam=0.0, q=1.5)
    split = Problem.constant(grid, alpha=2.0, beta=0.5, lam=0.0, q=1.5)
    assert solvers.sign_audit(degenerate, positive, Sign.PLUS) is None
    assert solvers.sign_audit(split, positive, Sign.PLUS) is True
    assert solvers.sign_audit(split, positive, Sign.MINUS) is False
    assert solvers.sign_audit(split, positive, None) is None


@pytest.mark.unit
def test_palais_smale_comparison_is_strict(problem):
    thresholds = nehari.compute_thresholds(problem, bubble.K0_estimate(5))
    below = solvers.verify_palais_smale_level(0.5 * thresholds.c_star, thresholds)
    at = solvers.verify_palais_smale_level(thresholds.c_star, thresholds)
    assert below.passed and below.margin == pytest.approx(0.5 * thresholds.c_star)
    assert not at.passed


@pytest.mark.unit
def test_redistribute_equalises_arclength(problem, noise):
    nodes = [noise * s for s in (0.0, 0.1, 0.2, 0.9, 1.0)]
    nodes[0] = noise * 1e-3
    spread = solvers.redistribute(problem, nodes)
    gaps = [math.sqrt(sobolev_norm_sq(problem, b - a)) for a, b in zip(spread, spread[1:])]
    assert gaps == pytest.approx([gaps[0]] * len(gaps), rel=1e-10)
    assert np.array_equal(spread[0].values, nodes[0].values)
    assert np.array_equal(spread[-1].values, nodes[-1].values)


@pytest.mark.unit
def test_mountain_pass_preconditions(problem, noise):
    with pytest.raises(ConfigError, match="odd"):
        solvers.mountain_pass(problem, noise, -noise, FAST, path_nodes=8)


@pytest.mark.slow
@pytest.mark.integration
def test_local_minimum_audit_on_signed_minimizer(coarse_grid, make_problem):
    problem = make_problem(coarse_grid, alpha=2.0, beta=0.5)
    u0 = solvers.initial_guess(coarse_grid, 3, "positive")
    report = solvers.minimize_signed(problem, Sign.PLUS, u0,
                                     SolveOptions(max_iters=2000, tol_residual=1e-7))
    audit = solvers.local_minimum_audit(problem, report, samples=5)
    assert audit.samples == 5
    assert report.converged
    assert audit.passed


@pytest.mark.unit
def test_redistribute_respreads_collapsed_segments(problem, noise, caplog):
    caplog.set_level(logging.DEBUG, logger="nehari4.domain.solvers")
    nodes = [noise * s for s in (0.0, 0.0, 0.0, 0.5, 1.0)]
    spread = solvers.redistribute(problem, nodes)
    gaps = [math.sqrt(sobolev_norm_sq(problem, b - a)) for a, b in zip(spread, spread[1:])]
    assert min(gaps) > solvers.COLLAPSE_TOL
    assert gaps == pytest.approx([0.25 * math.sqrt(sobolev_norm_sq(problem, noise))] * 4,
                                 rel=1e-10)
    assert "Re-spreading 2 collapsed" in caplog.text
    with pytest.raises(PathError, match="collapsed"):
        solvers.redistribute(problem, [noise * 0.0] * 5)


@pytest.mark.unit
def test_local_minimum_audit_compares_unsigned_energy(coarse_grid, make_problem, cosine):
    problem = make_problem(coarse_grid)
    u, _, _ = nehari.nehari_point(problem, cosine(coarse_grid, 0, 1) + 0.1)
    report = solvers.minimize_on_nehari(problem, u, SolveOptions(max_iters=1))
    # a sign-changing field labelled as a signed solution is still audited on M_λ
    labelled = replace(report, u=u, sign=Sign.PLUS)
    audit = solvers.local_minimum_audit(problem, labelled, samples=3, rel_size=1e-9)
    assert abs(audit.worst_drop) <= 1e-6 * abs(evaluate(problem, u).J)


@pytest.fixture
def signed_pair(coarse_grid, make_problem):
    problem = make_problem(coarse_grid, alpha=2.0, beta=0.5)
    opts = SolveOptions(max_iters=400, tol_residual=1e-7, seed=0)
    u_plus = solvers.minimize_signed(
        problem, Sign.PLUS, solvers.initial_guess(coarse_grid, 3, "positive"), opts)
    u_minus = solvers.minimize_signed(
        problem, Sign.MINUS, solvers.initial_guess(coarse_grid, 3, "negative"), opts)
    return problem, u_plus.u, u_minus.u


def relative_gap(problem, u, v):
    return math.sqrt(sobolev_norm_sq(problem, u - v) / sobolev_norm_sq(problem, u))


@pytest.mark.slow
@pytest.mark.integration
def test_mountain_pass_between_signed_minimizers(signed_pair):
    problem, u_plus, u_minus = signed_pair
    path = solvers.mountain_pass(problem, u_plus, u_minus, SolveOptions(max_iters=60, seed=0))
    assert np.array_equal(path.nodes[0].values, u_minus.values)
    assert np.array_equal(path.nodes[-1].values, u_plus.values)
    assert 0 < path.argmax_index < len(path.nodes) - 1
    assert path.c_lambda == max(path.node_energies)

    endpoints = max(path.node_energies[0], path.node_energies[-1])
    assert all(c >= endpoints for c in path.c_trace)
    saddle = path.saddle
    assert endpoints < saddle.J
    assert saddle.J <= path.c_lambda + solvers.SADDLE_LEVEL_TOL * max(1.0, abs(path.c_lambda))
    assert relative_gap(problem, saddle.u, u_plus) >= 1e-2
    assert relative_gap(problem, saddle.u, u_minus) >= 1e-2
    assert not any(flag.startswith("saddle_near") for flag in path.flags)
    assert abs(saddle.Q) <= 1e-8 * saddle.norm ** 2

    thresholds = nehari.compute_thresholds(problem, bubble.K0_estimate(5))
    check = solvers.verify_palais_smale_level(path, thresholds)
    assert check.value == path.c_lambda
    assert check.passed is (path.c_lambda < thresholds.c_star)


@pytest.mark.integration
def test_mountain_pass_without_projection(coarse_grid, make_problem):
    problem = make_problem(coarse_grid, lam=0.0)
    ground, _, _ = nehari.nehari_point(problem, solvers.initial_guess(coarse_grid, 0, "positive"))
    near_zero, far = 1e-2 * ground, 2.0 * ground
    # short steps keep the unconstrained nodes near the initial string
    opts = SolveOptions(max_iters=2, step=1e-6, seed=0)
    path = solvers.mountain_pass(problem, far, near_zero, opts, respect_manifold=False)
    assert path.respect_manifold is False
    assert np.array_equal(path.nodes[0].values, near_zero.values)
    assert np.array_equal(path.nodes[-1].values, far.values)
    assert 0 < path.argmax_index < len(path.nodes) - 1
    assert path.saddle.J > max(path.node_energies[0], path.node_energies[-1])
    assert path.saddle.J <= path.c_lambda + solvers.SADDLE_LEVEL_TOL * max(1.0, path.c_lambda)
    assert path.to_record()["respect_manifold"] is False
