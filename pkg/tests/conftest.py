"""Shared fixtures: small five-dimensional grids keep every unit test fast."""
import json
import math
from pathlib import Path

import numpy as np
import pytest

from nehari4.domain import bubble, nehari
from nehari4.domain.entities import Field, GridSpec, Problem
from nehari4.domain.spectral_core import band_limited_noise


@pytest.fixture
def grid() -> GridSpec:
    return GridSpec(n=5, m=6)


@pytest.fixture
def coarse_grid() -> GridSpec:
    return GridSpec(n=5, m=4)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def noise(grid, rng) -> Field:
    return band_limited_noise(grid, rng)


@pytest.fixture
def make_problem():
    """Constant-coefficient problem with λ = 0.9·min(λ₀, λ₁) unless given"""

    def build(grid: GridSpec, alpha: float = 2.0, beta: float = 1.0, q: float = 1.5,
              lam=None) -> Problem:
        problem = Problem.constant(grid, alpha=alpha, beta=beta, lam=0.0, q=q)
        if lam is None:
            thresholds = nehari.compute_thresholds(problem, bubble.K0_estimate(grid.n))
            lam = nehari.resolve_lambda(thresholds)
        return problem.with_lambda(lam)

    return build


@pytest.fixture
def problem(grid, make_problem) -> Problem:
    return make_problem(grid)


@pytest.fixture
def write_config(tmp_path):
    """Write a run document and return its path"""

    def write(document: dict, name: str = "run.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return write


@pytest.fixture
def cosine():
    """cos(2πk x_axis / L) on a grid"""

    def build(grid: GridSpec, axis: int, k: int) -> Field:
        return Field.from_function(
            grid, lambda *x: np.cos(2.0 * math.pi * k * x[axis] / grid.L))

    return build
