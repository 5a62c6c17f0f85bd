"""High-SNR power allocation across branches and an independent verifier.

At high SNR the system BER reduces to a constant obstruction floor plus one
power-law term per branch, ``sum_k b_k * alpha_k^(-m_k)``, minimized over the
simplex ``sum alpha_k = 1``.  ``optimal_alloc`` solves the stationarity
system ``m_k b_k alpha_k^(-m_k-1) = lambda`` exactly (scalar root-find on the
multiplier); positivity of each alpha comes out automatically, so no
active-set handling is needed.  ``proportional_alloc`` is the simpler
normalized power form ``alpha_k ~ (b_k m_k)^(1/(m_k+1))``, which coincides
with the exact solution when all exponents are equal and is kept for
comparison.

The verifier never reuses the closed form: it reports the stationarity
residual and the gap to a nested-grid minimizer over the simplex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn

from .performance import SQRT_PI, SystemSpec, _active


@dataclass(frozen=True)
class AllocProblem:
    """Per-branch coefficients and exponents of the high-SNR BER objective."""

    coeffs: tuple[float, ...]     # b_k > 0
    exponents: tuple[float, ...]  # m_k > 0
    floor_term: float             # allocation-independent obstruction floor

    def __post_init__(self):
        if len(self.coeffs) < 1 or len(self.coeffs) != len(self.exponents):
            raise ValueError("coeffs and exponents must be equal-length, nonempty")
        if any(not (b > 0.0 and math.isfinite(b)) for b in self.coeffs):
            raise ValueError("all coefficients must be > 0 and finite")
        if any(not (m > 0.0 and math.isfinite(m)) for m in self.exponents):
            raise ValueError("all exponents must be > 0 and finite")

    @property
    def size(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class Allocation:
    alphas: tuple[float, ...]
    objective: float

    def __post_init__(self):
        if any(a <= 0.0 for a in self.alphas):
            raise ValueError("allocation must be strictly positive")
        if abs(sum(self.alphas) - 1.0) >= 1e-12:
            raise ValueError(f"allocation must sum to 1, got {sum(self.alphas)}")


@dataclass(frozen=True)
class AllocCheck:
    kkt_residual: float
    grid_optimum_gap: float
    grid_alphas: tuple[float, ...]


def build_problem(system: SystemSpec) -> AllocProblem:
    """Extract the high-SNR objective coefficients from a system.

    The blocked-probability product excludes the branch's own factor, so a
    branch with survival probability 1 gets the correct limiting coefficient
    instead of a 0/0.
    """
    pairs = _active(system)
    gbar = system.gamma_bar()
    blocked = [1.0 - d.n for d, _ in pairs]
    coeffs = []
    exponents = []
    for k, (d, _) in enumerate(pairs):
        x = 1.0 / (gbar * d.beam.a0 ** 2)
        others = math.prod(b for i, b in enumerate(blocked) if i != k)
        b_k = float(
            d.n * 2.0 ** (d.m - 1.0) * x ** (0.5 * d.m)
            * gamma_fn(0.5 * (d.m + 1.0)) * others / SQRT_PI
        )
        if b_k <= 0.0:
            if d.n == 0.0:
                raise ValueError(f"channel {k} is fully blocked: coefficient is 0")
            raise ValueError(
                f"channel {k} has coefficient 0 because another channel never "
                "obstructs; the high-SNR objective is degenerate here"
            )
        coeffs.append(b_k)
        exponents.append(d.m)
    floor = 0.5 * math.prod(blocked)
    return AllocProblem(
        coeffs=tuple(coeffs), exponents=tuple(exponents), floor_term=floor
    )


def objective(problem: AllocProblem, alphas) -> float:
    """High-SNR BER objective: floor + sum_k b_k alpha_k^(-m_k)."""
    arr = np.asarray(alphas, dtype=float)
    if arr.shape != (problem.size,):
        raise ValueError(f"expected {problem.size} coefficients, got {arr.shape}")
    if np.any(arr <= 0.0):
        return math.inf
    b = np.asarray(problem.coeffs)
    m = np.asarray(problem.exponents)
    return problem.floor_term + float(np.sum(b * arr ** (-m)))


def _objective_grid(problem: AllocProblem, alphas: np.ndarray) -> np.ndarray:
    """Vectorized objective over rows of allocations (no positivity checks)."""
    b = np.asarray(problem.coeffs)
    m = np.asarray(problem.exponents)
    return problem.floor_term + np.sum(b * alphas ** (-m), axis=-1)


def optimal_alloc(problem: AllocProblem) -> Allocation:
    """Exact minimizer of the high-SNR objective on the simplex.

    Solves sum_k (m_k b_k / lambda)^(1/(m_k+1)) = 1 for the multiplier; the
    left side is strictly decreasing in lambda so the root is unique.
    Identical branches short-circuit to the exactly uniform split.
    """
    mb = [m * b for m, b in zip(problem.exponents, problem.coeffs)]
    count = problem.size
    if count == 1:
        return Allocation(alphas=(1.0,), objective=objective(problem, [1.0]))
    if len(set(zip(problem.coeffs, problem.exponents))) == 1:
        uniform = (1.0 / count,) * count
        return Allocation(alphas=uniform, objective=objective(problem, uniform))

    powers = [1.0 / (m + 1.0) for m in problem.exponents]

    def budget(lam: float) -> float:
        return sum((v / lam) ** p for v, p in zip(mb, powers)) - 1.0

    lo = min(mb)  # the matching branch alone already fills the budget
    hi = max(
        v * count ** (1.0 / p) for v, p in zip(mb, powers)
    )  # every branch at most 1/count
    lam = brentq(budget, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)
    alphas = np.array([(v / lam) ** p for v, p in zip(mb, powers)])
    alphas /= alphas.sum()  # absorb the 1e-15 root-find residual
    alphas = tuple(float(a) for a in alphas)
    return Allocation(alphas=alphas, objective=objective(problem, alphas))


def proportional_alloc(problem: AllocProblem) -> Allocation:
    """Normalized power form alpha_k ~ (b_k m_k)^(1/(m_k+1)).

    Stationary (hence optimal) exactly when all exponents are equal;
    otherwise an approximation retained for comparison against
    :func:`optimal_alloc`.
    """
    weights = np.array(
        [
            (b * m) ** (1.0 / (m + 1.0))
            for b, m in zip(problem.coeffs, problem.exponents)
        ]
    )
    alphas = tuple(float(a) for a in weights / weights.sum())
    return Allocation(alphas=alphas, objective=objective(problem, alphas))


def _grid_minimize(problem: AllocProblem, rounds: int = 14) -> tuple[float, ...]:
    """Nested-grid search on the simplex; independent of the closed form."""
    count = problem.size
    eps = 1e-9
    if count == 1:
        return (1.0,)
    if count == 2:
        lo, hi = eps, 1.0 - eps
        best = 0.5
        for _ in range(rounds):
            xs = np.linspace(lo, hi, 201)
            grid = np.stack([xs, 1.0 - xs], axis=-1)
            vals = _objective_grid(problem, grid)
            best = float(xs[int(np.argmin(vals))])
            width = (hi - lo) * 0.1
            lo = max(eps, best - width)
            hi = min(1.0 - eps, best + width)
        return (best, 1.0 - best)
    if count == 3:
        lo = np.array([eps, eps])
        hi = np.array([1.0 - eps, 1.0 - eps])
        best = np.array([1.0 / 3.0, 1.0 / 3.0])
        for _ in range(rounds):
            xs = np.linspace(lo[0], hi[0], 61)
            ys = np.linspace(lo[1], hi[1], 61)
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            rest = 1.0 - gx - gy
            mask = rest > eps
            grid = np.stack([gx[mask], gy[mask], rest[mask]], axis=-1)
            vals = _objective_grid(problem, grid)
            idx = int(np.argmin(vals))
            best = grid[idx, :2]
            width = (hi - lo) * 0.15
            lo = np.maximum(eps, best - width)
            hi = np.minimum(1.0 - eps, best + width)
        return (float(best[0]), float(best[1]), float(1.0 - best[0] - best[1]))
    raise NotImplementedError("grid verifier covers up to three branches")


def verify_alloc(problem: AllocProblem, alloc: Allocation) -> AllocCheck:
    """Score an allocation against the stationarity system and a grid search.

    ``kkt_residual`` is the max relative spread of the per-branch multiplier
    estimates m_k b_k alpha_k^(-m_k-1) around their mean; the grid gap is
    objective(alloc) minus the nested-grid minimum (a well-verified
    allocation gives a residual near machine precision and a tiny gap).
    """
    values = [
        m * b * a ** (-m - 1.0)
        for m, b, a in zip(problem.exponents, problem.coeffs, alloc.alphas)
    ]
    lam_hat = sum(values) / len(values)
    residual = max(abs(v - lam_hat) for v in values) / lam_hat
    grid = _grid_minimize(problem)
    gap = objective(problem, alloc.alphas) - objective(problem, grid)
    return AllocCheck(
        kkt_residual=float(residual), grid_optimum_gap=float(gap), grid_alphas=grid
    )
