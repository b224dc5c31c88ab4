"""Maximise the posterior expected utility over warranty lengths.

The feasible set ``0 < w1 < w2 < L`` is mapped smoothly onto the plane with
``w2 = L * s(z2)`` and ``w1 = w2 * s(z1)``, where ``s`` is the logistic
function. A coarse grid over the triangle seeds Nelder-Mead runs in the
unconstrained coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from .bayes import PosteriorChain
from .errors import NumericalError, ValidationError
from .warranty import UtilitySurface, WarrantyLengths, WarrantyPolicy, expected_utility

N_STARTS = 3
SIMPLEX_DIAMETER_HOURS = 1e-4


@dataclass(frozen=True)
class OptimizationResult:
    w_star: WarrantyLengths
    u_star: float
    iterations: int
    starts: int
    converged: bool
    grid_best: float = math.nan

    def as_dict(self) -> dict:
        return {
            "w1": self.w_star.w1,
            "w2": self.w_star.w2,
            "u_star": self.u_star,
            "u_star_millions": round(self.u_star / 1e6, 3),
            "iterations": self.iterations,
            "starts": self.starts,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class SweepRow:
    a: float
    w1: float
    w2: float
    u_star: float


def to_lengths(z, L: float) -> WarrantyLengths:
    w2 = L * float(expit(z[1]))
    return WarrantyLengths(w2 * float(expit(z[0])), w2)


def from_lengths(w1: float, w2: float, L: float) -> np.ndarray:
    return np.array([logit(w1 / w2), logit(w2 / L)])


def feasibility_grid(L: float, density: int) -> list[tuple[float, float]]:
    """Cell centres of a ``density x density`` grid with ``w1 < w2``."""
    centres = (np.arange(density) + 0.5) / density * L
    return [(a, b) for a in centres for b in centres if a < b]


def optimize(chain: PosteriorChain, policy: WarrantyPolicy, grid_density: int = 40,
             seed: int = 0, surface: UtilitySurface | None = None) -> OptimizationResult:
    """Grid-seeded multi-start Nelder-Mead maximisation of ``u*(w1, w2)``.

    The best of the local optima is re-evaluated with ``expected_utility`` so
    that ``u_star`` is exactly the chain estimate at ``w_star``.
    """
    if grid_density < 2:
        raise ValidationError("grid_density must be at least 2")
    L = policy.L
    surface = surface or UtilitySurface(chain, policy)

    def value(w1, w2):
        try:
            v = surface(WarrantyLengths(w1, w2))
        except (NumericalError, ValidationError):
            return -math.inf
        return v if math.isfinite(v) else -math.inf

    cells = feasibility_grid(L, grid_density)
    scored = [(value(w1, w2), w1, w2) for w1, w2 in cells]
    finite = [s for s in scored if math.isfinite(s[0])]
    if not finite:
        raise NumericalError("utility is non-finite on every grid point; check the policy")
    # ties broken by lexicographic w so the start order is reproducible
    finite.sort(key=lambda s: (-s[0], s[1], s[2]))
    grid_best = finite[0][0]

    rng = np.random.default_rng(seed)
    cell = L / grid_density
    xatol = SIMPLEX_DIAMETER_HOURS / (L / 4)

    def neg(z):
        try:
            w = to_lengths(z, L)
        except ValidationError:
            return math.inf
        v = value(w.w1, w.w2)
        return -v if math.isfinite(v) else math.inf

    candidates = []
    iterations, converged = 0, True
    for _, w1, w2 in finite[:N_STARTS]:
        j1, j2 = rng.uniform(-0.25, 0.25, size=2) * cell
        w2s = min(max(w2 + j2, 1e-9 * L), L * (1 - 1e-9))
        w1s = min(max(w1 + j1, 1e-9 * w2s), w2s * (1 - 1e-9))
        z0 = from_lengths(w1s, w2s, L)
        simplex = np.array([z0, z0 + [0.2, 0.0], z0 + [0.0, 0.2]])
        res = minimize(neg, z0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": xatol,
                                "fatol": 1e-3, "maxiter": 4000})
        iterations += int(res.nit)
        converged &= bool(res.success)
        w = to_lengths(res.x, L)
        candidates.append((-float(res.fun), w.w1, w.w2))

    candidates.sort(key=lambda s: (-s[0], s[1], s[2]))
    _, w1, w2 = candidates[0]
    w_star = WarrantyLengths(w1, w2)
    return OptimizationResult(
        w_star=w_star,
        u_star=float(expected_utility(chain, w_star, policy)),
        iterations=iterations,
        starts=len(candidates),
        converged=converged,
        grid_best=grid_best,
    )


def sweep_a(chain: PosteriorChain, policy: WarrantyPolicy, a_values,
            grid_density: int = 40, seed: int = 0) -> list[SweepRow]:
    """One non-linear optimisation per ``a``, reusing the same chain."""
    rows = []
    for a in a_values:
        pol = policy.replace(rebate_kind="nonlinear", a=float(a))
        res = optimize(chain, pol, grid_density=grid_density, seed=seed)
        rows.append(SweepRow(float(a), res.w_star.w1, res.w_star.w2, res.u_star))
    return rows
