"""Fisher information about (mu, tau) under Type-II unified hybrid censoring.

The total is assembled from censoring-scheme building blocks, each of the
form ``int <grad ln h> w(x) dx`` where ``<A> = A A^T`` and the weight ``w`` is
either ``n f(x)`` (time censoring) or a sum of order-statistic densities
(failure censoring). Integrals are computed with adaptive quadrature in the
log-time variable, where the log-normal integrands are Gaussian-shaped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import gammaln, log_ndtr

from . import lifetime as lt
from .censoring import UhcsScheme
from .errors import NumericalError, ValidationError
from .lifetime import LogNormalParams

EPSABS = 1e-9
EPSREL = 1e-7
# stand-ins for the infinite endpoints, as tail probabilities
LOWER_TAIL = 1e-15
UPPER_TAIL = 1e-10
PSD_TOL = 1e-8


@dataclass(frozen=True)
class InfoMatrix:
    """Symmetric 2x2 information matrix indexed by (mu, tau)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (2, 2):
            raise ValidationError(f"information matrix must be 2x2, got {v.shape}")
        object.__setattr__(self, "values", 0.5 * (v + v.T))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __add__(self, other: InfoMatrix) -> InfoMatrix:
        return InfoMatrix(self.values + other.values)

    def __sub__(self, other: InfoMatrix) -> InfoMatrix:
        return InfoMatrix(self.values - other.values)

    def __mul__(self, k: float) -> InfoMatrix:
        return InfoMatrix(self.values * k)

    __rmul__ = __mul__

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.values)

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        return bool(self.eigenvalues.min() >= -tol)

    def inverse(self) -> np.ndarray:
        ev = self.eigenvalues
        if ev.min() <= 0 or ev.min() < 1e-12 * ev.max():
            raise NumericalError(f"information matrix not invertible, eigenvalues {ev}")
        return np.linalg.inv(self.values)

    @classmethod
    def zeros(cls) -> InfoMatrix:
        return cls(np.zeros((2, 2)))


def hazard_log_gradient(x, p: LogNormalParams) -> np.ndarray:
    return lt.hazard_log_gradient(x, p)


def _ranks_density(rank: int, n: int, x: float, p: LogNormalParams) -> float:
    # sum_{i<=rank} f_{i:n}(x), the density of failures observed up to rank
    if not (1 <= rank <= n):
        raise ValidationError(f"rank {rank} outside 1..{n}")
    i = np.arange(1, rank + 1)
    z = math.sqrt(p.tau) * (math.log(x) - p.mu)
    log_f, log_s = log_ndtr(z), log_ndtr(-z)
    terms = np.log(i) + gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
    terms = terms + np.where(i > 1, (i - 1) * log_f, 0.0)
    terms = terms + np.where(n > i, (n - i) * log_s, 0.0)
    return float(np.exp(terms).sum() * lt.pdf(x, p))


def _integrate(weight, upper: float, p: LogNormalParams) -> InfoMatrix:
    """``int_0^upper <grad ln h(x)> weight(x) dx`` via y = ln x."""
    y_lo = math.log(float(lt.quantile(LOWER_TAIL, p)))
    y_hi = min(math.log(upper) if upper > 0 else -math.inf,
               math.log(float(lt.quantile(1.0 - UPPER_TAIL, p))))
    if not y_hi > y_lo:
        return InfoMatrix.zeros()

    def integrand(y):
        x = math.exp(y)
        g = lt.hazard_log_gradient(x, p)
        w = weight(x) * x
        return np.array([g[0] * g[0], g[0] * g[1], g[1] * g[1]]) * w

    # breakpoint at the mode of the log-time density helps the adaptive splitter
    points = [p.mu] if y_lo < p.mu < y_hi else None
    res, err, info = quad_vec(integrand, y_lo, y_hi, epsabs=EPSABS, epsrel=EPSREL,
                              points=points, full_output=True)
    if not info.success:
        raise NumericalError(
            f"information quadrature did not converge (error estimate {err:.3g})"
        )
    mm, mt, tt = res
    return InfoMatrix(np.array([[mm, mt], [mt, tt]]))


def info_type1(T: float, p: LogNormalParams, n: int = 1) -> InfoMatrix:
    """Time-censored information: ``n * int_0^T <grad ln h> f dx``."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    return _integrate(lambda x: n * float(lt.pdf(x, p)), T, p)


def info_type2_lowest(l: int, n: int, p: LogNormalParams) -> InfoMatrix:  # noqa: E741
    """Failure-censored information from the ``l`` smallest of ``n`` lifetimes."""
    return _integrate(lambda x: _ranks_density(l, n, x, p), math.inf, p)


def info_hybrid(rank: int, T: float, n: int, p: LogNormalParams) -> InfoMatrix:
    """Information when the test stops at ``min(X(rank), T)``."""
    return _integrate(lambda x: _ranks_density(rank, n, x, p), T, p)


def info_uhcs(scheme: UhcsScheme, p: LogNormalParams) -> InfoMatrix:
    n, l, r, T1, T2 = scheme.n, scheme.l, scheme.r, scheme.T1, scheme.T2
    total = (
        info_type1(T1, p, n=n)
        + info_type2_lowest(l, n, p)
        + info_hybrid(r, T2, n, p)
        - info_hybrid(l, T2, n, p)
        - info_hybrid(r, T1, n, p)
    )
    if not total.is_psd():
        raise NumericalError(f"assembled information is not PSD: {total.eigenvalues}")
    return total


def complete_sample_info(n: int, p: LogNormalParams) -> InfoMatrix:
    """Closed form ``n * diag(tau, 1/(2 tau^2))`` for uncensored data."""
    return InfoMatrix(n * np.diag([p.tau, 1.0 / (2.0 * p.tau**2)]))
