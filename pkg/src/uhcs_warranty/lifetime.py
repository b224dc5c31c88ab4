"""Log-normal lifetime model.

Parameterised by location ``mu`` (log-hours) and precision ``tau`` (inverse
variance of log-lifetime), so that ``F(x) = Phi(sqrt(tau) * (ln x - mu))``.

Every quantity that can underflow (survival, order-statistic densities,
likelihood) is computed in log space through ``scipy.special.log_ndtr``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Protocol

import numpy as np
from scipy.special import gammaln, log_ndtr, ndtri

from .errors import NumericalError, ValidationError

if TYPE_CHECKING:
    from .censoring import CensoredSample

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LogNormalParams:
    mu: float
    tau: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValidationError(f"mu must be finite, got {self.mu}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValidationError(f"tau must be positive and finite, got {self.tau}")

    @property
    def sigma(self) -> float:
        """Standard deviation of the log-lifetime."""
        return 1.0 / math.sqrt(self.tau)


class LifetimeModel(Protocol):
    """What the Bayesian and Fisher machinery needs from a lifetime family."""

    def logpdf(self, x, p): ...

    def cdf(self, x, p): ...

    def logsf(self, x, p): ...

    def hazard(self, x, p): ...

    def hazard_log_gradient(self, x, p): ...


def _check_positive(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValidationError("lifetimes must be strictly positive")
    return x


def _z(x, p: LogNormalParams) -> np.ndarray:
    return math.sqrt(p.tau) * (np.log(x) - p.mu)


def logpdf(x, p: LogNormalParams):
    x = _check_positive(x)
    z = _z(x, p)
    return 0.5 * math.log(p.tau) - _LOG_SQRT_2PI - np.log(x) - 0.5 * z * z


def pdf(x, p: LogNormalParams):
    return np.exp(logpdf(x, p))


def logcdf(x, p: LogNormalParams):
    return log_ndtr(_z(_check_positive(x), p))


def cdf(x, p: LogNormalParams):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("cdf is defined for x >= 0")
    with np.errstate(divide="ignore"):
        z = math.sqrt(p.tau) * (np.log(x) - p.mu)
    return np.exp(log_ndtr(z))


def logsf(x, p: LogNormalParams):
    """Log survival ``ln(1 - F(x))``, accurate deep in the right tail."""
    return log_ndtr(-_z(_check_positive(x), p))


def sf(x, p: LogNormalParams):
    return np.exp(logsf(x, p))


def quantile(u, p: LogNormalParams):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise ValidationError("quantile requires 0 < u < 1")
    return np.exp(p.mu + ndtri(u) / math.sqrt(p.tau))


def hazard(x, p: LogNormalParams):
    """``pdf / (1 - cdf)``; raises NumericalError where the survival underflows."""
    ls = logsf(x, p)
    if np.any(~np.isfinite(ls)):
        raise NumericalError("survival underflow in hazard denominator")
    return np.exp(logpdf(x, p) - ls)


def _inverse_mills(z):
    # phi(z) / (1 - Phi(z)), stable for large positive z
    return np.exp(-0.5 * z * z - _LOG_SQRT_2PI - log_ndtr(-z))


def hazard_log_gradient(x, p: LogNormalParams) -> np.ndarray:
    """Analytic ``(d/dmu, d/dtau) ln h(x)``; shape ``x.shape + (2,)``."""
    z = _z(_check_positive(x), p)
    m = _inverse_mills(z)
    if np.any(~np.isfinite(m)):
        raise NumericalError("hazard overflow while differentiating ln h")
    d_mu = math.sqrt(p.tau) * (z - m)
    d_tau = (1.0 - z * z + m * z) / (2.0 * p.tau)
    return np.stack([d_mu, d_tau], axis=-1)


def order_statistic_logpdf(i: int, n: int, x, p: LogNormalParams):
    if not (1 <= i <= n):
        raise ValidationError(f"rank {i} outside 1..{n}")
    z = _z(_check_positive(x), p)
    log_binom = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
    lf = logpdf(x, p)
    out = math.log(i) + log_binom + lf
    # skip 0 * (-inf) when the exponent vanishes
    if i > 1:
        out = out + (i - 1) * log_ndtr(z)
    if n > i:
        out = out + (n - i) * log_ndtr(-z)
    return out


def order_statistic_pdf(i: int, n: int, x, p: LogNormalParams):
    """Density of the ``i``-th smallest of ``n`` i.i.d. lifetimes."""
    return np.exp(order_statistic_logpdf(i, n, x, p))


def log_likelihood(sample: CensoredSample, p: LogNormalParams) -> float:
    """Log-likelihood of Type-II unified hybrid censored data.

    Observed failures contribute their log density; the ``n - d`` units still
    running at the stop time ``xi`` contribute the log survival at ``xi``.
    """
    times = np.asarray(sample.times, dtype=float)
    if times.size and np.any(times <= 0):
        raise ValidationError("observed failure times must be positive")
    n_censored = sample.scheme.n - sample.d
    total = float(np.sum(logpdf(times, p))) if times.size else 0.0
    if n_censored:
        total += n_censored * float(logsf(sample.xi, p))
    return total


class LogNormalModel:
    """Module functions bundled behind the ``LifetimeModel`` protocol."""

    logpdf = staticmethod(logpdf)
    pdf = staticmethod(pdf)
    cdf = staticmethod(cdf)
    logsf = staticmethod(logsf)
    quantile = staticmethod(quantile)
    hazard = staticmethod(hazard)
    hazard_log_gradient = staticmethod(hazard_log_gradient)
    order_statistic_pdf = staticmethod(order_statistic_pdf)
