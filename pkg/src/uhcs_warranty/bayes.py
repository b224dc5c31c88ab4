"""Normal-gamma prior, posterior sampling and posterior-predictive lifetimes."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln, log_ndtr, ndtri

from . import lifetime as lt
from .censoring import CensoredSample
from .errors import NumericalError, SamplerError, ValidationError
from .fisher import InfoMatrix, info_uhcs
from .lifetime import LogNormalParams

MIN_ACCEPTANCE = 0.05
MAX_BACKOFFS = 6


@dataclass(frozen=True)
class NormalGammaPrior:
    """``tau ~ Gamma(a1, rate=b1)`` and ``mu | tau ~ N(p2, 1 / (q2_prior * tau))``."""

    a1: float
    b1: float
    p2: float
    q2_prior: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.b1 > 0 and self.q2_prior > 0):
            raise ValidationError("a1, b1 and q2_prior must be positive")
        if not math.isfinite(self.p2):
            raise ValidationError("p2 must be finite")

    def log_density(self, p: LogNormalParams) -> float:
        a1, b1, q2 = self.a1, self.b1, self.q2_prior
        return (
            a1 * math.log(b1) - gammaln(a1) + 0.5 * math.log(q2 / (2 * math.pi))
            + (a1 - 0.5) * math.log(p.tau)
            - 0.5 * q2 * p.tau * (p.mu - self.p2) ** 2
            - b1 * p.tau
        )

    @property
    def mean(self) -> LogNormalParams:
        return LogNormalParams(self.p2, self.a1 / self.b1)


@dataclass(frozen=True)
class SamplerConfig:
    N: int = 60_000
    N0: int = 10_000
    seed: int = 0
    proposal_scale: float = 1.0

    def __post_init__(self):
        if not (0 <= self.N0 < self.N):
            raise ValidationError(f"need 0 <= N0 < N, got N={self.N}, N0={self.N0}")
        if not self.proposal_scale > 0:
            raise ValidationError("proposal_scale must be positive")


@dataclass(frozen=True)
class PosteriorChain:
    """Post burn-in draws, one ``(mu, tau)`` row per retained iteration."""

    draws: np.ndarray
    acceptance_rate: float
    config: SamplerConfig = field(default_factory=SamplerConfig)
    proposal_scale_used: float | None = None

    def __post_init__(self):
        d = np.array(self.draws, dtype=float)
        if d.ndim != 2 or d.shape[1] != 2 or d.shape[0] == 0:
            raise ValidationError("chain must be a non-empty (k, 2) array of (mu, tau)")
        if np.any(d[:, 1] <= 0) or not np.all(np.isfinite(d)):
            raise ValidationError("chain contains non-finite values or tau <= 0")
        d.setflags(write=False)
        object.__setattr__(self, "draws", d)

    def __len__(self) -> int:
        return self.draws.shape[0]

    @property
    def mu(self) -> np.ndarray:
        return self.draws[:, 0]

    @property
    def tau(self) -> np.ndarray:
        return self.draws[:, 1]

    @cached_property
    def support(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Distinct draws in lexicographic order with their frequencies.

        Chain averages are taken over this canonical support, which makes
        them independent of draw order and cheaper (rejections repeat states).
        """
        rows, counts = np.unique(self.draws, axis=0, return_counts=True)
        return rows[:, 0].copy(), rows[:, 1].copy(), counts / counts.sum()

    def mean(self) -> np.ndarray:
        return self.draws.mean(axis=0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("mu,tau\n")
        for m, t in self.draws:
            buf.write(f"{float(m)!r},{float(t)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, **kwargs) -> PosteriorChain:
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["mu", "tau"]:
            raise ValidationError("chain CSV must start with the header 'mu,tau'")
        rows = [(float(a), float(b)) for a, b in reader]
        kwargs.setdefault("acceptance_rate", float("nan"))
        return cls(np.array(rows, dtype=float).reshape(-1, 2), **kwargs)


def log_posterior(p: LogNormalParams, sample: CensoredSample, prior: NormalGammaPrior) -> float:
    """Unnormalised log posterior density in the (mu, tau) parameterisation."""
    return lt.log_likelihood(sample, p) + prior.log_density(p)


class _LogPosterior:
    """Fast evaluator for the sampler's inner loop (constants dropped)."""

    def __init__(self, sample: CensoredSample, prior: NormalGammaPrior):
        x = np.asarray(sample.times, dtype=float)
        self.d = x.size
        self.logx = np.log(x)
        self.n_cens = sample.scheme.n - sample.d
        self.log_xi = math.log(sample.xi)
        self.prior = prior

    def __call__(self, mu: float, tau: float) -> float:
        pr = self.prior
        dev = self.logx - mu
        val = 0.5 * self.d * math.log(tau) - 0.5 * tau * float(dev @ dev)
        if self.n_cens:
            val += self.n_cens * float(log_ndtr(-math.sqrt(tau) * (self.log_xi - mu)))
        val += ((pr.a1 - 0.5) * math.log(tau)
                - 0.5 * pr.q2_prior * tau * (mu - pr.p2) ** 2 - pr.b1 * tau)
        return val


def posterior_mode(sample: CensoredSample, prior: NormalGammaPrior) -> LogNormalParams:
    """Deterministic hill climb on the log posterior in (mu, ln tau).

    Falls back to the prior mean if the climb fails.
    """
    target = _LogPosterior(sample, prior)
    start = prior.mean

    def neg(v):
        val = target(v[0], math.exp(v[1]))
        return -val if math.isfinite(val) else math.inf

    res = minimize(neg, [start.mu, math.log(start.tau)], method="Nelder-Mead",
                   options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 2000})
    if not (res.success and np.all(np.isfinite(res.x))):
        return start
    return LogNormalParams(float(res.x[0]), float(math.exp(res.x[1])))


def acceptance_probability(logpost_current: float, logpost_proposed: float,
                           tau_current: float, tau_proposed: float) -> float:
    """MH acceptance for a random walk on (mu, ln tau).

    The ``tau_proposed / tau_current`` factor is the Jacobian of the log
    transform on the precision; mu is proposed on its natural scale.
    """
    log_ratio = (logpost_proposed - logpost_current
                 + math.log(tau_proposed) - math.log(tau_current))
    if math.isnan(log_ratio):
        return 0.0
    return 1.0 if log_ratio >= 0 else math.exp(log_ratio)


def _run_chain(target, start: LogNormalParams, chol: np.ndarray, cfg: SamplerConfig):
    rng = np.random.default_rng(cfg.seed)
    steps = rng.standard_normal((cfg.N, 2)) @ chol.T
    log_u = np.log(rng.random(cfg.N))

    out = np.empty((cfg.N, 2))
    mu, log_tau = start.mu, math.log(start.tau)
    lp = target(mu, start.tau)
    accepted = 0
    for i in range(cfg.N):
        mu_new = mu + steps[i, 0]
        log_tau_new = log_tau + steps[i, 1]
        # proposals with tau outside the floating-point range are rejected
        tau_new = math.exp(log_tau_new) if log_tau_new < 700 else math.inf
        if 0 < tau_new < math.inf:
            lp_new = target(mu_new, tau_new)
            # log of acceptance_probability, inlined for speed
            log_ratio = lp_new - lp + log_tau_new - log_tau
            if log_u[i] < log_ratio:
                mu, log_tau, lp = mu_new, log_tau_new, lp_new
                accepted += 1
        out[i, 0] = mu
        out[i, 1] = math.exp(log_tau)
    return out, accepted / cfg.N


def mh_sample(sample: CensoredSample, prior: NormalGammaPrior, cfg: SamplerConfig,
              proposal_info: InfoMatrix, start: LogNormalParams | None = None) -> PosteriorChain:
    """Random-walk Metropolis-Hastings with covariance ``scale * I^{-1}``.

    Candidates ``delta ~ N2((mu, ln tau), scale * I^{-1})`` are mapped back to
    ``(delta1, exp(delta2))``. If acceptance falls below 5% the proposal
    scale is halved and the chain rerun from scratch with the same seed.
    """
    cov = proposal_info.inverse()
    start = start or prior.mean
    target = _LogPosterior(sample, prior)
    if not math.isfinite(target(start.mu, start.tau)):
        raise SamplerError("log posterior is not finite at the starting point")

    scale = cfg.proposal_scale
    for _ in range(MAX_BACKOFFS + 1):
        try:
            chol = np.linalg.cholesky(scale * cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("proposal covariance is not positive definite") from exc
        out, rate = _run_chain(target, start, chol, cfg)
        if rate >= MIN_ACCEPTANCE:
            break
        scale *= 0.5
    if rate == 0.0:
        raise SamplerError("no proposal was accepted during the whole run")
    return PosteriorChain(out[cfg.N0:], acceptance_rate=rate, config=cfg,
                          proposal_scale_used=scale)


def fit(sample: CensoredSample, prior: NormalGammaPrior,
        cfg: SamplerConfig | None = None) -> PosteriorChain:
    """Mode, Fisher-information proposal, then MH from the prior mean."""
    cfg = cfg or SamplerConfig()
    mode = posterior_mode(sample, prior)
    info = info_uhcs(sample.scheme, mode)
    return mh_sample(sample, prior, cfg, info, start=prior.mean)


# -- posterior predictive ---------------------------------------------------


def _require_nonempty(chain: PosteriorChain):
    if chain is None or len(chain) == 0:
        raise ValidationError("empty chain")


def predictive_cdf(chain: PosteriorChain, t):
    """Chain average of the log-normal CDF (Rao-Blackwellised predictive)."""
    _require_nonempty(chain)
    mu, tau, w = chain.support
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("predictive_cdf needs t >= 0")
    flat = t.reshape(-1)
    out = np.empty(flat.shape)
    root_tau = np.sqrt(tau)
    for j, tj in enumerate(flat):
        if tj == 0:
            out[j] = 0.0
        else:
            out[j] = w @ np.exp(log_ndtr(root_tau * (math.log(tj) - mu)))
    return out.reshape(t.shape) if t.ndim else float(out[0])


def predictive_pdf(chain: PosteriorChain, t):
    _require_nonempty(chain)
    mu, tau, w = chain.support
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)
    out = np.zeros(flat.shape)
    coef = np.sqrt(tau / (2 * math.pi))
    for j, tj in enumerate(flat):
        if tj > 0:
            dev = math.log(tj) - mu
            out[j] = w @ (coef * np.exp(-0.5 * tau * dev * dev)) / tj
    return out.reshape(t.shape) if t.ndim else float(out[0])


def predictive_quantile(chain: PosteriorChain, u: float, tol: float = 1e-6) -> float:
    """Invert the predictive CDF by bisection to absolute tolerance ``tol``.

    The mixture quantile is bracketed by the smallest and largest component
    quantiles, so no search for a bracket is needed.
    """
    _require_nonempty(chain)
    if not (0 < u < 1):
        raise ValidationError("predictive_quantile needs 0 < u < 1")
    mu, tau, _ = chain.support
    comp = np.exp(mu + ndtri(u) / np.sqrt(tau))
    lo, hi = float(comp.min()), float(comp.max())
    if hi - lo <= tol:
        return 0.5 * (lo + hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predictive_cdf(chain, mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
