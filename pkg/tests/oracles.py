"""Independent reference implementations shared by the unit and acceptance tests."""

import math

import numpy as np
from scipy.stats import norm

from uhcs_warranty.censoring import CASES
from uhcs_warranty.warranty import benefit, dissatisfaction, rebate


def raw_case(x, l, r, T1, T2):
    """Independent transcription of the six stopping rules, strict inequalities."""
    xl, xr = x[l - 1], x[r - 1]
    hits = [
        xl < xr < T1,
        xl < T1 < xr < T2,
        xl < T1 and T2 < xr,
        T1 < xl and xr < T2,
        T1 < xl < T2 < xr,
        T2 < xl,
    ]
    assert sum(hits) == 1
    return CASES[hits.index(True)]


def grid_log_likelihood(sample, mus, taus):
    """Brute-force log-likelihood on a grid, straight from scipy.stats."""
    logx = np.log(np.asarray(sample.times))
    n_cens = sample.scheme.n - sample.d
    M, T = np.meshgrid(mus, taus, indexing="ij")
    sd = 1 / np.sqrt(T)
    out = np.zeros_like(M)
    for v in logx:
        out += norm.logpdf(v, M, sd) - v
    out += n_cens * norm.logsf(math.log(sample.xi), M, sd)
    return M, T, out


def batch_means_se(x, n_batches=50):
    k = len(x) // n_batches
    means = x[: k * n_batches].reshape(n_batches, k).mean(axis=1)
    return means.std(ddof=1) / math.sqrt(n_batches)


def naive_mc_utility(p, w, policy, pred, n_draws=1_000_000, seed=0):
    """Average of a per-lifetime utility built from the public cost curves.

    A failure in stage k costs ``rebate + dissatisfaction``, weighted by the
    predictive probability of that stage (the two-pass contract).
    """
    rng = np.random.default_rng(seed)
    t = np.exp(p.mu + rng.standard_normal(n_draws) / math.sqrt(p.tau))
    P1, P2, PL = pred
    weight = np.where(t <= w.w1, P1, np.where(t <= w.w2, P2 - P1, np.where(t <= policy.L, PL - P2, 0.0)))
    cost = policy.M * weight * (rebate(t, w, policy) + dissatisfaction(t, w, policy))
    u = benefit(w, policy) - cost
    return u.mean(), u.std(ddof=1) / math.sqrt(n_draws)
