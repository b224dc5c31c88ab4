"""Type-II unified hybrid censoring: scheme, case classification, simulation.

A life test on ``n`` units with ranks ``l < r`` and times ``T1 < T2`` stops at

    case I    T1        if X(r) <= T1
    case II   X(r)      if X(l) <= T1 < X(r) <= T2
    case III  T2        if X(l) <= T1 and X(r) > T2
    case IV   X(r)      if T1 < X(l) and X(r) <= T2
    case V    T2        if T1 < X(l) <= T2 < X(r)
    case VI   X(l)      if X(l) > T2

A failure exactly at a threshold counts as occurring before it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TiesError, ValidationError
from .lifetime import LogNormalParams

CASES = ("I", "II", "III", "IV", "V", "VI")


@dataclass(frozen=True)
class UhcsScheme:
    n: int
    l: int  # noqa: E741
    r: int
    T1: float
    T2: float

    def __post_init__(self):
        if not (1 <= self.l < self.r <= self.n):
            raise ValidationError(
                f"need 1 <= l < r <= n, got n={self.n}, l={self.l}, r={self.r}"
            )
        if not (0 < self.T1 < self.T2):
            raise ValidationError(f"need 0 < T1 < T2, got T1={self.T1}, T2={self.T2}")


@dataclass(frozen=True)
class CensoredSample:
    times: tuple[float, ...]
    xi: float
    case_label: str
    scheme: UhcsScheme

    @property
    def d(self) -> int:
        return len(self.times)

    @property
    def n_censored(self) -> int:
        return self.scheme.n - self.d

    def __post_init__(self):
        if self.case_label not in CASES:
            raise ValidationError(f"unknown case label {self.case_label!r}")
        t = np.asarray(self.times, dtype=float)
        if t.size and (np.any(np.diff(t) < 0) or t[-1] > self.xi):
            raise ValidationError("times must be non-decreasing and not exceed xi")
        if self.d > self.scheme.n:
            raise ValidationError("more failures than units on test")

    def summary(self) -> str:
        return f"case {self.case_label}, d={self.d}, xi={self.xi:g}"


def _validate_ordered(values, n: int, strict: bool) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size != n:
        raise ValidationError(f"expected {n} ordered lifetimes, got {x.size}")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValidationError("lifetimes must be positive and finite")
    steps = np.diff(x)
    if np.any(steps < 0):
        raise ValidationError("sample is not sorted in increasing order")
    if strict and np.any(steps == 0):
        raise TiesError("sample contains tied order statistics")
    return x


def classify(sample, scheme: UhcsScheme, strict: bool = False) -> CensoredSample:
    """Apply the censoring scheme to a complete ordered sample.

    Parameters
    ----------
    sample : sequence of float
        All ``n`` lifetimes in non-decreasing order.
    scheme : UhcsScheme
    strict : bool
        Reject tied values with ``TiesError``. Real data with ties (such as
        the air-conditioner data) is accepted when False.
    """
    x = _validate_ordered(sample, scheme.n, strict)
    x_l, x_r = x[scheme.l - 1], x[scheme.r - 1]
    T1, T2 = scheme.T1, scheme.T2

    if x_r <= T1:
        label, xi, d = "I", T1, int(np.searchsorted(x, T1, side="right"))
    elif x_l <= T1:
        if x_r <= T2:
            label, xi, d = "II", x_r, scheme.r
        else:
            label, xi, d = "III", T2, int(np.searchsorted(x, T2, side="right"))
    elif x_l <= T2:
        if x_r <= T2:
            label, xi, d = "IV", x_r, scheme.r
        else:
            label, xi, d = "V", T2, int(np.searchsorted(x, T2, side="right"))
    else:
        label, xi, d = "VI", x_l, scheme.l

    return CensoredSample(
        times=tuple(float(v) for v in x[:d]),
        xi=float(xi),
        case_label=label,
        scheme=scheme,
    )


def simulate(scheme: UhcsScheme, params: LogNormalParams, seed: int) -> CensoredSample:
    """Draw ``n`` log-normal lifetimes with a seeded generator and censor them."""
    rng = np.random.default_rng(seed)
    logs = params.mu + rng.standard_normal(scheme.n) / math.sqrt(params.tau)
    return classify(np.sort(np.exp(logs)), scheme, strict=True)
