"""Monte Carlo threshold locations, widths and scaling experiments.

For an increasing property and a sample ``X`` the event ``G(X; r)`` has the
property exactly when ``r >= r*(X)``. Hence ``P{G(X_n; r) in A}`` is the
distribution function of ``r*(X_n)`` and ``r(n, eps)`` is its lower
``eps``-quantile; the estimators below take empirical order statistics of
per-trial critical radii instead of scanning radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Optional, Sequence

import numpy as np
from scipy.stats import binom

from .geom import EUCLIDEAN, Norm, critical_radius, sample_uniform
from .graphs import build_geometric_grid
from .matching import BipartiteInstance, solve
from .parallel import run_trials
from .properties import critical_radius_sample, get_property
from .rng import Stream, derive_seed

EXACT_MAX_N = 2 ** 11


# ---------------------------------------------------------------- stats


def quantile_rank(q: float, m: int) -> int:
    """1-based rank ``ceil(q m)`` of the lower empirical ``q``-quantile."""
    # the small slack absorbs products such as 0.95 * 2000 = 1900.0000000000002
    return min(m, max(1, math.ceil(q * m - 1e-9)))


def order_statistic(values: Sequence[float], q: float) -> float:
    xs = np.sort(np.asarray(values, dtype=np.float64))
    return float(xs[quantile_rank(q, len(xs)) - 1])


def quantile_interval(values: Sequence[float], q: float, level: float = 0.95):
    """Distribution-free confidence interval ``(lo, hi)`` for the
    ``q``-quantile from binomial order-statistic ranks."""
    xs = np.sort(np.asarray(values, dtype=np.float64))
    m = len(xs)
    alpha = 1.0 - level
    lo = int(binom.ppf(alpha / 2, m, q))
    hi = int(binom.ppf(1 - alpha / 2, m, q)) + 1
    return float(xs[max(lo, 1) - 1]), float(xs[min(hi, m) - 1])


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``ln y`` against ``ln x``; ``nan`` when some
    ``y`` is not positive."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("a slope needs at least two (x, y) points")
    if np.any(ys <= 0) or np.any(xs <= 0):
        return math.nan
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def _check_n_list(n_list: Sequence[int], minimum: int) -> list[int]:
    ns = [int(n) for n in n_list]
    if len(ns) < minimum:
        raise ValueError(f"need at least {minimum} values of n, got {len(ns)}")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n values must be strictly ascending")
    return ns


# ---------------------------------------------------- threshold estimates


@dataclass(frozen=True)
class ThresholdEstimate:
    n: int
    d: int
    property: str
    eps: float
    trials: int
    seed: int
    r_lo: float
    r_hi: float
    r_median: float
    rank_lo: int
    rank_hi: int
    samples: tuple = field(default=(), repr=False)

    @property
    def width(self) -> float:
        return self.r_hi - self.r_lo

    @property
    def ratio(self) -> float:
        """Width relative to the median threshold radius."""
        return self.width / self.r_median if self.r_median > 0 else math.inf


def estimate_from_samples(samples: Sequence[float], eps: float, *, n: int = 0, d: int = 0,
                          prop: str = "", seed: int = 0) -> ThresholdEstimate:
    m = len(samples)
    lo, hi = quantile_rank(eps, m), quantile_rank(1 - eps, m)
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    return ThresholdEstimate(
        n=n, d=d, property=prop, eps=eps, trials=m, seed=seed,
        r_lo=float(xs[lo - 1]), r_hi=float(xs[hi - 1]),
        r_median=float(xs[quantile_rank(0.5, m) - 1]),
        rank_lo=lo, rank_hi=hi, samples=tuple(float(v) for v in samples),
    )


def _critical_radius_trial(prop_name: str, n: int, d: int, p: float, seed: int, trial: int) -> float:
    points = sample_uniform(n, d, Stream(seed, trial))
    return critical_radius_sample(get_property(prop_name), points, Norm(p))


def sample_critical_radii(prop: str, n: int, d: int, trials: int, seed: int,
                          norm: Norm = EUCLIDEAN, jobs: Optional[int] = None) -> list[float]:
    """``r*`` of ``trials`` independent samples; trial ``t`` uses stream ``t``."""
    get_property(prop)
    fn = partial(_critical_radius_trial, prop, n, d, norm.p)
    return run_trials(fn, seed, trials, jobs)


def estimate_threshold(prop: str, n: int, d: int, eps: float, trials: int, seed: int,
                       norm: Norm = EUCLIDEAN, jobs: Optional[int] = None) -> ThresholdEstimate:
    """Empirical ``r(n, eps)``, ``r(n, 1 - eps)`` and ``r(n, 1/2)``.

    ``r_lo`` is the ``ceil(eps m)``-th smallest of the ``m`` per-trial critical
    radii and ``r_hi`` the ``ceil((1 - eps) m)``-th.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if trials < math.ceil(2 / eps):
        raise ValueError(f"eps={eps} needs at least {math.ceil(2 / eps)} trials, got {trials}")
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    radii = sample_critical_radii(prop, n, d, trials, seed, norm, jobs)
    return estimate_from_samples(radii, eps, n=n, d=d, prop=prop, seed=seed)


@dataclass(frozen=True)
class WidthScaling:
    estimates: tuple
    slope: float

    def rows(self) -> list[dict]:
        out = []
        for e in self.estimates:
            rc = critical_radius(e.n, e.d)
            out.append({
                "n": e.n, "d": e.d, "property": e.property, "eps": e.eps,
                "trials": e.trials, "seed": e.seed, "r_lo": e.r_lo, "r_hi": e.r_hi,
                "width": e.width, "r_median": e.r_median, "r_c": rc,
                "width_over_rc": e.width / rc,
            })
        return out


def width_scaling(prop: str, n_list: Sequence[int], d: int, eps: float, trials: int, seed: int,
                  norm: Norm = EUCLIDEAN, jobs: Optional[int] = None) -> WidthScaling:
    """Threshold width at each ``n`` and the slope of ``ln width`` vs ``ln n``.

    Each ``n`` draws from its own child seed ``derive_seed(seed, n)`` so the
    samples at different sizes are independent; rows still report ``seed``.
    """
    ns = _check_n_list(n_list, 3)
    if ns[0] < 2:
        raise ValueError("width scaling needs n >= 2")
    estimates = []
    for n in ns:
        est = estimate_threshold(prop, n, d, eps, trials, derive_seed(seed, n), norm, jobs)
        estimates.append(replace(est, seed=seed))
    slope = loglog_slope(ns, [e.width for e in estimates])
    return WidthScaling(tuple(estimates), slope)


# ------------------------------------------------------ matching scaling


def _matching_trial(n: int, d: int, method: str, p: float, seed: int, trial: int) -> float:
    stream = Stream(seed, trial)
    red = sample_uniform(n, d, stream)
    blue = sample_uniform(n, d, stream)
    return solve(BipartiteInstance(red, blue, Norm(p)), method).weight


def bottleneck_weights(n: int, d: int, trials: int, method: str, seed: int,
                       norm: Norm = EUCLIDEAN, jobs: Optional[int] = None) -> list[float]:
    """Bottleneck weights of ``trials`` fresh instances; trial ``t`` draws red
    then blue from stream ``t``."""
    if method not in ("exact", "constructive", "brute", "sorted"):
        raise ValueError(f"unknown matching method {method!r}")
    if method == "exact" and d >= 2 and n > EXACT_MAX_N:
        raise ValueError(f"exact matching is capped at n <= {EXACT_MAX_N} for d >= 2, got n={n}")
    fn = partial(_matching_trial, n, d, method, norm.p)
    return run_trials(fn, seed, trials, jobs)


@dataclass(frozen=True)
class MatchingRow:
    n: int
    d: int
    p_norm: float
    method: str
    trials: int
    seed: int
    median: float
    q10: float
    q90: float
    r_c: float
    weights: tuple = field(default=(), repr=False)

    @property
    def median_ratio(self) -> float:
        return self.median / self.r_c


@dataclass(frozen=True)
class MatchingScaling:
    rows: tuple
    slope: float

    def ratio_spread(self) -> float:
        ratios = [r.median_ratio for r in self.rows]
        return max(ratios) / min(ratios)


def matching_scaling(n_list: Sequence[int], d: int, trials: int, method: str, seed: int,
                     norm: Norm = EUCLIDEAN, jobs: Optional[int] = None) -> MatchingScaling:
    """Median bottleneck weight per ``n`` and the slope of ``ln median`` vs
    ``ln n``. Each ``n`` uses child seed ``derive_seed(seed, n)``."""
    ns = _check_n_list(n_list, 2)
    if ns[0] < 2:
        raise ValueError("matching scaling needs n >= 2")
    rows = []
    for n in ns:
        w = bottleneck_weights(n, d, trials, method, derive_seed(seed, n), norm, jobs)
        rows.append(MatchingRow(
            n=n, d=d, p_norm=norm.p, method=method, trials=trials, seed=seed,
            median=float(np.median(w)), q10=order_statistic(w, 0.1), q90=order_statistic(w, 0.9),
            r_c=critical_radius(n, d), weights=tuple(w),
        ))
    slope = loglog_slope(ns, [r.median for r in rows])
    return MatchingScaling(tuple(rows), slope)


# ---------------------------------------------------------- containment


@dataclass(frozen=True)
class ContainmentReport:
    n: int
    d: int
    r: float
    gamma: float
    trials: int
    seed: int
    count_matching_ok: int
    count_embedding_verified: int
    weights: tuple = field(default=(), repr=False)

    @property
    def failures(self) -> int:
        """Trials with ``M_n <= gamma`` whose embedding check failed."""
        return self.count_matching_ok - self.count_embedding_verified

    @property
    def frac_matching_ok(self) -> float:
        return self.count_matching_ok / self.trials

    @property
    def frac_embedding_ok(self) -> float:
        return self.count_embedding_verified / self.trials


def _containment_trial(n: int, d: int, r: float, gamma: float, p: float, seed: int, trial: int):
    norm = Norm(p)
    stream = Stream(seed, trial)
    v1 = sample_uniform(n, d, stream)
    v2 = sample_uniform(n, d, stream)
    small = build_geometric_grid(v1, r, norm)
    m = solve(BipartiteInstance(v1, v2, norm), "exact")
    if m.weight > gamma:
        return m.weight, False, False
    big = build_geometric_grid(v2, r + 2 * gamma, norm)
    a, b = m.phi[small.edges[:, 0]], m.phi[small.edges[:, 1]]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    big_keys = big.edges[:, 0] * n + big.edges[:, 1]
    verified = bool(np.all(np.isin(lo * n + hi, big_keys)))
    return m.weight, True, verified


def containment_trial(n: int, d: int, r: float, gamma: float, trials: int, seed: int,
                      norm: Norm = EUCLIDEAN, jobs: Optional[int] = None) -> ContainmentReport:
    """Embed ``G(V; r)`` into an independent ``G(V'; r + 2 gamma)``.

    Per trial the exact bottleneck matching ``phi`` between ``V`` and ``V'``
    is computed; when its weight is at most ``gamma`` every edge ``{u, v}`` of
    the small graph must map to an edge ``{phi(u), phi(v)}`` of the large one.
    """
    if r < 0 or gamma < 0:
        raise ValueError("r and gamma must be >= 0")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    fn = partial(_containment_trial, n, d, float(r), float(gamma), norm.p)
    out = run_trials(fn, seed, trials, jobs)
    return ContainmentReport(
        n=n, d=d, r=float(r), gamma=float(gamma), trials=trials, seed=seed,
        count_matching_ok=sum(ok for _, ok, _ in out),
        count_embedding_verified=sum(ok and v for _, ok, v in out),
        weights=tuple(w for w, _, _ in out),
    )


def pilot_gamma(n: int, d: int, q: float, trials: int, seed: int,
                norm: Norm = EUCLIDEAN, jobs: Optional[int] = None) -> float:
    """Empirical ``q``-quantile of the exact bottleneck weight from a pilot
    run on child seed ``derive_seed(seed, n, d)``."""
    w = bottleneck_weights(n, d, trials, "exact", derive_seed(seed, n, d), norm, jobs)
    return order_statistic(w, q)


# ------------------------------------------------------------ Bernoulli


def bernoulli_fixed_matching_prob(n: int, p: float, P: float) -> float:
    """``P{E(G) subset E(G')}`` under a fixed vertex bijection for
    ``G ~ G(n, p)``, ``G' ~ G(n, P)``: ``(1 - p (1 - P)) ** C(n, 2)``."""
    if not (0 <= p <= 1 and 0 <= P <= 1):
        raise ValueError("p and P must lie in [0, 1]")
    return (1.0 - p * (1.0 - P)) ** math.comb(n, 2)


def bernoulli_union_bound(n: int, p: float, P: float) -> float:
    """``n! (1 - pQ)^M``, the union bound over all bijections (may exceed 1)."""
    pq = p * (1.0 - P)
    if pq >= 1.0:
        return 0.0
    return math.exp(math.lgamma(n + 1) + math.comb(n, 2) * math.log1p(-pq))


def _bernoulli_trial(n: int, p: float, P: float, seed: int, trial: int) -> bool:
    # same draws as build_bernoulli(n, p, s) followed by build_bernoulli(n, P, s)
    stream = Stream(seed, trial)
    pairs = math.comb(n, 2)
    small = stream.uniform(pairs) < p
    big = stream.uniform(pairs) < P
    return bool(np.all(big[small]))


def bernoulli_containment_mc(n: int, p: float, P: float, trials: int, seed: int,
                             jobs: Optional[int] = None) -> float:
    """Fraction of trials in which ``G(n, p)`` is a subgraph of an independent
    ``G(n, P)`` under the identity vertex map."""
    if not (0 <= p <= 1 and 0 <= P <= 1):
        raise ValueError("p and P must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = run_trials(partial(_bernoulli_trial, n, p, P), seed, trials, jobs)
    return sum(hits) / trials


def binomial_three_sigma(prob: float, trials: int) -> float:
    return 3.0 * math.sqrt(prob * (1.0 - prob) / trials)


__all__ = [
    "ContainmentReport",
    "MatchingRow",
    "MatchingScaling",
    "ThresholdEstimate",
    "WidthScaling",
    "bernoulli_containment_mc",
    "bernoulli_fixed_matching_prob",
    "bernoulli_union_bound",
    "binomial_three_sigma",
    "bottleneck_weights",
    "containment_trial",
    "estimate_from_samples",
    "estimate_threshold",
    "loglog_slope",
    "matching_scaling",
    "order_statistic",
    "pilot_gamma",
    "quantile_interval",
    "quantile_rank",
    "sample_critical_radii",
    "width_scaling",
]
