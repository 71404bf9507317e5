"""Monte Carlo estimators over replica ensembles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import DegenerateVariance, TooFew, ValidationError

KS_COEFF = 1.63  # asymptotic 1% critical value of sqrt(n) D_n
MIN_PROFILE_REPLICAS = 100
MIN_KS_SAMPLES = 50


def ensemble_mean(values):
    """(mean, standard error) with the unbiased sample variance."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise TooFew(f"need at least 2 values, got {v.size}")
    # sorting makes the result independent of replica order, bit for bit
    v = np.sort(v)
    mean = math.fsum(v) / v.size
    var = math.fsum((v - mean) ** 2) / (v.size - 1)
    return mean, math.sqrt(var / v.size)


@dataclass(frozen=True)
class Estimate:
    mean: float
    variance: float
    stderr: float

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr

    def to_json(self):
        return {"mean": self.mean, "variance": self.variance, "stderr": self.stderr}


@dataclass(frozen=True)
class EnsembleSummary:
    n_replicas: int
    quantities: dict
    seeds: tuple = field(default_factory=tuple)

    def to_json(self):
        return {
            "n_replicas": self.n_replicas,
            "seeds": list(self.seeds),
            "quantities": {k: v.to_json() for k, v in self.quantities.items()},
        }


def estimate(values) -> Estimate:
    v = np.asarray(values, dtype=float).ravel()
    mean, se = ensemble_mean(v)
    return Estimate(mean, se * se * v.size, se)


def summarize(named_values: dict, seeds=()) -> EnsembleSummary:
    q = {k: estimate(v) for k, v in sorted(named_values.items())}
    n = {np.asarray(v).size for v in named_values.values()}
    if len(n) != 1:
        raise ValidationError("all quantities need the same number of replicas")
    return EnsembleSummary(n.pop(), q, tuple(seeds))


@dataclass(frozen=True, eq=False)
class VarianceProfile:
    sites: np.ndarray
    var_q: np.ndarray
    stderr_q: np.ndarray
    var_p: np.ndarray
    stderr_p: np.ndarray
    n_replicas: int

    def csv_rows(self, prediction_q=None, prediction_p=None):
        nan = np.full(self.sites.size, np.nan)
        pq = nan if prediction_q is None else prediction_q
        pp = nan if prediction_p is None else prediction_p
        for i, k in enumerate(self.sites):
            yield (int(k), self.var_q[i], self.stderr_q[i], self.var_p[i], self.stderr_p[i], pq[i], pp[i])


def _var_and_se(x):
    """Unbiased variance of each column and its standard error.

    The standard error uses the fourth central moment:
    Var(s^2) ~ (m4 - s^4 (n - 3)/(n - 1)) / n.
    """
    n = x.shape[0]
    xs = np.sort(x, axis=0)
    mean = xs.mean(axis=0)
    d = xs - mean
    s2 = (d * d).sum(axis=0) / (n - 1)
    m4 = (d**4).mean(axis=0)
    v = np.maximum(m4 - s2 * s2 * (n - 3) / (n - 1), 0.0) / n
    return s2, np.sqrt(v)


def variance_profile(q, p, sites=None) -> VarianceProfile:
    """Per-site sample variances of replica samples q, p of shape (R, sites)."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.ndim != 2 or q.shape != p.shape:
        raise ValidationError("q and p must both have shape (replicas, sites)")
    if q.shape[0] < MIN_PROFILE_REPLICAS:
        raise TooFew(f"variance profile needs >= {MIN_PROFILE_REPLICAS} replicas, got {q.shape[0]}")
    sites = np.arange(q.shape[1]) if sites is None else np.asarray(sites)
    vq, sq = _var_and_se(q)
    vp, sp = _var_and_se(p)
    return VarianceProfile(sites, vq, sq, vp, sp, q.shape[0])


@dataclass(frozen=True)
class KSResult:
    d: float
    threshold: float
    n: int

    @property
    def passed(self) -> bool:
        return self.d < self.threshold

    def to_json(self):
        return {"d": self.d, "threshold": self.threshold, "n": self.n, "pass": self.passed}


def ks_distance(samples, variance: float) -> KSResult:
    """sup |F_n - Phi(x / sqrt(variance))| with the 1% threshold 1.63 / sqrt(n)."""
    x = np.asarray(samples, dtype=float).ravel()
    if not (variance > 0 and np.isfinite(variance)):
        raise DegenerateVariance(f"target variance must be positive, got {variance}")
    if x.size < MIN_KS_SAMPLES:
        raise TooFew(f"KS needs >= {MIN_KS_SAMPLES} samples, got {x.size}")
    res = sps.kstest(x, sps.norm(loc=0.0, scale=math.sqrt(variance)).cdf, method="asymp")
    return KSResult(float(res.statistic), KS_COEFF / math.sqrt(x.size), int(x.size))


@dataclass(frozen=True, eq=False)
class DecayStatistic:
    per_replica: np.ndarray
    max: float
    mean: float

    def to_json(self):
        return {"per_replica": self.per_replica.tolist(), "max": self.max, "mean": self.mean}


def sqrt_t_decay_statistic(times, eps, t_min: float, t_max: float) -> DecayStatistic:
    """sup over t in [t_min, t_max] of sqrt(t) * max_k |eps_k(t)|.

    ``eps`` is (S, sites) for one replica or (R, S, sites) for several.
    """
    if t_min < 1:
        raise ValidationError("t_min must be >= 1")
    times = np.asarray(times, dtype=float)
    e = np.asarray(eps, dtype=float)
    if e.ndim == 2:
        e = e[None]
    sel = (times >= t_min) & (times <= t_max)
    if not np.any(sel):
        raise ValidationError("no sample times fall in [t_min, t_max]")
    env = np.max(np.abs(e[:, sel, :]), axis=2) * np.sqrt(times[sel])
    per = np.max(env, axis=1)
    return DecayStatistic(per, float(np.max(per)), float(np.mean(per)))
