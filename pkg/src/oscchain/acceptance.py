"""The twelve acceptance checks on the canonical scenario S1.

S1: a(0) = 3, a(+-1) = -1 (omega^2 = 3 - 2 cos lam, E = [1, 5]); atoms at
+-3 with mass 1/2 each; force on site 0; Gaussian amplitudes.

Every tolerance is pinned here. Monte Carlo checks use one declared seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import GapViolation, PositivityViolation
from .force import SpectralMeasure, check_gap, synthesize, synthesize_batch
from .lattice import InteractionKernel, spectral_set, truncated_V
from .propagator import SpectralCalculus, expm_taylor, generator_matrix, kernel_bound
from .simulator import (
    SimConfig,
    decompose_epsilon,
    energy_trace,
    homogeneous_residual,
    simulate,
    simulate_ensemble,
    stationary_trajectory,
)
from .stationary import (
    alpha_trace_form,
    energy_limit_alpha,
    h_k_residue,
    h_quadrature,
    h_residue,
    inner_root_radius,
    predicted_decay_rate,
    stationary_covariance,
    transient_mean_energy,
    variance_decay_fit,
)
from .stats import ensemble_mean, ks_distance, sqrt_t_decay_statistic, variance_profile

SEED = 0
ALPHA_S1 = 0.2099223256647563  # 19 / (64 sqrt 2), independently confirmed
ALPHA_S1_QUOTED = 0.209971
H0_S1 = -1.0 / (4.0 * math.sqrt(2.0))
R_S1 = 3.0 - 2.0 * math.sqrt(2.0)

TOL_PROPAGATOR = 1e-9
TOL_H_DUAL = 1e-8
TOL_H0 = 1e-9
TOL_RADIUS = 1e-10
TOL_COV = 1e-10
TOL_DECAY_REL = 0.01
TOL_ALPHA_STABLE = 1e-9
TOL_ALPHA_TRACE = 1e-6
TOL_ALPHA_ORACLE = 1e-9
TOL_EPS_ENERGY = 1e-8
TOL_EPS_HOMOG = 1e-7
N_SIGMA = 3.0

MC_N = 64
MC_T = 200.0
MC_REPLICAS = 2000
KS_REPLICAS = 10_000
IC_ENERGY = 0.5
TRANSIENT_TIMES = (5.0, 10.0, 20.0)
EPS_N = 2048
EPS_TIMES = np.arange(10.0, 501.0, 1.0)


def s1_kernel() -> InteractionKernel:
    return InteractionKernel(np.array([3.0, -1.0]))


def s1_measure() -> SpectralMeasure:
    return SpectralMeasure(np.array([[3.0, 0.5]]))


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    checks: list = field(default_factory=list)  # (label, value, target, tolerance, ok)

    def add(self, label, value, target, tol, ok):
        self.checks.append((label, value, target, tol, bool(ok)))

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d}: {self.name}"

    def detail_lines(self):
        for label, value, target, tol, ok in self.checks:
            yield f"    {'ok ' if ok else 'BAD'} {label}: value={value!r} target={target!r} tol={tol!r}"

    def to_json(self):
        return {
            "number": self.number,
            "name": self.name,
            "pass": self.passed,
            "checks": [
                {"label": l, "value": _jsonable(v), "target": _jsonable(t), "tolerance": _jsonable(tol), "pass": ok}
                for l, v, t, tol, ok in self.checks
            ],
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def _finish(res: CriterionResult, gating=None) -> CriterionResult:
    gating = res.checks if gating is None else [c for c in res.checks if c[0] in gating]
    res.passed = all(c[4] for c in gating)
    return res


# ---------------------------------------------------------------------------
# shared Monte Carlo runs
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _forcing(replicas: int, seed: int):
    return synthesize_batch(s1_measure(), seed, replicas)


@lru_cache(maxsize=None)
def _ensemble(times: tuple, replicas: int, seed: int, initial_energy: float = 0.0):
    initial = "zero"
    if initial_energy:
        from .propagator import ChainState

        p = np.zeros(MC_N)
        p[0] = math.sqrt(2.0 * initial_energy)
        initial = ChainState(np.zeros(MC_N), p)
    cfg = SimConfig(N=MC_N, T=max(times), sample_times=times, initial=initial)
    return simulate_ensemble(cfg, s1_kernel(), _forcing(replicas, seed), sites=np.array([0]))


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def criterion_1(seed=SEED):
    res = CriterionResult(1, "propagator spectral blocks vs dense scaling-and-squaring", False)
    k = s1_kernel()
    for boundary in ("periodic", "free"):
        for N in (4, 8, 16):
            V = truncated_V(k, N, boundary)
            calc = SpectralCalculus(V)
            for t in (0.1, 0.7, 3.0):
                err = float(np.max(np.abs(calc.blocks(t).as_matrix() - expm_taylor(generator_matrix(V) * t))))
                res.add(f"{boundary} N={N} t={t}", err, 0.0, TOL_PROPAGATOR, err <= TOL_PROPAGATOR)
    return _finish(res)


def criterion_2(seed=SEED):
    res = CriterionResult(2, "h_m(3) quadrature vs residue, h_0(3) = -1/(4 sqrt 2)", False)
    k = s1_kernel()
    ms = np.arange(-20, 21)
    diff = float(np.max(np.abs(h_quadrature(k, 3.0, ms) - h_residue(k, 3.0, ms))))
    res.add("max |quad - residue|, |m| <= 20", diff, 0.0, TOL_H_DUAL, diff <= TOL_H_DUAL)
    h0 = h_k_residue(k, 3.0, 0)
    res.add("h_0(3)", h0, H0_S1, TOL_H0, abs(h0 - H0_S1) <= TOL_H0)
    return _finish(res)


def criterion_3(seed=SEED):
    res = CriterionResult(3, "inner root radius R(3) = 3 - 2 sqrt 2", False)
    r = inner_root_radius(s1_kernel(), 3.0)
    res.add("R(3)", r, R_S1, TOL_RADIUS, abs(r - R_S1) <= TOL_RADIUS)
    return _finish(res)


def criterion_4(seed=SEED):
    res = CriterionResult(4, "stationary variances 1/32, 9/32 and Monte Carlo at T = 200", False)
    cov = stationary_covariance(s1_kernel(), s1_measure(), 0, (-12, 12))
    vq, vp = cov.entry("q", 0, 0), cov.entry("p", 0, 0)
    res.add("cqq[0][0]", vq, 1 / 32, TOL_COV, abs(vq - 1 / 32) <= TOL_COV)
    res.add("cpp[0][0]", vp, 9 / 32, TOL_COV, abs(vp - 9 / 32) <= TOL_COV)
    ens = _ensemble((MC_T,), MC_REPLICAS, seed)
    prof = variance_profile(ens.q[:, 0, :], ens.p[:, 0, :], ens.sites)
    for lab, v, se, target in (("q", prof.var_q[0], prof.stderr_q[0], vq), ("p", prof.var_p[0], prof.stderr_p[0], vp)):
        res.add(f"MC Var {lab}_0(T=200), stderr {se:.3g}", float(v), target, N_SIGMA * float(se), abs(v - target) <= N_SIGMA * se)
    return _finish(res)


def criterion_5(seed=SEED):
    res = CriterionResult(5, "exponential decay rate of Var q_k on |k| <= 12", False)
    k, mu = s1_kernel(), s1_measure()
    cov = stationary_covariance(k, mu, 0, (-12, 12))
    pred = predicted_decay_rate(k, mu)
    target = R_S1**2
    est = variance_decay_fit(cov, predicted_r=pred)
    res.add("fitted r", est.r, target, TOL_DECAY_REL * target, abs(est.r - target) <= TOL_DECAY_REL * target)
    res.add("predicted sup R^2", pred, target, TOL_DECAY_REL * target, abs(pred - target) <= TOL_DECAY_REL * target)
    dist = np.abs(cov.sites)
    slack = float(np.min(est.c1 * est.r**dist - cov.var_q))
    res.add("min(c1 r^|k| - Var q_k)", slack, 0.0, 0.0, slack >= 0.0)
    res.add("dominance needed adjustment", est.adjusted, False, None, True)
    return _finish(res)


def criterion_6(seed=SEED):
    res = CriterionResult(6, "energy constant alpha: stability, trace form, oracle, uncoupled", False)
    k, mu = s1_kernel(), s1_measure()
    lim = energy_limit_alpha(k, mu)
    res.add("alpha change under n_lambda doubling", lim.error_estimate, 0.0, TOL_ALPHA_STABLE, lim.error_estimate <= TOL_ALPHA_STABLE)
    trace = alpha_trace_form(k, stationary_covariance(k, mu, 0, (-40, 40)))
    res.add("alpha vs covariance trace form", lim.alpha, trace, TOL_ALPHA_TRACE, abs(lim.alpha - trace) <= TOL_ALPHA_TRACE)
    res.add("alpha vs closed form 19/(64 sqrt 2)", lim.alpha, ALPHA_S1, TOL_ALPHA_ORACLE, abs(lim.alpha - ALPHA_S1) <= TOL_ALPHA_ORACLE)
    # the quoted figure differs from the oracle in the fifth digit; shown, not gating
    res.add("quoted approximate value (informational)", lim.alpha, ALPHA_S1_QUOTED, None, True)
    unc = energy_limit_alpha(InteractionKernel(np.array([4.0])), mu).alpha
    res.add("uncoupled a0 = 4", unc, 0.26, 1e-12, abs(unc - 0.26) <= 1e-12)
    return _finish(res)


def criterion_7(seed=SEED):
    res = CriterionResult(7, "mean energy at T = 200 equals alpha (zero IC) and alpha + H(psi0)", False)
    k, mu = s1_kernel(), s1_measure()
    alpha = energy_limit_alpha(k, mu).alpha
    e0 = _ensemble((MC_T,), MC_REPLICAS, seed)
    e1 = _ensemble((MC_T,), MC_REPLICAS, seed, IC_ENERGY)
    m0, s0 = ensemble_mean(e0.energy[:, 0])
    m1, s1 = ensemble_mean(e1.energy[:, 0])
    res.add(f"zero IC mean energy, stderr {s0:.3g}", m0, alpha, N_SIGMA * s0, abs(m0 - alpha) <= N_SIGMA * s0)
    res.add(f"IC mean energy, stderr {s1:.3g}", m1, alpha + IC_ENERGY, N_SIGMA * s1, abs(m1 - alpha - IC_ENERGY) <= N_SIGMA * s1)
    # diagnostics against the exact finite-time expectation on the same ring
    exact = ring_mean_energy(k, mu, MC_N, MC_T)
    res.add("diagnostic: zero IC vs exact ring expectation", m0, float(exact), N_SIGMA * s0, abs(m0 - exact) <= N_SIGMA * s0)
    diff = e1.energy[:, 0] - e0.energy[:, 0]
    md, sd = ensemble_mean(diff)
    res.add("diagnostic: paired IC offset vs H(psi0)", md, IC_ENERGY, N_SIGMA * sd, abs(md - IC_ENERGY) <= N_SIGMA * sd)
    res.add("diagnostic: 2 alpha (long-time limit from rest)", 2 * alpha, alpha, None, True)
    return _finish(res, gating={c[0] for c in res.checks[:2]})


def criterion_8(seed=SEED):
    res = CriterionResult(8, "transient mean energy at t = 5, 10, 20", False)
    k, mu = s1_kernel(), s1_measure()
    ens = _ensemble(TRANSIENT_TIMES, MC_REPLICAS, seed)
    pred = transient_mean_energy(k, mu, np.array(TRANSIENT_TIMES))
    for i, t in enumerate(TRANSIENT_TIMES):
        m, s = ensemble_mean(ens.energy[:, i])
        res.add(f"t={t:g}, stderr {s:.3g}", m, float(pred[i]), N_SIGMA * s, abs(m - pred[i]) <= N_SIGMA * s)
    return _finish(res)


def criterion_9(seed=SEED):
    res = CriterionResult(9, "KS distance of q_0(200) against N(0, 1/32)", False)
    ens = _ensemble((MC_T,), KS_REPLICAS, seed)
    ks = ks_distance(ens.q[:, 0, 0], 1 / 32)
    res.add(f"KS d (n={ks.n})", ks.d, 0.0, ks.threshold, ks.passed)
    return _finish(res)


@lru_cache(maxsize=None)
def _epsilon_run(seed: int):
    k = s1_kernel()
    real = synthesize(s1_measure(), seed, replica=0)
    cfg = SimConfig(N=EPS_N, T=float(EPS_TIMES[-1]), sample_times=tuple(EPS_TIMES))
    traj = simulate(cfg, k, real)
    eta = stationary_trajectory(k, real, cfg)
    return decompose_epsilon(traj, eta)


def criterion_10(seed=SEED):
    res = CriterionResult(10, "sqrt(t) envelope of the transient and its energy conservation", False)
    k = s1_kernel()
    eps = _epsilon_run(seed)
    long = sqrt_t_decay_statistic(eps.times, eps.q, 10, 500).max
    short = sqrt_t_decay_statistic(eps.times, eps.q, 10, 50).max
    res.add("stat[10,500] / stat[10,50]", long / short, 2.0, None, long <= 2.0 * short)
    H = energy_trace(eps, k).H
    spread = float(np.max(H) - np.min(H))
    res.add("epsilon energy spread", spread, 0.0, TOL_EPS_ENERGY, spread <= TOL_EPS_ENERGY)
    resid = homogeneous_residual(eps, k)
    res.add("epsilon homogeneous residual", resid, 0.0, TOL_EPS_HOMOG, resid <= TOL_EPS_HOMOG)
    return _finish(res)


def criterion_11(seed=SEED):
    res = CriterionResult(11, "kernel bounds on free N = 128 chain", False)
    k = s1_kernel()
    N, n = 128, 64
    V = truncated_V(k, N, "free")
    calc = SpectralCalculus(V)
    v = spectral_set(k).e2
    worst = 0.0
    for t in (1.0, 2.0, 4.0, 8.0):
        B = calc.blocks(t)
        for off in (0, 1, 2, 4, 8):
            bc, bs = kernel_bound(v, k.K, off, t)
            c, s = float(abs(B.C[n + off, n])), float(abs(B.S[n + off, n]))
            ratio = max(c / bc, s / bs)
            worst = float(max(worst, ratio))
            res.add(f"offset={off} t={t:g} |C|,|S| vs bounds", (c, s), (bc, bs), None, c <= bc and s <= bs)
    res.add("max ratio to bound", worst, 1.0, None, worst <= 1.0)
    return _finish(res)


def criterion_12(seed=SEED):
    res = CriterionResult(12, "guard rails: unpinned kernel, atom inside the band", False)
    try:
        spectral_set(InteractionKernel(np.array([2.0, -1.0])))
        res.add("unpinned kernel raises PositivityViolation", "no error", "PositivityViolation", None, False)
    except PositivityViolation as exc:
        res.add("unpinned kernel raises PositivityViolation", f"lambda={exc.lam:.3g}", "PositivityViolation", None, True)
    mu = SpectralMeasure(np.array([[2.0, 0.5]]))
    rep = check_gap(mu, s1_kernel().spectrum)
    res.add("gap margin for atom at 2", rep.margin, 0.0, None, rep.margin <= 0.0 and not rep.passed)
    try:
        energy_limit_alpha(s1_kernel(), mu)
        res.add("alpha refuses gap-violating measure", "no error", "GapViolation", None, False)
    except GapViolation:
        res.add("alpha refuses gap-violating measure", "GapViolation", "GapViolation", None, True)
    return _finish(res)


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
]


def ring_mean_energy(kernel, measure, N, t):
    """Exact expected energy at time t on the periodic ring from rest.

    Parseval on the ring and E[A^2] = E[B^2] = w for each folded node give
    (w/2N) sum_m [Pc^2 + Ps^2 + omega_m^2 (Qc^2 + Qs^2)], summed over nodes.
    """
    from .lattice import mode_angles, omega_squared
    from .propagator import driven_mode_response

    w2 = np.asarray(omega_squared(kernel, mode_angles(N)))
    om = np.sqrt(w2)
    xs, ws = measure.nodes()
    total = 0.0
    for x, w in zip(xs, ws):
        Qc, Pc, Qs, Ps = driven_mode_response(om, x, t)
        total += 0.5 * w / N * float(np.sum(Pc**2 + Ps**2 + w2 * (Qc**2 + Qs**2)))
    return total


def run_all(seed=SEED, only=None, echo=None):
    results = []
    for fn in CRITERIA:
        num = int(fn.__name__.split("_")[1])
        if only and num not in only:
            continue
        r = fn(seed)
        results.append(r)
        if echo:
            echo(r.line())
            for ln in r.detail_lines():
                echo(ln)
    return results
