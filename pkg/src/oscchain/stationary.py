"""Stationary response of the infinite chain.

Everything here is built from the Fourier coefficients

    h_m(x) = (1/2pi) * integral_0^2pi cos(m lam) / (omega^2(lam) - x^2) dlam,

with m = n - k the distance from the forced site n. They are computed two
independent ways: periodic trapezoid in lam, and residues of
z^(|m|+K-1) / (z^K (P(z) - x^2)) at the roots inside the unit circle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    DegenerateWindow,
    GapViolation,
    InsideSpectrum,
    RepeatedRoot,
    Resonance,
    RootOnCircle,
)
from .force import ForceRealization, SpectralMeasure, check_gap
from .lattice import (
    InteractionKernel,
    max_group_velocity,
    omega_squared,
    symbol_polynomial,
)

N_LAMBDA = 4096
WINDOW_RADIUS = 25
SPECTRUM_TOL = 1e-12
CIRCLE_TOL = 1e-8
REPEAT_TOL = 1e-8
FIT_SAFETY = 1.0001
VAR_FLOOR = 1e-300


def _lambda_grid(n_lambda):
    return 2.0 * np.pi * np.arange(n_lambda) / n_lambda


def _require_outside(kernel, x):
    sset = kernel.spectrum
    if sset.contains_sq(x, SPECTRUM_TOL):
        raise InsideSpectrum(f"x^2 = {x * x:.12g} lies in the spectral set [{sset.e1:.12g}, {sset.e2:.12g}]")


def _require_gap(kernel, measure):
    report = check_gap(measure, kernel.spectrum)
    if not report.passed:
        raise GapViolation(f"spectral measure touches the band (margin {report.margin:.6g})", report.margin)
    return report


# ---------------------------------------------------------------------------
# h_m(x): trapezoid
# ---------------------------------------------------------------------------


def h_quadrature(kernel: InteractionKernel, x: float, ms, n_lambda: int = N_LAMBDA) -> np.ndarray:
    _require_outside(kernel, x)
    ms = np.atleast_1d(np.asarray(ms))
    lam = _lambda_grid(n_lambda)
    g = 1.0 / (omega_squared(kernel, lam) - float(x) ** 2)
    phase = np.outer(ms, lam)
    re = np.cos(phase) @ g / n_lambda
    im = np.sin(phase) @ g / n_lambda
    assert np.max(np.abs(im)) < 1e-12 * max(1.0, np.max(np.abs(g))), "odd part of h did not vanish"
    return re


def h_k_quadrature(kernel: InteractionKernel, x: float, m: int, n_lambda: int = N_LAMBDA) -> float:
    """(1/2pi) integral of cos(m lam) / (omega^2 - x^2), uniform trapezoid."""
    return float(h_quadrature(kernel, x, [m], n_lambda)[0])


# ---------------------------------------------------------------------------
# h_m(x): residues
# ---------------------------------------------------------------------------


def inner_roots(kernel: InteractionKernel, x: float):
    """Roots of z^K (P(z) - x^2) strictly inside the unit circle, and the polynomial."""
    poly = symbol_polynomial(kernel, x)
    z = poly.roots()
    mod = np.abs(z)
    if np.any(np.abs(mod - 1.0) < CIRCLE_TOL):
        raise RootOnCircle(f"x = {x:.12g}: symbol polynomial has a root on |z| = 1")
    inside = z[mod < 1.0]
    if inside.size != kernel.K:
        raise RootOnCircle(f"expected {kernel.K} inner roots, found {inside.size}")
    return inside, poly


def inner_root_radius(kernel: InteractionKernel, x: float) -> float:
    """Largest modulus among the roots inside the unit circle."""
    if kernel.K == 0:
        return 0.0
    inside, _ = inner_roots(kernel, x)
    return float(np.max(np.abs(inside)))


def h_residue(kernel: InteractionKernel, x: float, ms) -> np.ndarray:
    ms = np.abs(np.atleast_1d(np.asarray(ms, dtype=int)))
    if kernel.K == 0:
        _require_outside(kernel, x)
        return np.where(ms == 0, 1.0 / (kernel.half[0] - float(x) ** 2), 0.0)
    inside, poly = inner_roots(kernel, x)
    if inside.size > 1:
        d = np.abs(inside[:, None] - inside[None, :]) + np.eye(inside.size)
        if np.min(d) < REPEAT_TOL:
            raise RepeatedRoot(f"x = {x:.12g}: repeated inner root")
    K = kernel.K
    dq = poly.derivative(inside)
    terms = inside[None, :] ** (ms[:, None] + K - 1) / dq[None, :]
    total = terms.sum(axis=1)
    scale = np.maximum(1.0, np.abs(terms).sum(axis=1))
    assert np.all(np.abs(total.imag) <= 1e-10 * scale), "residue sum is not real"
    return total.real


def h_k_residue(kernel: InteractionKernel, x: float, m: int) -> float:
    """Contour form of h_m(x), evaluated as a sum of residues."""
    return float(h_residue(kernel, x, [m])[0])


def h_values(kernel: InteractionKernel, x: float, ms, n_lambda: int = N_LAMBDA) -> np.ndarray:
    """Residue evaluation with trapezoid fallback at repeated roots."""
    try:
        return h_residue(kernel, x, ms)
    except RepeatedRoot:
        return h_quadrature(kernel, x, ms, n_lambda)


# ---------------------------------------------------------------------------
# resolvent and covariance
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ResolventAction:
    """R_A(ix) g on a window of sites: q-part -R_V(x^2) e_n, p-part ix times that."""

    x: float
    sites: np.ndarray
    qpart: np.ndarray
    ppart: np.ndarray


def resolvent_action(kernel: InteractionKernel, x: float, n: int, sites) -> ResolventAction:
    sites = np.asarray(sites)
    q = -h_values(kernel, x, n - sites).astype(complex)
    return ResolventAction(float(x), sites, q, 1j * x * q)


@dataclass(frozen=True, eq=False)
class StationaryCovariance:
    n: int
    sites: np.ndarray
    cqq: np.ndarray
    cpp: np.ndarray

    @property
    def var_q(self):
        return np.diag(self.cqq).copy()

    @property
    def var_p(self):
        return np.diag(self.cpp).copy()

    @property
    def cqp(self):
        # identically zero for symmetric spectral measures
        return np.zeros_like(self.cqq)

    def entry(self, which, k, j):
        mat = self.cqq if which == "q" else self.cpp
        i0 = self.sites[0]
        return float(mat[k - i0, j - i0])


def _window(n, window):
    if window is None:
        window = (n - WINDOW_RADIUS, n + WINDOW_RADIUS)
    lo, hi = window
    return np.arange(int(lo), int(hi) + 1)


def stationary_covariance(
    kernel: InteractionKernel, measure: SpectralMeasure, n: int = 0, window=None
) -> StationaryCovariance:
    """Covariances of the stationary solution at time 0 on a window of sites.

    cqq[k, j] = integral h_k h_j dmu, cpp[k, j] = integral x^2 h_k h_j dmu.
    """
    _require_gap(kernel, measure)
    sites = _window(n, window)
    xs, ws = measure.nodes()
    M = sites.size
    cqq = np.zeros((M, M))
    cpp = np.zeros((M, M))
    for x, w in zip(xs, ws):
        h = h_values(kernel, x, n - sites)
        outer = np.outer(h, h)
        cqq += w * outer
        cpp += w * x * x * outer
    return StationaryCovariance(int(n), sites, cqq, cpp)


def cross_covariance_bruteforce(kernel, measure, n=0, window=None) -> np.ndarray:
    """integral of i x h_k h_j over the unfolded measure (both signs of x)."""
    sites = _window(n, window)
    xs, ws = measure.nodes()
    out = np.zeros((sites.size, sites.size), dtype=complex)
    for x, w in zip(xs, ws):
        h = h_values(kernel, x, n - sites)
        outer = np.outer(h, h)
        if x == 0:
            continue
        for sign in (1.0, -1.0):
            out += 0.5 * w * 1j * sign * x * outer
    return out


# ---------------------------------------------------------------------------
# spatial decay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayEstimate:
    r: float
    c1: float
    c2: float
    r_p: float
    predicted_r: float
    adjusted: bool

    def to_json(self):
        return {
            "r": self.r,
            "c1": self.c1,
            "c2": self.c2,
            "r_p": self.r_p,
            "predicted_r": self.predicted_r,
            "dominance_adjusted": self.adjusted,
        }


def predicted_decay_rate(kernel: InteractionKernel, measure: SpectralMeasure) -> float:
    """sup over the support of R(x)^2."""
    pts = measure.support_points()
    if pts.size == 0 or kernel.K == 0:
        return 0.0
    return float(max(inner_root_radius(kernel, x) ** 2 for x in pts))


def variance_decay_fit(cov: StationaryCovariance, n: int | None = None, predicted_r: float = float("nan")) -> DecayEstimate:
    """Least-squares fit of log Var against distance |n - k|.

    The fitted constants are raised to the smallest dominating value if
    the line with safety factor 1.0001 fails to dominate some site.
    """
    n = cov.n if n is None else n
    dist = np.abs(n - cov.sites)
    if min(n - cov.sites[0], cov.sites[-1] - n) < 5:
        raise DegenerateWindow("window must reach at least 5 sites on each side")
    vq, vp = cov.var_q, cov.var_p
    use = (vq > VAR_FLOOR) & (vp > VAR_FLOOR)
    if np.unique(dist[use]).size < 3:
        raise DegenerateWindow("fewer than 3 distinct distances with positive variance")
    d, lq, lp = dist[use], np.log(vq[use]), np.log(vp[use])
    slope, icpt = np.polyfit(d, lq, 1)
    r = float(np.exp(slope))
    slope_p, _ = np.polyfit(d, lp, 1)
    icpt_p = float(np.mean(lp - slope * d))
    c1 = float(np.exp(icpt)) * FIT_SAFETY
    c2 = float(np.exp(icpt_p)) * FIT_SAFETY
    need1 = float(np.max(vq * np.exp(-slope * dist)))
    need2 = float(np.max(vp * np.exp(-slope * dist)))
    adjusted = need1 > c1 or need2 > c2
    c1, c2 = max(c1, need1), max(c2, need2)
    return DecayEstimate(r, c1, c2, float(np.exp(slope_p)), float(predicted_r), adjusted)


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyLimit:
    alpha: float
    error_estimate: float
    n_lambda: int

    def to_json(self):
        return {"alpha": self.alpha, "error_estimate": self.error_estimate, "n_lambda": self.n_lambda}


def _alpha_sum(kernel, xs, ws, n_lambda):
    w2 = omega_squared(kernel, _lambda_grid(n_lambda))
    total = 0.0
    for x, w in zip(xs, ws):
        x2 = x * x
        total += w * np.mean((w2 + x2) / (w2 - x2) ** 2)
    return 0.5 * total


def energy_limit_alpha(kernel: InteractionKernel, measure: SpectralMeasure, n_lambda: int = N_LAMBDA) -> EnergyLimit:
    """Mean energy of the stationary solution:

    (1/4pi) integral integral (omega^2 + x^2) / (omega^2 - x^2)^2 dlam mu(dx).
    The error estimate is the change under doubling n_lambda.
    """
    if measure.is_empty:
        return EnergyLimit(0.0, 0.0, n_lambda)
    _require_gap(kernel, measure)
    xs, ws = measure.nodes()
    a1 = _alpha_sum(kernel, xs, ws, n_lambda)
    a2 = _alpha_sum(kernel, xs, ws, 2 * n_lambda)
    return EnergyLimit(float(a2), float(abs(a2 - a1)), n_lambda)


def alpha_trace_form(kernel: InteractionKernel, cov: StationaryCovariance) -> float:
    """0.5 * (sum a(k-j) cqq[k, j] + sum cpp[k, k]) on the covariance window."""
    d = np.abs(cov.sites[:, None] - cov.sites[None, :])
    V = np.where(d <= kernel.K, kernel.half[np.minimum(d, kernel.K)], 0.0)
    return 0.5 * (float(np.sum(V * cov.cqq)) + float(np.trace(cov.cpp)))


def transient_mean_energy(kernel: InteractionKernel, measure: SpectralMeasure, t, n_lambda: int = N_LAMBDA):
    """Expected energy at time t of the solution started from rest.

    (1/4pi) integral integral [I+ + I-] dlam mu(dx) with
    I(+-) = (1 - cos t(x +- omega)) / (x +- omega)^2. As t grows this tends
    to twice the stationary mean energy, with an O(1/sqrt(t)) remainder.
    n_lambda is raised if needed to resolve the oscillation of cos(t omega).
    """
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if measure.is_empty:
        out = np.zeros(ts.shape)
        return float(out[0]) if scalar else out
    _require_gap(kernel, measure)
    tmax = float(np.max(np.abs(ts))) if ts.size else 0.0
    need = int(8 * tmax * max_group_velocity(kernel)) + 64
    n_lambda = max(n_lambda, need)
    omega = np.sqrt(omega_squared(kernel, _lambda_grid(n_lambda)))
    xs, ws = measure.nodes()
    out = _kernels.transient_energy_sum(omega, np.ascontiguousarray(xs), np.ascontiguousarray(ws), ts)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# stationary solution of one Fourier mode
# ---------------------------------------------------------------------------


def stationary_mode_solution(
    kernel: InteractionKernel,
    realization: ForceRealization,
    site: int,
    lam: float,
    t,
    omega: float | None = None,
):
    """Q(t), Q'(t) solving Q'' = -omega^2 Q + f(t) exp(i n lam), stationary branch.

    Q(t) = exp(i n lam) * sum_j (A_j cos x_j t + B_j sin x_j t) / (omega^2 - x_j^2).
    """
    w2 = float(omega_squared(kernel, lam)) if omega is None else float(omega) ** 2
    x = realization.freqs
    den = w2 - x * x
    if np.any(np.abs(den) < 1e-10):
        raise Resonance(f"force frequency matches mode frequency {np.sqrt(w2):.12g}")
    t = np.asarray(t, dtype=float)
    ph = np.exp(1j * site * lam)
    xt = np.multiply.outer(t, x)
    A = realization.amp_c / den
    B = realization.amp_s / den
    Q = ph * (np.cos(xt) @ A + np.sin(xt) @ B)
    Qd = ph * ((-np.sin(xt) * x) @ A + (np.cos(xt) * x) @ B)
    return Q, Qd


def mode_equation_residual(kernel, realization, site, lam, t, omega=None):
    """max |Q'' + omega^2 Q - f(t) exp(i n lam)| using the analytic Q''."""
    w2 = float(omega_squared(kernel, lam)) if omega is None else float(omega) ** 2
    Q, _ = stationary_mode_solution(kernel, realization, site, lam, t, omega)
    x = realization.freqs
    den = w2 - x * x
    xt = np.multiply.outer(np.asarray(t, dtype=float), x)
    Qdd = np.exp(1j * site * lam) * (
        (-np.cos(xt) * x * x) @ (realization.amp_c / den) + (-np.sin(xt) * x * x) @ (realization.amp_s / den)
    )
    f = np.cos(xt) @ realization.amp_c + np.sin(xt) @ realization.amp_s
    return float(np.max(np.abs(Qdd + w2 * Q - f * np.exp(1j * site * lam))))
