"""Propagator of q'' = -V q + f(t) e_n on a finite lattice.

The generator A = [[0, I], [-V, 0]] exponentiates to the blocks
cos(sqrt(V) t), sin(sqrt(V) t)/sqrt(V) and -sqrt(V) sin(sqrt(V) t). Matrix
functions are evaluated through an explicit eigendecomposition of V;
circulant V is diagonalized by discrete Fourier modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, ValidationError
from .force import ForceRealization, evaluate

EIG_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ChainState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if q.shape != p.shape or q.ndim != 1:
            raise ValidationError("q and p must be vectors of equal length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValidationError("state contains non-finite entries")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def zeros(cls, N):
        return cls(np.zeros(N), np.zeros(N))

    @property
    def N(self):
        return self.q.size

    def energy(self, V) -> float:
        return 0.5 * float(self.p @ self.p) + 0.5 * float(self.q @ (V @ self.q))

    def csv_rows(self):
        return [(k, float(self.q[k]), float(self.p[k])) for k in range(self.N)]


@dataclass(frozen=True, eq=False)
class PropagatorBlocks:
    C: np.ndarray  # cos(sqrt(V) t)
    S: np.ndarray  # sin(sqrt(V) t) / sqrt(V)
    W: np.ndarray  # sqrt(V) sin(sqrt(V) t) = V S
    t: float

    def as_matrix(self) -> np.ndarray:
        """The full 2N x 2N matrix exp(A t)."""
        return np.block([[self.C, self.S], [-self.W, self.C]])


def _is_circulant(V, tol=0.0):
    N = V.shape[0]
    first = V[0]
    for k in range(1, N):
        if np.max(np.abs(V[k] - np.roll(first, k))) > tol:
            return False
    return True


class SpectralCalculus:
    """Eigendecomposition V = U diag(lam) U^H with a positivity certificate."""

    def __init__(self, V):
        V = np.asarray(V, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise ValidationError("V must be square")
        if np.max(np.abs(V - V.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(V))):
            raise ValidationError("V must be symmetric")
        self.V = V
        N = V.shape[0]
        self.circulant = N > 1 and _is_circulant(V)
        if self.circulant:
            lam = np.real(np.fft.fft(V[:, 0]))
            k = np.arange(N)
            self.U = np.exp(2j * np.pi * np.outer(k, k) / N) / np.sqrt(N)
        else:
            lam, self.U = np.linalg.eigh(V)
        if np.min(lam) <= EIG_FLOOR:
            raise NotPositiveDefinite(f"min eigenvalue {np.min(lam):.3e} <= {EIG_FLOOR}")
        self.lam = lam
        self.omega = np.sqrt(lam)

    def apply(self, values) -> np.ndarray:
        """Matrix with eigenvalues ``values`` (function of V) in real form."""
        M = (self.U * values) @ self.U.conj().T
        return np.real(M) if np.iscomplexobj(M) else M

    def blocks(self, t: float) -> PropagatorBlocks:
        w = self.omega
        return PropagatorBlocks(
            self.apply(np.cos(w * t)), self.apply(np.sin(w * t) / w), self.apply(w * np.sin(w * t)), float(t)
        )

    def to_modes(self, v):
        return self.U.conj().T @ v

    def from_modes(self, c):
        out = self.U @ c
        return np.real(out) if np.iscomplexobj(out) else out


def propagator_blocks(V, t: float) -> PropagatorBlocks:
    return SpectralCalculus(V).blocks(t)


def evolve_homogeneous(V, state: ChainState, t: float, calc: SpectralCalculus | None = None) -> ChainState:
    calc = calc or SpectralCalculus(V)
    B = calc.blocks(t)
    return ChainState(B.C @ state.q + B.S @ state.p, -B.W @ state.q + B.C @ state.p)


def _sinc(u):
    return np.sinc(u / np.pi)


def driven_mode_response(omega, x, t):
    """Zero-IC response of Q'' + omega^2 Q = cos(x t) and = sin(x t).

    Returns (Qc, Pc, Qs, Ps). Written through half-angle products so that
    omega -> x is smooth (the resonant limit is the secular t sin(omega t)
    growth, not a division by zero).
    """
    omega = np.asarray(omega, dtype=float)
    x = np.asarray(x, dtype=float)
    sig = omega + x
    dlt = omega - x
    sc = t * _sinc(0.5 * dlt * t)
    Qc = np.sin(0.5 * sig * t) * sc / sig
    Pc = np.sin(omega * t) / sig + x * np.cos(0.5 * sig * t) * sc / sig
    Qs = -np.cos(0.5 * sig * t) * sc / sig + np.sin(omega * t) / (omega * sig)
    Ps = x * Qc
    return Qc, Pc, Qs, Ps


def duhamel_forced(
    V,
    state0: ChainState,
    force: ForceRealization,
    site: int,
    t: float,
    quadrature_dt: float | None = None,
    method: str = "auto",
    calc: SpectralCalculus | None = None,
) -> ChainState:
    """exp(At) psi(0) + integral_0^t exp(A(t-s)) g f(s) ds.

    ``method="closed"`` integrates every cosine/sine term of the force
    exactly in each eigenmode; ``method="simpson"`` applies composite Simpson
    with step ``quadrature_dt`` (default t/2048). ``"auto"`` uses the closed
    form, which is always available for finite cosine sums.
    """
    calc = calc or SpectralCalculus(V)
    hom = evolve_homogeneous(V, state0, t, calc)
    if t == 0 or force.freqs.size == 0:
        return hom
    if quadrature_dt is not None and not (0 < quadrature_dt <= abs(t)):
        raise ValidationError("quadrature_dt must lie in (0, t]")
    g = calc.to_modes(np.eye(calc.V.shape[0])[site])  # mode weights of e_n
    w = calc.omega
    if method in ("auto", "closed"):
        qm = np.zeros(w.size)
        pm = np.zeros(w.size)
        for x, A, B in zip(force.freqs, force.amp_c, force.amp_s):
            Qc, Pc, Qs, Ps = driven_mode_response(w, x, t)
            qm = qm + A * Qc + B * Qs
            pm = pm + A * Pc + B * Ps
    elif method == "simpson":
        dt = quadrature_dt or t / 2048
        M = max(2, int(math.ceil(t / dt)))
        M += M % 2
        s = np.linspace(0.0, t, M + 1)
        wts = np.ones(M + 1)
        wts[1:-1:2] = 4.0
        wts[2:-1:2] = 2.0
        wts *= (t / M) / 3.0
        fs = evaluate(force, s) * wts
        tau = t - s
        qm = (np.sin(np.outer(w, tau)) / w[:, None]) @ fs
        pm = np.cos(np.outer(w, tau)) @ fs
    else:
        raise ValidationError(f"unknown method {method!r}")
    q1 = calc.from_modes(g * qm)
    p1 = calc.from_modes(g * pm)
    return ChainState(hom.q + q1, hom.p + p1)


def generator_matrix(V) -> np.ndarray:
    N = V.shape[0]
    return np.block([[np.zeros((N, N)), np.eye(N)], [-V, np.zeros((N, N))]])


def expm_taylor(M, degree: int = 16) -> np.ndarray:
    """exp(M) by scaling and squaring with a degree-16 Taylor polynomial.

    Independent of any eigendecomposition; the squaring count s makes
    ||M||_1 / 2^s < 0.5.
    """
    M = np.asarray(M, dtype=float)
    norm = np.linalg.norm(M, 1)
    s = 0
    while norm / 2**s >= 0.5:
        s += 1
    X = M / 2**s
    n = M.shape[0]
    E = np.eye(n)
    for k in range(degree, 0, -1):
        E = np.eye(n) + (X @ E) / k
    for _ in range(s):
        E = E @ E
    return E


def kernel_bound(v_norm: float, K: int, offset: int, t: float):
    """Bounds on |C_{k,n}(t)| and |S_{k,n}(t)| with rho = ceil(|k-n|/K)."""
    offset = abs(int(offset))
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if K == 0:
        rho = 0 if offset == 0 else None
    else:
        rho = -(-offset // K)
    if rho is None:
        return 0.0, 0.0
    growth = math.sqrt(v_norm) * t

    def term(power):
        if t == 0:
            return float(power == 0) if rho == 0 else 0.0
        if v_norm == 0:
            return (t**power / math.factorial(power) if rho == 0 else 0.0) * math.exp(growth)
        logv = rho * math.log(v_norm) + power * math.log(t) - math.lgamma(power + 1) + growth
        return math.exp(logv)

    return term(2 * rho), term(2 * rho + 1)
