"""Time-domain simulation of the truncated driven chain.

Sites are 0..N-1 and the force acts on ``site``. Mode conventions for the
periodic ring: Q_m = sum_k q_k exp(i k lam_m) with lam_m = 2 pi m / N, so
that V acts as omega^2(lam_m) and the force enters mode m as
f(t) exp(i n lam_m); q_k = (1/N) sum_m Q_m exp(-i k lam_m).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import BoundaryUnsupported, MismatchedRuns, Resonance, TooSmall, ValidationError
from .force import EnsembleForcing, ForceRealization, _generator
from .lattice import InteractionKernel, mode_angles, omega_squared, truncated_V
from .propagator import ChainState, SpectralCalculus, driven_mode_response
from .stationary import stationary_mode_solution

RESONANCE_TOL = 1e-10


def default_sample_times(T: float):
    out = []
    decade = 1.0
    while decade <= T:
        for m in (1.0, 2.0, 5.0):
            if m * decade <= T:
                out.append(m * decade)
        decade *= 10.0
    if not out or out[-1] != T:
        out.append(float(T))
    return sorted(set(out))


@dataclass(frozen=True)
class SimConfig:
    N: int
    T: float
    site: int = 0
    boundary: str = "periodic"
    sample_times: tuple = ()
    integrator: str = "mode_exact"
    dt: float | None = None
    initial: object = "zero"

    def __post_init__(self):
        if self.boundary not in ("periodic", "free"):
            raise ValidationError(f"unknown boundary {self.boundary!r}")
        if self.integrator not in ("mode_exact", "verlet"):
            raise ValidationError(f"unknown integrator {self.integrator!r}")
        if not (0 <= self.site < self.N):
            raise ValidationError("forcing site must lie in 0..N-1")
        if self.T < 0:
            raise ValidationError("horizon T must be nonnegative")
        times = tuple(float(t) for t in self.sample_times) or tuple(default_sample_times(self.T))
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("sample times must be strictly increasing")
        if times[0] < 0 or times[-1] > self.T + 1e-12:
            raise ValidationError("sample times must lie in [0, T]")
        object.__setattr__(self, "sample_times", times)
        if self.dt is not None and self.dt <= 0:
            raise ValidationError("dt must be positive")

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.sample_times)

    def check_kernel(self, kernel: InteractionKernel):
        if self.N <= 2 * kernel.K:
            raise TooSmall(f"N = {self.N} must exceed 2K = {2 * kernel.K}")
        kernel.spectrum  # positivity certificate

    def verlet_dt(self, kernel: InteractionKernel) -> float:
        if self.dt is not None:
            return self.dt
        dt0 = 2.0 * math.pi / (100.0 * math.sqrt(kernel.spectrum.e2))
        # refine so that integer sample times land on the step grid
        return 1.0 / math.ceil(1.0 / dt0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    q: np.ndarray  # (S, N)
    p: np.ndarray  # (S, N)
    config: SimConfig
    realization: ForceRealization | None = None
    kind: str = "full"

    def state(self, i: int) -> ChainState:
        return ChainState(self.q[i], self.p[i])

    def csv_rows(self):
        for i, t in enumerate(self.times):
            for k in range(self.q.shape[1]):
                yield (float(t), k, float(self.q[i, k]), float(self.p[i, k]))


@dataclass(frozen=True, eq=False)
class EnergyTrace:
    times: np.ndarray
    H: np.ndarray

    def csv_rows(self):
        return [(float(t), float(h)) for t, h in zip(self.times, self.H)]


@dataclass(frozen=True, eq=False)
class EpsilonSeries:
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    config: SimConfig


@dataclass(frozen=True, eq=False)
class EnsembleTrajectory:
    times: np.ndarray
    sites: np.ndarray
    q: np.ndarray  # (R, S, len(sites))
    p: np.ndarray
    energy: np.ndarray | None = None  # (R, S)
    seed: int = 0
    replicas: tuple = field(default_factory=tuple)


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------


def initial_state(config: SimConfig) -> ChainState:
    init = config.initial
    if isinstance(init, ChainState):
        if init.N != config.N:
            raise ValidationError("initial state length differs from N")
        return init
    if init is None or init == "zero":
        return ChainState.zeros(config.N)
    if isinstance(init, dict) and set(init) == {"q", "p"}:
        return ChainState(np.asarray(init["q"], float), np.asarray(init["p"], float))
    if isinstance(init, dict) and "random" in init:
        spec = init["random"]
        gen = _generator(int(spec.get("seed", 0)), 0)
        scale = float(spec.get("scale", 1.0))
        return ChainState(scale * gen.standard_normal(config.N), scale * gen.standard_normal(config.N))
    raise ValidationError(f"unrecognized initial condition {init!r}")


# ---------------------------------------------------------------------------
# mode-exact machinery (periodic ring)
# ---------------------------------------------------------------------------


class RingModes:
    def __init__(self, kernel: InteractionKernel, N: int, site: int):
        if N <= 2 * kernel.K:
            raise TooSmall(f"N = {N} must exceed 2K = {2 * kernel.K}")
        self.kernel = kernel
        self.N = N
        self.site = site
        self.lam = mode_angles(N)
        self.w2 = np.asarray(omega_squared(kernel, self.lam))
        if np.min(self.w2) <= 0:
            raise ValidationError("kernel is not positive on the ring modes")
        self.w = np.sqrt(self.w2)
        self.phase = np.exp(1j * site * self.lam)

    def forward(self, v):
        return self.N * np.fft.ifft(v, axis=-1)

    def inverse(self, V):
        return np.real(np.fft.fft(V, axis=-1)) / self.N

    def check_resonance(self, freqs):
        if freqs.size and np.min(np.abs(self.w2[:, None] - freqs[None, :] ** 2)) < RESONANCE_TOL:
            raise Resonance("a force frequency coincides with a ring mode frequency")

    def homogeneous(self, state: ChainState, times):
        """exp(A t) applied to ``state`` at every time; shapes (S, N)."""
        Q0, P0 = self.forward(state.q), self.forward(state.p)
        wt = np.multiply.outer(times, self.w)
        c, s = np.cos(wt), np.sin(wt)
        Q = c * Q0 + s / self.w * P0
        P = -self.w * s * Q0 + c * P0
        return self.inverse(Q), self.inverse(P)

    def response_basis(self, freqs, times):
        """Zero-IC real-space responses to unit cos and sin forcing terms.

        Returns Gq, Gp of shape (S, 2J, N): rows 0..J-1 for cos(x_j t),
        rows J..2J-1 for sin(x_j t).
        """
        S, J = len(times), freqs.size
        Gq = np.empty((S, 2 * J, self.N))
        Gp = np.empty((S, 2 * J, self.N))
        for i, t in enumerate(times):
            for j, x in enumerate(freqs):
                Qc, Pc, Qs, Ps = driven_mode_response(self.w, x, t)
                Gq[i, j] = self.inverse(self.phase * Qc)
                Gp[i, j] = self.inverse(self.phase * Pc)
                Gq[i, J + j] = self.inverse(self.phase * Qs)
                Gp[i, J + j] = self.inverse(self.phase * Ps)
        return Gq, Gp


def _require_mode_exact(config):
    if config.boundary != "periodic":
        raise BoundaryUnsupported("mode_exact integration needs periodic boundary")


def simulate(config: SimConfig, kernel: InteractionKernel, realization: ForceRealization) -> Trajectory:
    """Solve q'' = -V q + f(t) e_site on the truncated lattice."""
    config.check_kernel(kernel)
    psi0 = initial_state(config)
    times = config.times
    if config.integrator == "mode_exact":
        _require_mode_exact(config)
        ring = RingModes(kernel, config.N, config.site)
        ring.check_resonance(realization.freqs)
        q, p = ring.homogeneous(psi0, times)
        if realization.freqs.size:
            Gq, Gp = ring.response_basis(realization.freqs, times)
            amps = np.concatenate([realization.amp_c, realization.amp_s])
            q = q + np.einsum("j,sjn->sn", amps, Gq)
            p = p + np.einsum("j,sjn->sn", amps, Gp)
        return Trajectory(times, q, p, config, realization)
    q, p = _verlet_batch(
        config, kernel, psi0.q[None, :], psi0.p[None, :], realization.freqs, realization.amp_c[None, :], realization.amp_s[None, :]
    )
    return Trajectory(times, q[0], p[0], config, realization)


def _verlet_batch(config, kernel, q0, p0, freqs, amp_c, amp_s):
    dt = config.verlet_dt(kernel)
    steps = np.rint(config.times / dt).astype(np.int64)
    if np.max(np.abs(steps * dt - config.times), initial=0.0) > 1e-9 * max(1.0, config.T):
        raise ValidationError("sample times must be integer multiples of the Verlet step dt")
    return _kernels.verlet(
        np.ascontiguousarray(kernel.half),
        config.boundary == "periodic",
        np.ascontiguousarray(q0, dtype=float),
        np.ascontiguousarray(p0, dtype=float),
        int(config.site),
        np.ascontiguousarray(freqs, dtype=float),
        np.ascontiguousarray(amp_c, dtype=float),
        np.ascontiguousarray(amp_s, dtype=float),
        float(dt),
        steps,
    )


def stationary_trajectory(kernel: InteractionKernel, realization: ForceRealization, config: SimConfig) -> Trajectory:
    """The stationary solution eta(t) on the periodic ring, mode by mode."""
    config.check_kernel(kernel)
    _require_mode_exact(config)
    ring = RingModes(kernel, config.N, config.site)
    ring.check_resonance(realization.freqs)
    times = config.times
    Q = np.zeros((times.size, config.N), dtype=complex)
    P = np.zeros_like(Q)
    if realization.freqs.size:
        for m in range(config.N):
            Q[:, m], P[:, m] = stationary_mode_solution(kernel, realization, config.site, ring.lam[m], times, omega=ring.w[m])
    return Trajectory(times, ring.inverse(Q), ring.inverse(P), config, realization, kind="stationary")


def decompose_epsilon(trajectory: Trajectory, stationary: Trajectory) -> EpsilonSeries:
    """epsilon = psi - eta at every sample time."""
    a, b = trajectory.config, stationary.config
    same_cfg = (a.N, a.site, a.boundary, a.sample_times) == (b.N, b.site, b.boundary, b.sample_times)
    ra, rb = trajectory.realization, stationary.realization
    same_force = ra is rb or (
        ra is not None
        and rb is not None
        and np.array_equal(ra.freqs, rb.freqs)
        and np.array_equal(ra.amp_c, rb.amp_c)
        and np.array_equal(ra.amp_s, rb.amp_s)
    )
    if not (same_cfg and same_force):
        raise MismatchedRuns("trajectory and stationary solution come from different runs")
    return EpsilonSeries(trajectory.times, trajectory.q - stationary.q, trajectory.p - stationary.p, a)


def homogeneous_residual(eps: EpsilonSeries, kernel: InteractionKernel) -> float:
    """max deviation of epsilon from exp(A (t - t0)) epsilon(t0)."""
    t0 = eps.times[0]
    start = ChainState(eps.q[0], eps.p[0])
    if eps.config.boundary == "periodic":
        ring = RingModes(kernel, eps.config.N, eps.config.site)
        q, p = ring.homogeneous(start, eps.times - t0)
    else:
        calc = SpectralCalculus(truncated_V(kernel, eps.config.N, "free"))
        q = np.empty_like(eps.q)
        p = np.empty_like(eps.p)
        for i, t in enumerate(eps.times - t0):
            B = calc.blocks(t)
            q[i] = B.C @ start.q + B.S @ start.p
            p[i] = -B.W @ start.q + B.C @ start.p
    return float(max(np.max(np.abs(q - eps.q)), np.max(np.abs(p - eps.p))))


def _energies(q, p, kernel, N, boundary):
    V = truncated_V(kernel, N, boundary)
    return 0.5 * np.sum(p * p, axis=-1) + 0.5 * np.einsum("...k,kj,...j->...", q, V, q)


def energy_trace(trajectory, kernel: InteractionKernel) -> EnergyTrace:
    """H(t) = p.p/2 + q.Vq/2 at each sample time, truncated V."""
    cfg = trajectory.config
    return EnergyTrace(trajectory.times, _energies(trajectory.q, trajectory.p, kernel, cfg.N, cfg.boundary))


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------


def simulate_ensemble(
    config: SimConfig,
    kernel: InteractionKernel,
    forcing: EnsembleForcing,
    sites=None,
    workers: int = 1,
    with_energy: bool = True,
) -> EnsembleTrajectory:
    """All replicas of ``forcing`` from the same initial condition.

    mode_exact uses linearity in the force amplitudes: one response basis
    per sample time, then a matrix product over replicas.
    """
    config.check_kernel(kernel)
    psi0 = initial_state(config)
    times = config.times
    sites = np.arange(config.N) if sites is None else np.asarray(sites)
    R = forcing.n_replicas
    if config.integrator == "mode_exact":
        _require_mode_exact(config)
        ring = RingModes(kernel, config.N, config.site)
        ring.check_resonance(forcing.freqs)
        hq, hp = ring.homogeneous(psi0, times)
        Gq, Gp = ring.response_basis(forcing.freqs, times)
        amps = np.concatenate([forcing.amp_c, forcing.amp_s], axis=1)  # (R, 2J)
        q_full = hq[None] + np.einsum("rj,sjn->rsn", amps, Gq)
        p_full = hp[None] + np.einsum("rj,sjn->rsn", amps, Gp)
    else:
        chunks = np.array_split(np.arange(R), max(1, min(workers, R)))

        def run(idx):
            return _verlet_batch(
                config,
                kernel,
                np.repeat(psi0.q[None, :], idx.size, axis=0),
                np.repeat(psi0.p[None, :], idx.size, axis=0),
                forcing.freqs,
                forcing.amp_c[idx],
                forcing.amp_s[idx],
            )

        if len(chunks) == 1:
            parts = [run(chunks[0])]
        else:
            with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
                parts = list(ex.map(run, chunks))
        q_full = np.concatenate([a for a, _ in parts], axis=0)
        p_full = np.concatenate([b for _, b in parts], axis=0)
    energy = _energies(q_full, p_full, kernel, config.N, config.boundary) if with_energy else None
    return EnsembleTrajectory(times, sites, q_full[:, :, sites], p_full[:, :, sites], energy, forcing.seed, tuple(range(R)))


def with_initial(config: SimConfig, initial) -> SimConfig:
    return replace(config, initial=initial)
