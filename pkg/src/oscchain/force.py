"""Spectral measure of the driving force and stationary realizations of it.

A measure is stored in folded form: an atom ``(x, w)`` with ``x > 0`` means
mass ``w`` at each of ``+x`` and ``-x``; an atom at ``x = 0`` carries mass
``w`` once. A density panel on ``[u, v]`` (``0 <= u < v``) is mirrored onto
``[-v, -u]``. Every integrand used in the package is even in ``x``, so sums
over the folded nodes with doubled weights are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from ._kernels import trig_sum
from .errors import EmptyMeasure, ValidationError
from .lattice import SpectralSet

GL_POINTS = 64
MODES = ("gaussian_amplitudes", "random_phases")


@dataclass(frozen=True)
class Panel:
    """Polynomial density c0 + c1 x + ... on [u, v], mirrored to negative x."""

    u: float
    v: float
    poly: tuple

    def __post_init__(self):
        if not (0.0 <= self.u < self.v and np.isfinite(self.v)):
            raise ValidationError(f"panel interval must satisfy 0 <= u < v, got [{self.u}, {self.v}]")
        if len(self.poly) == 0:
            raise ValidationError("panel polynomial is empty")
        grid = np.linspace(self.u, self.v, 513)
        vals = npoly.polyval(grid, self.poly)
        if np.min(vals) < -1e-12 * max(1.0, np.max(np.abs(vals))):
            raise ValidationError(f"panel density on [{self.u}, {self.v}] takes negative values")

    def density(self, x):
        return npoly.polyval(x, self.poly)

    def cumulative(self, x):
        anti = npoly.polyint(self.poly)
        return npoly.polyval(x, anti) - npoly.polyval(self.u, anti)

    @property
    def mass(self) -> float:
        """Mass on [u, v] (one side)."""
        return float(self.cumulative(self.v))

    def gauss_legendre(self, n=GL_POINTS):
        t, w = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (self.v - self.u)
        x = self.u + half * (t + 1.0)
        return x, w * half * self.density(x)

    def equal_mass_midpoints(self, n: int) -> np.ndarray:
        """Midpoints of n subintervals of [u, v] carrying equal mass."""
        m = self.mass
        edges = [self.u]
        for i in range(1, n):
            target = m * i / n
            edges.append(brentq(lambda x: self.cumulative(x) - target, self.u, self.v, xtol=1e-14))
        edges.append(self.v)
        edges = np.asarray(edges)
        return 0.5 * (edges[:-1] + edges[1:])


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    atoms: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    panels: tuple = ()

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).reshape(-1, 2).copy()
        if atoms.size:
            atoms[:, 0] = np.abs(atoms[:, 0])
            if np.any(atoms[:, 1] <= 0) or not np.all(np.isfinite(atoms)):
                raise ValidationError("atom masses must be positive and finite")
            # merge repeated frequencies
            xs, inv = np.unique(atoms[:, 0], return_inverse=True)
            ws = np.bincount(inv, weights=atoms[:, 1])
            atoms = np.column_stack([xs, ws])
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        panels = tuple(p if isinstance(p, Panel) else Panel(*p) for p in self.panels)
        for p in panels:
            if p.mass <= 0:
                raise ValidationError("panel carries no mass")
        object.__setattr__(self, "panels", panels)

    @classmethod
    def from_config(cls, spec):
        extra = set(spec) - {"atoms", "panels"}
        if extra:
            raise ValidationError(f"unknown measure fields: {sorted(extra)}")
        atoms = [tuple(a) for a in spec.get("atoms", [])]
        for a in atoms:
            if len(a) != 2:
                raise ValidationError("atoms are [x, w] pairs")
        panels = []
        for p in spec.get("panels", []):
            if set(p) != {"interval", "poly"}:
                raise ValidationError('panels are {"interval": [u, v], "poly": [c0, c1, ...]}')
            u, v = p["interval"]
            panels.append(Panel(float(u), float(v), tuple(float(c) for c in p["poly"])))
        return cls(np.asarray(atoms, dtype=float).reshape(-1, 2), tuple(panels))

    def to_config(self):
        return {
            "atoms": [[float(x), float(w)] for x, w in self.atoms],
            "panels": [{"interval": [p.u, p.v], "poly": list(p.poly)} for p in self.panels],
        }

    @property
    def atom_weights(self) -> np.ndarray:
        """Folded atom masses: 2w for x > 0, w at x = 0."""
        if not self.atoms.size:
            return np.zeros(0)
        return np.where(self.atoms[:, 0] > 0, 2.0, 1.0) * self.atoms[:, 1]

    @property
    def total_mass(self) -> float:
        return float(self.atom_weights.sum() + 2.0 * sum(p.mass for p in self.panels))

    @property
    def is_empty(self) -> bool:
        return self.total_mass == 0.0

    def nodes(self, gl_points: int = GL_POINTS):
        """Folded quadrature nodes (x >= 0) and weights summing to the total mass."""
        xs = [self.atoms[:, 0]] if self.atoms.size else []
        ws = [self.atom_weights] if self.atoms.size else []
        for p in self.panels:
            x, w = p.gauss_legendre(gl_points)
            xs.append(x)
            ws.append(2.0 * w)
        if not xs:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(xs), np.concatenate(ws)

    def support_points(self, per_panel: int = 257) -> np.ndarray:
        """Nonnegative frequencies sampling the support (atoms, panel grids)."""
        pts = [self.atoms[:, 0]] if self.atoms.size else []
        for p in self.panels:
            pts.append(np.linspace(p.u, p.v, per_panel))
        return np.concatenate(pts) if pts else np.zeros(0)


@dataclass(frozen=True)
class GapReport:
    margin: float
    passed: bool

    def to_json(self):
        return {"margin": self.margin, "pass": self.passed}


@dataclass(frozen=True, eq=False)
class ForceRealization:
    """f(t) = sum_j A_j cos(x_j t) + B_j sin(x_j t)."""

    freqs: np.ndarray
    amp_c: np.ndarray
    amp_s: np.ndarray
    seed: int = 0
    replica: int = 0
    mode: str = "gaussian_amplitudes"

    def __call__(self, t):
        return evaluate(self, t)

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.amp_c) or np.any(self.amp_s))


@dataclass(frozen=True, eq=False)
class EnsembleForcing:
    """Row r holds exactly the amplitudes of ``synthesize(..., replica=r)``."""

    freqs: np.ndarray
    amp_c: np.ndarray
    amp_s: np.ndarray
    seed: int
    mode: str

    @property
    def n_replicas(self) -> int:
        return self.amp_c.shape[0]

    def realization(self, r: int) -> ForceRealization:
        return ForceRealization(self.freqs, self.amp_c[r], self.amp_s[r], self.seed, r, self.mode)


def covariance_B(measure: SpectralMeasure, s):
    """B(s) = integral of exp(i s x) mu(dx), real and even."""
    xs, ws = measure.nodes()
    s = np.asarray(s, dtype=float)
    out = np.cos(np.multiply.outer(s, xs)) @ ws if xs.size else np.zeros(s.shape)
    return out if np.ndim(out) else float(out)


def _interval_distance(lo, hi, a, b):
    if hi < a:
        return a - hi
    if lo > b:
        return lo - b
    return 0.0


def check_gap(measure: SpectralMeasure, sset: SpectralSet) -> GapReport:
    """Distance from supp mu to the set of +-[sqrt(e1), sqrt(e2)]."""
    a, b = sset.root_band
    dists = [_interval_distance(x, x, a, b) for x in measure.atoms[:, 0]]
    dists += [_interval_distance(p.u, p.v, a, b) for p in measure.panels]
    margin = float(min(dists)) if dists else float("inf")
    return GapReport(margin, margin > 0.0)


def _generator(seed: int, replica: int) -> np.random.Generator:
    if seed < 0 or replica < 0:
        raise ValidationError("seed and replica index must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replica)])))


def _terms(measure: SpectralMeasure, n_density_terms: int):
    """Frequencies and folded variances of the synthesis terms."""
    if measure.is_empty:
        raise EmptyMeasure("spectral measure has zero total mass")
    xs = [measure.atoms[:, 0]] if measure.atoms.size else []
    vs = [measure.atom_weights] if measure.atoms.size else []
    for p in measure.panels:
        xs.append(p.equal_mass_midpoints(n_density_terms))
        vs.append(np.full(n_density_terms, 2.0 * p.mass / n_density_terms))
    return np.concatenate(xs), np.concatenate(vs)


def _draw(gen, variances, mode):
    J = variances.size
    if mode == "gaussian_amplitudes":
        sd = np.sqrt(variances)
        return gen.standard_normal(J) * sd, gen.standard_normal(J) * sd
    if mode == "random_phases":
        phi = gen.uniform(0.0, 2.0 * np.pi, J)
        amp = np.sqrt(2.0 * variances)
        return amp * np.cos(phi), amp * np.sin(phi)
    raise ValidationError(f"unknown synthesis mode {mode!r}; expected one of {MODES}")


def synthesize(
    measure: SpectralMeasure,
    seed: int,
    mode: str = "gaussian_amplitudes",
    n_density_terms: int = 16,
    replica: int = 0,
) -> ForceRealization:
    """Draw one strictly stationary realization with covariance B(s).

    Sub-stream ``(seed, replica)`` of a Philox generator drives the draw, so
    the result is reproducible bit for bit.
    """
    freqs, var = _terms(measure, n_density_terms)
    A, B = _draw(_generator(seed, replica), var, mode)
    return ForceRealization(freqs, A, B, int(seed), int(replica), mode)


def synthesize_batch(
    measure: SpectralMeasure,
    seed: int,
    replicas,
    mode: str = "gaussian_amplitudes",
    n_density_terms: int = 16,
) -> EnsembleForcing:
    if isinstance(replicas, int):
        replicas = range(replicas)
    replicas = list(replicas)
    freqs, var = _terms(measure, n_density_terms)
    A = np.empty((len(replicas), freqs.size))
    B = np.empty_like(A)
    for i, r in enumerate(replicas):
        A[i], B[i] = _draw(_generator(seed, r), var, mode)
    return EnsembleForcing(freqs, A, B, int(seed), mode)


def zero_force() -> ForceRealization:
    return ForceRealization(np.zeros(0), np.zeros(0), np.zeros(0))


def evaluate(realization: ForceRealization, t):
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if realization.freqs.size == 0:
        out = np.zeros(t_arr.shape)
    else:
        out = trig_sum(
            np.ascontiguousarray(realization.freqs, dtype=float),
            np.ascontiguousarray(realization.amp_c, dtype=float)[None, :],
            np.ascontiguousarray(realization.amp_s, dtype=float)[None, :],
            t_arr,
        )[0]
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))
