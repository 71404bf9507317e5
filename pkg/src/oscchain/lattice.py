"""Interaction kernel a(k), its dispersion symbol and finite matrix realizations."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import bisect

from .errors import DegenerateSupport, PositivityViolation, TooSmall, ValidationError

SCAN_POINTS = 4096
BISECT_XTOL = 1e-12


@dataclass(frozen=True, eq=False)
class InteractionKernel:
    """Symmetric finite-range coupling a(k) = a(-k), a(k) = 0 for |k| > K.

    ``half`` holds a(0), a(1), ..., a(K). Trailing zeros are dropped so that
    K is tight.
    """

    half: np.ndarray = field(repr=False)

    def __post_init__(self):
        half = np.atleast_1d(np.asarray(self.half, dtype=float)).copy()
        if half.ndim != 1 or half.size == 0:
            raise ValidationError("kernel needs at least a(0)")
        if not np.all(np.isfinite(half)):
            raise ValidationError("kernel coefficients must be finite")
        nz = np.flatnonzero(half)
        K = int(nz[-1]) if nz.size else 0
        half = half[: K + 1]
        half.setflags(write=False)
        object.__setattr__(self, "half", half)

    @classmethod
    def from_config(cls, spec):
        if not isinstance(spec, dict) or set(spec) != {"a"}:
            raise ValidationError('kernel config must be {"a": [a0, a1, ..., aK]}')
        return cls(np.asarray(spec["a"], dtype=float))

    def to_config(self):
        return {"a": [float(v) for v in self.half]}

    @property
    def K(self) -> int:
        return self.half.size - 1

    def coeff(self, k: int) -> float:
        k = abs(int(k))
        return float(self.half[k]) if k <= self.K else 0.0

    def full(self) -> np.ndarray:
        """Coefficients indexed -K..K."""
        return np.concatenate([self.half[:0:-1], self.half])

    @cached_property
    def spectrum(self) -> SpectralSet:
        """Positivity-certified spectral set; raises PositivityViolation."""
        return spectral_set(self)

    def __repr__(self):
        return f"InteractionKernel(a={self.half.tolist()})"


@dataclass(frozen=True)
class SpectralSet:
    """Range [e1, e2] of the dispersion symbol."""

    e1: float
    e2: float
    lam_min: float = 0.0
    lam_max: float = 0.0

    @property
    def root_band(self):
        return np.sqrt(self.e1), np.sqrt(self.e2)

    def contains_sq(self, x, tol=0.0) -> bool:
        x2 = float(x) ** 2
        return self.e1 - tol <= x2 <= self.e2 + tol

    def to_json(self):
        return {"e1": self.e1, "e2": self.e2}


@dataclass(frozen=True)
class SymbolPolynomial:
    """z^K (P(z) - x^2) as an ordinary polynomial, highest power first."""

    coeffs: np.ndarray
    x: float

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return np.polyval(self.coeffs, z)

    def derivative(self, z):
        return np.polyval(np.polyder(self.coeffs), z)

    def companion(self) -> np.ndarray:
        c = self.coeffs / self.coeffs[0]
        n = self.degree
        C = np.zeros((n, n))
        C[0, :] = -c[1:]
        C[1:, :-1] = np.eye(n - 1)
        return C

    def roots(self) -> np.ndarray:
        """Roots via companion-matrix eigenvalues, polished by two Newton steps."""
        z = np.linalg.eigvals(self.companion()).astype(complex)
        for _ in range(2):
            d = self.derivative(z)
            ok = d != 0
            z[ok] = z[ok] - self(z[ok]) / d[ok]
        return z


def omega_squared(kernel: InteractionKernel, lam):
    """a(0) + 2 sum_k a(k) cos(k lam); accepts scalars or arrays."""
    lam = np.asarray(lam, dtype=float)
    out = np.full(lam.shape, kernel.half[0])
    for k in range(1, kernel.K + 1):
        out = out + 2.0 * kernel.half[k] * np.cos(k * lam)
    return out if out.ndim else float(out)


def omega_squared_prime(kernel: InteractionKernel, lam):
    lam = np.asarray(lam, dtype=float)
    out = np.zeros(lam.shape)
    for k in range(1, kernel.K + 1):
        out = out - 2.0 * k * kernel.half[k] * np.sin(k * lam)
    return out if out.ndim else float(out)


def spectral_set(kernel: InteractionKernel, grid_points: int = SCAN_POINTS) -> SpectralSet:
    """Min and max of omega^2 over one period.

    Uniform scan, then bisection on every sign change of the derivative.
    """
    K = kernel.K
    if grid_points < 4 * K + 4:
        raise ValidationError(f"grid_points must be >= {4 * K + 4}")
    lam = np.linspace(0.0, 2.0 * np.pi, grid_points + 1)
    cand = list(lam)
    if K > 0:
        d = omega_squared_prime(kernel, lam)
        deriv = lambda s: omega_squared_prime(kernel, s)  # noqa: E731
        for i in np.flatnonzero(d[:-1] * d[1:] < 0):
            cand.append(bisect(deriv, lam[i], lam[i + 1], xtol=BISECT_XTOL))
    cand = np.asarray(cand)
    vals = omega_squared(kernel, cand)
    imin, imax = int(np.argmin(vals)), int(np.argmax(vals))
    e1, e2 = float(vals[imin]), float(vals[imax])
    if e1 <= 0.0:
        raise PositivityViolation(
            f"omega^2 attains {e1:.6g} <= 0 at lambda = {cand[imin]:.12g}",
            lam=float(cand[imin]),
            value=e1,
        )
    return SpectralSet(e1, e2, float(cand[imin]), float(cand[imax]))


def symbol_polynomial(kernel: InteractionKernel, x: float) -> SymbolPolynomial:
    """Coefficients of a(K) z^2K + ... + (a(0) - x^2) z^K + ... + a(K)."""
    K = kernel.K
    if K == 0:
        raise DegenerateSupport("K = 0 has constant symbol; no polynomial")
    c = np.concatenate([kernel.half[:0:-1], kernel.half])[::-1].copy()
    c[K] -= float(x) ** 2
    return SymbolPolynomial(c, float(x))


def truncated_V(kernel: InteractionKernel, N: int, boundary: str = "periodic") -> np.ndarray:
    """Dense N x N matrix with V[k, j] = a(k - j); periodic wraps offsets mod N."""
    K = kernel.K
    if N <= 2 * K:
        raise TooSmall(f"N = {N} must exceed 2K = {2 * K}")
    if boundary not in ("periodic", "free"):
        raise ValidationError(f"unknown boundary {boundary!r}")
    idx = np.arange(N)
    diff = idx[:, None] - idx[None, :]
    if boundary == "periodic":
        diff = np.mod(diff, N)
        diff = np.minimum(diff, N - diff)
    V = np.zeros((N, N))
    inside = np.abs(diff) <= K
    V[inside] = kernel.half[np.abs(diff[inside])]
    return V


def mode_angles(N: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(N) / N


def max_group_velocity(kernel: InteractionKernel, grid_points: int = 2048) -> float:
    """max |d omega / d lambda|; sets how fast disturbances spread."""
    lam = np.linspace(0.0, 2.0 * np.pi, grid_points, endpoint=False)
    w2 = omega_squared(kernel, lam)
    return float(np.max(np.abs(omega_squared_prime(kernel, lam)) / (2.0 * np.sqrt(w2))))


def dispersion_table(kernel: InteractionKernel, points: int = 2048):
    lam = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    return lam, omega_squared(kernel, lam)
