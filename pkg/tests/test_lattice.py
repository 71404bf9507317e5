import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oscchain import (
    DegenerateSupport,
    InteractionKernel,
    PositivityViolation,
    TooSmall,
    ValidationError,
    omega_squared,
    spectral_set,
    symbol_polynomial,
    truncated_V,
)
from oscchain.lattice import dispersion_table, max_group_velocity, mode_angles


@st.composite
def pinned_kernels(draw, max_K=4):
    """Random kernels made positive by a dominant a(0)."""
    K = draw(st.integers(1, max_K))
    tail = draw(st.lists(st.floats(-2, 2, allow_nan=False), min_size=K, max_size=K))
    tail[-1] = tail[-1] if abs(tail[-1]) > 1e-3 else 0.5
    margin = draw(st.floats(0.1, 3.0))
    a0 = 2.0 * sum(abs(v) for v in tail) + margin
    return InteractionKernel(np.array([a0] + tail))


def test_omega_squared_examples(s1_kernel, uncoupled):
    assert omega_squared(uncoupled, 1.3) == 4.0
    assert omega_squared(s1_kernel, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert omega_squared(s1_kernel, math.pi) == pytest.approx(5.0, abs=1e-15)


def test_spectral_set_examples(s1_kernel, uncoupled):
    s = spectral_set(s1_kernel)
    assert (s.e1, s.e2) == pytest.approx((1.0, 5.0), abs=1e-12)
    s = spectral_set(uncoupled)
    assert (s.e1, s.e2) == (4.0, 4.0)


def test_unpinned_chain_reports_lambda():
    with pytest.raises(PositivityViolation) as info:
        spectral_set(InteractionKernel(np.array([2.0, -1.0])))
    assert info.value.lam == pytest.approx(0.0, abs=1e-6) or info.value.lam == pytest.approx(2 * math.pi, abs=1e-6)
    assert info.value.value <= 0


def test_spectral_set_grid_too_coarse(s1_kernel):
    with pytest.raises(ValidationError):
        spectral_set(s1_kernel, grid_points=4)


def test_kernel_is_tight_and_symmetric():
    k = InteractionKernel(np.array([3.0, -1.0, 0.0, 0.0]))
    assert k.K == 1
    assert k.coeff(-1) == k.coeff(1) == -1.0
    assert k.coeff(5) == 0.0
    assert list(k.full()) == [-1.0, 3.0, -1.0]


def test_kernel_config_roundtrip():
    k = InteractionKernel.from_config({"a": [5, 0, 1]})
    assert k.to_config() == {"a": [5.0, 0.0, 1.0]}
    with pytest.raises(ValidationError):
        InteractionKernel.from_config({"a": [1], "b": 2})


@pytest.mark.parametrize(
    "a, x, expected",
    [([3, -1], 3, [-1, -6, -1]), ([3, -1], 0, [-1, 3, -1]), ([5, 0, 1], 2, [1, 0, 1, 0, 1])],
)
def test_symbol_polynomial_examples(a, x, expected):
    assert symbol_polynomial(InteractionKernel(np.array(a, float)), x).coeffs.tolist() == expected


def test_symbol_polynomial_needs_coupling(uncoupled):
    with pytest.raises(DegenerateSupport):
        symbol_polynomial(uncoupled, 1.0)


def test_truncated_V_examples(s1_kernel, uncoupled):
    P = truncated_V(s1_kernel, 4, "periodic")
    assert P[0].tolist() == [3, -1, 0, -1]
    for r in range(4):
        assert P[r].tolist() == np.roll(P[0], r).tolist()
    F = truncated_V(s1_kernel, 4, "free")
    assert F.tolist() == [[3, -1, 0, 0], [-1, 3, -1, 0], [0, -1, 3, -1], [0, 0, -1, 3]]
    assert np.array_equal(truncated_V(uncoupled, 3, "periodic"), 4 * np.eye(3))
    with pytest.raises(TooSmall):
        truncated_V(s1_kernel, 2)


@given(pinned_kernels(), st.floats(-10, 10, allow_nan=False))
def test_symbol_symmetric_and_periodic(k, lam):
    w = omega_squared(k, lam)
    assert omega_squared(k, -lam) == pytest.approx(w, abs=1e-12)
    assert omega_squared(k, lam + 2 * math.pi) == pytest.approx(w, abs=1e-10)


@given(pinned_kernels(), st.sampled_from([8, 16, 64]))
def test_circulant_eigenvalues_are_symbol_samples(k, N):
    if N <= 2 * k.K:
        return
    ev = np.sort(np.linalg.eigvalsh(truncated_V(k, N, "periodic")))
    ref = np.sort(omega_squared(k, mode_angles(N)))
    assert np.max(np.abs(ev - ref)) < 1e-10


@given(pinned_kernels())
def test_spectral_set_bounds_grid_and_are_attained(k):
    s = spectral_set(k)
    _, w2 = dispersion_table(k, 4096)
    assert np.all(w2 >= s.e1 - 1e-12) and np.all(w2 <= s.e2 + 1e-12)
    assert omega_squared(k, s.lam_min) == pytest.approx(s.e1, abs=1e-9)
    assert omega_squared(k, s.lam_max) == pytest.approx(s.e2, abs=1e-9)
    assert s.e2 - s.e1 <= 4 * np.sum(np.abs(k.half[1:])) + 1e-12


@given(pinned_kernels(), st.floats(0, 4), st.floats(0, 2 * math.pi))
def test_symbol_polynomial_on_circle(k, x, lam):
    poly = symbol_polynomial(k, x)
    c = poly.coeffs
    assert np.array_equal(c, c[::-1])
    z = np.exp(1j * lam)
    lhs = poly(z)
    rhs = (omega_squared(k, lam) - x * x) * z**k.K
    assert abs(lhs - rhs) < 1e-12 * max(1.0, np.sum(np.abs(c)))


def test_group_velocity_of_s1(s1_kernel):
    # d omega / d lam = sin(lam) / omega for omega^2 = 3 - 2 cos lam
    v = max_group_velocity(s1_kernel, 1 << 16)
    lam = np.linspace(0, 2 * np.pi, 1 << 16, endpoint=False)
    assert v == pytest.approx(np.max(np.abs(np.sin(lam)) / np.sqrt(3 - 2 * np.cos(lam))), rel=1e-12)
