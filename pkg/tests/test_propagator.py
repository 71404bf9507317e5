import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oscchain import (
    ChainState,
    InteractionKernel,
    NotPositiveDefinite,
    SpectralCalculus,
    duhamel_forced,
    expm_taylor,
    generator_matrix,
    kernel_bound,
    propagator_blocks,
    synthesize,
    truncated_V,
)
from oscchain.force import ForceRealization, zero_force
from oscchain.propagator import driven_mode_response, evolve_homogeneous
from oscchain.simulator import SimConfig, simulate


def test_blocks_at_zero(s1_kernel):
    B = propagator_blocks(truncated_V(s1_kernel, 8), 0.0)
    assert np.allclose(B.C, np.eye(8), atol=1e-15) and np.allclose(B.S, 0, atol=1e-15)


def test_scalar_blocks():
    B = propagator_blocks(4 * np.eye(2), math.pi / 2)
    assert np.allclose(B.C, -np.eye(2), atol=1e-15)
    assert np.allclose(B.S, 0, atol=1e-15)


def test_s1_blocks_match_dense_exponential(s1_kernel):
    V = truncated_V(s1_kernel, 8)
    E = expm_taylor(generator_matrix(V) * 0.7)
    assert np.max(np.abs(propagator_blocks(V, 0.7).as_matrix() - E)) < 1e-10


def test_blocks_symmetric(s1_kernel):
    for boundary in ("periodic", "free"):
        B = propagator_blocks(truncated_V(s1_kernel, 12, boundary), 2.3)
        for M in (B.C, B.S, B.W):
            assert np.allclose(M, M.T, atol=1e-13)


def test_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        SpectralCalculus(truncated_V(InteractionKernel(np.array([2.0, -1.0])), 8))


def test_homogeneous_examples():
    s = evolve_homogeneous(4 * np.eye(2), ChainState(np.array([1.0, 0.0]), np.zeros(2)), math.pi)
    assert np.allclose(s.q, [1, 0], atol=1e-14) and np.allclose(s.p, 0, atol=1e-14)


@st.composite
def states(draw, N=10):
    q = draw(st.lists(st.floats(-2, 2), min_size=N, max_size=N))
    p = draw(st.lists(st.floats(-2, 2), min_size=N, max_size=N))
    return ChainState(np.array(q), np.array(p))


@given(states(), st.floats(-5, 5), st.floats(-5, 5), st.sampled_from(["periodic", "free"]))
def test_group_property_and_energy(s0, t1, t2, boundary):
    V = truncated_V(InteractionKernel(np.array([3.0, -1.0, 0.3])), 10, boundary)
    calc = SpectralCalculus(V)
    a = evolve_homogeneous(V, evolve_homogeneous(V, s0, t1, calc), t2, calc)
    b = evolve_homogeneous(V, s0, t1 + t2, calc)
    assert np.max(np.abs(a.q - b.q)) < 1e-9 and np.max(np.abs(a.p - b.p)) < 1e-9
    back = evolve_homogeneous(V, evolve_homogeneous(V, s0, 1.3, calc), -1.3, calc)
    assert np.max(np.abs(back.q - s0.q)) < 1e-9
    assert b.energy(V) == pytest.approx(s0.energy(V), abs=1e-10)


def test_duhamel_zero_force_is_homogeneous(s1_kernel):
    V = truncated_V(s1_kernel, 8)
    s0 = ChainState(np.arange(8.0) / 8, np.zeros(8))
    a = duhamel_forced(V, s0, zero_force(), 0, 2.0)
    b = evolve_homogeneous(V, s0, 2.0)
    assert np.array_equal(a.q, b.q)


@pytest.mark.parametrize("method", ["closed", "simpson"])
def test_duhamel_scalar_oscillator(method):
    f = ForceRealization(np.array([3.0]), np.array([1.0]), np.array([0.0]))
    for t in (0.5, 2.0, 7.3):
        s = duhamel_forced(np.array([[4.0]]), ChainState.zeros(1), f, 0, t, method=method, quadrature_dt=t / 4096)
        assert s.q[0] == pytest.approx((math.cos(2 * t) - math.cos(3 * t)) / 5, abs=1e-10)
        assert s.p[0] == pytest.approx((-2 * math.sin(2 * t) + 3 * math.sin(3 * t)) / 5, abs=1e-9)


def test_duhamel_matches_verlet(s1_kernel, s1_measure):
    N, t = 16, 10.0
    f = synthesize(s1_measure, 11)
    exact = duhamel_forced(truncated_V(s1_kernel, N), ChainState.zeros(N), f, 0, t)
    ver = simulate(SimConfig(N=N, T=t, sample_times=(t,), integrator="verlet", dt=1e-3), s1_kernel, f)
    assert np.max(np.abs(exact.q - ver.q[-1])) < 1e-6


def test_duhamel_closed_matches_simpson_on_free_chain(s1_kernel, s1_measure):
    V = truncated_V(s1_kernel, 12, "free")
    f = synthesize(s1_measure, 2)
    s0 = ChainState(np.linspace(-1, 1, 12), np.zeros(12))
    a = duhamel_forced(V, s0, f, 5, 4.0, method="closed")
    b = duhamel_forced(V, s0, f, 5, 4.0, method="simpson", quadrature_dt=4.0 / 4096)
    assert np.max(np.abs(a.q - b.q)) < 1e-10


@given(st.floats(0.5, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 20.0))
def test_driven_mode_response_solves_ode(omega, x, t):
    # compare against the direct formula away from resonance, and check continuity near it
    Qc, Pc, Qs, Ps = driven_mode_response(omega, x, t)
    if abs(omega - x) > 1e-3:
        d = omega**2 - x**2
        assert Qc == pytest.approx((math.cos(x * t) - math.cos(omega * t)) / d, abs=1e-9)
        assert Qs == pytest.approx((math.sin(x * t) - x / omega * math.sin(omega * t)) / d, abs=1e-9)
        assert Pc == pytest.approx((-x * math.sin(x * t) + omega * math.sin(omega * t)) / d, abs=1e-9)
        assert Ps == pytest.approx((x * math.cos(x * t) - x * math.cos(omega * t)) / d, abs=1e-9)


def test_driven_mode_response_at_resonance():
    Qc, _, _, _ = driven_mode_response(2.0, 2.0, 3.0)
    assert Qc == pytest.approx(3.0 * math.sin(6.0) / 4.0, abs=1e-14)


def test_kernel_bound_examples():
    assert kernel_bound(5.0, 1, 0, 0.0) == (1.0, 0.0)
    bc, _ = kernel_bound(5.0, 1, 2, 1.0)
    assert bc == pytest.approx(25 / 24 * math.exp(math.sqrt(5)), rel=1e-12)
    assert kernel_bound(5.0, 0, 3, 2.0) == (0.0, 0.0)


@given(st.integers(0, 12), st.floats(0.0, 6.0), st.sampled_from([1, 2]))
def test_kernel_bound_holds(offset, t, K):
    k = InteractionKernel(np.array([4.0, -1.0] + ([0.5] if K == 2 else [])))
    v = k.spectrum.e2
    N = 2 * int(offset + math.sqrt(v) * t * K) + 40
    n = N // 2 - offset // 2
    B = propagator_blocks(truncated_V(k, N, "free"), t)
    bc, bs = kernel_bound(v, K, offset, t)
    assert abs(B.C[n + offset, n]) <= bc * (1 + 1e-9) + 1e-13  # eigensolver roundoff floor
    assert abs(B.S[n + offset, n]) <= bs * (1 + 1e-9) + 1e-13


def test_sine_block_decays_superexponentially(s1_kernel):
    B = propagator_blocks(truncated_V(s1_kernel, 128, "free"), 1.0)
    vals = np.abs(B.S[64, 64:76])
    ratios = vals[1:] / vals[:-1]
    assert np.all(np.diff(ratios[:8]) < 0)


def test_state_validation():
    from oscchain import ValidationError

    with pytest.raises(ValidationError):
        ChainState(np.zeros(3), np.zeros(4))
    with pytest.raises(ValidationError):
        ChainState(np.array([np.nan]), np.zeros(1))
    assert ChainState.zeros(2).csv_rows() == [(0, 0.0, 0.0), (1, 0.0, 0.0)]
