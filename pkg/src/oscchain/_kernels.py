"""Hot inner loops, each with a numba and a pure-numpy implementation.

The public names (``verlet``, ``transient_energy_sum``, ``trig_sum``) point
at the numba variant when numba is available and not disabled, otherwise at
the numpy variant. Both variants are always importable so tests and the
benchmark can compare them.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit, prange

# ---------------------------------------------------------------------------
# velocity Verlet for q'' = -V q + f_r(t) e_site, V banded Toeplitz
# ---------------------------------------------------------------------------


@njit
def _accel_nb(q, half, periodic, out):
    n = q.shape[0]
    K = half.shape[0] - 1
    for k in range(n):
        acc = half[0] * q[k]
        for d in range(1, K + 1):
            c = half[d]
            if c == 0.0:
                continue
            lo = k - d
            hi = k + d
            if periodic:
                acc += c * (q[lo % n] + q[hi % n])
            else:
                if lo >= 0:
                    acc += c * q[lo]
                if hi < n:
                    acc += c * q[hi]
        out[k] = -acc


@njit
def _force_nb(freqs, amp_c, amp_s, t):
    f = 0.0
    for j in range(freqs.shape[0]):
        f += amp_c[j] * np.cos(freqs[j] * t) + amp_s[j] * np.sin(freqs[j] * t)
    return f


@njit(parallel=True)
def verlet_numba(half, periodic, q0, p0, site, freqs, amp_c, amp_s, dt, sample_steps):
    """Velocity Verlet over a batch of replicas.

    q0, p0: (R, N); amp_c, amp_s: (R, J); sample_steps: sorted int64 array.
    Returns positions and momenta of shape (R, S, N) at the sampled steps.
    """
    R, N = q0.shape
    S = sample_steps.shape[0]
    qs = np.empty((R, S, N))
    ps = np.empty((R, S, N))
    n_steps = sample_steps[S - 1] if S > 0 else 0
    for r in prange(R):
        a = np.empty(N)
        q = q0[r].copy()
        p = p0[r].copy()
        _accel_nb(q, half, periodic, a)
        a[site] += _force_nb(freqs, amp_c[r], amp_s[r], 0.0)
        s = 0
        while s < S and sample_steps[s] == 0:
            qs[r, s] = q
            ps[r, s] = p
            s += 1
        for step in range(1, n_steps + 1):
            for k in range(N):
                p[k] += 0.5 * dt * a[k]
                q[k] += dt * p[k]
            _accel_nb(q, half, periodic, a)
            a[site] += _force_nb(freqs, amp_c[r], amp_s[r], step * dt)
            for k in range(N):
                p[k] += 0.5 * dt * a[k]
            while s < S and sample_steps[s] == step:
                qs[r, s] = q
                ps[r, s] = p
                s += 1
    return qs, ps


def _accel_np(q, half, periodic):
    # q: (R, N)
    acc = half[0] * q
    n = q.shape[1]
    for d in range(1, half.shape[0]):
        c = half[d]
        if c == 0.0:
            continue
        if periodic:
            acc = acc + c * (np.roll(q, d, axis=1) + np.roll(q, -d, axis=1))
        else:
            acc[:, d:] += c * q[:, : n - d]
            acc[:, : n - d] += c * q[:, d:]
    return -acc


def verlet_numpy(half, periodic, q0, p0, site, freqs, amp_c, amp_s, dt, sample_steps):
    q = np.array(q0, dtype=float, copy=True)
    p = np.array(p0, dtype=float, copy=True)
    R, N = q.shape
    S = len(sample_steps)
    qs = np.empty((R, S, N))
    ps = np.empty((R, S, N))
    n_steps = int(sample_steps[-1]) if S else 0

    def force(t):
        return amp_c @ np.cos(freqs * t) + amp_s @ np.sin(freqs * t)

    a = _accel_np(q, half, periodic)
    a[:, site] += force(0.0)
    s = 0
    while s < S and sample_steps[s] == 0:
        qs[:, s], ps[:, s] = q, p
        s += 1
    for step in range(1, n_steps + 1):
        p += 0.5 * dt * a
        q += dt * p
        a = _accel_np(q, half, periodic)
        a[:, site] += force(step * dt)
        p += 0.5 * dt * a
        while s < S and sample_steps[s] == step:
            qs[:, s], ps[:, s] = q, p
            s += 1
    return qs, ps


# ---------------------------------------------------------------------------
# finite-time mean energy double sum over (lambda nodes) x (frequency nodes)
# ---------------------------------------------------------------------------


@njit(parallel=True)
def transient_energy_sum_numba(omega, xs, weights, ts):
    """0.5 * sum_x w_x * mean_lambda [I_plus + I_minus] for every t in ts."""
    L = omega.shape[0]
    out = np.zeros(ts.shape[0])
    for it in prange(ts.shape[0]):
        t = ts[it]
        total = 0.0
        for ix in range(xs.shape[0]):
            x = xs[ix]
            acc = 0.0
            for il in range(L):
                gp = x + omega[il]
                gm = x - omega[il]
                acc += (1.0 - np.cos(t * gp)) / (gp * gp) + (1.0 - np.cos(t * gm)) / (gm * gm)
            total += weights[ix] * acc / L
        out[it] = 0.5 * total
    return out


def transient_energy_sum_numpy(omega, xs, weights, ts):
    out = np.zeros(len(ts))
    for ix, (x, w) in enumerate(zip(xs, weights)):
        gp = x + omega
        gm = x - omega
        tt = np.asarray(ts)[:, None]
        val = (1.0 - np.cos(tt * gp)) / gp**2 + (1.0 - np.cos(tt * gm)) / gm**2
        out += w * val.mean(axis=1)
    return 0.5 * out


# ---------------------------------------------------------------------------
# finite cosine sums evaluated on a time grid, batched over realizations
# ---------------------------------------------------------------------------


@njit
def trig_sum_numba(freqs, amp_c, amp_s, ts):
    R = amp_c.shape[0]
    out = np.zeros((R, ts.shape[0]))
    for it in range(ts.shape[0]):
        t = ts[it]
        for j in range(freqs.shape[0]):
            c = np.cos(freqs[j] * t)
            s = np.sin(freqs[j] * t)
            for r in range(R):
                out[r, it] += amp_c[r, j] * c + amp_s[r, j] * s
    return out


def trig_sum_numpy(freqs, amp_c, amp_s, ts):
    phase = np.outer(freqs, ts)
    return amp_c @ np.cos(phase) + amp_s @ np.sin(phase)


# trig_sum is a matrix product; BLAS beats the compiled loop, so the numpy
# variant serves both backends (see benchmarks/bench_kernels.py).
trig_sum = trig_sum_numpy
if HAVE_NUMBA:
    verlet = verlet_numba
    transient_energy_sum = transient_energy_sum_numba
else:
    verlet = verlet_numpy
    transient_energy_sum = transient_energy_sum_numpy
