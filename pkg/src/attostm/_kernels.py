"""Numba kernels: Crank-Nicolson steps with tridiagonal (Thomas) solves.

All kernels solve  (1 + g H) out = (1 - g H) psi + scoef * base
with H = -(1/2 dx^2) * second difference + diag(v0 + fval * shape) and
hard walls beyond the first and last grid points.  g = i dt/2 steps forward,
g = -i dt/2 steps backward.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def _inv(z):
    return z.conjugate() / (z.real * z.real + z.imag * z.imag)


@numba.njit(cache=True)
def cn_step(psi, v0, shape, fval, base, scoef, dx, g, out, cp, dp):
    n = psi.size
    kin = 1.0 / (dx * dx)
    off = -0.5 * kin
    a = g * off
    for j in range(n):
        hd = kin + v0[j] + fval * shape[j]
        hp = hd * psi[j]
        if j > 0:
            hp += off * psi[j - 1]
        if j < n - 1:
            hp += off * psi[j + 1]
        dp[j] = psi[j] - g * hp + scoef * base[j]
    r = _inv(1.0 + g * (kin + v0[0] + fval * shape[0]))
    cp[0] = a * r
    dp[0] = dp[0] * r
    for j in range(1, n):
        r = _inv(1.0 + g * (kin + v0[j] + fval * shape[j]) - a * cp[j - 1])
        cp[j] = a * r
        dp[j] = (dp[j] - a * dp[j - 1]) * r
    out[n - 1] = dp[n - 1]
    for j in range(n - 2, -1, -1):
        out[j] = dp[j] - cp[j] * out[j + 1]


@numba.njit(cache=True)
def cn_step_general(psi, vdiag, src, dx, g, out, cp, dp):
    """Same scheme with an arbitrary diagonal and an arbitrary source vector."""
    n = psi.size
    kin = 1.0 / (dx * dx)
    off = -0.5 * kin
    a = g * off
    for j in range(n):
        hp = (kin + vdiag[j]) * psi[j]
        if j > 0:
            hp += off * psi[j - 1]
        if j < n - 1:
            hp += off * psi[j + 1]
        dp[j] = psi[j] - g * hp + src[j]
    r = _inv(1.0 + g * (kin + vdiag[0]))
    cp[0] = a * r
    dp[0] = dp[0] * r
    for j in range(1, n):
        r = _inv(1.0 + g * (kin + vdiag[j]) - a * cp[j - 1])
        cp[j] = a * r
        dp[j] = (dp[j] - a * dp[j - 1]) * r
    out[n - 1] = dp[n - 1]
    for j in range(n - 2, -1, -1):
        out[j] = dp[j] - cp[j] * out[j + 1]


@numba.njit(cache=True)
def cn_step_multi(psi, v0, shape, fval, dx, g, out, cp, rinv, dp):
    """Source-free step for K independent columns sharing one Hamiltonian.

    ``psi`` and ``out`` are (n, K) C-ordered; the elimination coefficients are
    computed once and reused by every column.
    """
    n, K = psi.shape
    kin = 1.0 / (dx * dx)
    off = -0.5 * kin
    a = g * off
    r = _inv(1.0 + g * (kin + v0[0] + fval * shape[0]))
    rinv[0] = r
    cp[0] = a * r
    for j in range(1, n):
        r = _inv(1.0 + g * (kin + v0[j] + fval * shape[j]) - a * cp[j - 1])
        rinv[j] = r
        cp[j] = a * r
    for j in range(n):
        hd = kin + v0[j] + fval * shape[j]
        for k in range(K):
            hp = hd * psi[j, k]
            if j > 0:
                hp += off * psi[j - 1, k]
            if j < n - 1:
                hp += off * psi[j + 1, k]
            rhs = psi[j, k] - g * hp
            if j > 0:
                rhs -= a * dp[j - 1, k]
            dp[j, k] = rhs * rinv[j]
    for k in range(K):
        out[n - 1, k] = dp[n - 1, k]
    for j in range(n - 2, -1, -1):
        for k in range(K):
            out[j, k] = dp[j, k] - cp[j] * out[j + 1, k]


@numba.njit(cache=True)
def stationary_recurrence(v, energy, dx, k_right, x):
    """Discrete stationary state with an outgoing wave at the right end.

    Integrates the three-point equation from right to left; returns the
    unnormalised amplitudes on the grid and the value at the virtual point
    left of the first grid point (zero for a hard-wall node).
    """
    n = v.size
    psi = np.empty(n, dtype=np.complex128)
    psi[n - 1] = np.exp(1j * k_right * x[n - 1])
    psi[n - 2] = np.exp(1j * k_right * x[n - 2])
    c = 2.0 * dx * dx
    for j in range(n - 2, 0, -1):
        psi[j - 1] = 2.0 * psi[j] - psi[j + 1] + c * (v[j] - energy) * psi[j]
    ghost = 2.0 * psi[0] - psi[1] + c * (v[0] - energy) * psi[0]
    return psi, ghost
