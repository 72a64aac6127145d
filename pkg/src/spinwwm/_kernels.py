"""Inner loops over sphere points.

Each kernel has a pure-numpy implementation and a numba ``@njit`` twin.
The numba path is used when numba imports cleanly and the environment
variable ``SPINWWM_NUMBA`` is not set to ``0``/``false``/``off``.
Both paths must return identical results to rounding; the test-suite and
``benchmarks/bench_kernels.py`` exercise them side by side.
"""
import math
import os

import numpy as np

_FLAG = os.environ.get("SPINWWM_NUMBA", "1").strip().lower()

try:
    if _FLAG in ("0", "false", "off", "no"):
        raise ImportError("numba disabled by SPINWWM_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover - depends on environment
    NUMBA_ENABLED = False

__all__ = [
    "NUMBA_ENABLED",
    "alf_table",
    "legendre_table",
    "legendre_pair_sum",
    "alf_table_numpy",
    "legendre_table_numpy",
    "legendre_pair_sum_numpy",
]

_INV_SQRT_4PI = 1.0 / math.sqrt(4.0 * math.pi)


# --------------------------------------------------------------------------
# pure numpy
# --------------------------------------------------------------------------

def alf_table_numpy(lmax, x, s):
    """Orthonormal associated Legendre functions, Condon-Shortley phase.

    Returns ``out[l, m, i]`` for ``0 <= m <= l <= lmax`` with
    ``Y_lm(theta, phi) = out[l, m] * exp(i m phi)``; ``x = cos(theta)`` and
    ``s = sin(theta) >= 0``.
    """
    x = np.asarray(x, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros((lmax + 1, lmax + 1, x.size))
    pmm = np.full(x.size, _INV_SQRT_4PI)
    for m in range(lmax + 1):
        if m > 0:
            pmm = -math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * pmm
        out[m, m] = pmm
        if m + 1 > lmax:
            continue
        out[m + 1, m] = math.sqrt(2.0 * m + 3.0) * x * pmm
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[l, m] = a * (x * out[l - 1, m] - b * out[l - 2, m])
    return out


def legendre_table_numpy(lmax, x):
    """``out[l, i] = P_l(x_i)`` by the Bonnet recurrence."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((lmax + 1, x.size))
    out[0] = 1.0
    if lmax >= 1:
        out[1] = x
    for l in range(1, lmax):
        out[l + 1] = ((2 * l + 1) * x * out[l] - l * out[l - 1]) / (l + 1)
    return out


def legendre_pair_sum_numpy(u, v, coeffs):
    """``out[i, k] = sum_l coeffs[l] * P_l(u_i . v_k)`` for unit vectors."""
    x = np.clip(np.asarray(u) @ np.asarray(v).T, -1.0, 1.0)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    p_prev = np.ones_like(x)
    out = coeffs[0] * p_prev
    if coeffs.size == 1:
        return out
    p_cur = x.copy()
    out = out + coeffs[1] * p_cur
    for l in range(1, coeffs.size - 1):
        p_prev, p_cur = p_cur, ((2 * l + 1) * x * p_cur - l * p_prev) / (l + 1)
        out += coeffs[l + 1] * p_cur
    return out


# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _alf_table_nb(lmax, x, s):
        npts = x.size
        # np.zeros here would clear the whole table eagerly; only m > l needs it
        out = np.empty((lmax + 1, lmax + 1, npts))
        for l in range(lmax + 1):
            out[l, l + 1:] = 0.0
        pmm = np.full(npts, _INV_SQRT_4PI)
        # separate buffers so the inner loops vectorize
        p2 = np.empty(npts)
        p1 = np.empty(npts)
        p0 = np.empty(npts)
        for m in range(lmax + 1):
            if m > 0:
                c = -math.sqrt((2.0 * m + 1.0) / (2.0 * m))
                for i in range(npts):
                    pmm[i] = c * s[i] * pmm[i]
            out[m, m] = pmm
            if m + 1 > lmax:
                continue
            c = math.sqrt(2.0 * m + 3.0)
            for i in range(npts):
                p2[i] = pmm[i]
                p1[i] = c * x[i] * pmm[i]
            out[m + 1, m] = p1
            for l in range(m + 2, lmax + 1):
                a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                for i in range(npts):
                    p0[i] = a * (x[i] * p1[i] - b * p2[i])
                out[l, m] = p0
                p2, p1, p0 = p1, p0, p2
        return out

    @njit(cache=True)
    def _legendre_table_nb(lmax, x):
        npts = x.size
        out = np.empty((lmax + 1, npts))
        for i in range(npts):
            out[0, i] = 1.0
        if lmax >= 1:
            for i in range(npts):
                out[1, i] = x[i]
        for l in range(1, lmax):
            for i in range(npts):
                out[l + 1, i] = ((2 * l + 1) * x[i] * out[l, i] - l * out[l - 1, i]) / (l + 1)
        return out

    @njit(cache=True)
    def _legendre_pair_sum_nb(u, v, coeffs):
        nu = u.shape[0]
        nv = v.shape[0]
        nl = coeffs.size
        out = np.empty((nu, nv))
        for i in range(nu):
            for k in range(nv):
                x = u[i, 0] * v[k, 0] + u[i, 1] * v[k, 1] + u[i, 2] * v[k, 2]
                if x > 1.0:
                    x = 1.0
                elif x < -1.0:
                    x = -1.0
                p_prev = 1.0
                acc = coeffs[0]
                if nl > 1:
                    p_cur = x
                    acc += coeffs[1] * p_cur
                    for l in range(1, nl - 1):
                        p_next = ((2 * l + 1) * x * p_cur - l * p_prev) / (l + 1)
                        p_prev = p_cur
                        p_cur = p_next
                        acc += coeffs[l + 1] * p_cur
                out[i, k] = acc
        return out


def alf_table(lmax, x, s):
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    s = np.ascontiguousarray(s, dtype=np.float64).ravel()
    if NUMBA_ENABLED:
        return _alf_table_nb(int(lmax), x, s)
    return alf_table_numpy(int(lmax), x, s)


def legendre_table(lmax, x):
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    if NUMBA_ENABLED:
        return _legendre_table_nb(int(lmax), x)
    return legendre_table_numpy(int(lmax), x)


def legendre_pair_sum(u, v, coeffs):
    u = np.ascontiguousarray(u, dtype=np.float64).reshape(-1, 3)
    v = np.ascontiguousarray(v, dtype=np.float64).reshape(-1, 3)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64).ravel()
    if NUMBA_ENABLED:
        return _legendre_pair_sum_nb(u, v, coeffs)
    return legendre_pair_sum_numpy(u, v, coeffs)
