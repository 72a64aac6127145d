"""Spherical harmonic tensor operators Y_lm(J) and operator decomposition.

The operators come from the same generating function as the surface
harmonics, with ``r -> J``:

    Y_lm(J) = sqrt((2l+1)/4pi) sqrt((l+m)!(l-m)!)/l! * [lambda^m] (a.J)^l,
    a.J = Jz - (lambda/2) J+ + (1/(2 lambda)) J-.

``(a.J)^l`` is expanded as a Laurent polynomial in lambda with matrix
coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .sphere import lm_index, num_coeffs
from .spin import Spin, spin_matrices

__all__ = [
    "LaurentMatrixPoly",
    "TensorDecomposition",
    "tensor_op",
    "tensor_stack",
    "adjoint_check",
    "decompose",
    "reconstruct",
    "norm_factor",
    "tensor_stack_mp",
]


@dataclass(frozen=True, eq=False)
class LaurentMatrixPoly:
    """``sum_p coeffs[p + degree] * lambda**p`` for ``-degree <= p <= degree``."""

    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def coefficient(self, power: int) -> np.ndarray:
        if abs(power) > self.degree:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.coeffs[power + self.degree]

    def __matmul__(self, other: "LaurentMatrixPoly") -> "LaurentMatrixPoly":
        da, db = self.degree, other.degree
        dtype = np.result_type(self.coeffs, other.coeffs)
        out = np.zeros((2 * (da + db) + 1, self.dim, self.dim), dtype=dtype)
        for k, b in enumerate(other.coeffs):
            if not b.any():
                continue
            out[k : k + 2 * da + 1] += self.coeffs @ b
        return LaurentMatrixPoly(out)

    @classmethod
    def identity(cls, dim: int) -> "LaurentMatrixPoly":
        return cls(np.eye(dim, dtype=complex)[None])


def _null_vector_generator(spin: Spin) -> LaurentMatrixPoly:
    mats = spin_matrices(spin)
    return LaurentMatrixPoly(np.stack([mats.Jm / 2, mats.Jz, -mats.Jp / 2]))


@lru_cache(maxsize=256)
def _generator_power(two_j: int, l: int) -> LaurentMatrixPoly:
    if l == 0:
        return LaurentMatrixPoly.identity(two_j + 1)
    return _generator_power(two_j, l - 1) @ _null_vector_generator(Spin(two_j))


def norm_factor(l: int, m: int) -> float:
    """``sqrt((2l+1)/4pi) * sqrt((l+m)!(l-m)!) / l!``.

    Exact rational arithmetic up to l = 20, log-gamma above.
    """
    if l <= 20:
        ratio = Fraction(math.factorial(l + m) * math.factorial(l - m), math.factorial(l) ** 2)
        root = math.sqrt(ratio)
    else:
        root = math.exp(
            0.5 * (math.lgamma(l + m + 1) + math.lgamma(l - m + 1)) - math.lgamma(l + 1)
        )
    return math.sqrt((2 * l + 1) / (4 * math.pi)) * root


def _generated_stack(two_j: int, l: int) -> np.ndarray:
    """All ``Y_lm(J)``, ``m = -l..l``, straight from the Laurent expansion.

    No truncation is applied, so for ``l > 2j`` this is the numerically
    computed (vanishing) result.
    """
    poly = _generator_power(two_j, l)
    scale = np.array([norm_factor(l, m) for m in range(-l, l + 1)])
    return poly.coeffs * scale[:, None, None]


@lru_cache(maxsize=256)
def _tensor_stack(two_j: int, l: int) -> np.ndarray:
    if l > two_j:
        out = np.zeros((2 * l + 1, two_j + 1, two_j + 1), dtype=complex)
    else:
        out = _generated_stack(two_j, l)
    out.setflags(write=False)
    return out


def tensor_stack(spin: Spin, l: int) -> np.ndarray:
    """Read-only array ``out[m + l] = Y_lm(J)`` of shape ``(2l+1, dim, dim)``."""
    if l < 0:
        raise ValueError(f"l must be nonnegative, got {l}")
    return _tensor_stack(spin.two_j, l)


def tensor_op(spin: Spin, l: int, m: int) -> np.ndarray:
    """The operator ``Y_lm(J)``; identically zero when ``l > 2j``."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"need 0 <= |m| <= l, got l={l}, m={m}")
    return tensor_stack(spin, l)[m + l].copy()


def adjoint_check(spin: Spin, l: int, m: int, tol: float = 1e-12) -> bool:
    """Whether ``Y_lm(J)^dagger == (-1)^m Y_{l,-m}(J)``.

    The max-entry deviation is compared with ``tol * max(1, max |Y_lm|)``;
    entries grow like j^l, so a bare absolute bound would only measure
    float64 resolution at large l.
    """
    y = tensor_op(spin, l, m)
    lhs = y.conj().T
    rhs = (-1) ** m * tensor_op(spin, l, -m)
    scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
    return bool(np.max(np.abs(lhs - rhs), initial=0.0) < tol * scale)


def _aw_squared(two_j: int, l: int) -> float:
    j = two_j / 2
    out = 1.0
    for k in range(1, l + 1):
        out *= (j + 0.5) ** 2 - k * k / 4
    return out


@dataclass(frozen=True, eq=False)
class TensorDecomposition:
    """Expansion ``A = sum_lm c_lm Y_lm(J)``; ``coeffs`` uses the flat lm index."""

    spin: Spin
    coeffs: np.ndarray

    @property
    def lmax(self) -> int:
        return math.isqrt(self.coeffs.size) - 1

    def __getitem__(self, lm) -> complex:
        l, m = lm
        if abs(m) > l:
            raise KeyError(lm)
        if l > self.lmax:
            return 0j
        return complex(self.coeffs[lm_index(l, m)])


def decompose(A, lmax: int | None = None) -> TensorDecomposition:
    """Coefficients ``c_lm = 4pi tr(A Y_lm^dagger) / ((2j+1) (a^W_jl)^2)``.

    ``lmax`` truncates the expansion; this is exact whenever ``A`` is a
    polynomial of degree at most ``lmax`` in the spin components.
    """
    A = np.asarray(A, dtype=complex)
    spin = Spin.of(A)
    top = spin.two_j if lmax is None else min(int(lmax), spin.two_j)
    coeffs = np.zeros(num_coeffs(top), dtype=complex)
    for l in range(top + 1):
        stack = tensor_stack(spin, l)
        # tr(A Y^dagger) = sum_ab A_ab conj(Y_ab)
        overlaps = np.einsum("ab,mab->m", A, stack.conj())
        coeffs[lm_index(l, -l) : lm_index(l, l) + 1] = (
            4 * math.pi * overlaps / (spin.dim * _aw_squared(spin.two_j, l))
        )
    return TensorDecomposition(spin, coeffs)


def reconstruct(d: TensorDecomposition) -> np.ndarray:
    out = np.zeros((d.spin.dim, d.spin.dim), dtype=complex)
    for l in range(min(d.lmax, d.spin.two_j) + 1):
        c = d.coeffs[lm_index(l, -l) : lm_index(l, l) + 1]
        out += np.tensordot(c, tensor_stack(d.spin, l), axes=1)
    return out


def tensor_stack_mp(spin: Spin, l: int, dps: int = 40) -> np.ndarray:
    """``Y_lm(J)`` for all m in ``dps``-digit arithmetic (object array of mpc).

    Same Laurent expansion as :func:`tensor_stack`; used to check relations
    whose values exceed what float64 resolves to a fixed absolute tolerance.
    """
    import mpmath

    with mpmath.workdps(dps):
        j = mpmath.mpf(spin.two_j) / 2
        d = spin.dim
        zero = mpmath.mpc(0)
        jz = np.full((d, d), zero, dtype=object)
        jp = np.full((d, d), zero, dtype=object)
        for k in range(d):
            m = j - k
            jz[k, k] = mpmath.mpc(m)
            if k > 0:
                jp[k - 1, k] = mpmath.mpc(mpmath.sqrt((j - m) * (j + m + 1)))
        jm = jp.T.copy()
        gen = LaurentMatrixPoly(np.stack([jm / 2, jz, -jp / 2]))
        eye = np.full((d, d), zero, dtype=object)
        for k in range(d):
            eye[k, k] = mpmath.mpc(1)
        poly = LaurentMatrixPoly(eye[None])
        for _ in range(l):
            poly = poly @ gen
        out = np.empty((2 * l + 1, d, d), dtype=object)
        for m in range(-l, l + 1):
            pref = mpmath.sqrt((2 * l + 1) / (4 * mpmath.pi)) * mpmath.sqrt(
                mpmath.factorial(l + m) * mpmath.factorial(l - m)
            ) / mpmath.factorial(l)
            out[m + l] = poly.coefficient(m) * pref
        return out
