"""Finite-dimensional spin algebra.

Operators are plain complex ``numpy`` arrays in the ``|j, m>`` basis with
``m`` running ``j, j-1, ..., -j`` along both axes; states are 1-d arrays in
the same order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "Spin",
    "Direction",
    "IncompatibleSpinError",
    "spin_matrices",
    "binomial",
    "coherent_ket",
    "overlap_sq",
    "expectation",
]

_EXACT_BINOMIAL_LIMIT = 60


class IncompatibleSpinError(ValueError):
    """Raised when an operator or state does not match the spin dimension."""


@dataclass(frozen=True)
class Spin:
    """Spin label stored as the integer ``two_j = 2j``."""

    two_j: int

    def __post_init__(self):
        if isinstance(self.two_j, bool) or int(self.two_j) != self.two_j or self.two_j < 0:
            raise ValueError(f"two_j must be a nonnegative integer, got {self.two_j!r}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @classmethod
    def parse(cls, text: str) -> "Spin":
        """Build from ``"n"`` or ``"n/2"`` (also accepts ``"1.5"``)."""
        text = str(text).strip()
        try:
            value = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse spin {text!r}; expected 'n' or 'n/2'") from None
        two_j = 2 * value
        if two_j.denominator != 1 or two_j < 0:
            raise ValueError(f"spin must be a nonnegative multiple of 1/2, got {text!r}")
        return cls(int(two_j))

    @classmethod
    def from_dim(cls, dim: int) -> "Spin":
        if dim < 1:
            raise IncompatibleSpinError(f"dimension must be >= 1, got {dim}")
        return cls(dim - 1)

    @classmethod
    def of(cls, matrix) -> "Spin":
        """Spin of a square operator matrix."""
        a = np.asarray(matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise IncompatibleSpinError(f"operator must be square, got shape {a.shape}")
        return cls.from_dim(a.shape[0])

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def j_c(self) -> float:
        """Classical spin length sqrt(j(j+1))."""
        return math.sqrt(self.j * (self.j + 1))

    def m_values(self) -> np.ndarray:
        return self.j - np.arange(self.dim)

    def __str__(self):
        return str(self.two_j // 2) if self.two_j % 2 == 0 else f"{self.two_j}/2"


@dataclass(frozen=True)
class Direction:
    """A point on the unit sphere; ``phi`` is reduced into ``[0, 2 pi)``."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        phi = float(self.phi)
        if not (math.isfinite(theta) and math.isfinite(phi)):
            raise ValueError("direction angles must be finite")
        if not 0.0 <= theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {theta}")
        phi = math.fmod(phi, 2 * math.pi)
        if phi < 0:
            phi += 2 * math.pi
        if phi >= 2 * math.pi:
            phi = 0.0
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_vector(cls, v) -> "Direction":
        x, y, z = (float(c) for c in v)
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0:
            raise ValueError("zero vector has no direction")
        return cls(math.acos(max(-1.0, min(1.0, z / r))), math.atan2(y, x))

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


class SpinMatrices(dict):
    """Mapping with keys ``Jx, Jy, Jz, Jp, Jm``; attribute access allowed."""

    __getattr__ = dict.__getitem__


@lru_cache(maxsize=64)
def _spin_matrices(two_j: int):
    spin = Spin(two_j)
    m = spin.m_values()
    jz = np.diag(m).astype(complex)
    jp = np.zeros((spin.dim, spin.dim), dtype=complex)
    # <m+1|J+|m> sits one row above the diagonal since m descends
    lower = m[1:]
    jp[np.arange(spin.dim - 1), np.arange(1, spin.dim)] = np.sqrt((spin.j - lower) * (spin.j + lower + 1))
    jm = jp.T.copy()
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    mats = {"Jx": jx, "Jy": jy, "Jz": jz, "Jp": jp, "Jm": jm}
    for a in mats.values():
        a.setflags(write=False)
    return mats


def spin_matrices(spin: Spin) -> SpinMatrices:
    """Angular momentum matrices for ``spin``; the arrays are read-only."""
    return SpinMatrices(_spin_matrices(spin.two_j))


def binomial(n: int, k: int) -> float:
    """Binomial coefficient as a float.

    Exact integer arithmetic for ``n <= 60``; above that a multiplicative
    recurrence, which stays finite where factorials would overflow.
    """
    if k < 0 or k > n:
        return 0.0
    if n <= _EXACT_BINOMIAL_LIMIT:
        return float(math.comb(n, k))
    k = min(k, n - k)
    out = 1.0
    for i in range(1, k + 1):
        out = out * (n - k + i) / i
    return out


def coherent_ket(spin: Spin, n: Direction) -> np.ndarray:
    """Normalized coherent state ``|n>`` with ``(J.n)|n> = j|n>``.

    Amplitudes ``binom(2j, j-m)^(1/2) cos^(j+m)(theta/2) sin^(j-m)(theta/2)
    exp(i (j-m) phi)``; this is the ``exp(z J-)|j,j>`` ray with
    ``z = tan(theta/2) exp(i phi)`` written without the pole at theta = pi.
    """
    two_j = spin.two_j
    c = math.cos(n.theta / 2)
    s = math.sin(n.theta / 2)
    k = np.arange(two_j + 1)  # k = j - m
    sqrt_binom = np.sqrt([binomial(two_j, int(i)) for i in k])
    # 0**0 == 1 keeps the poles exact
    amp = sqrt_binom * np.power(c, two_j - k) * np.power(s, k)
    return amp * np.exp(1j * k * n.phi)


def overlap_sq(spin: Spin, n1: Direction, n2: Direction) -> float:
    """``|<n1|n2>|^2 = ((1 + n1.n2)/2)^(2j)``."""
    cos_angle = float(np.clip(n1.vector @ n2.vector, -1.0, 1.0))
    return ((1.0 + cos_angle) / 2.0) ** spin.two_j


def expectation(state, A) -> complex:
    """``<psi|A|psi>`` for a state vector and a matching operator."""
    psi = np.asarray(state)
    a = np.asarray(A)
    if a.ndim != 2 or a.shape != (psi.size, psi.size):
        raise IncompatibleSpinError(
            f"operator of shape {a.shape} is incompatible with a state of dimension {psi.size}"
        )
    return complex(np.vdot(psi, a @ psi))
