"""P, Q and Weyl symbols of spin operators.

Every symbol of ``Y_lm(J)`` is ``a_jl * Y_lm(n)`` with a kind-dependent
coefficient ``a_jl``, so an operator's symbol follows from its tensor
decomposition by scaling each degree-l block.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .sphere import (
    SphereGrid,
    SymbolField,
    degree_of,
    lm_index,
    num_coeffs,
    ylm_table,
)
from .spin import Direction, Spin
from .tensor import decompose

__all__ = [
    "SymbolKind",
    "SymbolCoefficients",
    "coeff_a",
    "coeff_a_exact",
    "coeff_w_squared_exact",
    "coeff_K",
    "coeff_K_exact",
    "symbol_of",
    "eval_symbol",
    "eval_on_grid",
    "convert",
    "smooth_p_to_q",
    "sharpen_q_to_p",
    "asymptotic_ratio",
    "wigner_function",
]

_EXACT_LIMIT = 40


class SymbolKind(str, enum.Enum):
    P = "P"
    Q = "Q"
    W = "W"


def _kind(kind) -> SymbolKind:
    try:
        return SymbolKind(str(getattr(kind, "value", kind)).upper())
    except ValueError:
        raise ValueError(f"unknown symbol kind {kind!r}; expected P, Q or W") from None


def coeff_a(kind, spin: Spin, l: int) -> float:
    """Coefficient ``a_jl`` relating the symbol of ``Y_lm(J)`` to ``Y_lm(n)``.

    P: prod_{k=1..l} (j + (k+1)/2)
    Q: prod_{k=1..l} (j - (k-1)/2)          (zero once l > 2j)
    W: prod_{k=1..l} sqrt((j+1/2)^2 - k^2/4) (zero once l > 2j)
    """
    kind = _kind(kind)
    if l < 0:
        raise ValueError(f"l must be nonnegative, got {l}")
    j = spin.j
    out = 1.0
    if kind is SymbolKind.P:
        for k in range(1, l + 1):
            out *= j + (k + 1) / 2
    elif kind is SymbolKind.Q:
        for k in range(1, l + 1):
            out *= j - (k - 1) / 2
    else:
        if l > spin.two_j:
            return 0.0
        for k in range(1, l + 1):
            out *= math.sqrt((j + 0.5) ** 2 - k * k / 4)
    return out


def coeff_a_exact(kind, spin: Spin, l: int) -> Fraction:
    """Exact ``a_jl`` for the rational kinds P and Q (``two_j <= 40``)."""
    kind = _kind(kind)
    if kind is SymbolKind.W:
        raise ValueError("a^W is irrational in general; use coeff_w_squared_exact")
    if spin.two_j > _EXACT_LIMIT:
        raise ValueError(f"exact path limited to two_j <= {_EXACT_LIMIT}")
    if l < 0:
        raise ValueError(f"l must be nonnegative, got {l}")
    j = Fraction(spin.two_j, 2)
    out = Fraction(1)
    for k in range(1, l + 1):
        out *= j + Fraction(k + 1, 2) if kind is SymbolKind.P else j - Fraction(k - 1, 2)
    return out


def coeff_w_squared_exact(spin: Spin, l: int) -> Fraction:
    """Exact ``(a^W_jl)^2``."""
    if spin.two_j > _EXACT_LIMIT:
        raise ValueError(f"exact path limited to two_j <= {_EXACT_LIMIT}")
    if l > spin.two_j:
        return Fraction(0)
    half = Fraction(spin.two_j + 1, 2)
    out = Fraction(1)
    for k in range(1, l + 1):
        out *= half * half - Fraction(k * k, 4)
    return out


def coeff_K(spin: Spin, l: int) -> float:
    """Legendre coefficient of ``((1 + cos)/2)^(2j)``.

    ``(2l+1) ((2j)!)^2 / ((2j-l)! (2j+l+1)!)`` evaluated as the telescoped
    product ``(2l+1)/(2j+l+1) * prod_{k<l} (2j-k)/(2j+1+k)``.
    """
    n = spin.two_j
    if l < 0 or l > n:
        raise ValueError(f"K is defined for 0 <= l <= 2j, got l={l} with 2j={n}")
    out = (2 * l + 1) / (n + l + 1)
    for k in range(l):
        out *= (n - k) / (n + 1 + k)
    return out


def coeff_K_exact(spin: Spin, l: int) -> Fraction:
    n = spin.two_j
    if l < 0 or l > n:
        raise ValueError(f"K is defined for 0 <= l <= 2j, got l={l} with 2j={n}")
    return Fraction(
        (2 * l + 1) * math.factorial(n) ** 2, math.factorial(n - l) * math.factorial(n + l + 1)
    )


@dataclass(frozen=True, eq=False)
class SymbolCoefficients:
    """Symbol ``sum_lm coeffs[lm] Y_lm(n)`` of an operator for ``spin``."""

    spin: Spin
    kind: SymbolKind
    coeffs: np.ndarray

    @property
    def lmax(self) -> int:
        return degree_of(self.coeffs)

    def __getitem__(self, lm) -> complex:
        l, m = lm
        if abs(m) > l:
            raise KeyError(lm)
        if l > self.lmax:
            return 0j
        return complex(self.coeffs[lm_index(l, m)])

    def padded(self, lmax: int) -> np.ndarray:
        out = np.zeros(num_coeffs(lmax), dtype=complex)
        n = min(out.size, self.coeffs.size)
        out[:n] = self.coeffs[:n]
        return out


def _degree_scale(kind: SymbolKind, spin: Spin, lmax: int) -> np.ndarray:
    return np.repeat([coeff_a(kind, spin, l) for l in range(lmax + 1)], [2 * l + 1 for l in range(lmax + 1)])


def symbol_of(A, kind, lmax: int | None = None) -> SymbolCoefficients:
    """Symbol of kind P, Q or W of the operator ``A``.

    ``lmax`` is forwarded to :func:`decompose` (exact for polynomials in J
    of that degree).
    """
    kind = _kind(kind)
    d = decompose(A, lmax=lmax)
    return SymbolCoefficients(d.spin, kind, d.coeffs * _degree_scale(kind, d.spin, d.lmax))


def eval_symbol(s: SymbolCoefficients, n: Direction) -> complex:
    return complex(ylm_table(s.lmax, n.theta, n.phi)[0] @ s.coeffs)


def eval_on_grid(s: SymbolCoefficients, grid: SphereGrid) -> SymbolField:
    return SymbolField(grid, ylm_table(s.lmax, grid.theta, grid.phi) @ s.coeffs)


def convert(s: SymbolCoefficients, to) -> SymbolCoefficients:
    """Rescale each degree by ``a^to_jl / a^from_jl``."""
    to = _kind(to)
    if to is s.kind:
        return SymbolCoefficients(s.spin, to, s.coeffs.copy())
    lmax = min(s.lmax, s.spin.two_j)
    ratio = _degree_scale(to, s.spin, lmax) / _degree_scale(s.kind, s.spin, lmax)
    return SymbolCoefficients(s.spin, to, s.coeffs[: num_coeffs(lmax)] * ratio)


def _kernel_apply(field: SymbolField, spin: Spin, legendre_coeffs) -> SymbolField:
    grid = field.grid
    grid.require(2 * spin.two_j, "grid smoothing/sharpening")
    pts = grid.vectors
    kernel = _kernels.legendre_pair_sum(pts, pts, legendre_coeffs)
    return SymbolField(grid, kernel @ (grid.weights * field.values))


def smooth_p_to_q(field: SymbolField, spin: Spin) -> SymbolField:
    """Q symbol from P-symbol samples.

    ``((2j+1)/4pi) * integral ((1 + n.n')/2)^(2j) f(n') dn'``, with the kernel
    expanded as ``sum_l K_jl P_l(n.n')``.
    """
    c = np.array([coeff_K(spin, l) for l in range(spin.two_j + 1)])
    return _kernel_apply(field, spin, c * spin.dim / (4 * math.pi))


def sharpen_q_to_p(field: SymbolField, spin: Spin) -> SymbolField:
    """P symbol from Q-symbol samples: ``(1/4pi) integral G(n, n') f(n') dn'``.

    ``G = sum_{l<=2j} (2l+1) (2j-l)!(2j+l+1)!/((2j)!(2j+1)!) P_l``, whose
    coefficients are ``(2l+1)^2 / ((2j+1) K_jl)``.
    """
    c = np.array([(2 * l + 1) ** 2 / (spin.dim * coeff_K(spin, l)) for l in range(spin.two_j + 1)])
    return _kernel_apply(field, spin, c / (4 * math.pi))


def asymptotic_ratio(from_kind, to_kind, j: float, l: int, order: int) -> float:
    """Large-j series for ``a^to_jl / a^from_jl`` truncated at ``j**-order``.

    Supported pairs are Q->P and W->P; ``L = l(l+1)`` is the eigenvalue of
    the phase-space angular momentum squared.
    """
    pair = (_kind(from_kind), _kind(to_kind))
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be 0..3, got {order}")
    L = l * (l + 1)
    if pair == (SymbolKind.Q, SymbolKind.P):
        terms = [1.0, L / 2, L * (L - 2) / 8, L * (L - 2) * (L - 3) / 48]
    elif pair == (SymbolKind.W, SymbolKind.P):
        terms = [1.0, L / 4, L * (L - 4) / 32, L * (L * L - 8 * L + 24) / 384]
    else:
        raise ValueError(f"no asymptotic series for {pair[0].value}->{pair[1].value}")
    return sum(t / j**k for k, t in enumerate(terms[: order + 1]))


def wigner_function(rho, grid: SphereGrid) -> SymbolField:
    """Wigner function (Weyl symbol of a density matrix) on ``grid``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=1e-10):
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise ValueError("density matrix must have unit trace")
    return eval_on_grid(symbol_of(rho, SymbolKind.W), grid)
