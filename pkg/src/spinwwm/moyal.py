"""Stratonovich-Weyl kernel, Moyal products and classical-limit scans."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .expr import degree, eval_operator, parse_operator
from .sphere import (
    SphereGrid,
    SymbolField,
    lm_index,
    num_coeffs,
    poisson_bracket_at,
    quadrature_grid,
    ylm_table,
)
from .spin import Direction, IncompatibleSpinError, Spin
from .symbols import SymbolCoefficients, SymbolKind, coeff_a, symbol_of
from .tensor import reconstruct, tensor_stack, TensorDecomposition

__all__ = [
    "ScalingStudy",
    "sw_kernel",
    "sw_kernel_stack",
    "identity_kernel",
    "operator_from_symbol",
    "trikernel",
    "moment_constant",
    "moyal_exact",
    "moyal_leading",
    "moyal_leading_at",
    "commutator_symbol",
    "anticommutator_symbol",
    "fit_slope",
    "bracket_scan",
]


def sw_kernel_stack(spin: Spin, theta, phi) -> np.ndarray:
    """Kernel matrices at many points, shape ``(npts, dim, dim)``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64)).ravel()
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64)).ravel()
    ylm = ylm_table(spin.two_j, theta, phi).conj()
    out = np.zeros((theta.size, spin.dim, spin.dim), dtype=complex)
    for l in range(spin.two_j + 1):
        block = ylm[:, lm_index(l, -l) : lm_index(l, l) + 1]
        out += np.tensordot(block, tensor_stack(spin, l), axes=1) / coeff_a(SymbolKind.W, spin, l)
    return 4 * math.pi * out


def sw_kernel(spin: Spin, n: Direction) -> np.ndarray:
    """``Delta(n) = 4pi sum_lm conj(Y_lm(n)) Y_lm(J) / a^W_jl``."""
    return sw_kernel_stack(spin, n.theta, n.phi)[0]


def identity_kernel(spin: Spin, n1: Direction, n2: Direction) -> float:
    """Reproducing kernel ``sum_{l<=2j} (2l+1)/4pi P_l(n1.n2)`` of degree-2j functions."""
    c = np.array([(2 * l + 1) / (4 * math.pi) for l in range(spin.two_j + 1)])
    return float(_kernels.legendre_pair_sum(n1.vector, n2.vector, c)[0, 0])


def operator_from_symbol(field: SymbolField, spin: Spin) -> np.ndarray:
    """``(1/4pi) integral Phi^W(n) Delta(n) dn`` by quadrature.

    The integral is evaluated degree by degree: projecting the samples onto
    ``Y_lm`` and dividing by ``a^W_jl`` is the same sum as averaging the
    kernel, without materializing a kernel matrix per node.
    """
    grid = field.grid
    grid.require(2 * spin.two_j, "operator reconstruction from a Weyl symbol")
    ylm = ylm_table(spin.two_j, grid.theta, grid.phi)
    proj = ylm.conj().T @ (grid.weights * field.values)
    scale = np.repeat(
        [1.0 / coeff_a(SymbolKind.W, spin, l) for l in range(spin.two_j + 1)],
        [2 * l + 1 for l in range(spin.two_j + 1)],
    )
    return reconstruct(TensorDecomposition(spin, proj * scale))


def trikernel(spin: Spin, n1: Direction, n2: Direction, n3: Direction) -> complex:
    """``M_j = tr(Delta(n1) Delta(n2) Delta(n3)) / (2j+1)``."""
    d = sw_kernel_stack(spin, [n1.theta, n2.theta, n3.theta], [n1.phi, n2.phi, n3.phi])
    return complex(np.trace(d[0] @ d[1] @ d[2]) / spin.dim)


def moment_constant(spin: Spin) -> float:
    """``(a^W_j2 - j(j+1)) / (3 (a^W_j1)^2)``, the isotropic part of the second moment."""
    a1 = coeff_a(SymbolKind.W, spin, 1)
    a2 = coeff_a(SymbolKind.W, spin, 2)
    return (a2 - spin.j * (spin.j + 1)) / (3 * a1 * a1)


def _check_pair(A, B):
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if Spin.of(A) != Spin.of(B):
        raise IncompatibleSpinError(f"operators of shapes {A.shape} and {B.shape} do not match")
    return A, B


def moyal_exact(A, B, lmax: int | None = None) -> SymbolCoefficients:
    """Weyl symbol of the matrix product ``AB``."""
    A, B = _check_pair(A, B)
    return symbol_of(A @ B, SymbolKind.W, lmax=lmax)


def commutator_symbol(A, B, lmax: int | None = None) -> SymbolCoefficients:
    A, B = _check_pair(A, B)
    return symbol_of(A @ B - B @ A, SymbolKind.W, lmax=lmax)


def anticommutator_symbol(A, B, lmax: int | None = None) -> SymbolCoefficients:
    A, B = _check_pair(A, B)
    return symbol_of(A @ B + B @ A, SymbolKind.W, lmax=lmax)


def moyal_leading_at(sA: SymbolCoefficients, sB: SymbolCoefficients, theta, phi) -> np.ndarray:
    """``Phi_A Phi_B + (i/2 j_c) n.(grad Phi_A x grad Phi_B)`` at many points."""
    if sA.kind is not SymbolKind.W or sB.kind is not SymbolKind.W:
        raise ValueError("the Moyal expansion applies to Weyl symbols only")
    if sA.spin != sB.spin:
        raise IncompatibleSpinError("symbols belong to different spins")
    fa = ylm_table(sA.lmax, theta, phi) @ sA.coeffs
    fb = ylm_table(sB.lmax, theta, phi) @ sB.coeffs
    return fa * fb + 0.5j * poisson_bracket_at(sA, sB, theta, phi, sA.spin.j_c)


def moyal_leading(sA: SymbolCoefficients, sB: SymbolCoefficients, n: Direction) -> complex:
    return complex(moyal_leading_at(sA, sB, n.theta, n.phi)[0])


def fit_slope(j_values, errors):
    """Least-squares slope of log(error) against log(j); ``None`` if any error is 0."""
    j = np.asarray(j_values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if j.size < 2 or np.any(e <= 0) or not np.all(np.isfinite(e)):
        return None
    return float(np.polyfit(np.log(j), np.log(e), 1)[0])


@dataclass(frozen=True)
class ScalingStudy:
    """Sup-norm residuals of the classical-limit formulas against exact symbols.

    ``commutator_errors``:      max |Phi_[A,B] - i {Phi_A, Phi_B}_PB|
    ``anticommutator_errors``:  max |Phi_{AB+BA} - 2 Phi_A Phi_B|
    """

    operators: tuple
    j_values: tuple
    commutator_errors: tuple
    anticommutator_errors: tuple
    commutator_slope: float | None
    anticommutator_slope: float | None
    grid_degree: int

    def to_dict(self) -> dict:
        return asdict(self)


def _scan_one(exprs, two_j: int, grid: SphereGrid):
    spin = Spin(two_j)
    (ea, da), (eb, db) = exprs
    scale = 1.0 / spin.j_c
    A = eval_operator(ea, spin, scale)
    B = eval_operator(eb, spin, scale)
    sA = symbol_of(A, SymbolKind.W, lmax=da)
    sB = symbol_of(B, SymbolKind.W, lmax=db)
    top = da + db
    comm = commutator_symbol(A, B, lmax=top)
    anti = anticommutator_symbol(A, B, lmax=top)
    th, ph = grid.theta, grid.phi
    fa = ylm_table(sA.lmax, th, ph) @ sA.coeffs
    fb = ylm_table(sB.lmax, th, ph) @ sB.coeffs
    exact_comm = ylm_table(comm.lmax, th, ph) @ comm.coeffs
    exact_anti = ylm_table(anti.lmax, th, ph) @ anti.coeffs
    bracket = poisson_bracket_at(sA, sB, th, ph, spin.j_c)
    return (
        float(np.max(np.abs(exact_comm - 1j * bracket))),
        float(np.max(np.abs(exact_anti - 2 * fa * fb))),
    )


def bracket_scan(opA: str, opB: str, j_list, grid_degree: int = 24) -> ScalingStudy:
    """Classical-limit residuals for two operator expressions across spins.

    Each spin component in the expressions is replaced by ``J / j_c`` so the
    symbols have finite limits as j grows.  Residuals are sup-norms over a
    product grid exact to ``grid_degree``.
    """
    j_spins = [s if isinstance(s, Spin) else Spin.parse(str(s)) for s in j_list]
    if len(j_spins) < 3:
        raise ValueError("need >=3 points for a scaling fit")
    exprs = []
    for src in (opA, opB):
        tree = parse_operator(src)
        exprs.append((tree, degree(tree)))
    grid = quadrature_grid(grid_degree)
    comm_err, anti_err = [], []
    for spin in j_spins:
        c, a = _scan_one(exprs, spin.two_j, grid)
        comm_err.append(c)
        anti_err.append(a)
    j_values = tuple(s.j for s in j_spins)
    return ScalingStudy(
        operators=(opA, opB),
        j_values=j_values,
        commutator_errors=tuple(comm_err),
        anticommutator_errors=tuple(anti_err),
        commutator_slope=fit_slope(j_values, comm_err),
        anticommutator_slope=fit_slope(j_values, anti_err),
        grid_degree=grid.exact_degree,
    )
