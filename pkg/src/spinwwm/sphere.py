"""Functions on the unit sphere: harmonics, quadrature, gradients, brackets.

Surface harmonics are normalized and phased by the Herglotz generating
function

    exp(zeta a.r) = sum_lm sqrt(4 pi/(2l+1)) r^l zeta^l lambda^m Y_lm / sqrt((l+m)!(l-m)!),
    a = z_hat - (lambda/2)(x_hat + i y_hat) + (1/(2 lambda))(x_hat - i y_hat),

which gives orthonormal ``Y_lm`` with ``Y_11 = -sqrt(3/8pi)(x + iy)`` (the
Condon-Shortley phase). Coefficient vectors over harmonics use the flat index
``l*l + l + m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .spin import Direction

__all__ = [
    "GridDegreeError",
    "SphereGrid",
    "SymbolField",
    "lm_index",
    "num_coeffs",
    "degree_of",
    "ylm_table",
    "eval_ylm",
    "legendre_p",
    "quadrature_grid",
    "product_grid",
    "integrate",
    "surface_gradient",
    "tangential_gradient",
    "poisson_bracket_at",
    "poisson_sphere",
]


class GridDegreeError(ValueError):
    """A quadrature grid is not exact to the degree an operation needs."""


def lm_index(l: int, m: int) -> int:
    return l * l + l + m


def num_coeffs(lmax: int) -> int:
    return (lmax + 1) ** 2


def degree_of(coeffs) -> int:
    """Maximum degree representable by a flat coefficient vector."""
    n = len(coeffs)
    lmax = math.isqrt(n) - 1
    if (lmax + 1) ** 2 != n:
        raise ValueError(f"coefficient vector length {n} is not a perfect square")
    return lmax


def _as_coeffs(f) -> np.ndarray:
    return np.asarray(getattr(f, "coeffs", f), dtype=complex)


def ylm_table(lmax: int, theta, phi) -> np.ndarray:
    """All ``Y_lm`` with ``l <= lmax`` at the given angles.

    Returns an array of shape ``(npts, (lmax+1)**2)``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64)).ravel()
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64)).ravel()
    if lmax < 0:
        return np.zeros((theta.size, 0), dtype=complex)
    alf = _kernels.alf_table(lmax, np.cos(theta), np.abs(np.sin(theta)))
    out = np.empty((theta.size, num_coeffs(lmax)), dtype=complex)
    m = np.arange(lmax + 1)
    phase = np.exp(1j * np.outer(phi, m))
    for l in range(lmax + 1):
        pos = alf[l, : l + 1].T * phase[:, : l + 1]
        out[:, lm_index(l, 0) : lm_index(l, l) + 1] = pos
        sign = (-1.0) ** m[1 : l + 1]
        # Y_{l,-m} = (-1)^m conj(Y_lm)
        out[:, lm_index(l, -l) : lm_index(l, 0)] = (sign * np.conj(pos[:, 1:]))[:, ::-1]
    return out


def eval_ylm(l: int, m: int, n: Direction) -> complex:
    if l < 0 or abs(m) > l:
        raise ValueError(f"need 0 <= |m| <= l, got l={l}, m={m}")
    return complex(ylm_table(l, n.theta, n.phi)[0, lm_index(l, m)])


def legendre_p(l: int, x: float) -> float:
    """Legendre polynomial ``P_l(x)`` by the three-term recurrence."""
    if l < 0:
        raise ValueError(f"degree must be nonnegative, got {l}")
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"argument must lie in [-1, 1], got {x}")
    return float(_kernels.legendre_table(l, np.array([x]))[l, 0])


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Gauss-Legendre in cos(theta) times uniform phi."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    exact_degree: int
    shape: tuple = (0, 0)

    @property
    def size(self) -> int:
        return self.theta.size

    @property
    def vectors(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.column_stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def directions(self):
        return [Direction(t, p) for t, p in zip(self.theta, self.phi)]

    def require(self, degree: int, what: str = "this operation"):
        if self.exact_degree < degree:
            raise GridDegreeError(
                f"{what} needs a grid exact to degree {degree}, got {self.exact_degree}"
            )


def product_grid(n_theta: int, n_phi: int) -> SphereGrid:
    """Tensor grid with ``n_theta`` Gauss-Legendre and ``n_phi`` uniform nodes."""
    if n_theta < 1 or n_phi < 1:
        raise ValueError("grid needs at least one node in each direction")
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta_1d = np.arccos(x)[::-1]
    wx = wx[::-1]
    phi_1d = 2 * np.pi * np.arange(n_phi) / n_phi
    theta, phi = np.meshgrid(theta_1d, phi_1d, indexing="ij")
    weights = np.outer(wx, np.full(n_phi, 2 * np.pi / n_phi))
    degree = min(2 * n_theta - 1, n_phi - 1)
    arrays = [theta.ravel(), phi.ravel(), weights.ravel()]
    for a in arrays:
        a.setflags(write=False)
    return SphereGrid(*arrays, exact_degree=degree, shape=(n_theta, n_phi))


def quadrature_grid(exact_degree: int) -> SphereGrid:
    """Smallest product grid (plus one guard node per axis) exact to ``exact_degree``."""
    L = int(exact_degree)
    if L < 0:
        raise ValueError("exact_degree must be nonnegative")
    n_theta = -(-(L + 1) // 2) + 1
    grid = product_grid(n_theta, L + 2)
    return SphereGrid(grid.theta, grid.phi, grid.weights, exact_degree=L, shape=grid.shape)


@dataclass(frozen=True, eq=False)
class SymbolField:
    grid: SphereGrid
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex).ravel()
        if values.size != self.grid.size:
            raise ValueError(f"field has {values.size} values for a grid of {self.grid.size} nodes")
        object.__setattr__(self, "values", values)


def integrate(f: SymbolField) -> complex:
    """Quadrature sum of a field over its grid (solid-angle measure)."""
    return complex(np.dot(f.grid.weights, f.values))


def _solid_derivative_coeffs(c: np.ndarray, lmax: int):
    """Cartesian derivatives of the solid extension sum c_lm r^l Y_lm.

    Differentiating the generating function gives
    d_z S_lm = sqrt((2l+1)/(2l-1)) sqrt((l+m)(l-m)) S_{l-1,m},
    (d_x + i d_y) S_lm = sqrt((2l+1)/(2l-1)) sqrt((l-m)(l-m-1)) S_{l-1,m+1},
    (d_x - i d_y) S_lm = -sqrt((2l+1)/(2l-1)) sqrt((l+m)(l+m-1)) S_{l-1,m-1}.
    Returns coefficient vectors of degree ``lmax-1`` for d_x, d_y, d_z and the
    vector of ``l * c_lm`` (the radial derivative at r = 1).
    """
    n_low = num_coeffs(lmax - 1)
    dz = np.zeros(n_low, dtype=complex)
    dp = np.zeros(n_low, dtype=complex)
    dm = np.zeros(n_low, dtype=complex)
    radial = np.zeros_like(c)
    for l in range(1, lmax + 1):
        r = math.sqrt((2 * l + 1) / (2 * l - 1))
        for m in range(-l, l + 1):
            v = c[lm_index(l, m)]
            if v == 0:
                continue
            radial[lm_index(l, m)] = l * v
            if abs(m) < l:
                dz[lm_index(l - 1, m)] += v * r * math.sqrt((l + m) * (l - m))
            if m + 1 <= l - 1:
                dp[lm_index(l - 1, m + 1)] += v * r * math.sqrt((l - m) * (l - m - 1))
            if m - 1 >= -(l - 1):
                dm[lm_index(l - 1, m - 1)] -= v * r * math.sqrt((l + m) * (l + m - 1))
    return (dp + dm) / 2, (dp - dm) / 2j, dz, radial


def surface_gradient(coeffs, theta, phi) -> np.ndarray:
    """Surface gradient of ``sum c_lm Y_lm`` at many points, shape ``(npts, 3)``.

    Regular everywhere, poles included: the solid extension is differentiated
    in Cartesian coordinates and its radial part removed (Euler's relation
    for the homogeneous degree-l pieces).
    """
    c = _as_coeffs(coeffs)
    lmax = degree_of(c)
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64)).ravel()
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64)).ravel()
    if lmax == 0:
        return np.zeros((theta.size, 3), dtype=complex)
    dx, dy, dz, radial = _solid_derivative_coeffs(c, lmax)
    low = ylm_table(lmax - 1, theta, phi)
    grad = np.column_stack([low @ dx, low @ dy, low @ dz])
    st = np.sin(theta)
    n = np.column_stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])
    full = ylm_table(lmax, theta, phi)
    return grad - n * (full @ radial)[:, None]


def tangential_gradient(coeffs, n: Direction) -> np.ndarray:
    """Surface gradient of ``sum c_lm Y_lm`` at one direction (complex 3-vector)."""
    return surface_gradient(coeffs, n.theta, n.phi)[0]


def poisson_bracket_at(fA, fB, theta, phi, j_c: float = 1.0) -> np.ndarray:
    """``n.(grad fA x grad fB) / j_c`` at many points.

    With symbols regarded as functions of the classical vector ``j_c n`` this
    is their Poisson bracket under ``{j_a, j_b} = eps_abc j_c``.
    """
    ga = surface_gradient(fA, theta, phi)
    gb = surface_gradient(fB, theta, phi)
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64)).ravel()
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64)).ravel()
    st = np.sin(theta)
    n = np.column_stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])
    return np.einsum("ij,ij->i", n, np.cross(ga, gb)) / j_c


def poisson_sphere(fA, fB, n: Direction, j_c: float = 1.0) -> complex:
    return complex(poisson_bracket_at(fA, fB, n.theta, n.phi, j_c)[0])
