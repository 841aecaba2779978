"""Two-vectors on R^n and their identification with skew-symmetric matrices.

The lexicographic basis ``e_i ^ e_j`` (i < j) of Lambda^2 R^n is declared
orthonormal.  Under ``to_skew`` it maps to ``e_i e_j^T - e_j e_i^T``, which is
an isometry onto so(n) equipped with ``<A, B> = Tr(A^T B) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimMismatch, NotSkew
from .numerics import DEFAULT_TOL, Tolerance, as_dense


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


@lru_cache(maxsize=None)
def pairs(n: int) -> tuple[tuple[int, int], ...]:
    """Lexicographic list of index pairs (i, j), i < j."""
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@lru_cache(maxsize=None)
def pair_index(n: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(pairs(n))}


@lru_cache(maxsize=None)
def _skew_basis(n: int) -> np.ndarray:
    basis = np.zeros((pair_count(n), n, n))
    for k, (i, j) in enumerate(pairs(n)):
        basis[k, i, j] = 1.0
        basis[k, j, i] = -1.0
    basis.setflags(write=False)
    return basis


def skew_basis(n: int) -> np.ndarray:
    """Array of shape (n(n-1)/2, n, n) holding ``to_skew`` of each basis 2-vector."""
    return _skew_basis(n)


@dataclass(frozen=True)
class Bivector:
    """An element of Lambda^2 R^n given by its lexicographic coefficients."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).ravel()
        if c.size != pair_count(self.n):
            raise DimMismatch(
                f"{c.size} coefficients do not match n={self.n} "
                f"(need {pair_count(self.n)})")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, n: int, i: int, j: int) -> "Bivector":
        return wedge(np.eye(n)[i], np.eye(n)[j])

    def to_skew(self) -> np.ndarray:
        return to_skew(self)

    def dot(self, other: "Bivector") -> float:
        _check_same(self, other)
        return float(self.coeffs @ other.coeffs)

    def __add__(self, other: "Bivector") -> "Bivector":
        _check_same(self, other)
        return Bivector(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: "Bivector") -> "Bivector":
        _check_same(self, other)
        return Bivector(self.n, self.coeffs - other.coeffs)

    def __neg__(self) -> "Bivector":
        return Bivector(self.n, -self.coeffs)

    def __mul__(self, scalar: float) -> "Bivector":
        return Bivector(self.n, float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __getitem__(self, ij: tuple[int, int]) -> float:
        i, j = ij
        if i == j:
            return 0.0
        if i < j:
            return float(self.coeffs[pair_index(self.n)[(i, j)]])
        return -float(self.coeffs[pair_index(self.n)[(j, i)]])


def _check_same(a: Bivector, b: Bivector) -> None:
    if a.n != b.n:
        raise DimMismatch(f"bivectors live on R^{a.n} and R^{b.n}")


def wedge(x, y) -> Bivector:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise DimMismatch(f"wedge of vectors of length {x.size} and {y.size}")
    outer = np.outer(x, y) - np.outer(y, x)
    return Bivector(x.size, outer[np.triu_indices(x.size, 1)])


def to_skew(omega) -> np.ndarray:
    """Skew matrix of a 2-vector: ``e_i ^ e_j -> e_i e_j^T - e_j e_i^T``."""
    if isinstance(omega, Bivector):
        n, c = omega.n, omega.coeffs
    else:
        c = np.asarray(omega, dtype=float).ravel()
        n = int(round((1 + np.sqrt(1 + 8 * c.size)) / 2))
        if pair_count(n) != c.size:
            raise DimMismatch(f"{c.size} is not a triangular number")
    a = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    a[iu] = c
    return a - a.T


def from_skew(a, tol: Tolerance = DEFAULT_TOL) -> Bivector:
    a = as_dense(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimMismatch(f"matrix of shape {a.shape} is not square")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a + a.T)) > tol.id_abs * scale:
        raise NotSkew(f"matrix deviates from skew-symmetry by "
                      f"{np.max(np.abs(a + a.T)):.3e}")
    return Bivector(n, skew_coords(a))


def skew_coords(a) -> np.ndarray:
    """Lexicographic coordinates of the skew part of ``a`` (no checks)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    iu = np.triu_indices(n, 1)
    return 0.5 * (a[..., iu[0], iu[1]] - a[..., iu[1], iu[0]])


def skew_from_coords(c) -> np.ndarray:
    """Inverse of :func:`skew_coords`; accepts stacked coordinate rows."""
    c = np.asarray(c, dtype=float)
    return np.tensordot(c, skew_basis(_n_from_count(c.shape[-1])), axes=(-1, 0))


def _n_from_count(k: int) -> int:
    n = int(round((1 + np.sqrt(1 + 8 * k)) / 2))
    if pair_count(n) != k:
        raise DimMismatch(f"{k} is not a triangular number")
    return n


def _as_matrix(omega) -> np.ndarray:
    if isinstance(omega, Bivector):
        return to_skew(omega)
    return as_dense(omega)


def ad(omega, l) -> np.ndarray:
    """Commutator ``omega L - L omega`` with omega read as a skew matrix."""
    w = _as_matrix(omega)
    l = as_dense(l)
    if w.shape != l.shape:
        raise DimMismatch(f"ad of {w.shape} on {l.shape}")
    return w @ l - l @ w


def bracket(omega, eta) -> Bivector:
    """Lie bracket of two 2-vectors through so(n)."""
    return from_skew(ad(omega, _as_matrix(eta)))


@lru_cache(maxsize=None)
def _structure_constants(n: int) -> np.ndarray:
    b = skew_basis(n)
    comm = np.einsum("aij,bjk->abik", b, b) - np.einsum("bij,ajk->abik", b, b)
    f = skew_coords(comm)
    f.setflags(write=False)
    return f


def structure_constants(n: int) -> np.ndarray:
    """``f[a, b, c]``: coordinate c of ``[e_a, e_b]`` in the lexicographic basis."""
    return _structure_constants(n)


def ad_matrix(coords) -> np.ndarray:
    """Matrix of ``ad_omega`` acting on Lambda^2 coordinates."""
    c = np.asarray(coords, dtype=float).ravel()
    f = structure_constants(_n_from_count(c.size))
    return np.einsum("a,abc->cb", c, f)


def lambda2(m) -> np.ndarray:
    """Induced map Lambda^2 R^a -> Lambda^2 R^b of an (b x a) matrix."""
    m = as_dense(m)
    b_dim, a_dim = m.shape
    images = np.einsum("ij,kjl,ml->kim", m, skew_basis(a_dim), m)
    return skew_coords(images).T.reshape(pair_count(b_dim), pair_count(a_dim))
