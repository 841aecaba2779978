"""The real Clifford algebra Cl(m, n) and the operator identities built on it.

Generators ``0 .. m-1`` square to -1 and carry the multiplication ``c``;
generators ``m .. m+n-1`` square to +1 and carry ``c-bar``.  A monomial is a
bitmask over all ``m + n`` generators written in increasing order, and an
element is a coefficient vector over the ``2**(m+n)`` monomials.  The monomial
basis is declared orthonormal, which makes every ``c(v)`` skew-adjoint and
every ``c-bar(w)`` self-adjoint in the left-regular representation.

Endomorphisms act through ``c(L) = sum_ij L_ij c(e_i) c(e_j)``; on a skew
matrix this gives ``c(e_i ^ e_j) = 2 c(e_i) c(e_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import AlgebraMismatch, BianchiViolated, DimMismatch
from .exterior import Bivector, ad, pair_count, skew_basis, to_skew, wedge
from .numerics import as_dense

MAX_GENERATORS = 10


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int64)
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x >>= 1
    return out


class CliffordAlgebra:
    """Multiplication table of Cl(m, n); immutable once built."""

    def __init__(self, m: int, n: int):
        if m < 0 or n < 0:
            raise ValueError("generator counts must be non-negative")
        if m + n > MAX_GENERATORS:
            raise DimMismatch(f"Cl({m},{n}) exceeds the {MAX_GENERATORS}-generator cap")
        self.m, self.n = m, n
        self.generators = m + n
        self.dim = 1 << self.generators
        d = self.dim
        idx = np.arange(d)
        a, b = np.meshgrid(idx, idx, indexing="ij")
        # transpositions needed to move each generator of b past the larger ones in a
        swaps = np.zeros((d, d), dtype=np.int64)
        for j in range(self.generators):
            swaps += ((b >> j) & 1) * _popcount(a >> (j + 1))
        negative_mask = (1 << m) - 1
        squares = _popcount(a & b & negative_mask)
        sign = np.where((swaps + squares) % 2 == 0, 1.0, -1.0)
        self.sign = sign
        self._xor = a ^ b
        # out[k] = sum_i a_i sign[i, i^k] b[i^k]
        self._sign_left = sign[a, self._xor]
        # L(a)[k, j] = sign[k^j, j] a[k^j]
        self._sign_reg = sign[self._xor, b]
        for arr in (self.sign, self._xor, self._sign_left, self._sign_reg):
            arr.setflags(write=False)

    def __repr__(self) -> str:
        return f"CliffordAlgebra(m={self.m}, n={self.n})"

    # -- elements --------------------------------------------------------
    def element(self, coeffs) -> "CliffordElement":
        return CliffordElement(self, coeffs)

    def zero(self) -> "CliffordElement":
        return CliffordElement(self, np.zeros(self.dim))

    def one(self) -> "CliffordElement":
        e = np.zeros(self.dim)
        e[0] = 1.0
        return CliffordElement(self, e)

    def monomial(self, mask: int) -> "CliffordElement":
        e = np.zeros(self.dim)
        e[mask] = 1.0
        return CliffordElement(self, e)

    def gen_c(self, i: int) -> "CliffordElement":
        if not 0 <= i < self.m:
            raise DimMismatch(f"c-generator {i} outside 0..{self.m - 1}")
        return self.monomial(1 << i)

    def gen_cbar(self, j: int) -> "CliffordElement":
        if not 0 <= j < self.n:
            raise DimMismatch(f"c-bar generator {j} outside 0..{self.n - 1}")
        return self.monomial(1 << (self.m + j))

    def random_element(self, rng) -> "CliffordElement":
        return CliffordElement(self, rng.standard_normal(self.dim))

    # -- raw products ----------------------------------------------------
    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("i,ik->k", a, self._sign_left * b[self._xor])

    def regular_matrix(self, a: np.ndarray) -> np.ndarray:
        return self._sign_reg * a[self._xor]

    # -- Clifford multiplications ----------------------------------------
    @cached_property
    def _c_pairs(self) -> np.ndarray:
        return self._pair_table(0, self.m)

    @cached_property
    def _cbar_pairs(self) -> np.ndarray:
        return self._pair_table(self.m, self.n)

    def _pair_table(self, offset: int, count: int) -> np.ndarray:
        tab = np.zeros((count, count, self.dim))
        for i in range(count):
            for j in range(count):
                tab[i, j] = self.mul(self.monomial(1 << (offset + i)).coeffs,
                                     self.monomial(1 << (offset + j)).coeffs)
        tab.setflags(write=False)
        return tab

    def c(self, v) -> "CliffordElement":
        """``c(v) = sum_i v_i c(e_i)`` for a vector of length at most m."""
        return self._vector(v, 0, self.m)

    def cbar(self, w) -> "CliffordElement":
        return self._vector(w, self.m, self.n)

    def _vector(self, v, offset: int, count: int) -> "CliffordElement":
        v = np.asarray(v, dtype=float).ravel()
        if v.size > count:
            raise DimMismatch(f"vector of length {v.size} exceeds {count} generators")
        out = np.zeros(self.dim)
        out[1 << (offset + np.arange(v.size))] = v
        return CliffordElement(self, out)

    def c_endo(self, l) -> "CliffordElement":
        """``c(L) = sum_ij L_ij c(e_i) c(e_j)``; a d x d matrix uses the first d generators."""
        return self._endo(l, self._c_pairs, self.m)

    def cbar_endo(self, l) -> "CliffordElement":
        return self._endo(l, self._cbar_pairs, self.n)

    def _endo(self, l, table: np.ndarray, count: int) -> "CliffordElement":
        if isinstance(l, Bivector):
            l = to_skew(l)
        l = as_dense(l)
        d = l.shape[0]
        if l.shape != (d, d) or d > count:
            raise DimMismatch(f"matrix of shape {l.shape} does not fit {count} generators")
        return CliffordElement(self, np.einsum("ij,ijk->k", l, table[:d, :d]))

    def c_minus_cbar(self, omega, df=None) -> "CliffordElement":
        """``(c - c-bar)(omega) = c(omega) - c-bar(df omega df^T)``.

        ``df`` is the n x m differential; the default is ``[I_n 0]``, i.e. the
        horizontal space is spanned by the first n coordinates of R^m.
        """
        w = to_skew(omega) if isinstance(omega, Bivector) else as_dense(omega)
        df = default_df(self.n, w.shape[0]) if df is None else as_dense(df)
        return self.c_endo(w) - self.cbar_endo(df @ w @ df.T)


@lru_cache(maxsize=None)
def clifford_algebra(m: int, n: int) -> CliffordAlgebra:
    """Shared, cached algebra instance."""
    return CliffordAlgebra(m, n)


def default_df(n: int, m: int) -> np.ndarray:
    """Projection ``R^m -> R^n`` onto the first n coordinates."""
    df = np.zeros((n, m))
    k = min(n, m)
    df[:k, :k] = np.eye(k)
    return df


def diagonal_df(mu, n: int, m: int) -> np.ndarray:
    """n x m differential with singular values ``mu`` on the diagonal."""
    mu = np.asarray(mu, dtype=float).ravel()
    if mu.size != min(n, m):
        raise DimMismatch(f"need {min(n, m)} singular values, got {mu.size}")
    df = np.zeros((n, m))
    df[np.arange(mu.size), np.arange(mu.size)] = mu
    return df


@dataclass(frozen=True, eq=False)
class CliffordElement:
    algebra: CliffordAlgebra
    coeffs: np.ndarray

    def __post_init__(self):
        c = as_dense(self.coeffs, ndim=1)
        if c.size != self.algebra.dim:
            raise DimMismatch(f"{c.size} coefficients for an algebra of dimension {self.algebra.dim}")
        object.__setattr__(self, "coeffs", c)

    def _same(self, other: "CliffordElement") -> None:
        if other.algebra is not self.algebra and (
                other.algebra.m, other.algebra.n) != (self.algebra.m, self.algebra.n):
            raise AlgebraMismatch(f"{self.algebra} vs {other.algebra}")

    def __add__(self, other):
        self._same(other)
        return CliffordElement(self.algebra, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return CliffordElement(self.algebra, self.coeffs - other.coeffs)

    def __neg__(self):
        return CliffordElement(self.algebra, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, CliffordElement):
            return product(self, other)
        return CliffordElement(self.algebra, float(other) * self.coeffs)

    def __rmul__(self, other):
        return CliffordElement(self.algebra, float(other) * self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def left_regular(self) -> np.ndarray:
        return left_regular(self)

    def __repr__(self) -> str:
        nz = np.flatnonzero(np.abs(self.coeffs) > 1e-14)
        terms = ", ".join(f"{bin(k)}:{self.coeffs[k]:.4g}" for k in nz[:8])
        more = "" if nz.size <= 8 else ", ..."
        return f"CliffordElement({self.algebra.m},{self.algebra.n}; {terms}{more})"


def product(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    a._same(b)
    return CliffordElement(a.algebra, a.algebra.mul(a.coeffs, b.coeffs))


def commutator(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return a * b - b * a


def left_regular(a: CliffordElement) -> np.ndarray:
    """Matrix of left multiplication by ``a`` on coefficient vectors."""
    return a.algebra.regular_matrix(a.coeffs)


# -- identity checks --------------------------------------------------------

def commutator_formula_check(alg: CliffordAlgebra, l1, l2, side: str = "both") -> float:
    """Residual of the commutator-to-matrix identity.

    ``[c(L1), c(L2)] = -2c(L1 L2) + 2c(L1 L2^T) - 2c(L2^T L1) + 2c(L2 L1)``
    and the c-bar version with every sign on the right flipped.  ``side``
    selects "c", "cbar" or "both" (max of the two).
    """
    l1, l2 = as_dense(l1), as_dense(l2)
    if l1.shape != l2.shape:
        raise DimMismatch(f"{l1.shape} vs {l2.shape}")
    rhs_mats = (l1 @ l2, l1 @ l2.T, l2.T @ l1, l2 @ l1)
    weights = (-2.0, 2.0, -2.0, 2.0)
    out = 0.0
    sides = {"both": ("c", "cbar"), "c": ("c",), "cbar": ("cbar",)}[side]
    for s in sides:
        endo = alg.c_endo if s == "c" else alg.cbar_endo
        flip = 1.0 if s == "c" else -1.0
        lhs = commutator(endo(l1), endo(l2))
        rhs = alg.zero()
        for w, mat in zip(weights, rhs_mats):
            rhs = rhs + (flip * w) * endo(mat)
        out = max(out, (lhs - rhs).norm())
    return out


def skew_commutator_check(alg: CliffordAlgebra, l1, l2, side: str = "both") -> float:
    """For skew ``L1``: ``[c(L1), c(L2)] = -4 c(ad_{L1} L2)`` (``+4`` for c-bar)."""
    l1, l2 = as_dense(l1), as_dense(l2)
    out = 0.0
    sides = {"both": ("c", "cbar"), "c": ("c",), "cbar": ("cbar",)}[side]
    for s in sides:
        endo = alg.c_endo if s == "c" else alg.cbar_endo
        factor = -4.0 if s == "c" else 4.0
        res = commutator(endo(l1), endo(l2)) - factor * endo(ad(l1, l2))
        out = max(out, res.norm())
    return out


def graded_commute_check(alg: CliffordAlgebra, l, lbar) -> float:
    """Norm of ``[c(L), c-bar(Lbar)]``; both are even, so it vanishes."""
    return commutator(alg.c_endo(l), alg.cbar_endo(lbar)).norm()


def chain_transfer_check(alg: CliffordAlgebra, omega, eta1, etabar2, df=None) -> float:
    """Residual of the transfer identity

    ``[(c - c-bar)(w), c(eta1) + c-bar(etabar2)]
    = -4 c(ad_w eta1) - 4 c-bar(ad_wbar etabar2)`` with ``wbar = df w df^T``.
    """
    w = to_skew(omega) if isinstance(omega, Bivector) else as_dense(omega)
    df = default_df(alg.n, w.shape[0]) if df is None else as_dense(df)
    wbar = df @ w @ df.T
    lhs = commutator(alg.c_minus_cbar(w, df), alg.c_endo(eta1) + alg.cbar_endo(etabar2))
    rhs = -4.0 * alg.c_endo(ad(w, eta1)) - 4.0 * alg.cbar_endo(ad(wbar, etabar2))
    return (lhs - rhs).norm()


def bianchi_contraction(alg: CliffordAlgebra, q, x) -> CliffordElement:
    """``-sum_g c(e_g) sum_{k<l} <Q(e_g ^ X), e_k ^ e_l> c(e_k) c(e_l)``."""
    from .curvature import as_operator

    q = as_operator(q)
    x = np.asarray(x, dtype=float).ravel()
    if x.size != q.n or q.n > alg.m:
        raise DimMismatch(f"operator on R^{q.n}, vector of length {x.size}, Cl({alg.m},{alg.n})")
    out = alg.zero()
    for g in range(q.n):
        eg = np.zeros(q.n)
        eg[g] = 1.0
        img = q.matrix @ wedge(eg, x).coeffs
        # sum_{k<l} img_kl c_k c_l = c(img) / 2
        out = out - product(alg.c(eg), 0.5 * alg.c_endo(to_skew(img)))
    return out


def bianchi_contraction_check(alg: CliffordAlgebra, q, x, strict: bool = True) -> float:
    """Residual of ``contraction(Q, X) = c(Ric_Q X)``.

    With ``strict`` the operator must satisfy Bianchi; otherwise
    :class:`BianchiViolated` is raised carrying the (nonzero) residual.
    """
    from .curvature import as_operator, bianchi_check

    q = as_operator(q)
    res = (bianchi_contraction(alg, q, x) - alg.c(q.ricci() @ np.asarray(x, dtype=float))).norm()
    if strict and not q.bianchi_ok:
        raise BianchiViolated(
            f"operator violates Bianchi by {bianchi_check(q):.3e}; contraction residual {res:.3e}",
            residual=res)
    return res


def lichnerowicz_zero_order_check(alg: CliffordAlgebra, r, df) -> tuple[float, float]:
    """Residuals of the zeroth-order curvature identity.

    ``r`` lives on Lambda^2 R^n and ``df`` is a diagonal n x m matrix with
    non-negative entries mu_i.  Returns ``(res_a, res_b)`` where

    (a) ``1/8 sum <R wb_a, wb_b> c(w_a) cbar(wb_b)`` against
        ``1/16 sum [c(Lw)^2 + cbar(Lbar w)^2 - (c(Lw) - cbar(Lbar w))^2]``,
    (b) ``sum cbar(Lbar wb)^2 = -2 scal`` and
        ``sum c(L wb)^2 = -2 sum_ij mu_i^2 mu_j^2 R_ijji``.

    Here ``Lbar = sqrt(R)`` and ``L wb`` is the horizontal lift ``df^T (Lbar wb) df``.
    """
    from .curvature import as_operator, psd_sqrt, require_valid

    r = require_valid(as_operator(r))
    n = r.n
    df = as_dense(df)
    if df.shape != (n, alg.m) or n > alg.n:
        raise DimMismatch(f"df must be {n}x{alg.m} inside Cl({alg.m},{alg.n})")
    off = df.copy()
    k = min(df.shape)
    mu = np.diag(df)[:k].copy()
    off[np.arange(k), np.arange(k)] = 0.0
    if np.any(off != 0.0) or np.any(mu < 0):
        raise ValueError("df must be diagonal with non-negative entries")

    lbar = psd_sqrt(r).matrix
    basis = skew_basis(n)
    big = pair_count(n)

    def lift(coords):
        return df.T @ np.tensordot(coords, basis, axes=(0, 0)) @ df

    c_lift = [alg.c_endo(lift(np.eye(big)[a])) for a in range(big)]
    cb_basis = [alg.cbar_endo(basis[a]) for a in range(big)]
    c_l = [alg.c_endo(lift(lbar[:, a])) for a in range(big)]
    cb_l = [alg.cbar_endo(np.tensordot(lbar[:, a], basis, axes=(0, 0))) for a in range(big)]

    lhs = alg.zero()
    for a in range(big):
        for b in range(big):
            if r.matrix[b, a] != 0.0:
                lhs = lhs + (r.matrix[b, a] / 8.0) * (c_lift[a] * cb_basis[b])
    rhs = alg.zero()
    for x, y in zip(c_l, cb_l):
        d = x - y
        rhs = rhs + (1.0 / 16.0) * (x * x + y * y - d * d)
    res_a = (lhs - rhs).norm()

    sum_bar = alg.zero()
    sum_c = alg.zero()
    for x, y in zip(c_l, cb_l):
        sum_c = sum_c + x * x
        sum_bar = sum_bar + y * y
    weighted = 0.0
    for i in range(k):
        for j in range(k):
            if i != j and i < n and j < n:
                weighted += mu[i] ** 2 * mu[j] ** 2 * r.sectional(i, j)
    res_b = max((sum_bar - (-2.0 * r.scalar()) * alg.one()).norm(),
                (sum_c - (-2.0 * weighted) * alg.one()).norm())
    return res_a, res_b
