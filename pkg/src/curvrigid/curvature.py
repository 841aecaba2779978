"""Algebraic curvature operators on Lambda^2 R^n.

A :class:`CurvatureOperator` is a symmetric matrix in the lexicographic wedge
basis.  The associated 4-tensor is ``R(a, b, c, d) = <Q(e_a ^ e_b), e_c ^ e_d>``
and the sign convention is pinned by the round sphere: ``sphere(n)`` is the
identity on Lambda^2 and has ``Ric = (n - 1) id``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from .errors import BianchiViolated, ClaimsMismatch, DimMismatch, NotPSD, NotSymmetric
from .exterior import lambda2, pair_count, pair_index, pairs
from .numerics import DEFAULT_TOL, Tolerance, as_dense, random_orthogonal, rng_from, symmetric_eig


@dataclass(frozen=True)
class CurvatureOperator:
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_dense(self.matrix)
        k = pair_count(self.n)
        if m.shape != (k, k):
            raise DimMismatch(f"operator on Lambda^2 R^{self.n} must be {k}x{k}, got {m.shape}")
        if k and np.max(np.abs(m - m.T)) > DEFAULT_TOL.id_abs * max(1.0, np.max(np.abs(m))):
            raise NotSymmetric("curvature operator matrix is not symmetric")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    # -- flags -----------------------------------------------------------
    @cached_property
    def bianchi_ok(self) -> bool:
        return bianchi_check(self) <= DEFAULT_TOL.id_abs * max(1.0, self.scale)

    @cached_property
    def psd_ok(self) -> bool:
        if self.matrix.size == 0:
            return True
        return float(np.linalg.eigvalsh(self.matrix)[0]) >= -DEFAULT_TOL.id_abs * max(1.0, self.scale)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.matrix))) if self.matrix.size else 0.0

    # -- derived quantities ----------------------------------------------
    def tensor(self) -> np.ndarray:
        return curvature_tensor(self)

    def ricci(self) -> np.ndarray:
        return ricci(self)

    def scalar(self) -> float:
        return scalar(self)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def image_basis(self, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
        """Orthonormal rows spanning the image, in Lambda^2 coordinates."""
        if self.matrix.size == 0:
            return np.zeros((0, 0))
        w, q = symmetric_eig(self.matrix, tol)
        wmax = np.max(np.abs(w))
        if wmax == 0.0:
            return np.zeros((0, self.matrix.shape[0]))
        return q[:, np.abs(w) > tol.rank_rel * wmax].T.copy()

    def sectional(self, i: int, j: int) -> float:
        """``R_ijji``: the value ``<Q(e_i ^ e_j), e_i ^ e_j>``."""
        if i == j:
            return 0.0
        k = pair_index(self.n)[(min(i, j), max(i, j))]
        return float(self.matrix[k, k])

    def __add__(self, other: "CurvatureOperator") -> "CurvatureOperator":
        if other.n != self.n:
            raise DimMismatch("cannot add operators on different dimensions")
        return CurvatureOperator(self.n, self.matrix + other.matrix)

    def __mul__(self, t: float) -> "CurvatureOperator":
        return CurvatureOperator(self.n, float(t) * self.matrix)

    __rmul__ = __mul__

    # -- serialisation ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "basis": "lex-wedge",
            "matrix": self.matrix.tolist(),
            "claims": {"psd": bool(self.psd_ok), "bianchi": bool(self.bianchi_ok)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CurvatureOperator":
        """Build from the JSON fixture schema, re-verifying the stated claims."""
        try:
            n = data["n"]
            basis = data["basis"]
            matrix = data["matrix"]
            claims = data["claims"]
        except (KeyError, TypeError) as exc:
            raise ClaimsMismatch(f"fixture is missing field {exc}") from exc
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise ClaimsMismatch(f"'n' must be a non-negative integer, got {n!r}")
        if basis != "lex-wedge":
            raise ClaimsMismatch(f"unsupported basis {basis!r}")
        try:
            op = cls(n, np.array(matrix, dtype=float).reshape(pair_count(n), pair_count(n)))
        except (ValueError, TypeError) as exc:
            raise ClaimsMismatch(f"bad matrix: {exc}") from exc
        for key, actual in (("psd", op.psd_ok), ("bianchi", op.bianchi_ok)):
            if key not in claims or not isinstance(claims[key], bool):
                raise ClaimsMismatch(f"claims.{key} must be a boolean")
            if claims[key] != actual:
                raise ClaimsMismatch(f"claims.{key}={claims[key]} but verification gives {actual}")
        return op


def load(path) -> CurvatureOperator:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ClaimsMismatch(f"{path}: not valid JSON ({exc})") from exc
    return CurvatureOperator.from_dict(data)


def save(op: CurvatureOperator, path) -> None:
    Path(path).write_text(json.dumps(op.to_dict(), indent=1) + "\n")


def as_operator(r) -> CurvatureOperator:
    if isinstance(r, CurvatureOperator):
        return r
    m = as_dense(r)
    k = m.shape[0]
    n = int(round((1 + np.sqrt(1 + 8 * k)) / 2))
    return CurvatureOperator(n, m)


# -- contractions -----------------------------------------------------------

def curvature_tensor(r) -> np.ndarray:
    """Full tensor ``T[a, b, c, d] = <Q(e_a ^ e_b), e_c ^ e_d>``."""
    r = as_operator(r)
    n = r.n
    t = np.zeros((n, n, n, n))
    if n < 2:
        return t
    p = np.array(pairs(n))
    i, j = p[:, 0], p[:, 1]
    m = r.matrix
    t[i[:, None], j[:, None], i[None, :], j[None, :]] = m
    t[j[:, None], i[:, None], i[None, :], j[None, :]] = -m
    t[i[:, None], j[:, None], j[None, :], i[None, :]] = -m
    t[j[:, None], i[:, None], j[None, :], i[None, :]] = m
    return t


def ricci(r) -> np.ndarray:
    """``Ric(X, Y) = sum_j <Q(X ^ e_j), Y ^ e_j>``; the sphere gives ``(n-1) id``."""
    t = curvature_tensor(r)
    return np.einsum("ajbj->ab", t)


def scalar(r) -> float:
    return float(np.trace(ricci(r)))


def bianchi_defect(r) -> np.ndarray:
    """Cyclic sums ``T[a,b,c,d] + T[b,c,a,d] + T[c,a,b,d]`` over all indices."""
    t = curvature_tensor(r)
    return t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))


def bianchi_check(r) -> float:
    """Largest violation of the first Bianchi identity."""
    r = as_operator(r)
    if r.n < 3:
        return 0.0
    return float(np.max(np.abs(bianchi_defect(r))))


@lru_cache(maxsize=None)
def _bianchi_functionals(n: int) -> np.ndarray:
    """One symmetric matrix G per 4-subset with <G, S>_F = b(S)_{abcd}."""
    k = pair_count(n)
    idx = pair_index(n)
    quads = list(itertools.combinations(range(n), 4))
    g = np.zeros((len(quads), k, k))
    for q, (a, b, c, d) in enumerate(quads):
        for (p1, p2), sign in ((((a, b), (c, d)), 1.0),
                               (((a, c), (b, d)), -1.0),
                               (((a, d), (b, c)), 1.0)):
            u, v = idx[p1], idx[p2]
            g[q, u, v] += 0.5 * sign
            g[q, v, u] += 0.5 * sign
    g.setflags(write=False)
    return g


def bianchi_project(s, n: int | None = None, tol: Tolerance = DEFAULT_TOL) -> CurvatureOperator:
    """Frobenius-orthogonal projection of a symmetric operator onto ker(b).

    The functionals ``G_abcd`` for distinct 4-subsets have pairwise disjoint
    supports, so the projection is a sum of rank-one corrections.
    """
    if isinstance(s, CurvatureOperator):
        n, m = s.n, s.matrix
    else:
        m = as_dense(s)
        if n is None:
            n = as_operator(m).n
    w, _ = symmetric_eig(m, tol) if m.size else (None, None)
    m = 0.5 * (m + m.T)
    if n < 4:
        return CurvatureOperator(n, m)
    g = _bianchi_functionals(n)
    coeffs = np.einsum("qij,ij->q", g, m) / 1.5
    return CurvatureOperator(n, m - np.einsum("q,qij->ij", coeffs, g))


def psd_sqrt(r, tol: Tolerance = DEFAULT_TOL) -> CurvatureOperator:
    """Symmetric PSD square root; raises :class:`NotPSD` on negative spectrum."""
    r = as_operator(r)
    if r.matrix.size == 0:
        return r
    w, q = symmetric_eig(r.matrix, tol)
    if w[0] < -tol.id_abs * max(1.0, r.scale):
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is negative")
    w = np.clip(w, 0.0, None)
    return CurvatureOperator(r.n, (q * np.sqrt(w)) @ q.T)


def require_valid(r, psd: bool = True, bianchi: bool = True) -> CurvatureOperator:
    r = as_operator(r)
    if bianchi and not r.bianchi_ok:
        raise BianchiViolated(f"operator violates Bianchi by {bianchi_check(r):.3e}",
                              residual=bianchi_check(r))
    if psd and not r.psd_ok:
        raise NotPSD(f"operator has negative eigenvalue {r.eigenvalues()[0]:.3e}")
    return r


# -- fixtures ---------------------------------------------------------------

def sphere(n: int) -> CurvatureOperator:
    """Unit round sphere: the identity on Lambda^2 R^n."""
    if n < 1:
        raise ValueError("sphere dimension must be at least 1")
    return CurvatureOperator(n, np.eye(pair_count(n)))


def from_endomorphism_tensor(n: int, rxyz) -> CurvatureOperator:
    """Operator from ``rxyz[a, b, d, c] = <R(e_a, e_b) e_d, e_c>``.

    ``rxyz[a, b, d]`` is the vector ``R(e_a, e_b) e_d``; the sphere tensor
    ``R(X,Y)Z = <Y,Z>X - <X,Z>Y`` maps to the identity.
    """
    p = np.array(pairs(n))
    i, j = p[:, 0], p[:, 1]
    m = rxyz[i[:, None], j[:, None], j[None, :], i[None, :]]
    return CurvatureOperator(n, m)


def complex_structure(k: int) -> np.ndarray:
    """Standard J on R^{2k}: ``J e_{2i} = e_{2i+1}``."""
    j = np.zeros((2 * k, 2 * k))
    for i in range(k):
        j[2 * i + 1, 2 * i] = 1.0
        j[2 * i, 2 * i + 1] = -1.0
    return j


def fubini_study(k: int) -> CurvatureOperator:
    """Fubini-Study operator of CP^k on R^{2k}, holomorphic sectional curvature 4.

    ``R(X,Y)Z = <Y,Z>X - <X,Z>Y + <JY,Z>JX - <JX,Z>JY + 2<X,JY>JZ``, giving
    ``Ric = 2(k+1) id`` and sectional curvatures in [1, 4].
    """
    if k < 1:
        raise ValueError("fubini_study needs k >= 1")
    n = 2 * k
    e = np.eye(n)
    jm = complex_structure(k)
    je = jm @ e  # columns J e_a
    # rxyz[a, b, d, :] = R(e_a, e_b) e_d
    rxyz = (np.einsum("bd,ac->abdc", e, e) - np.einsum("ad,bc->abdc", e, e)
            + np.einsum("bd,ac->abdc", je.T @ e, je.T)
            - np.einsum("ad,bc->abdc", je.T @ e, je.T)
            + 2.0 * np.einsum("ab,dc->abdc", e.T @ je, je.T))
    return from_endomorphism_tensor(n, rxyz)


def product(r1, r2) -> CurvatureOperator:
    """Riemannian product: R1 on Lambda^2 V1, R2 on Lambda^2 V2, zero on V1 ^ V2."""
    r1, r2 = as_operator(r1), as_operator(r2)
    n = r1.n + r2.n
    idx = pair_index(n)
    m = np.zeros((pair_count(n), pair_count(n)))
    emb1 = [idx[p] for p in pairs(r1.n)]
    emb2 = [idx[(a + r1.n, b + r1.n)] for a, b in pairs(r2.n)]
    m[np.ix_(emb1, emb1)] = r1.matrix
    m[np.ix_(emb2, emb2)] = r2.matrix
    return CurvatureOperator(n, m)


def conjugate(r, o) -> CurvatureOperator:
    """Push an operator forward by an orthogonal map: ``L2(O) Q L2(O)^T``."""
    r = as_operator(r)
    o = as_dense(o)
    if o.shape != (r.n, r.n):
        raise DimMismatch(f"orthogonal matrix must be {r.n}x{r.n}")
    if np.max(np.abs(o @ o.T - np.eye(r.n))) > 1e-8:
        raise ValueError("conjugating matrix is not orthogonal")
    l2 = lambda2(o)
    return CurvatureOperator(r.n, l2 @ r.matrix @ l2.T)


RECIPES = ("mixed", "sphere", "product", "fubini_study")


def _fixture_pool(n: int, recipe: str) -> list[CurvatureOperator]:
    pool = []
    if recipe in ("mixed", "sphere"):
        pool.append(sphere(n))
    if recipe in ("mixed", "product"):
        pool.extend(product(sphere(a), sphere(n - a)) for a in range(2, n - 1))
    if recipe in ("mixed", "fubini_study") and n % 2 == 0:
        pool.append(fubini_study(n // 2))
    if not pool:
        raise ValueError(f"recipe {recipe!r} has no fixtures in dimension {n}")
    return pool


def random_valid(seed, n: int, recipe: str = "mixed", terms: int = 3) -> CurvatureOperator:
    """Convex combination of randomly conjugated certified fixtures.

    Both flags hold by construction; random PSD matrices are never projected
    onto the Bianchi kernel since that does not preserve positivity.
    """
    if recipe not in RECIPES:
        raise ValueError(f"unknown recipe {recipe!r}; choose from {RECIPES}")
    if n < 2:
        raise ValueError("random_valid needs n >= 2")
    rng = rng_from(seed)
    pool = _fixture_pool(n, recipe)
    weights = rng.dirichlet(np.ones(terms))
    m = np.zeros((pair_count(n), pair_count(n)))
    for w in weights:
        base = pool[rng.integers(len(pool))]
        m += w * conjugate(base, random_orthogonal(n, rng)).matrix
    return CurvatureOperator(n, m)


def random_symmetric(seed, n: int) -> np.ndarray:
    """Random symmetric matrix on Lambda^2 R^n (generally not Bianchi)."""
    rng = rng_from(seed)
    k = pair_count(n)
    a = rng.standard_normal((k, k))
    return 0.5 * (a + a.T)


def four_form_operator() -> CurvatureOperator:
    """Operator on R^4 coupling ``e1^e2 <-> e3^e4`` only; violates Bianchi."""
    idx = pair_index(4)
    m = np.zeros((6, 6))
    m[idx[(0, 1)], idx[(2, 3)]] = m[idx[(2, 3)], idx[(0, 1)]] = 1.0
    return CurvatureOperator(4, m)
