"""Lie algebra generated by a curvature image, its block decomposition and types.

Skew matrices are handled through their Lambda^2 coordinates (lexicographic,
orthonormal), so "orthonormal basis of a subalgebra" means orthonormal rows in
that coordinate space.  All per-block data is expressed in block-local
coordinates: a block with orthonormal basis columns ``B`` (n x d) compresses a
skew matrix ``w`` to ``B^T w B``.

Averaging over the group generated by a block algebra is realised as the
orthogonal projection onto the ad-invariant symmetric operators; for a compact
group the Haar average is exactly that projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvature import as_operator
from .errors import (CommutantAnomalous, ImageMismatch, NoConvergence, NotScalar,
                     ProjectionNotPSD, QuaternionicDetected, RicciDegenerate)
from .exterior import ad_matrix, lambda2, pair_count, skew_coords, skew_from_coords, structure_constants
from .numerics import DEFAULT_TOL, Tolerance, nullspace, orthonormalize, rng_from, subspace_distance


@dataclass(frozen=True)
class LieSubalgebra:
    """Orthonormal basis (rows of Lambda^2 coordinates) of a bracket-closed subspace."""

    n: int
    basis: np.ndarray
    closure_residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def matrices(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((0, self.n, self.n))
        return skew_from_coords(self.basis)

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def distance(self, coords) -> float:
        """Euclidean distance from a coordinate vector to the span."""
        c = np.asarray(coords, dtype=float).ravel()
        return float(np.linalg.norm(c - self.projector() @ c))

    def complement(self, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
        """Orthonormal rows spanning the orthogonal complement in Lambda^2."""
        k = pair_count(self.n)
        if self.dim == 0:
            return np.eye(k)
        return nullspace(self.basis, tol).T


def _brackets(basis: np.ndarray, f: np.ndarray) -> np.ndarray:
    """All brackets ``[b_i, b_j]`` for i < j, as coordinate rows."""
    br = np.einsum("ia,jb,abc->ijc", basis, basis, f)
    iu = np.triu_indices(basis.shape[0], 1)
    return br[iu]


def closure_residual(basis: np.ndarray, n: int) -> float:
    if basis.shape[0] < 2:
        return 0.0
    br = _brackets(basis, structure_constants(n))
    outside = br - br @ basis.T @ basis
    return float(np.max(np.linalg.norm(outside, axis=1)))


def lie_closure(generators, n: int, tol: Tolerance = DEFAULT_TOL) -> LieSubalgebra:
    """Smallest bracket-closed subspace containing the generator rows."""
    gens = np.asarray(generators, dtype=float).reshape(-1, pair_count(n))
    basis = orthonormalize(gens, tol) if gens.shape[0] else np.zeros((0, pair_count(n)))
    f = structure_constants(n)
    # the dimension can grow at most dim Lambda^2 times
    for _ in range(pair_count(n) + 1):
        if basis.shape[0] < 2:
            break
        br = _brackets(basis, f)
        outside = br - br @ basis.T @ basis
        norms = np.linalg.norm(outside, axis=1)
        if norms.max() <= tol.id_abs:
            break
        keep = outside[norms > tol.id_abs]
        basis = orthonormalize(np.vstack([basis, keep]), tol)
    else:
        raise NoConvergence("bracket closure did not stabilise")
    return LieSubalgebra(n, basis, closure_residual(basis, n))


def generate_lie_algebra(r, tol: Tolerance = DEFAULT_TOL) -> LieSubalgebra:
    """Lie algebra generated by the image of a curvature operator."""
    r = as_operator(r)
    return lie_closure(r.image_basis(tol), r.n, tol)


# -- commutants ---------------------------------------------------------------

def commutant(mats: np.ndarray, d: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Basis (d x d matrices) of all X with ``X w = w X`` for every ``w`` in ``mats``.

    Row-major vectorisation: ``vec(w X) = (w kron I) vec X`` and
    ``vec(X w) = (I kron w^T) vec X``.
    """
    eye = np.eye(d)
    if len(mats) == 0:
        return np.eye(d * d).reshape(d * d, d, d)
    system = np.vstack([np.kron(w, eye) - np.kron(eye, w.T) for w in mats])
    ker = nullspace(system, tol)
    return ker.T.reshape(-1, d, d)


def _symmetric_part_dim(comm: np.ndarray, tol: Tolerance) -> tuple[int, np.ndarray]:
    d = comm.shape[-1]
    sym = 0.5 * (comm + np.transpose(comm, (0, 2, 1)))
    rows = orthonormalize(sym.reshape(len(sym), d * d), tol)
    return rows.shape[0], rows.reshape(-1, d, d)


# -- decomposition ------------------------------------------------------------

@dataclass
class Block:
    """One invariant summand V_i with everything computed about it."""

    basis: np.ndarray                 # n x d, orthonormal columns
    algebra: LieSubalgebra            # g_i in block-local coordinates
    kind: str = ""                    # "real" or "complex"
    complex_unit: np.ndarray | None = None
    unit_distance: float = 0.0
    commutant_dim: int = 0
    p_basis: np.ndarray | None = None  # rows in Lambda^2 R^d, orthogonal to g_i
    rtilde: np.ndarray | None = None
    rtilde_report: dict = field(default_factory=dict)
    casimir_value: float | None = None
    casimir_report: dict = field(default_factory=dict)
    disjointness_dim: int | None = None

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass
class IsotypicDecomposition:
    n: int
    algebra: LieSubalgebra
    blocks: list[Block]
    splitting_residual: float = 0.0
    sum_residual: float = 0.0

    def lift_block_coords(self, i: int, coords) -> np.ndarray:
        """Lambda^2 R^n coordinates of block-local Lambda^2 R^d coordinates."""
        b = self.blocks[i].basis
        return np.asarray(coords) @ lambda2(b).T

    def p_total(self) -> np.ndarray:
        """Orthonormal rows spanning the direct sum of the p_i inside Lambda^2 R^n."""
        rows = [self.lift_block_coords(i, blk.p_basis) for i, blk in enumerate(self.blocks)
                if blk.p_basis is not None and blk.p_basis.shape[0]]
        if not rows:
            return np.zeros((0, pair_count(self.n)))
        return np.vstack(rows)


def _split(mats: np.ndarray, basis: np.ndarray, rng, tol: Tolerance, depth: int) -> list[np.ndarray]:
    """Recursively split span(basis) into irreducible pieces of the action."""
    if depth > basis.shape[0] + 2:
        raise NoConvergence("block refinement exceeded its iteration cap")
    d = basis.shape[1]
    if d == 1:
        return [basis]
    local = np.einsum("ia,kij,jb->kab", basis, mats, basis)
    comm = commutant(local, d, tol)
    sdim, sym = _symmetric_part_dim(comm, tol)
    if sdim <= 1:
        return [basis]
    # generic symmetric element of the commutant; retry if it happens to be scalar
    for _ in range(3):
        s = np.einsum("k,kab->ab", rng.standard_normal(sdim), sym)
        w, q = np.linalg.eigh(s)
        gaps = np.diff(w)
        scale = max(1.0, float(np.max(np.abs(w))))
        cuts = np.flatnonzero(gaps > 1e3 * tol.id_abs * scale) + 1
        if cuts.size:
            break
    else:
        raise NoConvergence("could not find a non-scalar commutant element")
    pieces = []
    for idx in np.split(np.arange(d), cuts):
        pieces.extend(_split(mats, basis @ q[:, idx], rng, tol, depth + 1))
    return pieces


def _block_sort_key(b: np.ndarray):
    weights = np.sum(b * b, axis=1)
    return (int(np.argmax(weights > 0.5)) if np.any(weights > 0.5) else int(np.argmax(weights)),
            b.shape[1])


def decompose(r, g: LieSubalgebra | None = None, seed=0, tol: Tolerance = DEFAULT_TOL
              ) -> IsotypicDecomposition:
    """Split R^n into irreducible summands of the generated Lie algebra (blocks only).

    Requires positive definite Ricci; raises :class:`RicciDegenerate` otherwise.
    """
    r = as_operator(r)
    ric_min = float(np.linalg.eigvalsh(r.ricci())[0]) if r.n else 0.0
    if ric_min <= tol.id_abs * max(1.0, r.scale):
        raise RicciDegenerate(f"Ricci form is not positive definite (min eigenvalue {ric_min:.3e})")
    if g is None:
        g = generate_lie_algebra(r, tol)
    rng = rng_from(seed)
    mats = g.matrices()
    pieces = _split(mats, np.eye(r.n), rng, tol, 0)
    pieces = [_canonical_basis(p) for p in pieces]
    pieces.sort(key=_block_sort_key)

    blocks = []
    split_res = 0.0
    for i, bi in enumerate(pieces):
        local = np.einsum("ia,kij,jb->kab", bi, mats, bi)
        d = bi.shape[1]
        coords = skew_coords(local) if d >= 2 else np.zeros((len(local), 0))
        basis = orthonormalize(coords, tol) if d >= 2 and len(coords) else np.zeros((0, pair_count(d)))
        blocks.append(Block(basis=bi, algebra=LieSubalgebra(d, basis, closure_residual(basis, d))))
        for j, bj in enumerate(pieces):
            if i != j:
                off = np.einsum("ia,kij,jb->kab", bj, mats, bi)
                if off.size:
                    split_res = max(split_res, float(np.max(np.abs(off))))
    dec = IsotypicDecomposition(r.n, g, blocks, splitting_residual=split_res)
    # g = sum of g_i: every block algebra lifts into g, and dimensions add up
    lifted = [dec.lift_block_coords(i, b.algebra.basis) for i, b in enumerate(blocks) if b.algebra.dim]
    total = sum(b.algebra.dim for b in blocks)
    res = abs(total - g.dim) * 1.0
    for rows in lifted:
        for row in rows:
            res = max(res, g.distance(row))
    dec.sum_residual = res
    return dec


def _canonical_basis(b: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(b): the rotation-invariant projector's eigvecs."""
    p = b @ b.T
    w, q = np.linalg.eigh(p)
    q = q[:, w > 0.5]
    # fix sign so the largest-magnitude entry of each column is positive
    idx = np.argmax(np.abs(q), axis=0)
    signs = np.sign(q[idx, np.arange(q.shape[1])])
    signs[signs == 0] = 1.0
    return q * signs


# -- classification -----------------------------------------------------------

def classify_block(algebra: LieSubalgebra, tol: Tolerance = DEFAULT_TOL
                   ) -> tuple[str, np.ndarray | None, float, int]:
    """Type of an irreducible block from the dimension of its commutant.

    Returns ``(kind, I, dist(I, g_i), commutant_dim)``; ``I`` is None for
    real blocks.
    """
    d = algebra.n
    mats = algebra.matrices()
    comm = commutant(mats, d, tol)
    k = comm.shape[0]
    if k == 1:
        return "real", None, 0.0, 1
    if k == 4:
        raise QuaternionicDetected("commutant is 4-dimensional (quaternionic block)")
    if k != 2:
        raise CommutantAnomalous(f"commutant has unexpected dimension {k}")
    skew = 0.5 * (comm - np.transpose(comm, (0, 2, 1)))
    norms = np.linalg.norm(skew.reshape(k, -1), axis=1)
    unit = skew[int(np.argmax(norms))]
    sq = unit @ unit
    c = -np.trace(sq) / d
    if c <= 0:
        raise CommutantAnomalous("skew part of the commutant does not square to a negative scalar")
    unit = unit / np.sqrt(c)
    # fix the orientation deterministically
    flat = unit.ravel()
    lead = flat[np.argmax(np.abs(flat) > 1e-6)]
    if lead < 0:
        unit = -unit
    dist = algebra.distance(skew_coords(unit)) if d >= 2 else 0.0
    return "complex", unit, dist, 2


def restrict_operator(r, basis: np.ndarray) -> np.ndarray:
    """Matrix of ``R`` compressed to Lambda^2 of span(basis)."""
    r = as_operator(r)
    p = lambda2(basis.T)
    return p @ r.matrix @ p.T


def invariant_symmetric_space(algebra: LieSubalgebra, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Frobenius-orthonormal basis (vec_r) of symmetric S with ``[ad_w, S] = 0`` on g_i."""
    k = pair_count(algebra.n)
    eye = np.eye(k)
    rows = []
    for w in algebra.basis:
        a = ad_matrix(w)
        rows.append(np.kron(a, eye) - np.kron(eye, a.T))
    perm = np.eye(k * k).reshape(k, k, k, k).transpose(0, 1, 3, 2).reshape(k * k, k * k)
    rows.append(np.eye(k * k) - perm)
    return nullspace(np.vstack(rows), tol)


def averaged_operator(r, block: Block, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, dict]:
    """Projection of the restricted operator onto the ad-invariant symmetric operators.

    Verifies PSD, ``image = g_i``, invertibility on g_i, equivariance and
    non-vanishing trace; returns the operator and a report of residuals.
    """
    d = block.dim
    k = pair_count(d)
    if k == 0:
        return np.zeros((0, 0)), {"image_distance": 0.0, "min_singular_ratio": 1.0,
                                  "equivariance": 0.0, "trace": 0.0}
    ri = restrict_operator(r, block.basis)
    z = invariant_symmetric_space(block.algebra, tol)
    rt = (z @ (z.T @ ri.reshape(-1))).reshape(k, k)
    rt = 0.5 * (rt + rt.T)
    w, q = np.linalg.eigh(rt)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -1e3 * tol.id_abs * scale:
        raise ProjectionNotPSD(f"averaged operator has eigenvalue {w[0]:.3e}")
    img = q[:, w > tol.rank_rel * 1e3 * w[-1]] if w[-1] > 0 else np.zeros((k, 0))
    dist = subspace_distance(img, block.algebra.basis.T)
    g = block.algebra.basis
    comp = g @ rt @ g.T
    sv = np.linalg.svd(comp, compute_uv=False) if comp.size else np.array([1.0])
    ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    equiv = 0.0
    for wv in g:
        a = ad_matrix(wv)
        equiv = max(equiv, float(np.max(np.abs(a @ rt - rt @ a))))
    report = {"image_distance": dist, "min_singular_ratio": ratio,
              "equivariance": equiv, "trace": float(np.trace(rt))}
    if dist > 1e-6 or ratio < 1e-6:
        raise ImageMismatch(f"image of averaged operator differs from g_i (distance {dist:.3e}, "
                            f"singular ratio {ratio:.3e})")
    return rt, report


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, q = np.linalg.eigh(m)
    return (q * np.sqrt(np.clip(w, 0.0, None))) @ q.T


def casimir(block: Block, rtilde: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Casimir operators of the weighted basis ``Rt^(1/2) w_a``.

    Returns ``lambda`` (scalar of the vector representation), the vector-rep
    matrix, the adjoint-rep matrix on Lambda^2 V_i, its compression to p_i and
    the residuals.  Raises :class:`NotScalar` if either fails to be scalar.
    """
    d = block.dim
    g = block.algebra.basis
    root = _psd_sqrt(rtilde)
    weighted = g @ root  # rows: Rt^(1/2) w_a (root is symmetric)
    mats = skew_from_coords(weighted)
    vec = np.einsum("aij,ajk->ik", mats, mats)
    lam = float(np.trace(vec) / d)
    vec_res = float(np.max(np.abs(vec - lam * np.eye(d))))
    ads = np.array([ad_matrix(w) for w in weighted])
    adj = np.einsum("aij,ajk->ik", ads, ads)
    p = block.p_basis if block.p_basis is not None else np.zeros((0, pair_count(d)))
    adj_p = p @ adj @ p.T
    adj_res = float(np.max(np.abs(adj_p - 2.0 * lam * np.eye(p.shape[0])))) if p.shape[0] else 0.0
    # the generated algebra must preserve p_i, otherwise the compression is meaningless
    leak = float(np.max(np.abs(adj @ p.T - p.T @ adj_p))) if p.shape[0] else 0.0
    limit = 10 * tol.id_abs * max(1.0, abs(lam))
    if vec_res > limit:
        raise NotScalar(f"vector Casimir deviates from a scalar by {vec_res:.3e}")
    if max(adj_res, leak) > limit:
        raise NotScalar(f"adjoint Casimir on p deviates from 2*lambda by {max(adj_res, leak):.3e}")
    if lam >= 0:
        raise NotScalar(f"Casimir scalar {lam:.3e} is not negative")
    return {"lambda": lam, "vector": vec, "adjoint": adj, "adjoint_on_p": adj_p,
            "vector_residual": vec_res, "adjoint_residual": max(adj_res, leak)}


def casimir_oracle(rtilde: np.ndarray, d: int) -> np.ndarray:
    """``sum_{b,c} Rt_bc e_b e_c`` over the full basis of Lambda^2 R^d; no square root."""
    mats = skew_from_coords(np.eye(pair_count(d)))
    return np.einsum("bc,bij,cjk->ik", rtilde, mats, mats)


def disjointness_check(algebra: LieSubalgebra, p_basis, p_action=None,
                       tol: Tolerance = DEFAULT_TOL) -> int:
    """Dimension of the space of intertwiners V_i -> p_i.

    Solves ``Phi w = A_w Phi`` for all basis ``w`` of g_i, where ``A_w`` is
    ``ad_w`` compressed to ``p`` unless ``p_action`` supplies the matrices.
    """
    d = algebra.n
    p_basis = np.asarray(p_basis, dtype=float).reshape(-1, pair_count(d))
    pdim = p_basis.shape[0]
    if pdim == 0 or algebra.dim == 0:
        return 0 if pdim == 0 else pdim * d
    mats = algebra.matrices()
    if p_action is None:
        p_action = [p_basis @ ad_matrix(w) @ p_basis.T for w in algebra.basis]
    eye_p, eye_d = np.eye(pdim), np.eye(d)
    system = np.vstack([np.kron(eye_p, w.T) - np.kron(a, eye_d) for w, a in zip(mats, p_action)])
    return nullspace(system, tol).shape[1]


def classify(r, seed=0, tol: Tolerance = DEFAULT_TOL) -> IsotypicDecomposition:
    """Full pipeline: blocks, types, averaged operators, Casimirs, disjointness."""
    r = as_operator(r)
    dec = decompose(r, seed=seed, tol=tol)
    for blk in dec.blocks:
        kind, unit, dist, cdim = classify_block(blk.algebra, tol)
        blk.kind, blk.complex_unit, blk.unit_distance, blk.commutant_dim = kind, unit, dist, cdim
        blk.p_basis = blk.algebra.complement(tol) if blk.dim >= 2 else np.zeros((0, 0))
        blk.rtilde, blk.rtilde_report = averaged_operator(r, blk, tol)
        if blk.dim >= 2:
            rep = casimir(blk, blk.rtilde, tol)
            blk.casimir_value = rep["lambda"]
            blk.casimir_report = rep
            blk.disjointness_dim = disjointness_check(blk.algebra, blk.p_basis, tol=tol)
        else:
            blk.disjointness_dim = 0
    return dec


__all__ = [
    "Block", "IsotypicDecomposition", "LieSubalgebra", "averaged_operator", "casimir",
    "casimir_oracle", "classify", "classify_block", "closure_residual", "commutant",
    "decompose", "disjointness_check", "generate_lie_algebra", "invariant_symmetric_space",
    "lie_closure", "restrict_operator",
]
