"""Dense linear-algebra helpers and the tolerance policy used everywhere else.

Matrices are plain ``numpy.ndarray`` objects; :func:`as_dense` is the single
entry point that validates shape and finiteness.  All rank decisions are made
relative to the largest singular value of the matrix in question.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NotSymmetric


@dataclass(frozen=True)
class Tolerance:
    """Thresholds for rank decisions (relative) and identity checks (absolute)."""

    rank_rel: float = 1e-9
    id_abs: float = 1e-9

    def __post_init__(self):
        for name in ("rank_rel", "id_abs"):
            val = getattr(self, name)
            if not (0.0 < val < 1e-3):
                raise ValueError(f"{name} must lie in (0, 1e-3), got {val!r}")


DEFAULT_TOL = Tolerance()


def as_dense(m, ndim: int = 2) -> np.ndarray:
    """Return ``m`` as a float64 array, rejecting NaN/Inf entries."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("matrix contains NaN or Inf entries")
    return arr


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def symmetric_eig(m, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix.

    Returns ``(w, q)`` with ascending eigenvalues ``w`` and orthonormal
    eigenvectors in the columns of ``q``.
    """
    m = as_dense(m)
    if m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"matrix is not square: {m.shape}")
    asym = np.max(np.abs(m - m.T)) if m.size else 0.0
    scale = max(1.0, np.max(np.abs(m))) if m.size else 1.0
    if asym > tol.id_abs * scale:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {tol.id_abs:.1e}")
    w, q = np.linalg.eigh(0.5 * (m + m.T))
    return w, q


def nullspace(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the approximate kernel of ``m``.

    A singular direction counts as null when its singular value is at most
    ``tol.rank_rel`` times the largest one.  The zero matrix has full kernel.
    """
    m = as_dense(m)
    rows, cols = m.shape
    if cols == 0:
        return np.zeros((0, 0))
    if rows == 0:
        return np.eye(cols)
    # a full V is only needed for wide matrices; avoids a huge U for tall ones
    _, s, vh = np.linalg.svd(m, full_matrices=rows < cols)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(cols)
    rank = int(np.sum(s > tol.rank_rel * smax))
    return vh[rank:].T.copy()


def rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    m = as_dense(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rel * s[0]))


def column_space(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the range of ``m``."""
    m = as_dense(m)
    if m.size == 0:
        return np.zeros((m.shape[0], 0))
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((m.shape[0], 0))
    r = int(np.sum(s > tol.rank_rel * s[0]))
    return u[:, :r].copy()


def orthonormalize(vectors, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Modified Gram-Schmidt with a drop rule.

    ``vectors`` is a sequence of 1-d arrays (or a 2-d array whose rows are
    the vectors).  A vector is dropped when the norm of its residual after
    projection falls below ``tol.rank_rel`` times the largest input norm.
    Returns the kept orthonormal vectors as rows.
    """
    vecs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not vecs:
        return np.zeros((0, 0))
    dim = vecs[0].size
    scale = max(np.linalg.norm(v) for v in vecs)
    if scale == 0.0:
        return np.zeros((0, dim))
    out: list[np.ndarray] = []
    for v in vecs:
        w = v.copy()
        # two passes keep the basis orthonormal to machine precision
        for _ in range(2):
            for q in out:
                w -= (q @ w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol.rank_rel * scale:
            out.append(w / nrm)
    return np.array(out).reshape(len(out), dim)


def least_squares_solve(a, b) -> np.ndarray:
    """Minimum-norm least-squares solution of ``a x = b``."""
    a = as_dense(a)
    b = np.asarray(b, dtype=float)
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x


def subspace_distance(a, b) -> float:
    """Spectral norm of the difference of orthogonal projectors onto two spans.

    ``a`` and ``b`` hold orthonormal basis vectors as columns.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pa = a @ a.T if a.size else np.zeros((a.shape[0], a.shape[0]))
    pb = b @ b.T if b.size else np.zeros((b.shape[0], b.shape[0]))
    if pa.size == 0:
        return 0.0
    return float(np.linalg.norm(pa - pb, 2))


def random_orthogonal(n: int, rng) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    rng = rng_from(rng)
    if n == 0:
        return np.zeros((0, 0))
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diag(r))
