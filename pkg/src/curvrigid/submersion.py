"""Pointwise data of a Riemannian submersion and the O'Neill identities.

Frames are aligned: the first n coordinates of R^m are horizontal (and map
isometrically onto R^n), the last k = m - n are vertical.

* ``A[x, y, v]`` is component v of ``A_{e_x} e_y`` (antisymmetric in x, y).
* ``T[u, w, x]`` is component x of ``T_{e_u} e_w`` (symmetric in u, w).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .curvature import CurvatureOperator, as_operator, conjugate, product, sphere
from .errors import DimMismatch, MissingCurvature, WrongSlot
from .exterior import Bivector, from_skew, to_skew
from .numerics import DEFAULT_TOL, as_dense


@dataclass(frozen=True)
class SubmersionPoint:
    m: int
    n: int
    A: np.ndarray
    T: np.ndarray
    R_M: CurvatureOperator | None = None
    R_N: CurvatureOperator | None = None
    grad_H: np.ndarray | None = None

    def __post_init__(self):
        k = self.m - self.n
        if self.n < 0 or k < 0:
            raise DimMismatch(f"need 0 <= n <= m, got m={self.m}, n={self.n}")
        a = as_dense(self.A, ndim=3)
        t = as_dense(self.T, ndim=3)
        if a.shape != (self.n, self.n, k):
            raise DimMismatch(f"A must have shape {(self.n, self.n, k)}, got {a.shape}")
        if t.shape != (k, k, self.n):
            raise DimMismatch(f"T must have shape {(k, k, self.n)}, got {t.shape}")
        if a.size and np.max(np.abs(a + a.transpose(1, 0, 2))) > DEFAULT_TOL.id_abs:
            raise ValueError("A must be antisymmetric in its horizontal slots")
        if t.size and np.max(np.abs(t - t.transpose(1, 0, 2))) > DEFAULT_TOL.id_abs:
            raise ValueError("T must be symmetric in its vertical slots")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "T", t)
        if self.R_M is not None:
            object.__setattr__(self, "R_M", as_operator(self.R_M))
            if self.R_M.n != self.m:
                raise DimMismatch("R_M must act on Lambda^2 R^m")
        if self.R_N is not None:
            object.__setattr__(self, "R_N", as_operator(self.R_N))
            if self.R_N.n != self.n:
                raise DimMismatch("R_N must act on Lambda^2 R^n")
        g = np.zeros((self.m, self.m)) if self.grad_H is None else as_dense(self.grad_H)
        if g.shape != (self.m, self.m):
            raise DimMismatch(f"grad_H must be {self.m}x{self.m}")
        object.__setattr__(self, "grad_H", g)

    @property
    def k(self) -> int:
        return self.m - self.n

    # -- vectors -------------------------------------------------------------
    def horizontal(self, x) -> np.ndarray:
        """Horizontal coordinates of an m-vector; raises WrongSlot if it has a vertical part."""
        x = np.asarray(x, dtype=float).ravel()
        if x.size == self.n:
            return x
        if x.size != self.m:
            raise DimMismatch(f"vector of length {x.size} in R^{self.m}")
        if np.max(np.abs(x[self.n:]), initial=0.0) > DEFAULT_TOL.id_abs * max(1.0, np.max(np.abs(x))):
            raise WrongSlot("expected a horizontal vector")
        return x[:self.n]

    def vertical(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float).ravel()
        if u.size == self.k and u.size != self.m:
            return u
        if u.size != self.m:
            raise DimMismatch(f"vector of length {u.size} in R^{self.m}")
        if np.max(np.abs(u[:self.n]), initial=0.0) > DEFAULT_TOL.id_abs * max(1.0, np.max(np.abs(u))):
            raise WrongSlot("expected a vertical vector")
        return u[self.n:]

    # -- serialisation -------------------------------------------------------
    def to_dict(self) -> dict:
        out = {"m": self.m, "n": self.n, "A": self.A.tolist(), "T": self.T.tolist(),
               "grad_H": self.grad_H.tolist()}
        if self.R_M is not None:
            out["R_M"] = self.R_M.matrix.tolist()
        if self.R_N is not None:
            out["R_N"] = self.R_N.matrix.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SubmersionPoint":
        m, n = int(data["m"]), int(data["n"])
        k = m - n
        a = np.array(data.get("A", np.zeros((n, n, k))), dtype=float).reshape(n, n, k)
        t = np.array(data.get("T", np.zeros((k, k, n))), dtype=float).reshape(k, k, n)
        rm = CurvatureOperator(m, np.array(data["R_M"], dtype=float)) if "R_M" in data else None
        rn = CurvatureOperator(n, np.array(data["R_N"], dtype=float)) if "R_N" in data else None
        gh = np.array(data["grad_H"], dtype=float) if "grad_H" in data else None
        return cls(m, n, a, t, rm, rn, gh)


def load(path) -> SubmersionPoint:
    with open(path) as fh:
        return SubmersionPoint.from_dict(json.load(fh))


@dataclass(frozen=True)
class DerivedMaps:
    A_X: np.ndarray | None = None      # k x n
    S_X: np.ndarray | None = None      # k x k
    A_U_star: np.ndarray | None = None  # n x n
    T_U_star: np.ndarray | None = None  # k x n


def a_x(sp: SubmersionPoint, x) -> np.ndarray:
    """``A_X`` as a k x n matrix: horizontal -> vertical."""
    return np.einsum("x,xyv->vy", sp.horizontal(x), sp.A)


def s_x(sp: SubmersionPoint, x) -> np.ndarray:
    """Shape operator ``S_X U = T_U^* X`` as a symmetric k x k matrix."""
    return np.einsum("x,uwx->wu", sp.horizontal(x), sp.T)


def a_u_star(sp: SubmersionPoint, u) -> np.ndarray:
    """``A_U^*`` with ``<A_U^* X, Y> = <A_X Y, U>``; skew n x n."""
    return np.einsum("v,xyv->yx", sp.vertical(u), sp.A)


def t_u_star(sp: SubmersionPoint, u) -> np.ndarray:
    """``T_U^*`` with ``<T_U^* X, W> = <T_U W, X>``; k x n."""
    return np.einsum("u,uwx->wx", sp.vertical(u), sp.T)


def derived_maps(sp: SubmersionPoint, x=None, u=None) -> DerivedMaps:
    if x is None and u is None:
        raise ValueError("give a horizontal X, a vertical U, or both")
    return DerivedMaps(
        A_X=a_x(sp, x) if x is not None else None,
        S_X=s_x(sp, x) if x is not None else None,
        A_U_star=a_u_star(sp, u) if u is not None else None,
        T_U_star=t_u_star(sp, u) if u is not None else None,
    )


def mean_curvature(sp: SubmersionPoint) -> np.ndarray:
    """``H = sum_i Tr(S_{b_i}) b_i`` as an m-vector (vertical part zero)."""
    h = np.zeros(sp.m)
    h[:sp.n] = np.einsum("uux->x", sp.T)
    return h


def oneill_ricci_defect(sp: SubmersionPoint, x) -> float:
    """``Ric_M(X,X) - [Ric_N(X,X) - 2|A_X|^2 - |S_X|^2 + <grad_X H, X>]``.

    Norms are Frobenius norms in orthonormal frames.
    """
    if sp.R_M is None or sp.R_N is None:
        raise MissingCurvature("both R_M and R_N are needed for the Ricci defect")
    xh = sp.horizontal(x)
    xm = np.concatenate([xh, np.zeros(sp.k)])
    ric_m = xm @ sp.R_M.ricci() @ xm
    ric_n = xh @ sp.R_N.ricci() @ xh
    rhs = (ric_n - 2.0 * np.sum(a_x(sp, xh) ** 2) - np.sum(s_x(sp, xh) ** 2)
           + xm @ sp.grad_H @ xm)
    return float(ric_m - rhs)


@dataclass(frozen=True)
class Verdict:
    kind: str            # "product" or "obstructed"
    witness: str = ""
    details: dict | None = None

    @property
    def is_product(self) -> bool:
        return self.kind == "product"


def rigidity_conclusion(sp: SubmersionPoint, tol: float = 1e-9) -> Verdict:
    """Equal Ricci forms plus minimal fibres force ``A = T = 0``."""
    if sp.R_M is None or sp.R_N is None:
        raise MissingCurvature("rigidity needs both curvature operators")
    n = sp.n
    ric_m = sp.R_M.ricci()[:n, :n]
    ric_n = sp.R_N.ricci()
    gap = float(np.max(np.abs(ric_m - ric_n))) if n else 0.0
    if gap > tol:
        i = int(np.argmax(np.abs(np.diag(ric_m - ric_n)))) if n else 0
        return Verdict("obstructed", "Ric_M != f*Ric_N",
                       {"max_gap": gap, "index": i,
                        "ric_M": float(ric_m[i, i]), "ric_N": float(ric_n[i, i])})
    h = mean_curvature(sp)
    if np.linalg.norm(h) > tol:
        return Verdict("obstructed", "fibres not minimal", {"H_norm": float(np.linalg.norm(h))})
    gh = sp.grad_H[:n, :n]
    if np.max(np.abs(gh + gh.T), initial=0.0) > tol:
        return Verdict("obstructed", "grad H term nonzero",
                       {"grad_H_norm": float(np.linalg.norm(gh))})
    norm_a = float(np.linalg.norm(sp.A))
    norm_t = float(np.linalg.norm(sp.T))
    if norm_a + norm_t > tol:
        return Verdict("obstructed", "defect equation inconsistent",
                       {"A_norm": norm_a, "T_norm": norm_t})
    return Verdict("product", "", {"A_norm": norm_a, "T_norm": norm_t})


def _embed_hv(block: np.ndarray, sp: SubmersionPoint) -> np.ndarray:
    """m x m matrix of a map horizontal -> vertical given as k x n."""
    out = np.zeros((sp.m, sp.m))
    out[sp.n:, :sp.n] = block
    return out


def _embed_h(block: np.ndarray, sp: SubmersionPoint) -> np.ndarray:
    out = np.zeros((sp.m, sp.m))
    out[:sp.n, :sp.n] = block
    return out


def nabla_bivector(sp: SubmersionPoint, omega, x=None, u=None, nabla_n=None) -> Bivector:
    """Covariant derivative of the horizontal lift of a 2-form.

    Vertical ``U``: ``-ad_w(T_U^* - (T_U^*)^T + A_U^*)``.
    Horizontal ``X``: ``lift(nabla^N) - ad_w(A_X - A_X^T)``, where the base
    derivative is supplied as ``nabla_n`` (default zero).
    """
    w = to_skew(omega) if isinstance(omega, Bivector) else as_dense(omega)
    if w.shape == (sp.n, sp.n):
        w = _embed_h(w, sp)
    elif w.shape != (sp.m, sp.m) or np.max(np.abs(w[sp.n:, :]), initial=0.0) > DEFAULT_TOL.id_abs:
        raise WrongSlot("omega must be a horizontal 2-vector")
    if (x is None) == (u is None):
        raise ValueError("give exactly one of a horizontal X or a vertical U")
    if u is not None:
        t = _embed_hv(t_u_star(sp, u), sp)
        k = t - t.T + _embed_h(a_u_star(sp, u), sp)
        return from_skew(-(w @ k - k @ w))
    a = _embed_hv(a_x(sp, x), sp)
    k = a - a.T
    out = -(w @ k - k @ w)
    if nabla_n is not None:
        nb = to_skew(nabla_n) if isinstance(nabla_n, Bivector) else as_dense(nabla_n)
        out = out + _embed_h(nb, sp)
    return from_skew(out)


def rotate_frames(sp: SubmersionPoint, oh, ov) -> SubmersionPoint:
    """Express the same data in rotated horizontal and vertical frames.

    A vector with old coordinates ``x`` has new coordinates ``oh @ x``.
    """
    oh, ov = as_dense(oh), as_dense(ov)
    a = np.einsum("ax,by,cv,xyv->abc", oh, oh, ov, sp.A)
    t = np.einsum("au,bw,cx,uwx->abc", ov, ov, oh, sp.T)
    full = np.zeros((sp.m, sp.m))
    full[:sp.n, :sp.n] = oh
    full[sp.n:, sp.n:] = ov
    rm = conjugate(sp.R_M, full) if sp.R_M is not None else None
    rn = conjugate(sp.R_N, oh) if sp.R_N is not None else None
    return SubmersionPoint(sp.m, sp.n, a, t, rm, rn, full @ sp.grad_H @ full.T)


# -- fixtures -----------------------------------------------------------------

def hopf_fixture() -> SubmersionPoint:
    """Hopf fibration S^3(1) -> S^2(1/2) at a point.

    ``A_{e1} e2 = e3``, totally geodesic fibres, base curvature 4.
    """
    a = np.zeros((2, 2, 1))
    a[0, 1, 0] = 1.0
    a[1, 0, 0] = -1.0
    return SubmersionPoint(3, 2, a, np.zeros((1, 1, 2)), sphere(3), 4.0 * sphere(2))


def product_fixture(r1=None, r2=None) -> SubmersionPoint:
    """Projection of a Riemannian product onto its first factor."""
    r1 = sphere(3) if r1 is None else as_operator(r1)
    r2 = sphere(2) if r2 is None else as_operator(r2)
    n, k = r1.n, r2.n
    return SubmersionPoint(n + k, n, np.zeros((n, n, k)), np.zeros((k, k, n)),
                           product(r1, r2), r1)


def mapping_torus_fixture(n: int = 3) -> SubmersionPoint:
    """Circle-fibred mapping torus over S^n: pointwise identical to a product."""
    return product_fixture(sphere(n), CurvatureOperator(1, np.zeros((0, 0))))


def random_rigidity_instance(rng, n: int = 3, k: int = 2, nonzero: str = "random") -> SubmersionPoint:
    """Synthetic point with equal Ricci forms, traceless shape operators and zero grad H.

    ``nonzero`` selects which tensors are nonzero: "none", "A", "T", "both"
    or "random".
    """
    if nonzero == "random":
        nonzero = ("none", "A", "T", "both")[rng.integers(4)]
    a = np.zeros((n, n, k))
    t = np.zeros((k, k, n))
    if nonzero in ("A", "both"):
        a = rng.standard_normal((n, n, k)) * 10.0 ** rng.uniform(-6, 0)
        a = a - a.transpose(1, 0, 2)
    if nonzero in ("T", "both") and k >= 2:
        t = rng.standard_normal((k, k, n)) * 10.0 ** rng.uniform(-6, 0)
        t = t + t.transpose(1, 0, 2)
        t -= np.einsum("uux->x", t)[None, None, :] * np.eye(k)[:, :, None] / k
    rn = sphere(n)
    rm = product(rn, sphere(k))
    return SubmersionPoint(n + k, n, a, t, rm, rn)
