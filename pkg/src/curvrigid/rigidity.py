"""Exact-level rigidity machinery: annihilators, ad-chains, associative closure
and the Casimir separator.

The analytic family of approximate solutions is replaced by the joint kernel
``K`` of the operators ``(c - c-bar)(w)`` over horizontal lifts ``w`` of the
curvature image; every "small" estimate becomes an exact annihilation on K.

Horizontal directions are the first n coordinates of R^m throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordAlgebra, CliffordElement, clifford_algebra, default_df, left_regular
from .curvature import as_operator
from .errors import CapExceeded, PreconditionFailed, SeparatorFailed
from .exterior import ad, ad_matrix, lambda2, pair_count, skew_coords, skew_from_coords
from .holonomy import IsotypicDecomposition, LieSubalgebra
from .numerics import DEFAULT_TOL, Tolerance, as_dense, nullspace, orthonormalize, rng_from
from .submersion import SubmersionPoint, a_u_star, a_x, s_x, t_u_star


# -- annihilator ----------------------------------------------------------------

@dataclass
class AnnihilatorProblem:
    algebra: CliffordAlgebra
    df: np.ndarray
    generators: np.ndarray      # horizontal lifts, stacked m x m skew matrices
    kernel: np.ndarray          # D x dim K, orthonormal columns
    residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.kernel.shape[1]

    @property
    def empty(self) -> bool:
        return self.dim == 0

    def vectors(self) -> list[CliffordElement]:
        return [CliffordElement(self.algebra, self.kernel[:, i]) for i in range(self.dim)]

    def apply(self, element: CliffordElement) -> np.ndarray:
        """``element * u`` for every basis vector u of K, as columns."""
        return left_regular(element) @ self.kernel

    def annihilates(self, element: CliffordElement) -> float:
        if self.empty:
            return 0.0
        return float(np.max(np.linalg.norm(self.apply(element), axis=0)))


def horizontal_lift(wbar, df) -> np.ndarray:
    """``df^T wbar df``: an n x n skew matrix lifted to R^m."""
    return df.T @ as_dense(wbar) @ df


def annihilator(alg: CliffordAlgebra, r_n=None, df=None, tol: Tolerance = DEFAULT_TOL,
                generators=None) -> AnnihilatorProblem:
    """Joint kernel of ``(c - c-bar)(w)`` over lifts of the image of ``r_n``.

    ``generators`` (rows of Lambda^2 R^n coordinates) overrides the image.
    With no generators the kernel is the whole algebra.
    """
    n, m = alg.n, alg.m
    df = default_df(n, m) if df is None else as_dense(df)
    if generators is None:
        rows = as_operator(r_n).image_basis(tol) if r_n is not None else np.zeros((0, pair_count(n)))
    else:
        rows = np.asarray(generators, dtype=float)
        rows = rows.reshape(-1, pair_count(n)) if rows.size else np.zeros((0, pair_count(n)))
    if rows.shape[0] == 0:
        return AnnihilatorProblem(alg, df, np.zeros((0, m, m)), np.eye(alg.dim))
    lifts = np.array([horizontal_lift(w, df) for w in skew_from_coords(rows)])
    ops = np.vstack([left_regular(alg.c_minus_cbar(w, df)) for w in lifts])
    ker = nullspace(ops, tol)
    res = float(np.max(np.abs(ops @ ker))) if ker.size else 0.0
    return AnnihilatorProblem(alg, df, lifts, ker, res)


def lie_closure_check(problem: AnnihilatorProblem, algebra: LieSubalgebra) -> float:
    """Largest ``|(c - c-bar)(w) u|`` over the Lie algebra (lifted) and u in K."""
    out = 0.0
    for w in algebra.matrices():
        lift = horizontal_lift(w, problem.df)
        out = max(out, problem.annihilates(problem.algebra.c_minus_cbar(lift, problem.df)))
    return out


def annihilating_pairs(problem: AnnihilatorProblem, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Basis of pairs ``(eta1, etabar2)`` with ``(c(eta1) + c-bar(etabar2)) u = 0`` on K.

    Rows are ``concat(vec eta1, vec etabar2)`` of length m^2 + n^2.
    """
    alg = problem.algebra
    m, n = alg.m, alg.n
    cols = []
    for idx in range(m * m):
        e = np.zeros(m * m)
        e[idx] = 1.0
        cols.append(problem.apply(alg.c_endo(e.reshape(m, m))).ravel())
    for idx in range(n * n):
        e = np.zeros(n * n)
        e[idx] = 1.0
        cols.append(problem.apply(alg.cbar_endo(e.reshape(n, n))).ravel())
    return nullspace(np.array(cols).T, tol).T


def chain_upgrade_check(problem: AnnihilatorProblem, length: int, rng, trials: int = 5,
                        tol: Tolerance = DEFAULT_TOL) -> float:
    """Apply random ad-chains of generators to annihilating pairs; report the worst leak.

    ``(eta1, etabar2) -> (ad_w eta1, ad_wbar etabar2)`` preserves annihilation on K.
    """
    rng = rng_from(rng)
    alg = problem.algebra
    m, n = alg.m, alg.n
    pairs_ = annihilating_pairs(problem, tol)
    if pairs_.shape[0] == 0 or problem.empty or len(problem.generators) == 0:
        return 0.0
    worst = 0.0
    for _ in range(trials):
        v = rng.standard_normal(pairs_.shape[0]) @ pairs_
        eta1, etab = v[:m * m].reshape(m, m), v[m * m:].reshape(n, n)
        for _ in range(length):
            w = problem.generators[rng.integers(len(problem.generators))]
            wbar = problem.df @ w @ problem.df.T
            eta1, etab = ad(w, eta1), ad(wbar, etab)
        scale = max(1.0, np.linalg.norm(eta1) + np.linalg.norm(etab))
        worst = max(worst, problem.annihilates(alg.c_endo(eta1) + alg.cbar_endo(etab)) / scale)
    return worst


def adjoint_rho_check(m_map, omegas) -> float:
    """``ad_{w1} ... ad_{wl}(M) = M rho(w1 ... wl)^T`` for ``M`` horizontal -> vertical.

    ``m_map`` is k x n, ``omegas`` are n x n skew matrices acting horizontally.
    """
    m_map = as_dense(m_map)
    k, n = m_map.shape
    big = np.zeros((n + k, n + k))
    big[n:, :n] = m_map
    big = big - big.T
    prod = np.eye(n)
    for w in omegas:
        prod = prod @ w
    for w in reversed(list(omegas)):
        lift = np.zeros((n + k, n + k))
        lift[:n, :n] = w
        big = ad(lift, big)
    return float(np.max(np.abs(big[n:, :n] - m_map @ prod.T)))


# -- associative closure ---------------------------------------------------------

@dataclass
class AssociativeClosure:
    d: int
    basis: np.ndarray      # rows: orthonormal flattened d x d matrices
    length: int

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def matrices(self) -> np.ndarray:
        return self.basis.reshape(-1, self.d, self.d)


def associative_closure(algebra: LieSubalgebra, cap: int | None = None,
                        tol: Tolerance = DEFAULT_TOL) -> AssociativeClosure:
    """Unital associative algebra generated by ``g_i`` inside End(V_i)."""
    d = algebra.n
    cap = 2 * d * d if cap is None else cap
    gens = algebra.matrices()
    basis = orthonormalize([np.eye(d).ravel()], tol)
    for length in range(1, cap + 1):
        mats = basis.reshape(-1, d, d)
        new = np.einsum("aij,bjk->abik", mats, gens).reshape(-1, d * d)
        grown = orthonormalize(np.vstack([basis, new]), tol)
        if grown.shape[0] == basis.shape[0]:
            return AssociativeClosure(d, basis, length)
        basis = grown
    raise CapExceeded(f"associative closure did not stabilise within {cap} products")


@dataclass(frozen=True)
class Expression:
    reachable: bool
    coeffs: np.ndarray
    residual: float


def express(closure: AssociativeClosure, target, tol: float = 1e-9) -> Expression:
    """Coefficients of ``target`` in the closure basis, or unreachable."""
    t = as_dense(target).ravel()
    coeffs = closure.basis @ t
    res = float(np.linalg.norm(t - coeffs @ closure.basis))
    return Expression(res <= tol * max(1.0, np.linalg.norm(t)), coeffs, res)


# -- Casimir separator ----------------------------------------------------------

@dataclass
class Separator:
    rho: np.ndarray          # n x n
    ad_op: np.ndarray        # on Lambda^2 R^m
    m: int
    rho_residual: float
    ad_residual: float
    p_rows: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))


def _weighted_rows(dec: IsotypicDecomposition, j: int) -> np.ndarray:
    blk = dec.blocks[j]
    w, q = np.linalg.eigh(blk.rtilde)
    root = (q * np.sqrt(np.clip(w, 0.0, None))) @ q.T
    return dec.lift_block_coords(j, blk.algebra.basis @ root)


def embed_horizontal(n: int, m: int) -> np.ndarray:
    """Lambda^2 R^n -> Lambda^2 R^m induced by the inclusion of the first n coordinates."""
    e = np.zeros((m, n))
    e[:n, :n] = np.eye(n)
    return lambda2(e)


def casimir_separator(dec: IsotypicDecomposition, m: int | None = None,
                      tol: float = 1e-8) -> Separator:
    """Evaluate ``w' = sum_j (4 l_j^2 C_j^2 - C_j^4) / (3 l_j^4)`` in both representations.

    ``C_j`` is the Casimir element of block j.  ``rho(w')`` acts on R^n and
    ``ad(w')`` on Lambda^2 R^m (horizontal lift); the first must be the identity
    and the second must vanish on the sum of the p_j.
    """
    n = dec.n
    m = n if m is None else m
    emb = embed_horizontal(n, m)
    rho = np.zeros((n, n))
    adop = np.zeros((pair_count(m), pair_count(m)))
    for j, blk in enumerate(dec.blocks):
        if blk.casimir_value is None:
            continue
        lam = blk.casimir_value
        rows = _weighted_rows(dec, j)
        mats = skew_from_coords(rows)
        rc = np.einsum("aij,ajk->ik", mats, mats)
        ads = np.array([ad_matrix(emb @ r) for r in rows])
        ac = np.einsum("aij,ajk->ik", ads, ads)
        rc2, ac2 = rc @ rc, ac @ ac
        rho += (4 * lam ** 2 * rc2 - rc2 @ rc2) / (3 * lam ** 4)
        adop += (4 * lam ** 2 * ac2 - ac2 @ ac2) / (3 * lam ** 4)
    p = dec.p_total() @ emb.T
    rho_res = float(np.max(np.abs(rho - np.eye(n)))) if n else 0.0
    ad_res = float(np.max(np.abs(adop @ p.T))) if p.size else 0.0
    sep = Separator(rho, adop, m, rho_res, ad_res, p)
    if rho_res > tol or ad_res > tol:
        raise SeparatorFailed(f"separator residuals rho={rho_res:.3e}, ad={ad_res:.3e}",
                              rho_residual=rho_res, ad_residual=ad_res)
    return sep


def separator_erases(sep: Separator, m_map, p_coeffs) -> float:
    """``ad_{w'}(M + p) = M`` for M horizontal -> vertical and p in the p-sum.

    Returns the residual; ``p_coeffs`` weights the rows of ``sep.p_rows``.
    """
    m_map = as_dense(m_map)
    k, n = m_map.shape
    big = np.zeros((n + k, n + k))
    big[n:, :n] = m_map
    big = big - big.T
    target = skew_coords(big)
    p = np.asarray(p_coeffs, dtype=float) @ sep.p_rows if sep.p_rows.size else 0.0
    return float(np.max(np.abs(sep.ad_op @ (target + p) - target)))


# -- case conclusions -------------------------------------------------------------

@dataclass
class CaseVerdict:
    holds: bool
    witness: str = ""
    details: dict = field(default_factory=dict)


def _hv_endo(vec_v: np.ndarray, h: np.ndarray, n: int, m: int) -> np.ndarray:
    """m x m matrix ``(M h) h^T`` with ``M h`` vertical and ``h`` horizontal."""
    a = np.zeros(m)
    a[n:] = vec_v
    b = np.zeros(m)
    b[:n] = h
    return np.outer(a, b)


def real_case_conclusion(problem: AnnihilatorProblem, block_basis, m_map, closure=None,
                         tol: float = 1e-9) -> CaseVerdict:
    """Test the constraint ``M h = 0`` for h in a real-type block.

    For each basis vector h, ``c((Mh) h^T) = c(Mh) c(h)`` is evaluated on K; as
    a product of two invertible Clifford elements its action is bounded below
    by ``|Mh| |h|``, so a nonzero ``Mh`` is incompatible with annihilation.
    """
    alg = problem.algebra
    m, n = alg.m, alg.n
    m_map = as_dense(m_map)
    vb = as_dense(block_basis)
    if problem.empty:
        return CaseVerdict(True, "annihilator empty; skipped", {"skipped": True})
    rows = []
    worst = 0.0
    for h in vb.T:
        mh = m_map @ h
        elem = alg.c_endo(_hv_endo(mh, h, n, m))
        factored = (alg.c(np.concatenate([np.zeros(n), mh])) * alg.c(np.concatenate([h, np.zeros(m - n)])))
        act = np.linalg.norm(problem.apply(elem), axis=0)
        bound = float(np.linalg.norm(mh) * np.linalg.norm(h))
        reach = None
        if closure is not None:
            local = vb.T @ np.outer(h, h) @ vb
            reach = express(closure, local).reachable
        rows.append({"Mh_norm": float(np.linalg.norm(mh)), "action_min": float(act.min()),
                     "lower_bound": bound, "factorisation": (elem - factored).norm(),
                     "reachable": reach})
        worst = max(worst, float(act.max()))
    holds = worst <= tol
    witness = "" if holds else "nonzero M h contradicts annihilation"
    return CaseVerdict(holds, witness, {"per_h": rows, "max_action": worst})


def complex_trace_lemma(s_h, s_ih, tol: float = 1e-9) -> CaseVerdict:
    """Nilpotency of ``S_h + i S_Ih`` and the resulting vanishing traces."""
    a, b = as_dense(s_h), as_dense(s_ih)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    norms = float(np.max(np.abs(a.T @ a - b.T @ b))) if a.size else 0.0
    if norms > tol * scale ** 2:
        raise PreconditionFailed(f"|S_h U| != |S_Ih U| (deviation {norms:.3e})",
                                 relation="equal norms")
    orth = float(np.max(np.abs(a @ b + b @ a))) if a.size else 0.0
    if orth > tol * scale ** 2:
        raise PreconditionFailed(f"S_h U and S_Ih U not orthogonal (deviation {orth:.3e})",
                                 relation="orthogonality")
    z = a + 1j * b
    nil = float(np.max(np.abs(z @ z))) if a.size else 0.0
    tr_h, tr_ih = float(np.trace(a)), float(np.trace(b))
    holds = nil <= tol * scale ** 2 and abs(tr_h) <= tol * scale * max(1, a.shape[0]) \
        and abs(tr_ih) <= tol * scale * max(1, a.shape[0])
    return CaseVerdict(holds, "" if holds else "trace nonzero",
                       {"nilpotency": nil, "trace_h": tr_h, "trace_Ih": tr_ih})


def mean_curvature_vanishes(dec: IsotypicDecomposition, sp: SubmersionPoint,
                            problem: AnnihilatorProblem | None = None,
                            tol: float = 1e-9) -> CaseVerdict:
    """Combine the real and complex block conclusions into ``Tr S_X = 0``.

    Real blocks force ``S_h = 0`` (checked through K when supplied, and
    directly on the data); complex blocks force ``Tr S_h = 0``.
    """
    if dec.n != sp.n:
        raise ValueError("decomposition and submersion point have different horizontal dims")
    failures = []
    for i, blk in enumerate(dec.blocks):
        for h in blk.basis.T:
            sh = s_x(sp, h)
            if blk.kind == "real":
                if problem is not None and sp.k:
                    for u in np.eye(sp.k):
                        v = real_case_conclusion(problem, h[:, None], t_u_star(sp, u), tol=tol)
                        if not v.holds:
                            failures.append({"block": i, "kind": "real", "relation": "T_U* h = 0",
                                             "value": v.details["max_action"]})
                if np.max(np.abs(sh), initial=0.0) > tol:
                    failures.append({"block": i, "kind": "real", "relation": "S_h = 0",
                                     "value": float(np.max(np.abs(sh)))})
            else:
                if abs(np.trace(sh)) > tol:
                    failures.append({"block": i, "kind": "complex", "relation": "Tr S_h = 0",
                                     "value": float(np.trace(sh))})
    h_norm = float(np.linalg.norm(np.einsum("uux->x", sp.T)))
    holds = not failures and h_norm <= tol
    witness = "" if holds else (f"block {failures[0]['block']} ({failures[0]['kind']}): "
                                f"{failures[0]['relation']} violated" if failures else "H nonzero")
    return CaseVerdict(holds, witness, {"failures": failures, "H_norm": h_norm})


def pointwise_ta_check(problem: AnnihilatorProblem, sp: SubmersionPoint, algebra: LieSubalgebra,
                       rng, length: int = 2) -> tuple[float, float, float]:
    """The three annihilation statements at a point, evaluated on K.

    1. ``(c - c-bar)(w) u`` for w in the generated Lie algebra;
    2. ``c(ad-chain(2 T_U + A_U^*)) u``;
    3. ``c(ad-chain(2 A_X)) u + (c - c-bar)(ad-chain'(B)) u`` with a random
       g-valued B.
    """
    rng = rng_from(rng)
    alg = problem.algebra
    m, n = sp.m, sp.n
    r1 = lie_closure_check(problem, algebra)
    gens = problem.generators

    def chain(x, count):
        for _ in range(count):
            x = ad(gens[rng.integers(len(gens))], x)
        return x

    def embed_hv(block):
        out = np.zeros((m, m))
        out[n:, :n] = block
        return out

    r2 = r3 = 0.0
    if len(gens):
        for u in np.eye(sp.k):
            t = embed_hv(t_u_star(sp, u))
            au = np.zeros((m, m))
            au[:n, :n] = a_u_star(sp, u)
            k2 = 2 * (t - t.T) + au
            r2 = max(r2, problem.annihilates(alg.c_endo(chain(k2, length))))
        for x in np.eye(n):
            a = embed_hv(a_x(sp, x))
            k3 = 2 * (a - a.T)
            b = horizontal_lift(skew_from_coords(rng.standard_normal(algebra.dim) @ algebra.basis),
                                problem.df) if algebra.dim else np.zeros((m, m))
            elem = alg.c_endo(chain(k3, length)) + alg.c_minus_cbar(chain(b, length - 1), problem.df)
            r3 = max(r3, problem.annihilates(elem))
    return r1, r2, r3


def annihilator_for(sp: SubmersionPoint, tol: Tolerance = DEFAULT_TOL) -> AnnihilatorProblem:
    """Annihilator in Cl(m, n) built from the base curvature of a submersion point."""
    return annihilator(clifford_algebra(sp.m, sp.n), sp.R_N, tol=tol)
