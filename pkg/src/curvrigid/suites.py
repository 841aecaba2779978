"""The identity battery driven by ``curvrigid verify``.

Each suite returns :class:`Result` rows.  Everything is seeded from the
config, runs single-threaded and contains no timing data, so two runs with the
same config produce identical reports.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import curvature as cv
from .clifford import (chain_transfer_check, clifford_algebra, commutator_formula_check,
                       bianchi_contraction_check, diagonal_df, graded_commute_check,
                       lichnerowicz_zero_order_check, skew_commutator_check)
from .errors import CurvRigidError
from .exterior import pair_count
from .holonomy import casimir_oracle, classify, disjointness_check, generate_lie_algebra
from .numerics import random_orthogonal
from .rigidity import (annihilator, associative_closure, casimir_separator, chain_upgrade_check,
                       lie_closure_check, mean_curvature_vanishes, pointwise_ta_check,
                       real_case_conclusion, separator_erases)
from .submersion import (hopf_fixture, mapping_torus_fixture, oneill_ricci_defect,
                         product_fixture, random_rigidity_instance, rigidity_conclusion, rotate_frames)

MAX_CLIFFORD_DIM = 10


@dataclass
class SuiteConfig:
    seed: int = 0
    tol: float | None = None          # overrides every per-check threshold when set
    max_dim: int = 8                  # largest m + n for Clifford checks
    fixtures: tuple[str, ...] = ()    # empty means the default set
    samples: int = 200

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.tol is not None and not (0.0 < self.tol < 1e-3):
            raise ValueError(f"tol must lie in (0, 1e-3), got {self.tol!r}")
        if not isinstance(self.max_dim, int) or not 2 <= self.max_dim <= MAX_CLIFFORD_DIM:
            raise ValueError(f"max_dim must be an integer in [2, {MAX_CLIFFORD_DIM}]")
        if self.samples < 1:
            raise ValueError("samples must be positive")

    def threshold(self, default: float) -> float:
        return default if self.tol is None else self.tol


@dataclass
class Result:
    suite: str
    case: str
    status: str               # PASS, FAIL or SKIP
    residual: float
    threshold: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "case": self.case, "status": self.status,
                "residual": _clean(self.residual), "threshold": self.threshold,
                "details": _clean(self.details)}


def _clean(obj):
    """JSON-friendly copy with floats rounded to a stable 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    return obj


def _check(suite, case, residual, threshold, details=None, below=True) -> Result:
    ok = residual <= threshold if below else residual >= threshold
    return Result(suite, case, "PASS" if ok else "FAIL", float(residual), threshold, details or {})


# -- fixtures -------------------------------------------------------------------

FIXTURE_EXPECT = {
    "sphere2": [(2, "complex")],
    "sphere3": [(3, "real")],
    "sphere4": [(4, "real")],
    "sphere5": [(5, "real")],
    "cp2": [(4, "complex")],
    "s2xs3": [(2, "complex"), (3, "real")],
}
DEFAULT_FIXTURES = ("cp2", "random5", "s2xs3", "sphere2", "sphere3", "sphere4")


def named_fixture(name: str, seed: int = 0) -> cv.CurvatureOperator:
    builders = {
        "sphere2": lambda: cv.sphere(2),
        "sphere3": lambda: cv.sphere(3),
        "sphere4": lambda: cv.sphere(4),
        "sphere5": lambda: cv.sphere(5),
        "cp2": lambda: cv.fubini_study(2),
        "cp3": lambda: cv.fubini_study(3),
        "s2xs3": lambda: cv.product(cv.sphere(2), cv.sphere(3)),
        "s2xs2": lambda: cv.product(cv.sphere(2), cv.sphere(2)),
        "random5": lambda: cv.random_valid(seed, 5),
        "random6": lambda: cv.random_valid(seed, 6),
    }
    if name in builders:
        return builders[name]()
    raise KeyError(name)


def shipped_fixture_path(name: str):
    return resources.files("curvrigid") / "data" / f"{name}.json"


def resolve_fixture(name: str, seed: int = 0) -> cv.CurvatureOperator:
    """A named fixture, a shipped data file name, or a path to a JSON file."""
    try:
        return named_fixture(name, seed)
    except KeyError:
        pass
    shipped = shipped_fixture_path(name)
    if shipped.is_file():
        return cv.load(shipped)
    return cv.load(name)


class Battery:
    """Shares classifications between suites."""

    def __init__(self, cfg: SuiteConfig):
        self.cfg = cfg
        names = cfg.fixtures or DEFAULT_FIXTURES
        self.fixtures = {name: resolve_fixture(name, cfg.seed) for name in names}
        self._classified: dict[str, object] = {}

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, salt])

    def classified(self, name):
        if name not in self._classified:
            r = self.fixtures[name]
            try:
                cv.require_valid(r)
                self._classified[name] = classify(r, seed=self.cfg.seed)
            except CurvRigidError as exc:
                self._classified[name] = exc
        return self._classified[name]


# -- Clifford suites ----------------------------------------------------------------

def suite_clifford_commutator(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-10)
    rng = b.rng(1)
    out = []
    for m in range(1, 5):
        for n in range(1, 5):
            if m + n > b.cfg.max_dim:
                continue
            alg = clifford_algebra(m, n)
            worst = worst_skew = 0.0
            for _ in range(b.cfg.samples):
                for side, d in (("c", m), ("cbar", n)):
                    l1, l2 = rng.standard_normal((2, d, d))
                    worst = max(worst, commutator_formula_check(alg, l1, l2, side))
                    s = l1 - l1.T
                    worst_skew = max(worst_skew, skew_commutator_check(alg, s, l2, side))
            out.append(_check("clifford-commutator", f"Cl({m},{n})", max(worst, worst_skew), thr,
                              {"general": worst, "skew": worst_skew, "pairs": b.cfg.samples}))
    return out


def suite_graded_chain(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-10)
    rng = b.rng(2)
    alg = clifford_algebra(3, 3)
    g_worst = c_worst = 0.0
    for _ in range(100):
        g_worst = max(g_worst, graded_commute_check(alg, rng.standard_normal((3, 3)),
                                                    rng.standard_normal((3, 3))))
        w = rng.standard_normal((3, 3))
        w = w - w.T
        c_worst = max(c_worst, chain_transfer_check(alg, w, rng.standard_normal((3, 3)),
                                                    rng.standard_normal((3, 3))))
    return [_check("graded-chain", "graded-commute", g_worst, thr),
            _check("graded-chain", "chain-transfer", c_worst, thr)]


def suite_bianchi_contraction(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-10)
    rng = b.rng(3)
    out = []
    for n in (3, 4, 5):
        alg = clifford_algebra(n, 0)
        r = cv.sphere(n)
        res = max(bianchi_contraction_check(alg, r, x) for x in np.eye(n))
        ric_ok = float(np.max(np.abs(r.ricci() - (n - 1) * np.eye(n))))
        out.append(_check("bianchi-contraction", f"sphere{n}", max(res, ric_ok), thr))
        rv = cv.random_valid(rng, n)
        res = max(bianchi_contraction_check(alg, rv, rng.standard_normal(n)) for _ in range(5))
        out.append(_check("bianchi-contraction", f"random{n}", res, b.cfg.threshold(1e-9)))
    alg = clifford_algebra(4, 0)
    witness = bianchi_contraction_check(alg, cv.four_form_operator(), np.eye(4)[0], strict=False)
    out.append(_check("bianchi-contraction", "non-bianchi-witness", witness, 1e-3, below=False))
    return out


def suite_lichnerowicz(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-9)
    rng = b.rng(4)
    out = []
    cases = [("sphere3-mu1", cv.sphere(3), 3, np.ones(3)),
             ("sphere3-mu0", cv.sphere(3), 3, np.zeros(3)),
             ("cp2-mu1", cv.fubini_study(2), 4, np.ones(4)),
             ("random3-mu", cv.random_valid(rng, 3), 3, rng.uniform(0, 1, 3))]
    for case, r, n, mu in cases:
        if 2 * n > b.cfg.max_dim:
            out.append(Result("lichnerowicz-zero-order", case, "SKIP", 0.0, thr,
                              {"reason": "exceeds max_dim"}))
            continue
        alg = clifford_algebra(n, n)
        ra, rb = lichnerowicz_zero_order_check(alg, r, diagonal_df(mu, n, n))
        out.append(_check("lichnerowicz-zero-order", case, max(ra, rb), thr,
                          {"identity": ra, "sums": rb, "scal": r.scalar()}))
    return out


# -- curvature image suites ------------------------------------------------------------

def _classification_rows(b: Battery, suite: str, fn) -> list[Result]:
    out = []
    for name in sorted(b.fixtures):
        dec = b.classified(name)
        if isinstance(dec, Exception):
            out.append(Result(suite, name, "FAIL", 1.0, 0.0,
                              {"error": f"{type(dec).__name__}: {dec}"}))
            continue
        out.extend(fn(name, dec))
    return out


def suite_curvature_decomp(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-8)

    def rows(name, dec):
        r = b.fixtures[name]
        res = max(dec.splitting_residual, dec.sum_residual, dec.algebra.closure_residual)
        return [_check("curvature-decomp", name, res, thr,
                       {"dims": [blk.dim for blk in dec.blocks], "algebra_dim": dec.algebra.dim,
                        "scalar": r.scalar()})]
    return _classification_rows(b, "curvature-decomp", rows)


def suite_curvature_types(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-8)

    def rows(name, dec):
        res = 0.0
        for blk in dec.blocks:
            if blk.kind == "complex":
                u = blk.complex_unit
                res = max(res, float(np.max(np.abs(u @ u + np.eye(blk.dim)))), blk.unit_distance)
        sig = [(blk.dim, blk.kind) for blk in dec.blocks]
        expect = FIXTURE_EXPECT.get(name)
        mismatch = expect is not None and sig != expect
        status = "FAIL" if mismatch or res > thr else "PASS"
        return [Result("curvature-types", name, status, res, thr,
                       {"blocks": [f"{d}:{k}" for d, k in sig]})]
    return _classification_rows(b, "curvature-types", rows)


def suite_averaged_operator(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-8)

    def rows(name, dec):
        out = []
        for i, blk in enumerate(dec.blocks):
            rep = blk.rtilde_report
            ok = (rep["image_distance"] <= thr and rep["min_singular_ratio"] >= 1e-6
                  and rep["equivariance"] <= b.cfg.threshold(1e-9) and rep["trace"] > 0)
            out.append(Result("averaged-operator", f"{name}/block{i}", "PASS" if ok else "FAIL",
                              max(rep["image_distance"], rep["equivariance"]), thr, dict(rep)))
        return out
    return _classification_rows(b, "averaged-operator", rows)


def suite_casimir(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-8)

    def rows(name, dec):
        out = []
        for i, blk in enumerate(dec.blocks):
            lam = blk.casimir_value
            oracle = casimir_oracle(blk.rtilde, blk.dim)
            ores = float(np.max(np.abs(oracle - lam * np.eye(blk.dim))))
            res = max(ores, blk.casimir_report["adjoint_residual"])
            out.append(_check("casimir", f"{name}/block{i}", res, thr,
                              {"lambda": lam, "oracle_residual": ores,
                               "adjoint_residual": blk.casimir_report["adjoint_residual"],
                               "p_dim": int(blk.p_basis.shape[0])}))
        return out
    out = _classification_rows(b, "casimir", rows)
    # normalisation anchor: the unit 3-sphere under the half-trace inner product
    dec = classify(cv.sphere(3))
    out.append(_check("casimir", "sphere3-normalisation", abs(dec.blocks[0].casimir_value + 2.0), thr,
                      {"lambda": dec.blocks[0].casimir_value}))
    return out


def suite_p_disjoint(b: Battery) -> list[Result]:
    def rows(name, dec):
        dims = [blk.disjointness_dim for blk in dec.blocks]
        return [Result("p-disjoint", name, "PASS" if max(dims) == 0 else "FAIL", float(max(dims)),
                       0.0, {"intertwiner_dims": dims})]
    out = _classification_rows(b, "p-disjoint", rows)
    g = generate_lie_algebra(cv.sphere(3))
    wit = disjointness_check(g, np.eye(pair_count(3)))
    out.append(_check("p-disjoint", "synthetic-witness", float(wit), 1.0, below=False))
    return out


def suite_separator(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-8)
    rng = b.rng(9)

    def rows(name, dec):
        try:
            sep = casimir_separator(dec, m=dec.n + 2, tol=thr)
        except CurvRigidError as exc:
            return [Result("separator", name, "FAIL", 1.0, thr, {"error": str(exc)})]
        erase = 0.0
        for _ in range(10):
            erase = max(erase, separator_erases(sep, rng.standard_normal((2, dec.n)),
                                                rng.standard_normal(sep.p_rows.shape[0])))
        res = max(sep.rho_residual, sep.ad_residual, erase)
        return [_check("separator", name, res, thr,
                       {"rho": sep.rho_residual, "ad_on_p": sep.ad_residual, "erase": erase})]
    return _classification_rows(b, "separator", rows)


# -- submersion suites -----------------------------------------------------------------

def suite_oneill(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-10)
    rng = b.rng(10)
    out = []
    prod = product_fixture()
    res = max(abs(oneill_ricci_defect(prod, x)) for x in list(np.eye(prod.n)) + [rng.standard_normal(prod.n)])
    out.append(_check("oneill-besse", "product", res, thr))
    hopf = hopf_fixture()
    e1 = np.eye(3)[0]
    ric_m = float(e1 @ hopf.R_M.ricci() @ e1)
    ric_n = float(np.eye(2)[0] @ hopf.R_N.ricci() @ np.eye(2)[0])
    a2 = float(np.sum(np.einsum("x,xyv->vy", np.eye(2)[0], hopf.A) ** 2))
    res = max(abs(oneill_ricci_defect(hopf, e1)), abs(ric_m - 2), abs(ric_n - 4), abs(a2 - 1))
    out.append(_check("oneill-besse", "hopf", res, thr,
                      {"ric_M": ric_m, "ric_N": ric_n, "A_X_sq": a2}))
    worst = 0.0
    for sp in (hopf, prod):
        for _ in range(50):
            oh = random_orthogonal(sp.n, rng)
            ov = random_orthogonal(sp.k, rng)
            x = rng.standard_normal(sp.n)
            rot = rotate_frames(sp, oh, ov)
            worst = max(worst, abs(oneill_ricci_defect(rot, oh @ x) - oneill_ricci_defect(sp, x)))
    out.append(_check("oneill-besse", "frame-rotation", worst, b.cfg.threshold(1e-9)))
    return out


def suite_rigidity(b: Battery) -> list[Result]:
    rng = b.rng(11)
    thr = b.cfg.threshold(1e-9)
    out = []
    wrong = 0
    for _ in range(500):
        sp = random_rigidity_instance(rng, n=int(rng.integers(2, 5)), k=int(rng.integers(1, 4)))
        small = np.linalg.norm(sp.A) + np.linalg.norm(sp.T) <= thr
        if rigidity_conclusion(sp, tol=thr).is_product != small:
            wrong += 1
    out.append(_check("ricci-minimal-fibers", "random-500", float(wrong), 0.0))
    for name, sp, want in (("product", product_fixture(), "product"),
                           ("mapping-torus", mapping_torus_fixture(3), "product"),
                           ("hopf", hopf_fixture(), "obstructed")):
        v = rigidity_conclusion(sp, tol=thr)
        out.append(Result("ricci-minimal-fibers", name, "PASS" if v.kind == want else "FAIL", 0.0, 0.0,
                          {"verdict": v.kind, "witness": v.witness}))

    sp = product_fixture()
    dec = classify(sp.R_N)
    prob = annihilator(clifford_algebra(sp.m, sp.n), sp.R_N)
    v = mean_curvature_vanishes(dec, sp, prob, tol=thr)
    out.append(Result("mean-curvature", "product", "PASS" if v.holds else "FAIL", 0.0, thr,
                      {"witness": v.witness}))
    t = np.zeros((sp.k, sp.k, sp.n))
    t[0, 0, 0] = 1.0
    bad = dataclasses.replace(sp, T=t)
    v = mean_curvature_vanishes(dec, bad, prob, tol=thr)
    out.append(Result("mean-curvature", "injected-traceful-T", "PASS" if not v.holds else "FAIL",
                      0.0, thr, {"flagged": not v.holds, "witness": v.witness}))
    hopf = hopf_fixture()
    v = mean_curvature_vanishes(classify(hopf.R_N), hopf,
                                annihilator(clifford_algebra(hopf.m, hopf.n), hopf.R_N), tol=thr)
    out.append(Result("mean-curvature", "hopf", "PASS" if v.holds else "FAIL", 0.0, thr,
                      {"witness": v.witness}))
    return out


def suite_annihilator(b: Battery) -> list[Result]:
    thr = b.cfg.threshold(1e-9)
    rng = b.rng(12)
    out = []
    cases = [("sphere2-in-Cl(3,2)", cv.sphere(2), 3, 2),
             ("sphere3-in-Cl(5,3)", cv.sphere(3), 5, 3),
             ("cp2-in-Cl(4,4)", cv.fubini_study(2), 4, 4)]
    for name, r, m, n in cases:
        if m + n > b.cfg.max_dim:
            out.append(Result("annihilator", name, "SKIP", 0.0, thr, {"reason": "exceeds max_dim"}))
            continue
        prob = annihilator(clifford_algebra(m, n), r)
        if prob.empty:
            out.append(Result("annihilator", name, "SKIP", 0.0, thr, {"dim_K": 0}))
            continue
        g = generate_lie_algebra(r)
        closure = lie_closure_check(prob, g)
        chains = max(chain_upgrade_check(prob, ell, rng) for ell in (1, 2, 3))
        out.append(_check("annihilator", name, max(prob.residual, closure, chains), thr,
                          {"dim_K": prob.dim, "lie_closure": closure, "chains": chains}))
    # exact pointwise statements on a product point, and real-case sensitivity
    sp = product_fixture(cv.sphere(3), cv.sphere(2))
    prob = annihilator(clifford_algebra(sp.m, sp.n), sp.R_N)
    r1, r2, r3 = pointwise_ta_check(prob, sp, generate_lie_algebra(sp.R_N), rng)
    out.append(_check("pointwise-annihilation", "product", max(r1, r2, r3), thr,
                      {"lie": r1, "T_chain": r2, "A_chain": r3, "dim_K": prob.dim}))
    dec = classify(sp.R_N)
    blk = dec.blocks[0]
    closure = associative_closure(blk.algebra)
    m_map = rng.standard_normal((sp.k, sp.n))
    v = real_case_conclusion(prob, blk.basis, m_map, closure, tol=thr)
    margin = min(row["action_min"] / row["lower_bound"] for row in v.details["per_h"])
    ok = (not v.holds) and margin >= 1 - 1e-9 and all(row["reachable"] for row in v.details["per_h"])
    out.append(Result("real-case", "synthetic-M", "PASS" if ok else "FAIL", float(margin), 1.0,
                      {"closure_dim": closure.dim, "detected": not v.holds}))
    z = real_case_conclusion(prob, blk.basis, np.zeros((sp.k, sp.n)), closure, tol=thr)
    out.append(Result("real-case", "zero-M", "PASS" if z.holds else "FAIL", 0.0, thr, {}))
    return out


SUITES = {
    "annihilator": suite_annihilator,
    "averaged-operator": suite_averaged_operator,
    "bianchi-contraction": suite_bianchi_contraction,
    "casimir": suite_casimir,
    "clifford-commutator": suite_clifford_commutator,
    "curvature-decomp": suite_curvature_decomp,
    "curvature-types": suite_curvature_types,
    "graded-chain": suite_graded_chain,
    "lichnerowicz-zero-order": suite_lichnerowicz,
    "oneill-besse": suite_oneill,
    "p-disjoint": suite_p_disjoint,
    "rigidity": suite_rigidity,
    "separator": suite_separator,
}


def run_battery(cfg: SuiteConfig, only: tuple[str, ...] = ()) -> list[Result]:
    battery = Battery(cfg)
    results: list[Result] = []
    for name in sorted(SUITES):
        if only and name not in only:
            continue
        results.extend(SUITES[name](battery))
    results.sort(key=lambda r: (r.suite, r.case))
    return results
