import dataclasses

import numpy as np
import pytest

from curvrigid import curvature as cv
from curvrigid import rigidity as rg
from curvrigid import submersion as sb
from curvrigid.clifford import clifford_algebra
from curvrigid.errors import CapExceeded, PreconditionFailed, SeparatorFailed
from curvrigid.exterior import pair_count
from curvrigid.holonomy import classify, generate_lie_algebra


@pytest.mark.parametrize("r,m,n,dim", [
    (cv.sphere(2), 3, 2, 16),
    (cv.sphere(3), 5, 3, 64),
    (cv.fubini_study(2), 4, 4, 48),
])
def test_annihilator_dimension(r, m, n, dim):
    prob = rg.annihilator(clifford_algebra(m, n), r)
    assert prob.dim == dim
    assert prob.residual <= 1e-10
    assert rg.lie_closure_check(prob, generate_lie_algebra(r)) <= 1e-9


def test_annihilator_basis_is_annihilated(rng):
    alg = clifford_algebra(3, 2)
    prob = rg.annihilator(alg, cv.sphere(2))
    for u in prob.vectors():
        for w in prob.generators:
            assert (alg.c_minus_cbar(w) * u).norm() <= 1e-10


def test_annihilator_without_generators_is_whole_algebra():
    alg = clifford_algebra(2, 1)
    prob = rg.annihilator(alg)
    assert prob.dim == alg.dim
    assert rg.annihilator(alg, generators=np.zeros((0, 0))).dim == alg.dim


def test_horizontal_lift():
    df = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
    w = np.array([[0.0, 1.0], [-1.0, 0.0]])
    lift = rg.horizontal_lift(w, df)
    assert lift.shape == (3, 3)
    assert lift[0, 1] == 2.0 and lift[1, 0] == -2.0


def test_chain_upgrade_preserves_annihilation(rng):
    prob = rg.annihilator(clifford_algebra(3, 2), cv.sphere(2))
    assert rg.annihilating_pairs(prob).shape[0] > 0
    for ell in (1, 2, 3):
        assert rg.chain_upgrade_check(prob, ell, rng) <= 1e-9


def test_adjoint_rho(rng):
    m_map = rng.standard_normal((2, 3))
    omegas = []
    for _ in range(3):
        a = rng.standard_normal((3, 3))
        omegas.append(a - a.T)
    assert rg.adjoint_rho_check(m_map, omegas) <= 1e-10


@pytest.mark.parametrize("r,dim", [(cv.sphere(3), 9), (cv.fubini_study(2), 8), (cv.sphere(2), 2)])
def test_associative_closure_dimension(r, dim):
    blk = classify(r).blocks[0]
    cl = rg.associative_closure(blk.algebra)
    assert cl.dim == dim
    assert rg.express(cl, np.eye(blk.dim)).reachable


def test_associative_closure_cap():
    blk = classify(cv.sphere(3)).blocks[0]
    with pytest.raises(CapExceeded):
        rg.associative_closure(blk.algebra, cap=1)


def test_express_unreachable_in_complex_block():
    blk = classify(cv.fubini_study(2)).blocks[0]
    cl = rg.associative_closure(blk.algebra)
    i = blk.complex_unit
    # the I-antilinear part of a generic matrix lies outside the complex-linear maps
    x = np.random.default_rng(3).standard_normal((4, 4))
    target = 0.5 * (x + i @ x @ i)
    assert np.linalg.norm(target) > 1e-3
    assert not rg.express(cl, target).reachable
    assert rg.express(cl, 0.5 * (x - i @ x @ i)).reachable


@pytest.mark.parametrize("r", [cv.sphere(3), cv.fubini_study(2), cv.product(cv.sphere(2), cv.sphere(3)),
                               cv.random_valid(2, 5)])
def test_casimir_separator(r, rng):
    dec = classify(r)
    sep = rg.casimir_separator(dec, m=r.n + 2)
    assert sep.rho_residual <= 1e-8 and sep.ad_residual <= 1e-8
    for _ in range(5):
        err = rg.separator_erases(sep, rng.standard_normal((2, r.n)),
                                  rng.standard_normal(sep.p_rows.shape[0]))
        assert err <= 1e-8


def test_separator_failure_reported():
    dec = classify(cv.sphere(3))
    dec.blocks[0].casimir_value *= 1.5
    with pytest.raises(SeparatorFailed) as info:
        rg.casimir_separator(dec)
    assert info.value.rho_residual > 1e-3


def test_embed_horizontal():
    e = rg.embed_horizontal(2, 3)
    assert e.shape == (pair_count(3), 1)
    assert np.allclose(e[:, 0], [1.0, 0.0, 0.0])


def test_real_case_detects_nonzero_m(rng):
    sp = sb.product_fixture()
    prob = rg.annihilator_for(sp)
    blk = classify(sp.R_N).blocks[0]
    closure = rg.associative_closure(blk.algebra)
    v = rg.real_case_conclusion(prob, blk.basis, rng.standard_normal((sp.k, sp.n)), closure)
    assert not v.holds
    for row in v.details["per_h"]:
        assert row["action_min"] >= row["lower_bound"] * (1 - 1e-9)
        assert row["factorisation"] <= 1e-10
        assert row["reachable"]
    assert rg.real_case_conclusion(prob, blk.basis, np.zeros((sp.k, sp.n))).holds


def test_complex_trace_lemma():
    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    a = np.array([[1.0, 0.0], [0.0, -1.0]])
    b = a @ j
    v = rg.complex_trace_lemma(a, b)
    assert v.holds
    assert v.details["nilpotency"] <= 1e-12
    with pytest.raises(PreconditionFailed) as info:
        rg.complex_trace_lemma(a, 2 * b)
    assert info.value.relation == "equal norms"
    with pytest.raises(PreconditionFailed) as info:
        rg.complex_trace_lemma(a, a)
    assert info.value.relation == "orthogonality"


def test_mean_curvature_vanishes():
    sp = sb.product_fixture()
    dec = classify(sp.R_N)
    prob = rg.annihilator_for(sp)
    assert rg.mean_curvature_vanishes(dec, sp, prob).holds
    t = np.zeros((sp.k, sp.k, sp.n))
    t[0, 0, 0] = 1.0
    v = rg.mean_curvature_vanishes(dec, dataclasses.replace(sp, T=t), prob)
    assert not v.holds and v.details["failures"]


def test_mean_curvature_complex_block_traceless_allowed():
    sp = sb.product_fixture(cv.sphere(2), cv.sphere(2))
    dec = classify(sp.R_N)
    assert dec.blocks[0].kind == "complex"
    t = np.zeros((2, 2, 2))
    t[0, 0, 0], t[1, 1, 0] = 1.0, -1.0
    assert rg.mean_curvature_vanishes(dec, dataclasses.replace(sp, T=t)).holds


def test_pointwise_statements_on_product(rng):
    sp = sb.product_fixture(cv.sphere(3), cv.sphere(2))
    prob = rg.annihilator_for(sp)
    r1, r2, r3 = rg.pointwise_ta_check(prob, sp, generate_lie_algebra(sp.R_N), rng)
    assert max(r1, r2, r3) <= 1e-9


def test_problem_apply_shape():
    prob = rg.annihilator(clifford_algebra(3, 2), cv.sphere(2))
    alg = prob.algebra
    assert prob.apply(alg.one()).shape == (alg.dim, prob.dim)
    assert prob.annihilates(alg.one()) == pytest.approx(1.0)
