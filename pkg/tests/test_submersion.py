import dataclasses
import json

import numpy as np
import pytest

from curvrigid import curvature as cv
from curvrigid import submersion as sb
from curvrigid.errors import DimMismatch, MissingCurvature, WrongSlot
from curvrigid.exterior import to_skew
from curvrigid.numerics import random_orthogonal


def test_hopf_besse_numbers():
    sp = sb.hopf_fixture()
    e1 = np.eye(2)[0]
    assert sp.R_M.ricci()[0, 0] == pytest.approx(2.0)
    assert sp.R_N.ricci()[0, 0] == pytest.approx(4.0)
    assert np.sum(sb.a_x(sp, e1) ** 2) == pytest.approx(1.0)
    for x in np.eye(2):
        assert abs(sb.oneill_ricci_defect(sp, x)) <= 1e-12


def test_hopf_perturbed_has_defect():
    sp = sb.hopf_fixture()
    bad = dataclasses.replace(sp, A=1.1 * sp.A)
    # 2 - (4 - 2 * 1.21)
    assert sb.oneill_ricci_defect(bad, np.eye(2)[0]) == pytest.approx(0.42)


def test_product_defect_vanishes(rng):
    sp = sb.product_fixture()
    for x in list(np.eye(3)) + [rng.standard_normal(3)]:
        assert abs(sb.oneill_ricci_defect(sp, x)) <= 1e-12


def test_defect_invariant_under_frame_rotation(rng):
    sp = sb.hopf_fixture()
    for _ in range(10):
        oh, ov = random_orthogonal(2, rng), random_orthogonal(1, rng)
        x = rng.standard_normal(2)
        rot = sb.rotate_frames(sp, oh, ov)
        assert sb.oneill_ricci_defect(rot, oh @ x) == pytest.approx(sb.oneill_ricci_defect(sp, x), abs=1e-9)


def test_defect_requires_curvature():
    sp = sb.SubmersionPoint(3, 2, np.zeros((2, 2, 1)), np.zeros((1, 1, 2)))
    with pytest.raises(MissingCurvature):
        sb.oneill_ricci_defect(sp, np.eye(2)[0])
    with pytest.raises(MissingCurvature):
        sb.rigidity_conclusion(sp)


def test_slot_checks():
    sp = sb.hopf_fixture()
    with pytest.raises(WrongSlot):
        sp.horizontal([0.0, 0.0, 1.0])
    with pytest.raises(WrongSlot):
        sp.vertical([1.0, 0.0, 0.0])
    assert np.array_equal(sp.horizontal([1.0, 2.0, 0.0]), [1.0, 2.0])
    assert np.array_equal(sp.vertical([0.0, 0.0, 3.0]), [3.0])


def test_tensor_symmetry_validation():
    with pytest.raises(ValueError):
        sb.SubmersionPoint(3, 2, np.ones((2, 2, 1)), np.zeros((1, 1, 2)))
    t = np.zeros((2, 2, 1))
    t[0, 1, 0] = 1.0
    with pytest.raises(ValueError):
        sb.SubmersionPoint(3, 1, np.zeros((1, 1, 2)), t)
    with pytest.raises(DimMismatch):
        sb.SubmersionPoint(3, 2, np.zeros((3, 3, 1)), np.zeros((1, 1, 2)))


def test_derived_map_adjoints(rng):
    sp = sb.random_rigidity_instance(rng, n=3, k=2, nonzero="both")
    x, y = rng.standard_normal((2, 3))
    u, w = rng.standard_normal((2, 2))
    # <A_U^* X, Y> = <A_X Y, U>
    assert u @ sb.a_x(sp, x) @ y == pytest.approx(y @ sb.a_u_star(sp, u) @ x)
    # <T_U^* X, W> = <T_U W, X> and S_X U = T_U^* X
    assert w @ sb.t_u_star(sp, u) @ x == pytest.approx(u @ sb.s_x(sp, x) @ w)
    s = sb.s_x(sp, x)
    assert np.allclose(s, s.T)
    d = sb.derived_maps(sp, x=x, u=u)
    assert d.A_X.shape == (2, 3) and d.T_U_star.shape == (2, 3)
    with pytest.raises(ValueError):
        sb.derived_maps(sp)


def test_mean_curvature_is_trace():
    t = np.zeros((2, 2, 1))
    t[0, 0, 0] = t[1, 1, 0] = 1.5
    sp = sb.SubmersionPoint(3, 1, np.zeros((1, 1, 2)), t)
    assert np.allclose(sb.mean_curvature(sp), [3.0, 0.0, 0.0])


def test_verdicts():
    assert sb.rigidity_conclusion(sb.product_fixture()).is_product
    assert sb.rigidity_conclusion(sb.mapping_torus_fixture()).is_product
    v = sb.rigidity_conclusion(sb.hopf_fixture())
    assert v.kind == "obstructed" and v.witness == "Ric_M != f*Ric_N"


def test_verdict_order(rng):
    sp = sb.random_rigidity_instance(rng, 3, 2, nonzero="none")
    t = np.zeros((2, 2, 3))
    t[0, 0, 0] = 1.0
    assert sb.rigidity_conclusion(dataclasses.replace(sp, T=t)).witness == "fibres not minimal"
    gh = np.zeros((5, 5))
    gh[0, 0] = 1.0
    assert sb.rigidity_conclusion(dataclasses.replace(sp, grad_H=gh)).witness == "grad H term nonzero"
    a = np.zeros((3, 3, 2))
    a[0, 1, 0], a[1, 0, 0] = 1.0, -1.0
    assert sb.rigidity_conclusion(dataclasses.replace(sp, A=a)).witness == "defect equation inconsistent"


def test_random_instances_cover_all_cases(rng):
    kinds = set()
    for _ in range(60):
        sp = sb.random_rigidity_instance(rng, 3, 2)
        small = np.linalg.norm(sp.A) + np.linalg.norm(sp.T) <= 1e-9
        assert sb.rigidity_conclusion(sp).is_product == small
        assert np.allclose(np.einsum("uux->x", sp.T), 0, atol=1e-12)
        kinds.add(small)
    assert kinds == {True, False}


def test_nabla_bivector_vertical_and_horizontal(rng):
    sp = sb.hopf_fixture()
    w = to_skew(np.array([1.0]))
    got = sb.nabla_bivector(sp, w, u=np.array([1.0]))
    # T = 0, A_U^* skew on R^2 commutes with w, so the derivative is zero
    assert np.allclose(got.coeffs, 0)
    got = sb.nabla_bivector(sp, w, x=np.eye(2)[0])
    big = np.zeros((3, 3))
    big[:2, :2] = w
    k = np.zeros((3, 3))
    k[2, :2] = sb.a_x(sp, np.eye(2)[0])
    k = k - k.T
    assert np.allclose(to_skew(got), -(big @ k - k @ big))
    with pytest.raises(ValueError):
        sb.nabla_bivector(sp, w)


def test_nabla_bivector_base_term():
    sp = sb.product_fixture()
    w = to_skew(np.array([1.0, 0.0, 0.0]))
    base = to_skew(np.array([0.0, 2.0, 0.0]))
    got = to_skew(sb.nabla_bivector(sp, w, x=np.eye(3)[0], nabla_n=base))
    assert np.allclose(got[:3, :3], base) and np.allclose(got[3:], 0)


def test_json_round_trip(tmp_path):
    sp = sb.hopf_fixture()
    path = tmp_path / "hopf.json"
    path.write_text(json.dumps(sp.to_dict()))
    back = sb.load(path)
    assert np.array_equal(back.A, sp.A)
    assert np.array_equal(back.R_N.matrix, sp.R_N.matrix)
    assert abs(sb.oneill_ricci_defect(back, np.eye(2)[0])) <= 1e-12


def test_mapping_torus_shape():
    sp = sb.mapping_torus_fixture(3)
    assert (sp.m, sp.n, sp.k) == (4, 3, 1)
    assert np.allclose(sp.R_M.ricci()[:3, :3], cv.sphere(3).ricci())
