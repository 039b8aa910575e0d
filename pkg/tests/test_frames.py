import numpy as np
import pytest

from gausskit.errors import FrameIllConditioned, SingularBasePoint
from gausskit.expr import Const, ExprMap, Var
from gausskit.frames import (
    check_basic_equations, extract_leaf_data, leaf_rank_checks,
    second_order_profile,
)
from gausskit.gauss import sample_points
from gausskit.ruled import RuledSpec

from geo import (
    product_of_cones, sacksteder_ruled, veronese_cone, veronese_cylinder,
)


def test_cylinder_has_zero_c_matrices():
    spec = veronese_cylinder()
    for u in sample_points(np.random.default_rng(0), 2, 5):
        data = extract_leaf_data(spec, u)
        assert np.array_equal(data.C[0], np.eye(2))
        assert np.max(np.abs(data.C[1])) < 1e-12
        assert np.max(np.abs(data.C[2])) < 1e-12
        assert data.m == 2
        assert data.adapted_residual < 1e-12


def test_cylinder_forms_span_veronese_hessians():
    data = extract_leaf_data(veronese_cylinder(), [0.2, -0.3])
    # the two forms span {2I, [[0,1],[1,0]]}: rank of the stack is 2 and
    # every form is a combination of those Hessians
    target = np.stack([2 * np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]])])
    for B in data.B:
        coeffs, res, *_ = np.linalg.lstsq(
            target.reshape(2, -1).T, B.reshape(-1), rcond=None
        )
        recon = np.tensordot(coeffs, target, axes=1)
        assert np.max(np.abs(recon - B)) < 1e-10


def test_cone_c_matrix_is_minus_identity():
    spec = veronese_cone()
    for u in sample_points(np.random.default_rng(1), 2, 5):
        data = extract_leaf_data(spec, u)
        np.testing.assert_allclose(data.C[1], -np.eye(2), atol=1e-10)
        rep = check_basic_equations(data)
        assert rep.passed


def test_sacksteder_c_matrix_nilpotent():
    spec = sacksteder_ruled()
    for u in sample_points(np.random.default_rng(2), 2, 6):
        data = extract_leaf_data(spec, u)
        np.testing.assert_allclose(data.C[1], [[0.0, 1.0], [0.0, 0.0]], atol=1e-10)
        assert data.m == 1
        # single normal: B proportional to the antidiagonal
        B = data.B[0]
        assert abs(B[0, 0]) < 1e-10 and abs(B[1, 1]) < 1e-10
        assert abs(B[0, 1]) > 1e-3
        assert check_basic_equations(data).passed


def test_basic_equations_on_mixed_product_of_cones():
    # non-diagonal, non-symmetric C_a: the symmetry of B^alpha C_a is a real
    # constraint here, not an accident of diagonal matrices
    spec = product_of_cones(mixed=True)
    for u in sample_points(np.random.default_rng(3), 2, 6, radius=0.6):
        data = extract_leaf_data(spec, u)
        C1 = data.C[1]
        assert np.max(np.abs(C1 - np.diag(np.diagonal(C1)))) > 1e-3
        assert np.max(np.abs(C1 - C1.T)) > 1e-3
        rep = check_basic_equations(data)
        assert rep.residual <= 1e-8
    plain = extract_leaf_data(product_of_cones(mixed=False), [0.2, 0.3])
    np.testing.assert_allclose(plain.C[1], np.diag([-1.0, 0.0]), atol=1e-10)
    np.testing.assert_allclose(plain.C[2], np.diag([0.0, -1.0]), atol=1e-10)


def test_fault_injection_raises_residual():
    data = extract_leaf_data(veronese_cylinder(), [0.1, 0.4])
    assert check_basic_equations(data).residual <= 1e-10
    data.C[1][0, 1] += 0.1
    data.H = np.einsum("apq,iqs->aips", data.B, data.C)
    rep = check_basic_equations(data)
    assert rep.residual > 1e-3
    assert not rep.passed


def test_second_order_profile():
    data = extract_leaf_data(veronese_cylinder(), [0.0, 0.0])
    m, osc = second_order_profile(data)
    assert (m, osc) == (2, 6)
    sack = extract_leaf_data(sacksteder_ruled(), [0.1, 0.2])
    assert second_order_profile(sack) == (1, 4)


def test_m_bound_corpus_style():
    for spec in (veronese_cylinder(), veronese_cone(), sacksteder_ruled(),
                 product_of_cones(True)):
        data = extract_leaf_data(spec, [0.15, -0.2])
        r, N, n = spec.r, spec.N, spec.n
        assert data.m <= min(r * (r + 1) // 2, N - n)


def test_leaf_rank_checks():
    data = extract_leaf_data(veronese_cylinder(), [0.3, 0.1])
    checks = leaf_rank_checks(data)
    assert checks["c_stack_rank"] == 2
    assert checks["b_stack_rank"] == 2


def test_singular_base_point():
    # generator equal to a base tangent direction: frame vectors dependent
    u, v = Var("u"), Var("v")
    base = ExprMap(vars=("u", "v"),
                   components=(u, v, u * u + v * v, u * v, Const(0.0), Const(0.0)))
    gen = ExprMap(vars=("u", "v"),
                  components=(Const(1.0), Const(0.0), 2 * u, v, Const(0.0), Const(0.0)))
    spec = RuledSpec(r=2, l=1, N=6, base=base, generators=(gen,))
    with pytest.raises(SingularBasePoint):
        extract_leaf_data(spec, [0.2, 0.3])


def test_frame_ill_conditioned():
    u, v = Var("u"), Var("v")
    base = ExprMap(vars=("u", "v"),
                   components=(u, v, u * u + v * v, u * v, Const(0.0), Const(0.0)))
    e5 = (Const(0.0),) * 4 + (Const(1.0), Const(0.0))
    near_e5 = (Const(0.0),) * 4 + (Const(1.0), Const(1e-11))
    gens = (
        ExprMap(vars=("u", "v"), components=e5),
        ExprMap(vars=("u", "v"), components=near_e5),
    )
    spec = RuledSpec(r=2, l=2, N=6, base=base, generators=gens)
    with pytest.raises(FrameIllConditioned):
        extract_leaf_data(spec, [0.1, 0.1])


def test_leaf_data_serializes():
    from gausskit.report import canonical_dumps
    data = extract_leaf_data(veronese_cylinder(), [0.25, 0.5])
    text = canonical_dumps(data.to_obj())
    assert '"adapted_residual"' in text
    assert canonical_dumps(data.to_obj()) == text
