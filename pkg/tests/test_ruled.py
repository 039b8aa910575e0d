import numpy as np
import pytest

from gausskit.errors import SpecValidationError
from gausskit.expr import Const, ExprMap, Var
from gausskit.jets import eval_point
from gausskit.ruled import RuledSpec, parse_spec_obj

from geo import sacksteder_ruled, veronese_cylinder


def test_chart_matches_leaf_point():
    spec = veronese_cylinder()
    chart = spec.chart()
    assert chart.vars == ("t1", "t2", "u", "v")
    rng = np.random.default_rng(2)
    for _ in range(5):
        t = rng.uniform(-1, 1, size=2)
        u = rng.uniform(-1, 1, size=2)
        via_chart = eval_point(chart, np.concatenate([t, u]))
        np.testing.assert_allclose(via_chart, spec.leaf_point(u, t), atol=1e-13)


def test_sacksteder_ruled_form_matches_graph():
    spec = sacksteder_ruled()
    rng = np.random.default_rng(3)
    for _ in range(10):
        s, u, t = rng.uniform(-1, 1, size=3)
        x = spec.leaf_point([s, u], [t])
        # the image satisfies x4 = x1 cos x3 + x2 sin x3
        assert abs(x[3] - (x[0] * np.cos(x[2]) + x[1] * np.sin(x[2]))) < 1e-12


def test_generator_matrix_shape():
    spec = veronese_cylinder()
    G = spec.generator_matrix([0.3, 0.4])
    assert G.shape == (6, 2)
    np.testing.assert_allclose(G[:, 0], [0, 0, 0, 0, 1, 0], atol=1e-15)


def test_validation_rejects_bad_shapes():
    director = veronese_cylinder().base
    gen = veronese_cylinder().generators[0]
    with pytest.raises(SpecValidationError):
        RuledSpec(r=2, l=2, N=6, base=director, generators=(gen,))
    with pytest.raises(SpecValidationError):
        RuledSpec(r=2, l=1, N=4, base=director, generators=(gen,))  # N mismatch
    bad_gen = ExprMap(vars=("a", "b"), components=gen.components)
    with pytest.raises(SpecValidationError):
        RuledSpec(r=2, l=1, N=6, base=director, generators=(bad_gen,))


def test_validation_rejects_codimension_zero():
    u = Var("u")
    base = ExprMap(vars=("u",), components=(u, u * u, Const(0.0)))
    gen = ExprMap(vars=("u",), components=(Const(0), Const(0), Const(1)))
    with pytest.raises(SpecValidationError):
        RuledSpec(r=1, l=2, N=3, base=base, generators=(gen, gen))


def test_base_vars_may_not_shadow_leaf_vars():
    t1 = Var("t1")
    base = ExprMap(vars=("t1",), components=(t1, t1 * t1, Const(0.0), Const(0.0)))
    gen = ExprMap(vars=("t1",), components=(Const(0), Const(0), Const(1), Const(0)))
    with pytest.raises(SpecValidationError):
        RuledSpec(r=1, l=1, N=4, base=base, generators=(gen,))


def test_json_round_trip_and_dispatch():
    spec = veronese_cylinder()
    obj = spec.to_obj()
    back = parse_spec_obj(obj)
    assert isinstance(back, RuledSpec)
    assert back == spec
    chart = parse_spec_obj({"kind": "chart", "map": spec.base.to_obj()})
    assert chart == spec.base
    bare = parse_spec_obj(spec.base.to_obj())
    assert bare == spec.base
    with pytest.raises(SpecValidationError):
        parse_spec_obj({"kind": "mystery"})
