"""Deterministic corpus of test geometries and brute-force oracles.

Entries pair a parametrization with expected values that come from the
construction itself or from an independent oracle, never from running the
pipeline under test and copying its output.  All randomness flows through
seeds recorded in the entries, so regeneration is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classify import RunConfig, classify
from .errors import (
    BudgetExceeded, DegenerateJoin, DependentGenerators, NotImmersed,
    SpecValidationError,
)
from .expr import (
    Const, Expr, ExprMap, Var, fractional_linear_image, random_polynomial,
    substitute,
)
from .frames import extract_leaf_data
from .jets import eval_point, finite_diff_jet2
from .pencil import select_regular_pair
from .report import canonical_dumps, to_jsonable
from .ruled import RuledSpec, parse_spec_obj

REJECTION_BUDGET = 256


@dataclass
class CorpusEntry:
    name: str
    spec: RuledSpec | ExprMap
    expected: dict
    seed: int
    provenance: dict = field(default_factory=dict)   # expected key -> origin

    def to_obj(self) -> dict:
        if isinstance(self.spec, RuledSpec):
            spec_obj = self.spec.to_obj()
        else:
            spec_obj = {"kind": "chart", "map": self.spec.to_obj()}
        return {
            "schema": "gausskit/corpus-entry/v1",
            "name": self.name,
            "seed": self.seed,
            "expected": to_jsonable(self.expected),
            "provenance": dict(self.provenance),
            "spec": spec_obj,
        }

    @classmethod
    def from_obj(cls, o: dict) -> "CorpusEntry":
        return cls(
            name=o["name"],
            spec=parse_spec_obj(o["spec"]),
            expected=o["expected"],
            seed=int(o["seed"]),
            provenance=dict(o.get("provenance", {})),
        )


def _const_vector_map(vec, var_names) -> ExprMap:
    vec = np.asarray(vec)
    return ExprMap(vars=tuple(var_names),
                   components=tuple(Const(complex(v)) for v in vec))


def _probe_points(rng, dim, count=5, radius=0.6):
    return [rng.uniform(-radius, radius, size=dim) for _ in range(count)]


# ---------------------------------------------------------------------------
# Constructors


def make_cylinder(director: ExprMap, generator_dirs, seed: int,
                  name: str = "cylinder") -> CorpusEntry:
    """Cylinder entry: constant generator directions over a director map.

    The directions must be independent of each other and of the director's
    tangent spread, checked at seeded probe points.
    """
    gens = [np.asarray(g, dtype=complex).ravel() for g in generator_dirs]
    N = director.n_out
    r = director.n_params
    l = len(gens)
    if any(g.shape != (N,) for g in gens):
        raise SpecValidationError("generator directions must be N-vectors")
    G = np.column_stack(gens)
    if np.linalg.matrix_rank(G, tol=1e-10) < l:
        raise DependentGenerators("generator directions are linearly dependent")
    rng = np.random.default_rng(seed)
    for u in _probe_points(rng, r):
        d1 = finite_diff_jet2(director, u).d1
        stack = np.column_stack([G, d1])
        s = np.linalg.svd(stack, compute_uv=False)
        if s[-1] <= 1e-8 * s[0]:
            raise DependentGenerators(
                "generator directions meet the director tangent spread")
    spec = RuledSpec(r=r, l=l, N=N, base=director,
                     generators=tuple(_const_vector_map(g, director.vars)
                                      for g in gens))
    if r >= 2:
        expected = {"r": r, "l": l, "verdict": "Cylinder", "generators": G}
        prov = {"r": "construction,oracle", "l": "construction",
                "verdict": "construction", "generators": "construction"}
    else:
        expected = {"r": r, "l": l, "verdict": "HypothesisFailure",
                    "reason": "2 <= r"}
        prov = {"r": "construction,oracle", "l": "construction",
                "verdict": "construction", "reason": "construction"}
    expected["regular_pencil"] = False
    m = _probe_m(spec, rng)
    expected["m"] = m
    prov["m"] = "oracle"
    if r >= 2 and m >= 2:
        expected["regular_pencil"] = _probe_regular(spec, rng, seed)
    prov["regular_pencil"] = "oracle"
    return CorpusEntry(name=name, spec=spec, expected=expected, seed=seed,
                       provenance=prov)


def make_cone(vertex_point, vertex_dirs, director: ExprMap, seed: int,
              name: str = "cone") -> CorpusEntry:
    """Cone entry: leaves join the director to a fixed (l-1)-flat.

    generators: A_1(u) = vertex_point - A_0(u) plus the constant vertex
    directions, so every leaf contains the whole vertex flat.
    """
    p = np.asarray(vertex_point, dtype=complex).ravel()
    dirs = [np.asarray(d, dtype=complex).ravel() for d in vertex_dirs]
    N = director.n_out
    r = director.n_params
    l = 1 + len(dirs)
    if p.shape != (N,) or any(d.shape != (N,) for d in dirs):
        raise SpecValidationError("vertex data must be N-vectors")
    rng = np.random.default_rng(seed)
    D = np.column_stack(dirs) if dirs else np.zeros((N, 0))
    if dirs and np.linalg.matrix_rank(D, tol=1e-10) < len(dirs):
        raise DegenerateJoin("vertex directions are linearly dependent")
    for u in _probe_points(rng, r):
        jet = finite_diff_jet2(director, u)
        join = p - jet.value
        if dirs:
            Q, _ = np.linalg.qr(D)
            off = join - Q @ (Q.conj().T @ join)
        else:
            off = join
        if np.linalg.norm(off) <= 1e-8 * (1 + np.linalg.norm(p)):
            raise DegenerateJoin("director point lies on the vertex flat")
        stack = np.column_stack([join[:, None], D, jet.d1])
        s = np.linalg.svd(stack, compute_uv=False)
        if s[-1] <= 1e-8 * s[0]:
            raise DegenerateJoin("vertex join degenerates against the tangents")

    u_vars = director.vars
    join_map = ExprMap(
        vars=u_vars,
        components=tuple(Const(complex(p[i])) - director.components[i]
                         for i in range(N)))
    gen_maps = [join_map] + [_const_vector_map(d, u_vars) for d in dirs]
    spec = RuledSpec(r=r, l=l, N=N, base=director, generators=tuple(gen_maps))
    basis = np.linalg.qr(D)[0] if dirs else np.zeros((N, 0))
    expected = {"r": r, "l": l, "verdict": "Cone",
                "vertex_point": p, "vertex_basis": basis}
    prov = {"r": "construction,oracle", "l": "construction",
            "verdict": "construction", "vertex_point": "construction",
            "vertex_basis": "construction"}
    m = _probe_m(spec, rng)
    expected["m"] = m
    prov["m"] = "oracle"
    expected["regular_pencil"] = _probe_regular(spec, rng, seed)
    prov["regular_pencil"] = "oracle"
    return CorpusEntry(name=name, spec=spec, expected=expected, seed=seed,
                       provenance=prov)


def _probe_m(spec: RuledSpec, rng) -> int:
    u = rng.uniform(-0.4, 0.4, size=spec.r)
    return extract_leaf_data(spec, u).m


def _probe_regular(spec: RuledSpec, rng, seed: int) -> bool:
    u = rng.uniform(-0.4, 0.4, size=spec.r)
    data = extract_leaf_data(spec, u)
    try:
        pa = select_regular_pair(data.B, seed=seed)
    except Exception:
        return False
    return bool(pa.usable)


def sacksteder() -> CorpusEntry:
    """The classical rank-2 hypersurface in A^4 that is not a cylinder.

    Ruled form of the graph x4 = x1 cos x3 + x2 sin x3.  Codimension is 1,
    so the cylinder decision's codimension hypothesis fails; the entry
    pins that behavior plus the rank and the absence of real focal points.
    """
    from .expr import cos, sin

    s, u = Var("s"), Var("u")
    base = ExprMap(vars=("s", "u"),
                   components=(-s * sin(u), s * cos(u), u, Const(0.0)))
    gen = ExprMap(vars=("s", "u"),
                  components=(cos(u), sin(u), Const(0.0), Const(1.0)))
    spec = RuledSpec(r=2, l=1, N=4, base=base, generators=(gen,))
    expected = {
        "r": 2, "l": 1, "m": 1,
        "verdict": "HypothesisFailure",
        "reason": "N - n >= 2",
        "regular_pencil": False,
        "real_focal_points": False,
    }
    prov = {"r": "oracle", "l": "construction", "m": "oracle",
            "verdict": "construction", "reason": "construction",
            "regular_pencil": "oracle", "real_focal_points": "oracle"}
    return CorpusEntry(name="sacksteder", spec=spec, expected=expected,
                       seed=0, provenance=prov)


def _random_curve(rng, var: str, degree: int = 3):
    """Scalar polynomial with a guaranteed quadratic term, as an Expr."""
    p = random_polynomial(rng, (var,), degree=degree, terms=3, scale=0.8)
    x = Var(var)
    bump = Const(float(rng.uniform(0.5, 1.5)))
    return p + bump * x * x


def random_regular_example(seed: int, r: int = 2, l: int = 2,
                           N: int | None = None,
                           name: str = "random_regular") -> CorpusEntry:
    """Seeded product geometry with m >= 2 and a usable pencil pair.

    Built as a product of r rank-one factors, l of them ruled (cylinder or
    cone factors over seeded curves, chosen by coin flip) and r - l plain
    curves, then mixed by invertible base and ambient linear maps.  The
    construction needs l <= r; the pencil gap is rejection-sampled above
    1e-3 with a budget of 256 reseeds.
    """
    if l > r:
        raise SpecValidationError("product construction needs l <= r")
    if r < 2:
        raise SpecValidationError("need r >= 2 for a usable pencil")
    n_min = 2 * r + l
    if N is None:
        N = n_min
    if N < n_min:
        raise SpecValidationError(f"need N >= {n_min} for this (r, l)")
    if N < r + l + 2:
        raise SpecValidationError("need N >= r + l + 2")

    for attempt in range(REJECTION_BUDGET):
        rng = np.random.default_rng((seed, attempt))
        entry = _try_random_product(rng, r, l, N, seed, name)
        if entry is not None:
            entry.expected["attempt"] = attempt
            entry.provenance["attempt"] = "construction"
            return entry
    raise BudgetExceeded(
        f"no usable pencil after {REJECTION_BUDGET} seeded attempts")


def _try_random_product(rng, r, l, N, seed, name):
    u_names = tuple(f"u{i + 1}" for i in range(r))
    kinds = ["cone" if rng.uniform() < 0.5 else "cylinder" for _ in range(l)]
    kinds += ["curve"] * (r - l)

    # base variables blended by a random invertible map
    S = np.eye(r) + 0.3 * rng.standard_normal((r, r))
    if abs(np.linalg.det(S)) < 1e-2:
        return None
    mixed_vars = []
    for i in range(r):
        acc: Expr = Const(0.0)
        for j in range(r):
            acc = acc + Const(float(S[i, j])) * Var(u_names[j])
        mixed_vars.append(acc)

    base_comps: list[Expr] = []
    gen_cols: list[list[Expr]] = [[] for _ in range(l)]
    gen_slot = 0
    for i, kind in enumerate(kinds):
        w = mixed_vars[i]
        poly = substitute(_random_curve(rng, u_names[0], degree=3),
                          {u_names[0]: w})
        if kind == "curve":
            block = [w, poly]
        elif kind == "cylinder":
            block = [w, poly, Const(0.0)]
        else:
            block = [w, poly, Const(1.0)]
        start = len(base_comps)
        base_comps.extend(block)
        if kind == "cylinder":
            for g in range(l):
                gen_cols[g].extend([Const(0.0)] * len(block))
            gen_cols[gen_slot][start + len(block) - 1] = Const(1.0)
            gen_slot += 1
        elif kind == "cone":
            for g in range(l):
                if g == gen_slot:
                    gen_cols[g].extend([-c for c in block])
                else:
                    gen_cols[g].extend([Const(0.0)] * len(block))
            gen_slot += 1
        else:
            for g in range(l):
                gen_cols[g].extend([Const(0.0)] * len(block))
    while len(base_comps) < N:
        base_comps.append(Const(0.0))
        for g in range(l):
            gen_cols[g].append(Const(0.0))

    base = ExprMap(vars=u_names, components=tuple(base_comps))
    gens = tuple(ExprMap(vars=u_names, components=tuple(col))
                 for col in gen_cols)
    spec = RuledSpec(r=r, l=l, N=N, base=base, generators=gens)

    try:
        u0 = rng.uniform(-0.4, 0.4, size=r)
        data = extract_leaf_data(spec, u0)
        if data.m < 2:
            return None
        pa = select_regular_pair(data.B, seed=seed)
        if not pa.usable or pa.min_gap <= 1e-3:
            return None
    except Exception:
        return None

    verdict = "Cylinder" if all(k != "cone" for k in kinds) else "Undetermined"
    expected = {
        "r": r, "l": l, "m": data.m,
        "verdict": verdict,
        "factor_kinds": kinds,
        "pencil_gap": pa.min_gap,
        "regular_pencil": True,
    }
    prov = {"r": "construction,oracle", "l": "construction", "m": "oracle",
            "verdict": "construction", "factor_kinds": "construction",
            "pencil_gap": "oracle", "regular_pencil": "oracle"}
    return CorpusEntry(name=name, spec=spec, expected=expected, seed=seed,
                       provenance=prov)


# ---------------------------------------------------------------------------
# Brute-force oracle


def brute_force_gauss_rank(spec: RuledSpec | ExprMap, point,
                           h: float = 1e-4, tol: float = 1e-6) -> dict:
    """Rank of the Gauss map by finite differences of tangent projectors.

    Independent of the second-form pipeline: the tangent projector at each
    probe comes from a finite-difference Jacobian, and its derivative from
    central differences of the projector itself.  Returns the rank and the
    singular-value gap ratio.
    """
    m = spec.chart() if isinstance(spec, RuledSpec) else spec
    point = np.asarray(point, dtype=float)
    n = m.n_params

    def projector(w):
        d1 = finite_diff_jet2(m, w).d1
        s = np.linalg.svd(d1, compute_uv=False)
        if s[-1] <= 1e-10 * max(1.0, s[0]):
            raise NotImmersed("probe point is not an immersion point")
        Q, _ = np.linalg.qr(d1)
        return Q @ Q.conj().T

    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        dP = (projector(point + e) - projector(point - e)) / (2 * h)
        cols.append(dP.ravel())
    M = np.column_stack(cols)
    s = np.linalg.svd(M, compute_uv=False)
    scale = max(1.0, float(s[0]))
    rank = int(np.sum(s > tol * scale))
    if rank == 0:
        gap_ratio = float("inf") if s[0] <= tol * scale else 0.0
    elif rank == n:
        gap_ratio = float("inf")
    else:
        gap_ratio = float(s[rank - 1] / s[rank]) if s[rank] > 0 else float("inf")
    return {"rank": rank, "gap_ratio": gap_ratio, "sigmas": s.tolist()}


# ---------------------------------------------------------------------------
# Default corpus


def _veronese_director(N: int, vars=("u", "v"), homogeneous_slot: int | None = None):
    u, v = Var(vars[0]), Var(vars[1])
    comps: list[Expr] = [u, v, u * u + v * v, u * v]
    comps += [Const(0.0)] * (N - 4)
    if homogeneous_slot is not None:
        comps[homogeneous_slot] = Const(1.0)
    return ExprMap(vars=tuple(vars), components=tuple(comps))


def _unit(N, k):
    e = np.zeros(N)
    e[k] = 1.0
    return e


def _random_director(rng, r, N, flat_dim):
    """Immersed polynomial director into the first flat_dim coordinates."""
    names = tuple(f"u{i + 1}" for i in range(r))
    comps: list[Expr] = []
    for i in range(flat_dim):
        q = random_polynomial(rng, names, degree=3, terms=4, scale=0.5)
        if i < r:
            q = q + Var(names[i])
        comps.append(q)
    comps += [Const(0.0)] * (N - flat_dim)
    return ExprMap(vars=names, components=tuple(comps))


def _plane_chart(seed: int, n: int = 3, N: int = 5) -> ExprMap:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((N, n))
    b = rng.standard_normal(N)
    names = tuple(f"u{i + 1}" for i in range(n))
    comps = []
    for i in range(N):
        acc: Expr = Const(float(b[i]))
        for j in range(n):
            acc = acc + Const(float(A[i, j])) * Var(names[j])
        comps.append(acc)
    return ExprMap(vars=names, components=tuple(comps))


def _paraboloid_chart() -> ExprMap:
    u, v = Var("u"), Var("v")
    return ExprMap(vars=("u", "v"), components=(u, v, u * u + v * v))


def _repeated_pencil_cylinder() -> RuledSpec:
    u, v = Var("u"), Var("v")
    half = Const(0.5)
    q1 = half * (u * u + v * v)
    q2 = half * (u * u - v * v) + Const(1j) * u * v
    base = ExprMap(vars=("u", "v"),
                   components=(u, v, q1, q2, Const(0.0), Const(0.0)))
    gens = tuple(
        ExprMap(vars=("u", "v"),
                components=tuple(Const(1.0) if i == k else Const(0.0)
                                 for i in range(6)))
        for k in (4, 5))
    return RuledSpec(r=2, l=2, N=6, base=base, generators=gens)


def _proportional_forms_cylinder() -> RuledSpec:
    """All second forms proportional: the second normal component doubles
    the first, so B'' = 2 B' for every choice of pair and m = 1."""
    u, v = Var("u"), Var("v")
    q = u * u + Const(0.7) * u * v + Const(2.0) * v * v
    base = ExprMap(vars=("u", "v"),
                   components=(u, v, q, Const(2.0) * q, Const(0.0), Const(0.0)))
    gens = tuple(
        ExprMap(vars=("u", "v"),
                components=tuple(Const(1.0) if i == k else Const(0.0)
                                 for i in range(6)))
        for k in (4, 5))
    return RuledSpec(r=2, l=2, N=6, base=base, generators=gens)


def build_default_corpus(seed: int = 0) -> list[CorpusEntry]:
    """The standard entry set: named classics plus seeded random entries."""
    entries: list[CorpusEntry] = []

    entries.append(CorpusEntry(
        name="plane",
        spec=_plane_chart(seed * 1000 + 1),
        expected={"r": 0, "verdict": "HypothesisFailure",
                  "reason": "rank r >= 2 required", "regular_pencil": False},
        seed=seed * 1000 + 1,
        provenance={"r": "construction,oracle", "verdict": "construction",
                    "reason": "construction", "regular_pencil": "construction"}))

    entries.append(CorpusEntry(
        name="paraboloid",
        spec=_paraboloid_chart(),
        expected={"r": 2, "verdict": "NonDegenerate", "regular_pencil": False},
        seed=seed * 1000 + 2,
        provenance={"r": "oracle", "verdict": "construction",
                    "regular_pencil": "construction"}))

    entries.append(make_cylinder(
        _veronese_director(6), [_unit(6, 4), _unit(6, 5)],
        seed=seed * 1000 + 3, name="veronese_cylinder"))

    u = Var("u")
    curve = ExprMap(vars=("u",),
                    components=(u, u * u, u * u * u, Const(0.0)))
    entries.append(make_cylinder(
        curve, [_unit(4, 3)], seed=seed * 1000 + 4, name="curve_cylinder_r1"))

    rng5 = np.random.default_rng(seed * 1000 + 5)
    entries.append(make_cylinder(
        _random_director(rng5, 2, 6, 4), [_unit(6, 4), _unit(6, 5)],
        seed=seed * 1000 + 5, name="random_cylinder"))

    rng6 = np.random.default_rng(seed * 1000 + 6)
    entries.append(make_cylinder(
        _random_director(rng6, 2, 5, 4), [_unit(5, 4)],
        seed=seed * 1000 + 6, name="random_cylinder_l1"))

    entries.append(make_cone(
        np.zeros(6), [_unit(6, 5)],
        _veronese_director(6, homogeneous_slot=4),
        seed=seed * 1000 + 7, name="veronese_cone"))

    rng8 = np.random.default_rng(seed * 1000 + 8)
    v0 = rng8.standard_normal(5)
    u, v = Var("u"), Var("v")
    shifted = ExprMap(
        vars=("u", "v"),
        components=(Const(v0[0]) + u, Const(v0[1]) + v,
                    Const(v0[2]) + u * u + v * v, Const(v0[3]) + u * v,
                    Const(v0[4] + 1.0)))
    entries.append(make_cone(
        v0, [], shifted, seed=seed * 1000 + 8, name="shifted_cone_l1"))

    # director must span 5 dimensions so both normals carry curvature (m=2)
    rng9 = np.random.default_rng(seed * 1000 + 9)
    director9 = _random_director(rng9, 2, 6, 5)
    comps9 = list(director9.components)
    comps9[4] = comps9[4] + Const(1.0)       # keep the director off the vertex
    director9 = ExprMap(vars=director9.vars, components=tuple(comps9))
    entries.append(make_cone(
        np.zeros(6), [_unit(6, 5)], director9,
        seed=seed * 1000 + 9, name="random_cone"))

    entries.append(random_regular_example(
        seed * 1000 + 10, r=2, l=2, N=7, name="random_regular_r2"))
    entries.append(random_regular_example(
        seed * 1000 + 11, r=3, l=3, N=9, name="random_regular_r3"))

    entries.append(CorpusEntry(
        name="repeated_pencil_cylinder",
        spec=_repeated_pencil_cylinder(),
        expected={"r": 2, "l": 2, "m": 2, "verdict": "HypothesisFailure",
                  "reason": "regular pencil pair with distinct eigenvalues",
                  "regular_pencil": False},
        seed=seed * 1000 + 12,
        provenance={"r": "construction,oracle", "l": "construction",
                    "m": "oracle", "verdict": "construction",
                    "reason": "construction", "regular_pencil": "oracle"}))

    entries.append(CorpusEntry(
        name="proportional_forms",
        spec=_proportional_forms_cylinder(),
        expected={"r": 2, "l": 2, "m": 1, "verdict": "HypothesisFailure",
                  "reason": "m >= 2", "regular_pencil": False},
        seed=seed * 1000 + 13,
        provenance={"r": "construction,oracle", "l": "construction",
                    "m": "oracle", "verdict": "construction",
                    "reason": "construction", "regular_pencil": "construction"}))

    entries.append(CorpusEntry(
        name="product_cones",
        spec=_product_of_cones(),
        expected={"r": 2, "l": 2, "m": 2, "verdict": "Undetermined",
                  "regular_pencil": True},
        seed=seed * 1000 + 14,
        provenance={"r": "construction,oracle", "l": "construction",
                    "m": "oracle", "verdict": "construction",
                    "regular_pencil": "oracle"}))

    entries.append(sacksteder())
    return entries


def _product_of_cones() -> RuledSpec:
    a, b = Var("a"), Var("b")
    y1 = (a, a * a, Const(1.0))
    y2 = (b, b * b * b + Const(0.5) * b * b, Const(1.0))
    zero3 = (Const(0.0),) * 3
    base = ExprMap(vars=("a", "b"), components=y1 + y2)
    gen1 = ExprMap(vars=("a", "b"), components=tuple(-c for c in y1) + zero3)
    gen2 = ExprMap(vars=("a", "b"), components=zero3 + tuple(-c for c in y2))
    return RuledSpec(r=2, l=2, N=6, base=base, generators=(gen1, gen2))


# ---------------------------------------------------------------------------
# Projective duality pairs


@dataclass
class DualityPair:
    """A cone and the cylinder obtained by sending its vertex to infinity
    (or the reverse), with the fractional-linear map that connects them."""
    name: str
    primal: CorpusEntry
    dual: CorpusEntry
    direction: str            # "cone_to_cylinder" or "cylinder_to_cone"
    covector: np.ndarray      # denominator covector c
    shift: float              # denominator constant d
    offset: np.ndarray        # numerator shift b (cone -> cylinder only)

    def to_obj(self) -> dict:
        return {
            "schema": "gausskit/duality-pair/v1",
            "name": self.name,
            "direction": self.direction,
            "covector": to_jsonable(self.covector),
            "shift": self.shift,
            "offset": to_jsonable(self.offset),
            "primal": self.primal.to_obj(),
            "dual": self.dual.to_obj(),
        }


def _cone_to_cylinder_pair(seed: int, idx: int, with_vertex_dir: bool) -> DualityPair:
    """Cone with vertex at the origin, mapped by x -> (x + b) / x_h.

    The denominator vanishes exactly on the vertex flat, so rays through
    the vertex become parallel lines in direction b and the image is a
    cylinder.  The director's h-slot is 1 plus a small quadric and b has a
    nonzero h-component; both are needed so the image does not collapse
    into a hyperplane and keeps two curved normal directions.
    """
    rng = np.random.default_rng((seed, idx))
    N = 6 if with_vertex_dir else 5
    h = 4
    names = ("u", "v")
    uu, vv = Var("u"), Var("v")
    comps: list[Expr] = [
        uu, vv,
        uu * uu + Const(float(rng.uniform(0.5, 1.5))) * vv * vv,
        uu * vv + Const(float(rng.uniform(-0.5, 0.5))) * uu * uu,
    ]
    comps += [Const(0.0)] * (N - 4)
    comps[h] = Const(1.0) + Const(float(rng.uniform(0.1, 0.25))) * uu * uu \
        + Const(float(rng.uniform(-0.2, 0.2))) * vv * vv
    director = ExprMap(vars=names, components=tuple(comps))
    dirs = [_unit(N, 5)] if with_vertex_dir else []
    primal = make_cone(np.zeros(N), dirs, director, seed=seed * 100 + idx,
                       name=f"dual_cone_{idx}")

    b = rng.standard_normal(N)
    b[h] = float(rng.uniform(0.6, 1.2))
    if dirs:
        b[5] = 0.0
    b = b / np.linalg.norm(b)
    c = _unit(N, h)
    # image of the base point (leaf parameter 0) plus constant directions
    base_imaged = fractional_linear_image(
        director, np.eye(N), b, c, 0.0)
    dual = make_cylinder(base_imaged, [b] + dirs, seed=seed * 100 + idx,
                         name=f"dual_cylinder_{idx}")
    return DualityPair(
        name=f"pair_{idx}", primal=primal, dual=dual,
        direction="cone_to_cylinder", covector=c, shift=0.0, offset=b)


def _cylinder_to_cone_pair(seed: int, idx: int, two_generators: bool) -> DualityPair:
    """Cylinder mapped by x -> x / (c.x + d), sending generator directions
    to finite points that form the image cone's vertex flat."""
    rng = np.random.default_rng((seed, idx, 7))
    N = 6 if two_generators else 5
    names = ("u", "v")
    uu, vv = Var("u"), Var("v")
    comps: list[Expr] = [
        uu, vv,
        uu * uu + Const(float(rng.uniform(0.8, 1.4))) * vv * vv,
        uu * vv,
    ]
    comps += [Const(0.0)] * (N - 4)
    director = ExprMap(vars=names, components=tuple(comps))
    gens = [_unit(N, 4)] + ([_unit(N, 5)] if two_generators else [])
    primal = make_cylinder(director, gens, seed=seed * 100 + idx,
                           name=f"dual_cylinder_src_{idx}")

    # denominator: nonzero on the sampled surface, nonzero on each generator
    while True:
        c = rng.standard_normal(N) * 0.2
        d = float(rng.uniform(1.5, 2.5))
        if all(abs(c @ g) > 0.05 for g in gens):
            break
    base_imaged = fractional_linear_image(
        director, np.eye(N), np.zeros(N), c, d)
    v_pts = [np.asarray(g) / (c @ g) for g in gens]
    gen_maps = []
    for v_pt in v_pts:
        gen_maps.append(ExprMap(
            vars=names,
            components=tuple(Const(complex(v_pt[i])) - base_imaged.components[i]
                             for i in range(N))))
    spec = RuledSpec(r=2, l=len(gens), N=N, base=base_imaged,
                     generators=tuple(gen_maps))
    if len(gens) == 1:
        vp, vb = v_pts[0], np.zeros((N, 0))
    else:
        vp = v_pts[0]
        vb = np.linalg.qr(np.column_stack([v_pts[1] - v_pts[0]]))[0]
    dual = CorpusEntry(
        name=f"dual_cone_img_{idx}",
        spec=spec,
        expected={"r": 2, "l": len(gens), "verdict": "Cone",
                  "vertex_point": vp, "vertex_basis": vb,
                  "regular_pencil": True},
        seed=seed * 100 + idx,
        provenance={"r": "construction,oracle", "l": "construction",
                    "verdict": "construction", "vertex_point": "construction",
                    "vertex_basis": "construction",
                    "regular_pencil": "oracle"})
    return DualityPair(
        name=f"pair_{idx}", primal=primal, dual=dual,
        direction="cylinder_to_cone", covector=c, shift=d,
        offset=np.zeros(N))


def make_duality_pairs(seed: int = 0, count: int = 5) -> list[DualityPair]:
    """Seeded cone/cylinder pairs connected by a vertex-to-infinity map."""
    pairs = []
    for idx in range(count):
        if idx % 2 == 0:
            pairs.append(_cone_to_cylinder_pair(seed, idx, with_vertex_dir=idx >= 2))
        else:
            pairs.append(_cylinder_to_cone_pair(seed, idx, two_generators=idx >= 3))
    return pairs


def duality_map_residual(pair: DualityPair, count: int = 12) -> float:
    """Point check: the fractional-linear image of the primal surface lies
    on the dual surface (via the leaf reparametrization the map induces)."""
    rng = np.random.default_rng((pair.primal.seed, 99))
    primal = pair.primal.spec
    dual = pair.dual.spec
    worst = 0.0
    for _ in range(count):
        u = rng.uniform(-0.35, 0.35, size=primal.r)
        t = rng.uniform(-0.3, 0.3, size=primal.l)
        x = primal.leaf_point(u, t)
        den = complex(pair.covector @ x + pair.shift)
        if abs(den) < 0.2:
            continue
        y = (x + pair.offset) / den
        if pair.direction == "cone_to_cylinder":
            # the induced leaf reparametrization divides by the denominator
            t_new = np.asarray(t, dtype=complex) / den
            y_dual = dual.leaf_point(u, t_new)
        else:
            den_y = complex(pair.covector @ eval_point(primal.base, u) + pair.shift)
            sigma = np.array([t[k] * (pair.covector @
                                      eval_point(primal.generators[k], u)).real
                              for k in range(primal.l)], dtype=complex) / den
            y_dual = dual.leaf_point(u, sigma)
        worst = max(worst, float(np.max(np.abs(y - y_dual))))
    return worst


# ---------------------------------------------------------------------------
# Persistence and verification


def write_corpus(entries: list[CorpusEntry], out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"schema": "gausskit/corpus-manifest/v1",
                "count": len(entries), "entries": []}
    for entry in entries:
        fname = f"{entry.name}.json"
        (out / fname).write_text(canonical_dumps(entry.to_obj()))
        manifest["entries"].append({
            "name": entry.name, "file": fname, "seed": entry.seed,
            "expected": to_jsonable(entry.expected),
        })
    (out / "manifest.json").write_text(canonical_dumps(manifest))
    return out / "manifest.json"


def load_corpus(dir_path) -> list[CorpusEntry]:
    import json

    out = Path(dir_path)
    manifest = json.loads((out / "manifest.json").read_text())
    entries = []
    for row in manifest["entries"]:
        obj = json.loads((out / row["file"]).read_text())
        entries.append(CorpusEntry.from_obj(obj))
    return entries


def verify_entry(entry: CorpusEntry, cfg: RunConfig | None = None) -> dict:
    """Re-run the pipeline and the oracle against the recorded expectations."""
    cfg = cfg or RunConfig(samples=8, seed=entry.seed)
    mismatches = []
    cls = classify(entry.spec, cfg=cfg)
    exp = entry.expected
    if "verdict" in exp and cls.verdict != exp["verdict"]:
        mismatches.append(f"verdict {cls.verdict} != expected {exp['verdict']}")
    if "reason" in exp and cls.reason != exp["reason"]:
        mismatches.append(f"reason {cls.reason!r} != expected {exp['reason']!r}")
    if "r" in exp and cls.r != exp["r"]:
        mismatches.append(f"rank {cls.r} != expected {exp['r']}")
    if "m" in exp and cls.m >= 0 and cls.m != exp["m"]:
        mismatches.append(f"m {cls.m} != expected {exp['m']}")
    rng = np.random.default_rng((entry.seed, 17))
    dim = entry.spec.n if isinstance(entry.spec, RuledSpec) else entry.spec.n_params
    oracle_ranks = []
    for _ in range(3):
        w = rng.uniform(-0.3, 0.3, size=dim)
        try:
            oracle_ranks.append(brute_force_gauss_rank(entry.spec, w)["rank"])
        except NotImmersed:
            continue
    if "r" in exp and oracle_ranks and any(rk != exp["r"] for rk in oracle_ranks):
        mismatches.append(f"oracle ranks {oracle_ranks} != expected {exp['r']}")
    if "generators" in exp and cls.generators is not None:
        G_exp = np.asarray(exp["generators"], dtype=complex)
        if G_exp.ndim == 3:          # re/im stacked on the last axis
            G_exp = G_exp[..., 0] + 1j * G_exp[..., 1]
        d = _span_distance(cls.generators, G_exp)
        if d > 1e-7:
            mismatches.append(f"generator span off by {d:.2e}")
    if "vertex_point" in exp and cls.vertex_point is not None:
        vp = np.asarray(exp["vertex_point"], dtype=complex)
        if vp.ndim == 2:
            vp = vp[:, 0] + 1j * vp[:, 1]
        vb = np.asarray(exp.get("vertex_basis", np.zeros((len(vp), 0))),
                        dtype=complex)
        if vb.ndim == 3:
            vb = vb[..., 0] + 1j * vb[..., 1]
        d = _flat_distance(cls.vertex_point, cls.vertex_basis, vp, vb)
        if d > 1e-7:
            mismatches.append(f"vertex flat off by {d:.2e}")
    return {"name": entry.name, "ok": not mismatches, "mismatches": mismatches,
            "verdict": cls.verdict, "oracle_ranks": oracle_ranks}


def _span_distance(A: np.ndarray, B: np.ndarray) -> float:
    Qa, _ = np.linalg.qr(np.asarray(A, dtype=complex))
    Qb, _ = np.linalg.qr(np.asarray(B, dtype=complex))
    return float(np.linalg.norm(Qa @ Qa.conj().T - Qb @ Qb.conj().T, 2))


def _flat_distance(p1, B1, p2, B2) -> float:
    """Distance between two affine flats given as point + basis."""
    B1 = np.asarray(B1, dtype=complex)
    B2 = np.asarray(B2, dtype=complex)
    d = 0.0
    if B1.shape[1] != B2.shape[1]:
        return float("inf")
    if B1.shape[1] > 0:
        d = _span_distance(B1, B2)
        Q, _ = np.linalg.qr(B2)
        diff = np.asarray(p1) - np.asarray(p2)
        off = diff - Q @ (Q.conj().T @ diff)
        d = max(d, float(np.linalg.norm(off)))
    else:
        d = float(np.linalg.norm(np.asarray(p1) - np.asarray(p2)))
    return d


def verify_corpus(entries: list[CorpusEntry],
                  cfg: RunConfig | None = None) -> list[dict]:
    return [verify_entry(e, cfg) for e in entries]
