"""End-to-end classification: cylinder, cone, or neither.

The pipeline, per ruled input:

1. rank profile over the full chart (rank must be constant and match the
   declared base dimension r);
2. named hypothesis checks: 2 <= r <= n-1, N - n >= 2, leaf adaptation,
   basic equations, m >= 2, a regular pencil pair with distinct roots;
3. per-sample leaf analysis: frame matrices, pencil, simultaneous
   diagonalization, focal factorization into r covectors;
4. decision on the covectors: all at the leaf's hyperplane at infinity at
   every sample means Cylinder; per-sample coincident finite covectors
   with a consistent ambient flat means Cone; anything else is
   Undetermined, because the sufficient conditions implemented here are
   silent about mixed configurations.

Every verdict carries the full evidence trail.  Hypothesis failures do not
abort the evidence gathering; they only fix the verdict.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    DependentGenerators, DriftTooLarge, GaussKitError, HypothesisNotMet,
    InconsistentVertex, MTooSmall, NoRegularPair,
)
from .expr import ExprMap, affine_image
from .focal import factor_focal, focal_hypercone, focal_polynomial, leaf_focal_roots
from .frames import check_basic_equations, extract_leaf_data, leaf_rank_checks
from .gauss import point_rank, rank_profile
from .jets import eval_jet2
from .pencil import select_regular_pair
from .report import to_jsonable
from .ruled import RuledSpec

CYLINDER = "Cylinder"
CONE = "Cone"
NON_DEGENERATE = "NonDegenerate"
HYPOTHESIS_FAILURE = "HypothesisFailure"
UNDETERMINED = "Undetermined"

EXIT_CODES = {CYLINDER: 0, CONE: 0, HYPOTHESIS_FAILURE: 2, UNDETERMINED: 3,
              NON_DEGENERATE: 4}

L_POLICY_NOTE = (
    "generator dimension l >= 1 is accepted; the stricter reading l >= 2 "
    "is not enforced and l is reported verbatim"
)


@dataclass(frozen=True)
class RunConfig:
    tol_rank: float = 1e-8
    tol_gap: float = 1e-8
    tol_coincide: float = 1e-6
    tol_residual: float = 1e-8
    samples: int = 20
    seed: int = 0
    pencil_budget: int = 64
    sample_radius: float = 0.7
    leaf_radius: float = 0.35

    def __post_init__(self):
        for name in ("tol_rank", "tol_gap", "tol_coincide", "tol_residual"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.samples < 1:
            raise ValueError("need at least one sample")

    def to_obj(self) -> dict:
        return asdict(self)


@dataclass
class Classification:
    verdict: str
    reason: str | None
    r: int
    l: int
    m: int
    N: int
    generators: np.ndarray | None = None       # N x l (cylinder)
    vertex_point: np.ndarray | None = None     # (cone)
    vertex_basis: np.ndarray | None = None     # N x (l-1) (cone)
    director: dict | None = None
    evidence: dict = field(default_factory=dict)
    config: RunConfig = field(default_factory=RunConfig)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_obj(self) -> dict:
        out = {
            "schema": "gausskit/verdict/v1",
            "verdict": self.verdict,
            "reason": self.reason,
            "r": self.r,
            "l": self.l,
            "m": self.m,
            "N": self.N,
            "exit_code": self.exit_code,
            "config": self.config.to_obj(),
            "evidence": to_jsonable(self.evidence),
        }
        out["generators"] = to_jsonable(self.generators) if self.generators is not None else None
        if self.vertex_point is not None:
            out["vertex_flat"] = {
                "point": to_jsonable(self.vertex_point),
                "basis": to_jsonable(self.vertex_basis),
            }
        else:
            out["vertex_flat"] = None
        out["director_samples"] = to_jsonable(self.director) if self.director is not None else None
        return out


def _line_distance(w1: np.ndarray, w2: np.ndarray) -> float:
    """Sine of the angle between the complex lines spanned by w1 and w2."""
    n1 = np.linalg.norm(w1)
    n2 = np.linalg.norm(w2)
    if n1 == 0 or n2 == 0:
        return 1.0
    c = abs(np.vdot(w1, w2)) / (n1 * n2)
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, c) ** 2)))


def _infinity_distance(w: np.ndarray) -> float:
    """Distance of a focal covector from (1, 0, ..., 0)."""
    e0 = np.zeros_like(w)
    e0[0] = 1.0
    return _line_distance(w, e0)


def base_samples(spec: RuledSpec, cfg: RunConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(cfg.seed)
    return [rng.uniform(-cfg.sample_radius, cfg.sample_radius, size=spec.r)
            for _ in range(cfg.samples)]


def chart_samples_for(spec: RuledSpec, samples, cfg: RunConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(cfg.seed + 1)
    out = []
    for u in samples:
        t = rng.uniform(-cfg.leaf_radius, cfg.leaf_radius, size=spec.l)
        out.append(np.concatenate([t, np.asarray(u, dtype=float)]))
    return out


def classify_chart(m: ExprMap, samples=None, cfg: RunConfig = RunConfig()) -> Classification:
    """Decision for a plain chart: only rank-level verdicts are reachable.

    Leaf-level analysis needs a ruled parametrization; a degenerate chart
    in the admissible rank range is reported as a hypothesis failure
    asking for the ruled form rather than silently integrating leaves.
    """
    n = m.n_params
    if samples is None:
        rng = np.random.default_rng(cfg.seed)
        samples = [rng.uniform(-cfg.sample_radius, cfg.sample_radius, size=n)
                   for _ in range(cfg.samples)]
    profile = rank_profile(m, samples, tol=cfg.tol_rank)
    evidence = {"rank_profile": profile.to_obj(), "notes": [L_POLICY_NOTE]}
    common = dict(N=m.n_out, config=cfg, evidence=evidence)
    if profile.r < 0:
        return Classification(verdict=HYPOTHESIS_FAILURE,
                              reason="no immersed sample points",
                              r=-1, l=0, m=-1, **common)
    if not profile.constant:
        return Classification(verdict=HYPOTHESIS_FAILURE,
                              reason="rank not constant on sampled chart",
                              r=profile.r, l=0, m=-1, **common)
    r = profile.r
    if r == n:
        return Classification(verdict=NON_DEGENERATE, reason=None,
                              r=r, l=0, m=-1, **common)
    if r < 2:
        return Classification(verdict=HYPOTHESIS_FAILURE,
                              reason="rank r >= 2 required",
                              r=r, l=n - r, m=-1, **common)
    return Classification(
        verdict=HYPOTHESIS_FAILURE,
        reason="leaf-adapted ruled parametrization required for leaf analysis",
        r=r, l=n - r, m=-1, **common)


def classify(spec: RuledSpec | ExprMap, samples=None,
             cfg: RunConfig = RunConfig()) -> Classification:
    if isinstance(spec, ExprMap):
        return classify_chart(spec, samples, cfg)
    return _classify_ruled(spec, samples, cfg)


def _classify_ruled(spec: RuledSpec, samples, cfg: RunConfig) -> Classification:
    n, N, r_decl, l = spec.n, spec.N, spec.r, spec.l
    if samples is None:
        samples = base_samples(spec, cfg)
    samples = [np.asarray(u, dtype=float) for u in samples]

    chart = spec.chart()
    profile = rank_profile(chart, chart_samples_for(spec, samples, cfg), tol=cfg.tol_rank)

    checks: list[dict] = []
    notes = [L_POLICY_NOTE]

    def check(name: str, passed: bool, detail: str = ""):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})
        return passed

    evidence: dict = {"rank_profile": profile.to_obj(), "hypothesis_checks": checks,
                      "notes": notes, "leaves": []}
    common = dict(N=N, config=cfg, evidence=evidence)

    ok = check("rank constant on sampled chart",
               profile.constant and profile.r >= 0 and profile.decisive,
               f"profile r={profile.r} constant={profile.constant} "
               f"decisive={profile.decisive}")
    r_obs = profile.r
    if ok and r_obs == n:
        return Classification(verdict=NON_DEGENERATE, reason=None,
                              r=r_obs, l=l, m=-1, **common)
    check("observed rank matches declared base dimension", r_obs == r_decl,
          f"observed {r_obs}, declared {r_decl}")
    check("2 <= r", r_obs >= 2, f"r = {r_obs}")
    check("r <= n - 1", r_obs <= n - 1, f"r = {r_obs}, n = {n}")
    check("N - n >= 2", N - n >= 2, f"N = {N}, n = {n}")

    # leaf-level analysis runs regardless; failures only fix the verdict
    leaves: list[dict] = []
    evidence["leaves"] = leaves
    m_values: list[int] = []
    covector_sets: list[np.ndarray] = []
    usable_leaves: list[tuple[np.ndarray, np.ndarray]] = []   # (u, covectors)
    leaf_errors: list[str] = []
    max_basic_residual = 0.0
    max_adapted_residual = 0.0
    pencil_ok = True
    pencil_detail = ""
    diag_ok = True

    for u in samples:
        entry: dict = {"u": u.tolist()}
        leaves.append(entry)
        try:
            data = extract_leaf_data(spec, u, tol=cfg.tol_rank)
        except GaussKitError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            leaf_errors.append(entry["error"])
            continue
        basic = check_basic_equations(data, tol=cfg.tol_residual)
        entry["basic_equations"] = basic.to_obj()
        entry["adapted_residual"] = data.adapted_residual
        entry["m"] = data.m
        entry["rank_checks"] = leaf_rank_checks(data, tol=cfg.tol_rank)
        max_basic_residual = max(max_basic_residual, basic.residual)
        max_adapted_residual = max(max_adapted_residual, data.adapted_residual)
        m_values.append(data.m)
        entry["focal"] = focal_polynomial(data).to_obj()
        if l == 1:
            roots = leaf_focal_roots(data)
            entry["finite_focal_roots"] = to_jsonable(roots)
        if data.B.shape[0] > 0:
            hc = focal_hypercone(data.B, tol=cfg.tol_rank)
            entry["hypercone_squarefree"] = hc.squarefree
        try:
            pa = select_regular_pair(data.B, seed=cfg.seed, tol_gap=cfg.tol_gap,
                                     budget=cfg.pencil_budget)
            entry["pencil"] = pa.to_obj()
        except (MTooSmall, NoRegularPair) as exc:
            entry["pencil"] = {"error": f"{type(exc).__name__}: {exc}"}
            if pencil_ok:
                pencil_ok, pencil_detail = False, str(exc)
            continue
        try:
            dec = factor_focal(data, pa, tol=cfg.tol_residual)
        except HypothesisNotMet as exc:
            entry["decomposition"] = {"error": str(exc)}
            diag_ok = False
            continue
        entry["decomposition"] = dec.to_obj()
        covector_sets.append(dec.covectors)
        usable_leaves.append((u, dec.covectors))

    check("leaf frames extracted at every sample", not leaf_errors,
          "; ".join(leaf_errors[:3]))
    check("leaf adaptation (no normal leakage of generator derivatives)",
          max_adapted_residual <= 1e-6, f"max residual {max_adapted_residual:.3e}")
    check("basic equations", max_basic_residual <= cfg.tol_residual,
          f"max residual {max_basic_residual:.3e}")
    check("m >= 2", bool(m_values) and min(m_values) >= 2,
          f"m per leaf min {min(m_values) if m_values else 'n/a'}")
    check("regular pencil pair with distinct eigenvalues", pencil_ok, pencil_detail)
    check("simultaneous diagonalization", diag_ok)

    m_report = min(m_values) if m_values else -1

    failed = [c for c in checks if not c["passed"]]
    if failed:
        cls = Classification(
            verdict=HYPOTHESIS_FAILURE, reason=failed[0]["name"],
            r=r_obs, l=l, m=m_report, **common)
        if r_obs == 1 or r_decl == 1:
            cls.evidence["informational_cylinder_check"] = \
                _informational_cylinder_check(spec, samples, cfg)
        return cls

    decision = _covector_decision(covector_sets, cfg)
    evidence["covector_decision"] = decision

    if decision["all_at_infinity"]:
        try:
            gens, drift = extract_generators(spec, samples, tol=cfg.tol_residual)
        except (DriftTooLarge, DependentGenerators) as exc:
            evidence["generator_drift_error"] = str(exc)
            return Classification(
                verdict=UNDETERMINED,
                reason="focal covectors at infinity but generator span drifts",
                r=r_obs, l=l, m=m_report, **common)
        director = director_variety(spec, samples, gens, cfg=cfg)
        evidence["generator_drift"] = drift
        return Classification(
            verdict=CYLINDER, reason=None, r=r_obs, l=l, m=m_report,
            generators=gens, director=director, **common)

    if decision["coincident_per_sample"] and decision["all_finite"]:
        try:
            point, basis, residual = recover_vertex(
                spec, [u for u, _ in usable_leaves],
                [w for _, w in usable_leaves], tol=cfg.tol_residual)
        except InconsistentVertex as exc:
            evidence["vertex_error"] = str(exc)
            return Classification(
                verdict=UNDETERMINED,
                reason="coincident finite covectors but no consistent vertex flat",
                r=r_obs, l=l, m=m_report, **common)
        evidence["vertex_residual"] = residual
        return Classification(
            verdict=CONE, reason=None, r=r_obs, l=l, m=m_report,
            vertex_point=point, vertex_basis=basis, **common)

    return Classification(
        verdict=UNDETERMINED,
        reason="focal covectors neither all at infinity nor coincident and finite",
        r=r_obs, l=l, m=m_report, **common)


def max_residual_of(evidence: dict) -> float:
    """Largest numerical residual recorded anywhere in a verdict document."""
    worst = 0.0
    for leaf in evidence.get("leaves", []):
        basic = leaf.get("basic_equations")
        if basic:
            worst = max(worst, float(basic.get("residual", 0.0)))
        worst = max(worst, float(leaf.get("adapted_residual", 0.0)))
        dec = leaf.get("decomposition")
        if dec and "residual" in dec:
            worst = max(worst, float(dec["residual"]),
                        float(dec.get("diagonalization_residual", 0.0)))
    for key in ("vertex_residual", "generator_drift"):
        if key in evidence:
            worst = max(worst, float(evidence[key]))
    return worst


def _covector_decision(covector_sets: list[np.ndarray], cfg: RunConfig) -> dict:
    worst_inf = 0.0
    worst_pair = 0.0
    any_finite = False
    all_finite = True
    for covs in covector_sets:
        for p in range(covs.shape[0]):
            d = _infinity_distance(covs[p])
            worst_inf = max(worst_inf, d)
            if d > cfg.tol_coincide:
                any_finite = True
            else:
                all_finite = False
            for q in range(p + 1, covs.shape[0]):
                worst_pair = max(worst_pair, _line_distance(covs[p], covs[q]))
    return {
        "all_at_infinity": bool(covector_sets) and not any_finite,
        "all_finite": bool(covector_sets) and all_finite,
        "coincident_per_sample": bool(covector_sets) and worst_pair <= cfg.tol_coincide,
        "max_infinity_distance": worst_inf,
        "max_pairwise_distance": worst_pair,
        "samples_used": len(covector_sets),
    }


def _informational_cylinder_check(spec: RuledSpec, samples, cfg: RunConfig) -> dict:
    worst = 0.0
    tried = 0
    for u in samples[: min(len(samples), 5)]:
        try:
            data = extract_leaf_data(spec, u, tol=cfg.tol_rank)
        except GaussKitError:
            continue
        tried += 1
        for a in range(1, data.C.shape[0]):
            worst = max(worst, float(np.max(np.abs(data.C[a]))))
    return {"max_c_entry": worst, "cylinder_like": bool(tried and worst <= 1e-8),
            "samples_checked": tried, "asserted": False}


# ---------------------------------------------------------------------------
# Recovery of invariant objects


def _span_projector(vectors: np.ndarray) -> np.ndarray:
    Q, _ = np.linalg.qr(vectors)
    return Q @ Q.conj().T


def extract_generators(spec: RuledSpec, samples, tol: float = 1e-8):
    """Constant generator directions of a cylinder, with the observed drift.

    Returns (generators, drift): an N x l matrix of averaged, span-aligned
    direction vectors and the largest subspace distance between the sampled
    generator spans.  Raises DriftTooLarge when the spans are not constant
    to within tol, which is what happens on a cone.
    """
    projectors = []
    gen_stacks = []
    for u in samples:
        G = spec.generator_matrix(u)
        projectors.append(_span_projector(G))
        gen_stacks.append(G)
    drift = 0.0
    for i in range(len(projectors)):
        for j in range(i + 1, len(projectors)):
            drift = max(drift, float(np.linalg.norm(projectors[i] - projectors[j], 2)))
    if drift > tol:
        raise DriftTooLarge(f"generator span drifts by {drift:.3e} across samples")
    P = sum(projectors) / len(projectors)
    w, V = np.linalg.eigh((P + P.conj().T) / 2)
    span = V[:, np.argsort(w)[::-1][: spec.l]]
    mean_G = sum(gen_stacks) / len(gen_stacks)
    gens = span @ (span.conj().T @ mean_G)
    s = np.linalg.svd(gens, compute_uv=False)
    if s[-1] <= tol * max(1.0, s[0]):
        raise DependentGenerators("recovered generators are linearly dependent")
    return gens, drift


def director_variety(spec: RuledSpec, samples, generators: np.ndarray,
                     cfg: RunConfig = RunConfig()) -> dict:
    """Project the base along the generator span and measure its geometry.

    The projected map should be an immersed r-dimensional piece whose own
    Gauss rank is r; anything less means the director is degenerate and the
    cylinder structure is not over a tangentially nondegenerate base.
    """
    N = spec.N
    Q, _ = np.linalg.qr(np.asarray(generators, dtype=complex))
    P_c = np.eye(N, dtype=complex) - Q @ Q.conj().T
    projected = affine_image(spec.base, P_c, np.zeros(N))
    points = []
    dims = []
    ranks = []
    for u in samples:
        jet = eval_jet2(projected, u)
        points.append(jet.value)
        s = np.linalg.svd(jet.d1, compute_uv=False)
        dims.append(int(np.sum(s >= cfg.tol_rank * s[0])) if s[0] > 0 else 0)
        try:
            ranks.append(point_rank(projected, u, tol=cfg.tol_rank).r)
        except GaussKitError:
            ranks.append(-1)
    dim = max(dims) if dims else 0
    rank = max(ranks) if ranks else -1
    nondegenerate = bool(dims) and all(d == spec.r for d in dims) \
        and all(rk == spec.r for rk in ranks)
    return {
        "points": to_jsonable(np.asarray(points)),
        "dim": dim,
        "rank": rank,
        "nondegenerate": nondegenerate,
    }


def recover_vertex(spec: RuledSpec, samples, covector_sets, tol: float = 1e-8):
    """Fit the common (l-1)-flat cut out by the focal hyperplanes.

    Each sample contributes the intersection of its (coincident) focal
    hyperplane with the leaf: an affine (l-1)-flat in ambient space.  All
    of them must lie on one common flat; the fit is least squares and the
    containment residual is checked against tol.
    """
    cloud = []
    flats = []
    for u, covs in zip(samples, covector_sets):
        w = covs[0]
        w_aff = w[1:]
        norm2 = float(np.vdot(w_aff, w_aff).real)
        if norm2 <= 0:
            raise InconsistentVertex("covector has no affine part")
        t_star = -w[0] * w_aff.conj() / norm2
        A0 = spec.leaf_point(u, np.zeros(spec.l))
        G = spec.generator_matrix(u)
        p = A0 + G @ t_star
        cloud.append(p)
        if spec.l >= 2:
            _, _, vh = np.linalg.svd(w_aff[None, :])
            ker = vh[1:].conj().T          # l x (l-1)
            D = G @ ker
            flats.append(D)
            for k in range(D.shape[1]):
                cloud.append(p + D[:, k])
                cloud.append(p - D[:, k])
    cloud = np.asarray(cloud)
    center = cloud.mean(axis=0)
    dim = spec.l - 1
    if dim == 0:
        residual = float(np.max(np.linalg.norm(cloud - center, axis=1))) if len(cloud) else 0.0
        scale = 1.0 + float(np.max(np.abs(cloud)))
        if residual > tol * scale:
            raise InconsistentVertex(
                f"sampled focal points spread by {residual:.3e} (scale {scale:.1f})")
        return center, np.zeros((spec.N, 0), dtype=complex), residual
    _, s, vh = np.linalg.svd(cloud - center)
    basis = vh[:dim].conj().T
    P = basis @ basis.conj().T
    deviation = (cloud - center) - (cloud - center) @ P.T
    residual = float(np.max(np.linalg.norm(deviation, axis=1)))
    scale = 1.0 + float(np.max(np.abs(cloud)))
    for D in flats:
        off = D - P @ D
        residual = max(residual, float(np.max(np.abs(off))))
    if residual > tol * scale:
        raise InconsistentVertex(
            f"no common vertex flat: containment residual {residual:.3e}")
    return center, basis, residual
