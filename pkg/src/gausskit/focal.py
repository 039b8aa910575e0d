"""Focal polynomial, its hyperplane factorization, and the focus hypercone.

Within a leaf with frame matrices C_i, the singular (focal) points are the
zero locus of J(x) = det(x^0 I + sum_a x^a C_a), a homogeneous polynomial
of degree r in the l+1 leaf coordinates.  When the C_a are simultaneously
diagonalizable, J splits into r linear forms x^0 + sum_a c^p_{pa} x^a read
off the diagonals.  The hypercone is the analogous determinant over the
span of the second forms, det(sum_alpha xi_alpha B^alpha).

Determinant polynomials are recovered by evaluating on the integer
principal lattice {beta : |beta| <= degree} and solving one Vandermonde
system; no symbolic algebra is involved.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisNotMet
from .frames import LeafData
from .pencil import PencilAnalysis, simultaneous_diagonalize

SQUAREFREE_PROBE_SEED = 1729
ROOT_GAP_TOL = 1e-6


def monomial_exponents(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree exactly `degree`, lex ascending."""
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exps = [0] * nvars
        for idx in combo:
            exps[idx] += 1
        out.append(tuple(exps))
    out = sorted(set(out))
    if degree == 0:
        return [tuple([0] * nvars)]
    return out


@dataclass
class HomogeneousPoly:
    """Dense homogeneous polynomial: one coefficient per monomial of its degree."""

    nvars: int
    degree: int
    coeffs: np.ndarray   # aligned with monomial_exponents(nvars, degree)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        expect = len(monomial_exponents(self.nvars, self.degree))
        if self.coeffs.shape != (expect,):
            raise ValueError(f"expected {expect} coefficients, got {self.coeffs.shape}")

    def evaluate(self, x) -> complex:
        x = np.asarray(x, dtype=complex).ravel()
        total = 0.0 + 0j
        for c, exps in zip(self.coeffs, monomial_exponents(self.nvars, self.degree)):
            term = c
            for xv, e in zip(x, exps):
                if e:
                    term = term * xv ** e
            total += term
        return total

    def coefficient(self, exps: tuple[int, ...]) -> complex:
        table = monomial_exponents(self.nvars, self.degree)
        return complex(self.coeffs[table.index(tuple(exps))])

    def to_obj(self, var_names: list[str] | None = None) -> dict:
        names = var_names or [f"x{i}" for i in range(self.nvars)]
        return {
            "degree": self.degree,
            "vars": names,
            "monomials": [
                {"exps": list(exps), "re": float(c.real), "im": float(c.imag)}
                for exps, c in zip(monomial_exponents(self.nvars, self.degree), self.coeffs)
            ],
        }

    @classmethod
    def from_obj(cls, o: dict) -> "HomogeneousPoly":
        nvars = len(o["vars"])
        degree = int(o["degree"])
        table = {tuple(mon["exps"]): complex(mon["re"], mon["im"])
                 for mon in o["monomials"]}
        coeffs = [table.get(exps, 0.0) for exps in monomial_exponents(nvars, degree)]
        return cls(nvars=nvars, degree=degree, coeffs=np.array(coeffs, dtype=complex))


def poly_product_of_linear_forms(covectors: np.ndarray) -> HomogeneousPoly:
    """Expand prod_p (sum_i covectors[p, i] x_i) into dense monomials."""
    covectors = np.asarray(covectors, dtype=complex)
    r, nvars = covectors.shape
    acc: dict[tuple[int, ...], complex] = {tuple([0] * nvars): 1.0 + 0j}
    for p in range(r):
        nxt: dict[tuple[int, ...], complex] = {}
        for exps, c in acc.items():
            for i in range(nvars):
                if covectors[p, i] == 0:
                    continue
                e2 = list(exps)
                e2[i] += 1
                key = tuple(e2)
                nxt[key] = nxt.get(key, 0.0 + 0j) + c * covectors[p, i]
        acc = nxt
    table = monomial_exponents(nvars, r)
    coeffs = np.array([acc.get(exps, 0.0) for exps in table], dtype=complex)
    return HomogeneousPoly(nvars=nvars, degree=r, coeffs=coeffs)


def det_poly(matrices: np.ndarray) -> HomogeneousPoly:
    """P(x) = det(sum_j x_j M_j) as a homogeneous polynomial of degree r.

    Works by dehomogenizing at x_0 = 1, evaluating the determinant on the
    integer principal lattice of the remaining variables, solving for the
    inhomogeneous coefficients, and re-homogenizing.
    """
    matrices = np.asarray(matrices, dtype=complex)
    k, r, _ = matrices.shape
    if k == 1:
        coeffs = np.array([np.linalg.det(matrices[0])], dtype=complex)
        return HomogeneousPoly(nvars=1, degree=r, coeffs=coeffs)
    inner = k - 1
    betas = []
    for d in range(r + 1):
        betas.extend(monomial_exponents(inner, d))
    pts = np.array(betas, dtype=float)
    V = np.zeros((len(betas), len(betas)))
    for i, pt in enumerate(pts):
        for j, exps in enumerate(betas):
            v = 1.0
            for x, e in zip(pt, exps):
                if e:
                    v *= x ** e
            V[i, j] = v
    rhs = np.zeros(len(betas), dtype=complex)
    for i, pt in enumerate(pts):
        A = matrices[0].copy()
        for j in range(inner):
            A += pt[j] * matrices[j + 1]
        rhs[i] = np.linalg.det(A)
    inhom = np.linalg.solve(V, rhs)
    table = monomial_exponents(k, r)
    coeffs = np.zeros(len(table), dtype=complex)
    index = {exps: i for i, exps in enumerate(table)}
    for c, beta in zip(inhom, betas):
        full = (r - sum(beta),) + tuple(beta)
        coeffs[index[full]] = c
    return HomogeneousPoly(nvars=k, degree=r, coeffs=coeffs)


def poly_rel_error(a: HomogeneousPoly, b: HomogeneousPoly) -> float:
    if (a.nvars, a.degree) != (b.nvars, b.degree):
        raise ValueError("polynomials are not comparable")
    scale = max(float(np.max(np.abs(a.coeffs))), float(np.max(np.abs(b.coeffs))), 1e-300)
    return float(np.max(np.abs(a.coeffs - b.coeffs)) / scale)


# ---------------------------------------------------------------------------
# Focal objects


@dataclass
class FocalPolynomial:
    poly: HomogeneousPoly        # variables x0 (affine leaf origin), x1..xl

    def to_obj(self) -> dict:
        names = ["x0"] + [f"x{a}" for a in range(1, self.poly.nvars)]
        return self.poly.to_obj(names)


@dataclass
class FocalDecomposition:
    covectors: np.ndarray        # (r, l+1); row p = (1, c^p_{p1}, ..., c^p_{pl})
    residual: float              # product-vs-determinant coefficient error
    diagonalization_residual: float

    def to_obj(self) -> dict:
        from .report import to_jsonable
        return {
            "covectors": to_jsonable(self.covectors),
            "residual": float(self.residual),
            "diagonalization_residual": float(self.diagonalization_residual),
        }


@dataclass
class FocalHypercone:
    poly: HomogeneousPoly        # variables xi_1..xi_{N-n}
    squarefree: bool
    probe_gaps: list

    def to_obj(self) -> dict:
        return {
            "poly": self.poly.to_obj([f"xi{i + 1}" for i in range(self.poly.nvars)]),
            "squarefree": self.squarefree,
            "probe_gaps": self.probe_gaps,
        }


def focal_polynomial(data: LeafData) -> FocalPolynomial:
    """J(x) = det(x^0 I + sum_a x^a C_a) on the leaf at data.u."""
    return FocalPolynomial(poly=det_poly(data.C))


def factor_focal(data: LeafData, pa: PencilAnalysis, tol: float = 1e-8) -> FocalDecomposition:
    """Split J into r linear forms via simultaneous diagonalization.

    Only valid when the transformed C_a are diagonal to within tol; a larger
    residual raises HypothesisNotMet because the product formula is then
    unjustified.
    """
    diag = simultaneous_diagonalize(pa, data, tol=tol)
    if diag.off_diag_residual > tol:
        raise HypothesisNotMet(
            f"diagonalization residual {diag.off_diag_residual:.3e} exceeds {tol:.1e}"
        )
    r = data.r
    l = data.l
    covectors = np.zeros((r, l + 1), dtype=complex)
    covectors[:, 0] = 1.0
    for a in range(l):
        covectors[:, a + 1] = diag.diagonals[a]
    product = poly_product_of_linear_forms(covectors)
    J = focal_polynomial(data)
    residual = poly_rel_error(product, J.poly)
    return FocalDecomposition(
        covectors=covectors, residual=residual,
        diagonalization_residual=diag.off_diag_residual,
    )


def _univariate_roots(coeffs_ascending: np.ndarray, trim: float = 1e-10) -> np.ndarray:
    """Roots of sum c_k t^k via the companion matrix, trimming tiny leads."""
    c = np.asarray(coeffs_ascending, dtype=complex)
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(0, dtype=complex)
    keep = np.nonzero(np.abs(c) > trim * scale)[0]
    if keep.size == 0 or keep[-1] == 0:
        return np.zeros(0, dtype=complex)
    c = c[: keep[-1] + 1]
    return np.roots(c[::-1])


def focal_hypercone(forms: np.ndarray, tol: float = 1e-8) -> FocalHypercone:
    """det(sum_alpha xi_alpha B^alpha) with a squarefree test by line probes.

    Three seeded random lines xi(t) = w1 + t*w2 restrict the polynomial to
    univariate ones; the flag is True when every valid probe has pairwise
    distinct roots.  Probes whose restriction degenerates (degree drop)
    are counted as failures, so a hypercone with a repeated component can
    never be reported squarefree.
    """
    forms = np.asarray(forms, dtype=complex)
    k, r, _ = forms.shape
    poly = det_poly(forms)
    rng = np.random.default_rng(SQUAREFREE_PROBE_SEED)
    gaps = []
    verdicts = []
    for _ in range(3):
        w1 = rng.standard_normal(k)
        w2 = rng.standard_normal(k)
        ts = np.arange(r + 1, dtype=float)
        vals = np.array([poly.evaluate(w1 + t * w2) for t in ts])
        Vand = np.vander(ts, r + 1, increasing=True)
        cf = np.linalg.solve(Vand, vals)
        lead_scale = float(np.max(np.abs(cf))) if cf.size else 0.0
        if lead_scale == 0.0 or abs(cf[-1]) < 1e-8 * lead_scale:
            verdicts.append(False)
            gaps.append(None)
            continue
        roots = np.roots(cf[::-1])
        if roots.size < 2:
            verdicts.append(True)
            gaps.append(float("inf"))
            continue
        gap = min(
            abs(roots[i] - roots[j])
            for i in range(roots.size) for j in range(i + 1, roots.size)
        )
        scale = 1.0 + float(np.max(np.abs(roots)))
        verdicts.append(bool(gap > ROOT_GAP_TOL * scale))
        gaps.append(float(gap))
    return FocalHypercone(poly=poly, squarefree=bool(all(verdicts)), probe_gaps=gaps)


def leaf_focal_roots(data: LeafData) -> np.ndarray:
    """Roots of J(1, t) for a one-dimensional leaf (l = 1).

    An empty result means the focal set of the leaf sits entirely at
    infinity (J(1, t) is a nonzero constant).
    """
    if data.l != 1:
        raise ValueError("leaf focal roots are defined for l = 1 specs")
    J = focal_polynomial(data).poly
    r = J.degree
    coeffs = np.zeros(r + 1, dtype=complex)
    table = monomial_exponents(2, r)
    for c, exps in zip(J.coeffs, table):
        coeffs[exps[1]] += c
    return _univariate_roots(coeffs)
