"""Pencil analysis of second fundamental forms.

Given the span of the forms B^alpha, pick a pair (B', B'') with det B' != 0
whose characteristic roots det(B'' + lambda B') = 0 are pairwise distinct,
then diagonalize every C_a in the eigenbasis of -(B')^{-1} B''.  When the
roots are distinct the eigenvectors are automatically orthogonal with
respect to both forms (transpose pairing, no conjugation), which is what
forces the transformed C_a diagonal; the residual reports how well that
holds numerically.

Selection is deterministic: index pairs in lexicographic order first, then
a fixed budget of seeded random linear combinations.  The selection is
recorded so reports are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisNotMet, MTooSmall, NoRegularPair, SingularLeadingForm
from .frames import LeafData

TOL_GAP = 1e-8
PAIR_BUDGET = 64
BASIS_COND_MAX = 1e6


@dataclass
class PencilSelection:
    """How B' and B'' were chosen from the available forms."""

    kind: str                                  # "indices" or "combination"
    indices: tuple[int, int] | None = None
    coeff_prime: np.ndarray | None = None      # combination weights
    coeff_double: np.ndarray | None = None
    seed: int | None = None

    def to_obj(self) -> dict:
        from .report import to_jsonable
        out = {"kind": self.kind, "seed": self.seed}
        if self.indices is not None:
            out["indices"] = list(self.indices)
        if self.coeff_prime is not None:
            out["coeff_prime"] = to_jsonable(self.coeff_prime)
            out["coeff_double"] = to_jsonable(self.coeff_double)
        return out


@dataclass
class PencilAnalysis:
    B_prime: np.ndarray
    B_double: np.ndarray
    selection: PencilSelection
    eigenvalues: np.ndarray        # sorted by (real, imag)
    eigenbasis: np.ndarray         # columns scaled so the largest entry is 1
    regular: bool
    distinct: bool
    min_gap: float
    basis_cond: float = 1.0

    @property
    def usable(self) -> bool:
        """True when the pair supports simultaneous diagonalization.

        Distinct eigenvalues alone are not enough at double precision: an
        exactly repeated (defective) eigenvalue splits numerically at about
        sqrt(machine eps) ~ 1e-8, which can clear the gap tolerance.  The
        tell is the eigenbasis condition number, which blows up when the
        eigenvectors nearly coincide, so selection also bounds it.
        """
        return self.regular and self.distinct and self.basis_cond <= BASIS_COND_MAX

    def to_obj(self) -> dict:
        from .report import to_jsonable
        return {
            "selection": self.selection.to_obj(),
            "eigenvalues": to_jsonable(self.eigenvalues),
            "regular": self.regular,
            "distinct": self.distinct,
            "min_gap": float(self.min_gap),
            "basis_cond": float(self.basis_cond),
        }


def _sorted_eig(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, V = np.linalg.eig(M)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    V = V[:, order]
    for j in range(V.shape[1]):
        col = V[:, j]
        pivot = col[int(np.argmax(np.abs(col)))]
        V[:, j] = col / pivot
    return w, V


def characteristic_eigenvalues(
    B_prime: np.ndarray, B_double: np.ndarray, tol: float = 1e-10
) -> np.ndarray:
    """The r roots of det(B'' + lambda B'), sorted by (real, imag)."""
    s = np.linalg.svd(B_prime, compute_uv=False)
    if s[0] == 0.0 or s[-1] < tol * s[0]:
        raise SingularLeadingForm(
            f"leading form numerically singular (sigma ratio {s[-1] / max(s[0], 1e-300):.3e})"
        )
    M = -np.linalg.solve(B_prime, B_double)
    w, _ = _sorted_eig(M)
    return w


def eigenvalue_distinctness(eigenvalues, tol_gap: float = TOL_GAP) -> tuple[bool, float]:
    """Pairwise separation test, scaled by the eigenvalue magnitude."""
    w = np.asarray(eigenvalues, dtype=complex).ravel()
    r = w.shape[0]
    if r < 2:
        return True, float("inf")
    gap = min(abs(w[i] - w[j]) for i in range(r) for j in range(i + 1, r))
    scale = 1.0 + float(np.max(np.abs(w)))
    return bool(gap > tol_gap * scale), float(gap)


def _analysis_for(Bp, Bpp, selection, tol_gap) -> PencilAnalysis:
    try:
        s = np.linalg.svd(Bp, compute_uv=False)
        regular = bool(s[0] > 0 and s[-1] >= 1e-10 * s[0])
        if not regular:
            raise SingularLeadingForm("singular leading form")
        M = -np.linalg.solve(Bp, Bpp)
        w, V = _sorted_eig(M)
    except SingularLeadingForm:
        r = Bp.shape[0]
        return PencilAnalysis(
            B_prime=Bp, B_double=Bpp, selection=selection,
            eigenvalues=np.full(r, np.nan, dtype=complex),
            eigenbasis=np.eye(r, dtype=complex),
            regular=False, distinct=False, min_gap=0.0,
        )
    distinct, gap = eigenvalue_distinctness(w, tol_gap)
    return PencilAnalysis(
        B_prime=Bp, B_double=Bpp, selection=selection,
        eigenvalues=w, eigenbasis=V,
        regular=True, distinct=distinct, min_gap=gap,
        basis_cond=float(np.linalg.cond(V)),
    )


def select_regular_pair(
    forms: np.ndarray,
    seed: int = 0,
    tol_gap: float = TOL_GAP,
    budget: int = PAIR_BUDGET,
) -> PencilAnalysis:
    """Deterministic search for a regular pair with distinct roots.

    forms is the (k, r, r) stack of second-form matrices.  Index pairs come
    first in lexicographic order, then `budget` seeded random combinations.
    Raises MTooSmall when fewer than two independent forms exist and
    NoRegularPair when the search budget is exhausted.
    """
    forms = np.asarray(forms, dtype=complex)
    k = forms.shape[0]
    if k >= 1 and forms[0].size:
        sig = np.linalg.svd(forms.reshape(k, -1), compute_uv=False)
        m = int(np.sum(sig >= 1e-8 * sig[0])) if sig[0] > 0 else 0
    else:
        m = 0
    if m < 2:
        raise MTooSmall(f"need at least 2 independent second forms, found {m}")

    best: PencilAnalysis | None = None

    def consider(Bp, Bpp, selection):
        nonlocal best
        pa = _analysis_for(Bp, Bpp, selection, tol_gap)
        if pa.regular and (best is None or pa.min_gap > best.min_gap):
            best = pa
        return pa if pa.usable else None

    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            hit = consider(forms[i], forms[j],
                           PencilSelection(kind="indices", indices=(i, j), seed=seed))
            if hit is not None:
                return hit
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        xi = rng.standard_normal(k)
        eta = rng.standard_normal(k)
        Bp = np.einsum("a,apq->pq", xi, forms)
        Bpp = np.einsum("a,apq->pq", eta, forms)
        hit = consider(Bp, Bpp,
                       PencilSelection(kind="combination", coeff_prime=xi,
                                       coeff_double=eta, seed=seed))
        if hit is not None:
            return hit
    gap = best.min_gap if best is not None else 0.0
    raise NoRegularPair(
        f"no regular pair with distinct roots in {k} index pairs + {budget} "
        f"seeded combinations (best eigenvalue gap {gap:.3e})"
    )


@dataclass
class DiagonalizationResult:
    diagonals: np.ndarray          # (l, r): entry [a-1, p] = c^p_{p,a}
    off_diag_residual: float
    transformed_C: np.ndarray      # (l+1, r, r) in the pencil eigenbasis
    eigenbasis: np.ndarray
    form_diag_residual: float = field(default=0.0)

    def to_obj(self) -> dict:
        from .report import to_jsonable
        return {
            "diagonals": to_jsonable(self.diagonals),
            "off_diag_residual": float(self.off_diag_residual),
            "form_diag_residual": float(self.form_diag_residual),
        }


def simultaneous_diagonalize(
    pa: PencilAnalysis, data: LeafData, tol: float = 1e-8
) -> DiagonalizationResult:
    """Transform every C_a into the pencil eigenbasis and measure diagonality.

    Requires a regular pair with distinct roots.  The off-diagonal residual
    is the largest off-diagonal magnitude over all transformed C_a; values
    above tol mean the diagonalization hypotheses fail (or numerics broke),
    and callers must treat the decomposition as unavailable.
    """
    if not (pa.regular and pa.distinct):
        raise HypothesisNotMet("simultaneous diagonalization needs a regular pair "
                               "with distinct eigenvalues")
    V = pa.eigenbasis
    l_plus_1 = data.C.shape[0]
    r = data.r
    transformed = np.zeros_like(data.C)
    off = 0.0
    mask = ~np.eye(r, dtype=bool)
    for i in range(l_plus_1):
        Ci = np.linalg.solve(V, data.C[i] @ V)
        transformed[i] = Ci
        if i >= 1 and r > 1:
            off = max(off, float(np.max(np.abs(Ci[mask]))))
    diagonals = np.stack([np.diagonal(transformed[i]) for i in range(1, l_plus_1)]) \
        if l_plus_1 > 1 else np.zeros((0, r), dtype=complex)
    form_off = 0.0
    if r > 1:
        for F in (pa.B_prime, pa.B_double):
            Ft = V.T @ F @ V
            scale = max(1.0, float(np.max(np.abs(Ft))))
            form_off = max(form_off, float(np.max(np.abs(Ft[mask])) / scale))
    return DiagonalizationResult(
        diagonals=diagonals, off_diag_residual=off,
        transformed_C=transformed, eigenbasis=V, form_diag_residual=form_off,
    )
