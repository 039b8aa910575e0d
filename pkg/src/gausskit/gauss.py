"""Tangent frames, second fundamental forms, and the Gauss-map rank.

The rank of the Gauss map is computed as n minus the dimension of the
common kernel of all second fundamental forms.  The common kernel comes
from one SVD of the vertically stacked forms rather than intersecting
individual kernels, which conditions better.

Rank decisions use a relative singular-value gap test.  A gap ratio below
GAP_DECISIVE_RATIO means the cut is not clearly separated; the result is
still returned but flagged indecisive so callers can refuse to certify it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotImmersed
from .expr import ExprMap
from .jets import Jet2, eval_jet2

TOL_RANK = 1e-8
GAP_DECISIVE_RATIO = 1e3


@dataclass
class TangentFrame:
    """Orthonormal tangent and normal bases at one point of the image."""

    point: np.ndarray
    tangent_basis: np.ndarray   # N x n, unitary columns
    normal_basis: np.ndarray    # N x (N-n), unitary columns, orthogonal to tangent


@dataclass
class SecondForms:
    """The (N-n) symmetric n x n second fundamental forms at a point."""

    forms: np.ndarray           # (N-n) x n x n, each symmetric
    m: int                      # count of linearly independent forms
    m_sigmas: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class RankResult:
    r: int
    kernel_basis: np.ndarray    # n x (n-r)
    sigmas: np.ndarray
    gap_ratio: float
    decisive: bool


def tangent_frame(jet: Jet2, tol: float = TOL_RANK) -> TangentFrame:
    """Orthonormal frame from the differential; raises NotImmersed on rank drop."""
    d1 = jet.d1
    N, n = d1.shape
    if n > N:
        raise NotImmersed(f"more parameters ({n}) than ambient dimensions ({N})")
    s = np.linalg.svd(d1, compute_uv=False)
    if s[0] == 0.0 or s[-1] < tol * s[0]:
        raise NotImmersed(
            f"differential has numerical rank < {n} (sigma ratio {s[-1] / max(s[0], 1e-300):.3e})"
        )
    Q, _ = np.linalg.qr(np.hstack([d1, np.eye(N, dtype=complex)]), mode="reduced")
    return TangentFrame(point=jet.value, tangent_basis=Q[:, :n], normal_basis=Q[:, n:N])


def second_forms(jet: Jet2, frame: TangentFrame, tol: float = TOL_RANK) -> SecondForms:
    """Normal components of the Hessian, indexed by parameter coordinates.

    forms[alpha][p, q] is the coefficient of the alpha-th normal direction in
    the second partial derivative with respect to parameters p and q.
    """
    nu = frame.normal_basis
    forms = np.einsum("ka,kpq->apq", nu.conj(), jet.d2)
    k = forms.shape[0]
    if k == 0:
        return SecondForms(forms=forms, m=0)
    stack = forms.reshape(k, -1)
    sig = np.linalg.svd(stack, compute_uv=False)
    m = int(np.sum(sig >= tol * sig[0])) if sig[0] > 0 else 0
    return SecondForms(forms=forms, m=m, m_sigmas=sig)


def gauss_rank(forms: SecondForms, tol: float = TOL_RANK) -> RankResult:
    """Rank r of the Gauss map and a basis of the common kernel of the forms."""
    k, n, _ = forms.forms.shape
    if k == 0:
        return RankResult(
            r=0, kernel_basis=np.eye(n, dtype=complex),
            sigmas=np.zeros(0), gap_ratio=np.inf, decisive=True,
        )
    stacked = forms.forms.reshape(k * n, n)
    _, s, vh = np.linalg.svd(stacked)
    if s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s >= tol * s[0]))
    kernel = vh[rank:].conj().T
    if rank == 0 or rank == n:
        gap = np.inf
    else:
        gap = float(s[rank - 1] / s[rank]) if s[rank] > 0 else np.inf
    return RankResult(
        r=rank, kernel_basis=kernel, sigmas=s,
        gap_ratio=gap, decisive=bool(gap >= GAP_DECISIVE_RATIO),
    )


def point_rank(m: ExprMap, u, tol: float = TOL_RANK) -> RankResult:
    """Convenience: jet, frame, forms, rank at one parameter point."""
    jet = eval_jet2(m, u)
    frame = tangent_frame(jet, tol=tol)
    return gauss_rank(second_forms(jet, frame, tol=tol), tol=tol)


@dataclass
class RankProfile:
    r: int
    constant: bool
    per_sample: list
    violations: list
    decisive: bool

    def to_obj(self) -> dict:
        return {
            "r": self.r,
            "constant": self.constant,
            "decisive": self.decisive,
            "per_sample": self.per_sample,
            "violations": self.violations,
        }


def rank_profile(m: ExprMap, samples, tol: float = TOL_RANK) -> RankProfile:
    """Gauss rank at every sample; constant=True iff all agree.

    Immersion failures are recorded per sample, not raised: a profile over a
    partially singular chart still reports what it saw.
    """
    per_sample = []
    violations = []
    ranks = []
    decisive = True
    for u in samples:
        u = np.asarray(u, dtype=float)
        try:
            res = point_rank(m, u, tol=tol)
        except NotImmersed as exc:
            violations.append({"u": u.tolist(), "error": str(exc)})
            continue
        ranks.append(res.r)
        decisive = decisive and res.decisive
        per_sample.append({
            "u": u.tolist(),
            "r": res.r,
            "sigmas": [float(x) for x in res.sigmas],
            "gap_ratio": float(res.gap_ratio),
        })
    if not ranks:
        return RankProfile(r=-1, constant=False, per_sample=per_sample,
                           violations=violations, decisive=False)
    r0 = ranks[0]
    constant = all(r == r0 for r in ranks)
    return RankProfile(r=r0, constant=constant, per_sample=per_sample,
                       violations=violations, decisive=decisive)


def sample_points(rng: np.random.Generator, dim: int, count: int, radius: float = 0.8):
    """Deterministic uniform samples in a centered box, one array per point."""
    return [rng.uniform(-radius, radius, size=dim) for _ in range(count)]
