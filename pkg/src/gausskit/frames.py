"""Adapted frames along a leaf of a ruled parametrization.

At a base point u of f(t, u) = A_0(u) + sum_a t^a A_a(u), the frame is

    { A_1(u) .. A_l(u),  dA_0/du^1 .. dA_0/du^r,  nu_1 .. nu_{N-n} }

with the tangent-complement block fixed as the raw base partials (no
re-orthonormalization), which is exactly the gauge that makes C_0 the
identity.  Expanding the derivatives of the generator directions in this
frame yields the matrices C_a; projecting the base Hessian onto the
normal block yields the second-form matrices B^alpha.  The products
H^alpha_i = B^alpha C_i must be symmetric for the leaf structure to be
integrable; check_basic_equations measures the defect.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameIllConditioned, SingularBasePoint
from .jets import eval_jet2
from .ruled import RuledSpec

FRAME_COND_MAX = 1e10


@dataclass
class LeafData:
    """Frame matrices extracted at one base point of a ruled spec."""

    u: np.ndarray                  # base point, shape (r,)
    C: np.ndarray                  # (l+1, r, r); C[0] = identity
    B: np.ndarray                  # (N-n, r, r); each symmetric
    H: np.ndarray                  # (N-n, l+1, r, r); H[a, i] = B[a] @ C[i]
    m: int                         # independent second forms
    point: np.ndarray              # A_0(u)
    generator_vectors: np.ndarray  # N x l
    base_tangent: np.ndarray       # N x r, dA_0/du^q columns
    normal_basis: np.ndarray       # N x (N-n), unitary columns
    frame_cond: float
    adapted_residual: float        # normal leakage of the generator derivatives

    @property
    def r(self) -> int:
        return self.C.shape[1]

    @property
    def l(self) -> int:
        return self.C.shape[0] - 1

    def to_obj(self) -> dict:
        from .report import to_jsonable
        return {
            "u": to_jsonable(np.asarray(self.u, dtype=float)),
            "C": to_jsonable(self.C),
            "B": to_jsonable(self.B),
            "H": to_jsonable(self.H),
            "m": self.m,
            "point": to_jsonable(self.point),
            "frame_cond": float(self.frame_cond),
            "adapted_residual": float(self.adapted_residual),
        }


def extract_leaf_data(spec: RuledSpec, u, tol: float = 1e-8) -> LeafData:
    """Build the adapted frame at base point u and read off C_i, B^alpha."""
    u = np.asarray(u, dtype=float).ravel()
    r, l, N = spec.r, spec.l, spec.N
    n = r + l

    base_jet = eval_jet2(spec.base, u)
    gen_jets = [eval_jet2(g, u) for g in spec.generators]
    G = np.column_stack([j.value for j in gen_jets])          # N x l
    A_tilde = base_jet.d1                                     # N x r

    T = np.hstack([G, A_tilde])                               # N x n
    s = np.linalg.svd(T, compute_uv=False)
    if s[0] == 0.0 or s[-1] < 1e-12 * s[0]:
        raise SingularBasePoint(
            f"leaf frame vectors dependent at u={u.tolist()} "
            f"(sigma ratio {s[-1] / max(s[0], 1e-300):.3e})"
        )

    Q, _ = np.linalg.qr(np.hstack([T, np.eye(N, dtype=complex)]), mode="reduced")
    nu = Q[:, n:N]
    E = np.hstack([T, nu])                                    # N x N frame matrix
    cond = np.linalg.cond(E)
    if cond > FRAME_COND_MAX:
        raise FrameIllConditioned(f"frame condition number {cond:.3e}")

    # expand every dA_a/du^q in the frame: rows 0..l-1 leaf part,
    # rows l..n-1 the C_a coefficients, rows n.. the normal leakage
    rhs = np.hstack([j.d1 for j in gen_jets])                 # N x (l*r)
    X = np.linalg.solve(E, rhs)
    C = np.zeros((l + 1, r, r), dtype=complex)
    C[0] = np.eye(r)
    leakage = 0.0
    for a in range(l):
        cols = X[:, a * r:(a + 1) * r]
        C[a + 1] = cols[l:n, :]
        for q in range(r):
            denom = 1.0 + np.linalg.norm(rhs[:, a * r + q])
            leakage = max(leakage, float(np.linalg.norm(cols[n:, q]) / denom))

    B = np.einsum("ka,kpq->apq", nu.conj(), base_jet.d2)      # (N-n) x r x r
    H = np.einsum("apq,iqs->aips", B, C)

    if B.shape[0] == 0:
        m = 0
    else:
        sig = np.linalg.svd(B.reshape(B.shape[0], -1), compute_uv=False)
        m = int(np.sum(sig >= tol * sig[0])) if sig[0] > 0 else 0

    return LeafData(
        u=u, C=C, B=B, H=H, m=m,
        point=base_jet.value, generator_vectors=G, base_tangent=A_tilde,
        normal_basis=nu, frame_cond=float(cond), adapted_residual=leakage,
    )


@dataclass
class BasicEqReport:
    residual: float
    passed: bool
    worst_form: int
    worst_frame_index: int

    def to_obj(self) -> dict:
        return {
            "residual": self.residual,
            "passed": self.passed,
            "worst_form": self.worst_form,
            "worst_frame_index": self.worst_frame_index,
        }


def check_basic_equations(data: LeafData, tol: float = 1e-8) -> BasicEqReport:
    """Max symmetry defect of the products H^alpha_i over all alpha, i."""
    worst = 0.0
    wa = wi = 0
    k = data.B.shape[0]
    for a in range(k):
        for i in range(data.C.shape[0]):
            Hai = data.H[a, i]
            defect = float(np.max(np.abs(Hai - Hai.T))) if Hai.size else 0.0
            if defect > worst:
                worst, wa, wi = defect, a, i
    return BasicEqReport(residual=worst, passed=bool(worst <= tol),
                         worst_form=wa, worst_frame_index=wi)


def second_order_profile(data: LeafData) -> tuple[int, int]:
    """(m, osculating dimension n + m)."""
    n = data.r + data.l
    return data.m, n + data.m


def leaf_rank_checks(data: LeafData, tol: float = 1e-8) -> dict:
    """Diagnostic ranks of the stacked C and B matrices."""
    r = data.r
    c_stack = data.C.reshape(-1, r)
    b_stack = data.B.reshape(-1, r) if data.B.size else np.zeros((0, r))
    out = {}
    for name, stack in (("c_stack_rank", c_stack), ("b_stack_rank", b_stack)):
        if stack.shape[0] == 0:
            out[name] = 0
            continue
        sig = np.linalg.svd(stack, compute_uv=False)
        out[name] = int(np.sum(sig >= tol * sig[0])) if sig[0] > 0 else 0
    return out
