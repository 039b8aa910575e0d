"""Second order jets of expression maps.

Two independent routes to the same data:

* eval_jet2 propagates (value, gradient, Hessian) triples through the
  expression tree with exact chain rules;
* finite_diff_jet2 uses central differences on plain evaluations only.

They are kept free of shared derivative logic on purpose so one can check
the other.  Hessians are symmetric bit for bit: every propagation rule
builds the matrix from symmetric pieces, and the difference route fills
both (i, j) and (j, i) from a single stencil.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expr import (
    Add, Const, Cos, Div, Exp, ExprMap, Mul, Neg, Pow, Sin, Sub, Var,
)

DIV_EPS = 1e-12


@dataclass
class Jet2:
    """Value, first and second derivatives of a map at one parameter point.

    value has shape (N,), d1 has shape (N, n), d2 has shape (N, n, n) and
    is symmetric in its last two axes.
    """

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=complex)
        self.d1 = np.asarray(self.d1, dtype=complex)
        self.d2 = np.asarray(self.d2, dtype=complex)
        N = self.value.shape[0]
        if self.d1.ndim != 2 or self.d1.shape[0] != N:
            raise ValueError("d1 must have shape (N, n)")
        n = self.d1.shape[1]
        if self.d2.shape != (N, n, n):
            raise ValueError("d2 must have shape (N, n, n)")

    @property
    def n_out(self) -> int:
        return self.value.shape[0]

    @property
    def n_params(self) -> int:
        return self.d1.shape[1]


def _scalar(e, env: dict[str, complex], div_eps: float) -> complex:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Add):
        return _scalar(e.a, env, div_eps) + _scalar(e.b, env, div_eps)
    if isinstance(e, Sub):
        return _scalar(e.a, env, div_eps) - _scalar(e.b, env, div_eps)
    if isinstance(e, Mul):
        return _scalar(e.a, env, div_eps) * _scalar(e.b, env, div_eps)
    if isinstance(e, Div):
        den = _scalar(e.b, env, div_eps)
        if abs(den) < div_eps:
            raise DomainError(f"denominator magnitude {abs(den):.3e} below {div_eps:.1e}")
        return _scalar(e.a, env, div_eps) / den
    if isinstance(e, Neg):
        return -_scalar(e.a, env, div_eps)
    if isinstance(e, Pow):
        base = _scalar(e.base, env, div_eps)
        if e.exponent < 0 and abs(base) < div_eps:
            raise DomainError("negative power of a vanishing base")
        return base ** e.exponent
    if isinstance(e, Sin):
        return np.sin(_scalar(e.a, env, div_eps))
    if isinstance(e, Cos):
        return np.cos(_scalar(e.a, env, div_eps))
    if isinstance(e, Exp):
        return np.exp(_scalar(e.a, env, div_eps))
    raise TypeError(f"unknown node {e!r}")  # pragma: no cover


def eval_point(m: ExprMap, u, div_eps: float = DIV_EPS) -> np.ndarray:
    """Plain evaluation of the map at a parameter point, shape (N,)."""
    u = np.asarray(u, dtype=complex).ravel()
    if u.shape[0] != m.n_params:
        raise ValueError(f"expected {m.n_params} parameters, got {u.shape[0]}")
    env = {name: complex(val) for name, val in zip(m.vars, u)}
    return np.array([_scalar(c, env, div_eps) for c in m.components], dtype=complex)


def _jet(e, env, n, memo, div_eps):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    out = _jet_rules(e, env, n, memo, div_eps)
    memo[key] = out
    return out


def _jet_rules(e, env, n, memo, div_eps):
    if isinstance(e, Const):
        return e.value, np.zeros(n, dtype=complex), np.zeros((n, n), dtype=complex)
    if isinstance(e, Var):
        g = np.zeros(n, dtype=complex)
        g[env[1][e.name]] = 1.0
        return env[0][e.name], g, np.zeros((n, n), dtype=complex)
    if isinstance(e, Add):
        va, ga, ha = _jet(e.a, env, n, memo, div_eps)
        vb, gb, hb = _jet(e.b, env, n, memo, div_eps)
        return va + vb, ga + gb, ha + hb
    if isinstance(e, Sub):
        va, ga, ha = _jet(e.a, env, n, memo, div_eps)
        vb, gb, hb = _jet(e.b, env, n, memo, div_eps)
        return va - vb, ga - gb, ha - hb
    if isinstance(e, Neg):
        va, ga, ha = _jet(e.a, env, n, memo, div_eps)
        return -va, -ga, -ha
    if isinstance(e, Mul):
        va, ga, ha = _jet(e.a, env, n, memo, div_eps)
        vb, gb, hb = _jet(e.b, env, n, memo, div_eps)
        h = va * hb + vb * ha + np.multiply.outer(ga, gb) + np.multiply.outer(gb, ga)
        return va * vb, va * gb + vb * ga, h
    if isinstance(e, Div):
        va, ga, ha = _jet(e.a, env, n, memo, div_eps)
        vb, gb, hb = _jet(e.b, env, n, memo, div_eps)
        if abs(vb) < div_eps:
            raise DomainError(f"denominator magnitude {abs(vb):.3e} below {div_eps:.1e}")
        w = 1.0 / vb
        v = va * w
        g = (ga - v * gb) * w
        h = (ha - v * hb - np.multiply.outer(g, gb) - np.multiply.outer(gb, g)) * w
        return v, g, h
    if isinstance(e, Pow):
        vb, gb, hb = _jet(e.base, env, n, memo, div_eps)
        k = e.exponent
        if k == 0:
            return 1.0 + 0j, np.zeros(n, dtype=complex), np.zeros((n, n), dtype=complex)
        if k < 0 and abs(vb) < div_eps:
            raise DomainError("negative power of a vanishing base")
        v = vb ** k
        p1 = k * vb ** (k - 1)
        g = p1 * gb
        h = p1 * hb
        if k != 1:
            h = h + (k * (k - 1) * vb ** (k - 2)) * np.multiply.outer(gb, gb)
        return v, g, h
    if isinstance(e, Sin):
        va, ga, ha = _jet(e.a, env, n, memo, div_eps)
        s, c = np.sin(va), np.cos(va)
        return s, c * ga, c * ha - s * np.multiply.outer(ga, ga)
    if isinstance(e, Cos):
        va, ga, ha = _jet(e.a, env, n, memo, div_eps)
        s, c = np.sin(va), np.cos(va)
        return c, -s * ga, -s * ha - c * np.multiply.outer(ga, ga)
    if isinstance(e, Exp):
        va, ga, ha = _jet(e.a, env, n, memo, div_eps)
        v = np.exp(va)
        return v, v * ga, v * (ha + np.multiply.outer(ga, ga))
    raise TypeError(f"unknown node {e!r}")  # pragma: no cover


def eval_jet2(m: ExprMap, u, div_eps: float = DIV_EPS) -> Jet2:
    """Exact 2-jet of the map at a parameter point via chain-rule propagation."""
    u = np.asarray(u, dtype=complex).ravel()
    n = m.n_params
    if u.shape[0] != n:
        raise ValueError(f"expected {n} parameters, got {u.shape[0]}")
    values = {name: complex(val) for name, val in zip(m.vars, u)}
    index = {name: i for i, name in enumerate(m.vars)}
    env = (values, index)
    N = m.n_out
    value = np.zeros(N, dtype=complex)
    d1 = np.zeros((N, n), dtype=complex)
    d2 = np.zeros((N, n, n), dtype=complex)
    memo: dict[int, tuple] = {}
    for i, comp in enumerate(m.components):
        v, g, h = _jet(comp, env, n, memo, div_eps)
        value[i] = v
        d1[i] = g
        d2[i] = h
    return Jet2(value, d1, d2)


def finite_diff_jet2(
    m: ExprMap, u, h1: float = 1e-5, h2: float = 1e-4, div_eps: float = DIV_EPS
) -> Jet2:
    """Central-difference 2-jet, sharing no derivative code with eval_jet2.

    h1 is the first-derivative step, h2 the second-derivative step.  Expected
    agreement with the exact jet is about 1e-10 relative on the gradient and
    1e-7 on the Hessian for well scaled inputs.
    """
    u = np.asarray(u, dtype=float).ravel()
    n = m.n_params
    if u.shape[0] != n:
        raise ValueError(f"expected {n} parameters, got {u.shape[0]}")

    def f(x):
        return eval_point(m, x, div_eps=div_eps)

    f0 = f(u)
    N = f0.shape[0]
    d1 = np.zeros((N, n), dtype=complex)
    d2 = np.zeros((N, n, n), dtype=complex)
    for i in range(n):
        step = np.zeros(n)
        step[i] = h1
        d1[:, i] = (f(u + step) - f(u - step)) / (2 * h1)
        step2 = np.zeros(n)
        step2[i] = h2
        d2[:, i, i] = (f(u + step2) - 2 * f0 + f(u - step2)) / (h2 * h2)
    for i in range(n):
        for j in range(i + 1, n):
            si = np.zeros(n)
            sj = np.zeros(n)
            si[i] = h2
            sj[j] = h2
            mixed = (
                f(u + si + sj) - f(u + si - sj) - f(u - si + sj) + f(u - si - sj)
            ) / (4 * h2 * h2)
            d2[:, i, j] = mixed
            d2[:, j, i] = mixed
    return Jet2(f0, d1, d2)
