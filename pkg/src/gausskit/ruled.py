"""Leaf-adapted ruled parametrizations.

A RuledSpec describes f(t, u) = A_0(u) + sum_a t^a A_a(u): a base map A_0
over r parameters and l direction maps A_a over the same parameters.  The
submanifold is swept by the l-dimensional flats through A_0(u) spanned by
the A_a(u).  Cylinders are the special case of constant A_a; cones arise
when every flat passes through a fixed vertex flat.

Chart variables are ordered leaf coordinates first: (t1..tl, u1..ur).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecValidationError
from .expr import Add, Expr, ExprMap, Mul, Var
from .jets import eval_point


@dataclass(frozen=True)
class RuledSpec:
    r: int
    l: int
    N: int
    base: ExprMap
    generators: tuple[ExprMap, ...]

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.r < 1 or self.l < 1:
            raise SpecValidationError("need r >= 1 base and l >= 1 leaf dimensions")
        if self.n > self.N - 1:
            raise SpecValidationError(
                f"n = r + l = {self.n} must leave codimension >= 1 in N = {self.N}"
            )
        if self.base.n_params != self.r or self.base.n_out != self.N:
            raise SpecValidationError("base map shape does not match (r, N)")
        if len(self.generators) != self.l:
            raise SpecValidationError(f"expected {self.l} generator maps")
        for g in self.generators:
            if g.vars != self.base.vars or g.n_out != self.N:
                raise SpecValidationError(
                    "generator maps must share the base variables and ambient dimension"
                )
        for i in range(self.l):
            if f"t{i + 1}" in self.base.vars:
                raise SpecValidationError("base variables may not be named t1..tl")

    @property
    def n(self) -> int:
        return self.r + self.l

    @property
    def leaf_vars(self) -> tuple[str, ...]:
        return tuple(f"t{a + 1}" for a in range(self.l))

    def chart(self) -> ExprMap:
        """The full parametrization as one ExprMap over (t1..tl, u1..ur)."""
        t = [Var(name) for name in self.leaf_vars]
        comps: list[Expr] = []
        for k in range(self.N):
            acc: Expr = self.base.components[k]
            for a in range(self.l):
                acc = Add(acc, Mul(t[a], self.generators[a].components[k]))
            comps.append(acc)
        return ExprMap(vars=self.leaf_vars + self.base.vars, components=tuple(comps))

    def leaf_point(self, u, t) -> np.ndarray:
        """Ambient point A_0(u) + sum_a t^a A_a(u)."""
        t = np.asarray(t, dtype=complex).ravel()
        if t.shape[0] != self.l:
            raise ValueError(f"expected {self.l} leaf coordinates")
        out = eval_point(self.base, u)
        for a in range(self.l):
            out = out + t[a] * eval_point(self.generators[a], u)
        return out

    def generator_matrix(self, u) -> np.ndarray:
        """N x l matrix whose columns are A_1(u)..A_l(u)."""
        return np.column_stack([eval_point(g, u) for g in self.generators])

    def to_obj(self) -> dict:
        return {
            "kind": "ruled",
            "r": self.r,
            "l": self.l,
            "N": self.N,
            "base": self.base.to_obj(),
            "generators": [g.to_obj() for g in self.generators],
        }

    @classmethod
    def from_obj(cls, o: dict) -> "RuledSpec":
        for key in ("r", "l", "N", "base", "generators"):
            if key not in o:
                raise SpecValidationError(f"ruled spec missing field {key!r}")
        return cls(
            r=int(o["r"]), l=int(o["l"]), N=int(o["N"]),
            base=ExprMap.from_obj(o["base"]),
            generators=tuple(ExprMap.from_obj(g) for g in o["generators"]),
        )


def parse_spec_obj(o: dict) -> RuledSpec | ExprMap:
    """Dispatch an input document to a ruled spec or a plain chart map.

    Accepted forms: {"kind": "ruled", ...}, {"kind": "chart", "map": {...}},
    or a bare {"vars": ..., "components": ...} map.
    """
    if not isinstance(o, dict):
        raise SpecValidationError("spec document must be a JSON object")
    kind = o.get("kind")
    if kind == "ruled":
        return RuledSpec.from_obj(o)
    if kind == "chart":
        if "map" not in o:
            raise SpecValidationError('chart spec needs a "map" field')
        return ExprMap.from_obj(o["map"])
    if kind is None and "vars" in o and "components" in o:
        return ExprMap.from_obj(o)
    raise SpecValidationError(f"unrecognized spec kind {kind!r}")
