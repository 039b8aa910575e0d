"""Expression trees for parametrized maps.

A parametrization is an ExprMap: a list of scalar expression trees over a
shared tuple of real parameters.  Trees are built from constants, variables,
arithmetic (+, -, *, /), integer powers, and sin/cos/exp.  Coefficients may
be complex; parameters are evaluated at real points but nothing below assumes
real values.

The JSON form of a node is prefix style:

    3.5                     constant
    {"re": 0.0, "im": 1.0}  complex constant
    "u1"                    variable
    ["+", a, b]             also "-", "*", "/" (binary), "-" with one
                            argument is negation
    ["^", base, k]          integer power, k a plain int
    ["sin", a]              also "cos", "exp"

An ExprMap serializes as {"vars": [...], "components": [...]}.  Parsing then
serializing reproduces the canonical form byte for byte; constants with zero
imaginary part canonicalize to plain numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SpecValidationError, UnknownVariable


class Expr:
    """Base class for expression nodes.  Supports operator overloading."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __radd__(self, other):
        return Add(as_expr(other), self)

    def __sub__(self, other):
        return Sub(self, as_expr(other))

    def __rsub__(self, other):
        return Sub(as_expr(other), self)

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("only integer exponents are supported")
        return Pow(self, k)

    def variables(self) -> set[str]:
        out: set[str] = set()
        _collect_vars(self, out)
        return out


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Add(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True, slots=True)
class Sub(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True, slots=True)
class Div(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    a: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int):
            raise SpecValidationError("power exponent must be an integer")


@dataclass(frozen=True, slots=True)
class Sin(Expr):
    a: Expr


@dataclass(frozen=True, slots=True)
class Cos(Expr):
    a: Expr


@dataclass(frozen=True, slots=True)
class Exp(Expr):
    a: Expr


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex, np.integer, np.floating, np.complexfloating)):
        return Const(complex(x))
    raise TypeError(f"cannot interpret {x!r} as an expression")


def sin(x) -> Expr:
    return Sin(as_expr(x))


def cos(x) -> Expr:
    return Cos(as_expr(x))


def exp(x) -> Expr:
    return Exp(as_expr(x))


def _collect_vars(e: Expr, out: set[str]) -> None:
    if isinstance(e, Var):
        out.add(e.name)
    elif isinstance(e, Const):
        pass
    elif isinstance(e, (Add, Sub, Mul, Div)):
        _collect_vars(e.a, out)
        _collect_vars(e.b, out)
    elif isinstance(e, (Neg, Sin, Cos, Exp)):
        _collect_vars(e.a, out)
    elif isinstance(e, Pow):
        _collect_vars(e.base, out)
    else:  # pragma: no cover
        raise TypeError(f"unknown node {e!r}")


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions, rebuilding the tree."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return Add(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Sub):
        return Sub(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Mul):
        return Mul(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Div):
        return Div(substitute(e.a, mapping), substitute(e.b, mapping))
    if isinstance(e, Neg):
        return Neg(substitute(e.a, mapping))
    if isinstance(e, Sin):
        return Sin(substitute(e.a, mapping))
    if isinstance(e, Cos):
        return Cos(substitute(e.a, mapping))
    if isinstance(e, Exp):
        return Exp(substitute(e.a, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exponent)
    raise TypeError(f"unknown node {e!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# JSON encoding


def expr_to_obj(e: Expr):
    if isinstance(e, Const):
        v = e.value
        if v.imag == 0.0:
            return v.real
        return {"re": v.real, "im": v.imag}
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        return ["+", expr_to_obj(e.a), expr_to_obj(e.b)]
    if isinstance(e, Sub):
        return ["-", expr_to_obj(e.a), expr_to_obj(e.b)]
    if isinstance(e, Mul):
        return ["*", expr_to_obj(e.a), expr_to_obj(e.b)]
    if isinstance(e, Div):
        return ["/", expr_to_obj(e.a), expr_to_obj(e.b)]
    if isinstance(e, Neg):
        return ["-", expr_to_obj(e.a)]
    if isinstance(e, Pow):
        return ["^", expr_to_obj(e.base), e.exponent]
    if isinstance(e, Sin):
        return ["sin", expr_to_obj(e.a)]
    if isinstance(e, Cos):
        return ["cos", expr_to_obj(e.a)]
    if isinstance(e, Exp):
        return ["exp", expr_to_obj(e.a)]
    raise TypeError(f"unknown node {e!r}")  # pragma: no cover


def expr_from_obj(o) -> Expr:
    if isinstance(o, bool):
        raise SpecValidationError("booleans are not valid expressions")
    if isinstance(o, (int, float)):
        return Const(complex(o))
    if isinstance(o, dict):
        if set(o) != {"re", "im"}:
            raise SpecValidationError(f"bad constant object {o!r}")
        return Const(complex(float(o["re"]), float(o["im"])))
    if isinstance(o, str):
        if not o:
            raise SpecValidationError("empty variable name")
        return Var(o)
    if isinstance(o, list):
        if not o or not isinstance(o[0], str):
            raise SpecValidationError(f"bad expression node {o!r}")
        head, *args = o
        if head == "-" and len(args) == 1:
            return Neg(expr_from_obj(args[0]))
        if head in ("+", "-", "*", "/") and len(args) == 2:
            cls = {"+": Add, "-": Sub, "*": Mul, "/": Div}[head]
            return cls(expr_from_obj(args[0]), expr_from_obj(args[1]))
        if head == "^" and len(args) == 2:
            if not isinstance(args[1], int) or isinstance(args[1], bool):
                raise SpecValidationError("power exponent must be a plain integer")
            return Pow(expr_from_obj(args[0]), args[1])
        if head in ("sin", "cos", "exp") and len(args) == 1:
            cls = {"sin": Sin, "cos": Cos, "exp": Exp}[head]
            return cls(expr_from_obj(args[0]))
        raise SpecValidationError(f"unknown operator or arity in {o!r}")
    raise SpecValidationError(f"bad expression node {o!r}")


# ---------------------------------------------------------------------------
# ExprMap


@dataclass(frozen=True)
class ExprMap:
    """A tuple of expression components over a shared ordered variable list."""

    vars: tuple[str, ...]
    components: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "components", tuple(self.components))
        if not self.vars:
            raise SpecValidationError("a map needs at least one parameter")
        if len(set(self.vars)) != len(self.vars):
            raise SpecValidationError("duplicate variable names")
        for name in self.vars:
            if not isinstance(name, str) or not name:
                raise SpecValidationError(f"bad variable name {name!r}")
        if not self.components:
            raise SpecValidationError("a map needs at least one component")
        declared = set(self.vars)
        for i, comp in enumerate(self.components):
            if not isinstance(comp, Expr):
                raise SpecValidationError(f"component {i} is not an expression")
            undeclared = comp.variables() - declared
            if undeclared:
                raise UnknownVariable(
                    f"component {i} uses undeclared variable(s) {sorted(undeclared)}"
                )

    @property
    def n_params(self) -> int:
        return len(self.vars)

    @property
    def n_out(self) -> int:
        return len(self.components)

    def to_obj(self) -> dict:
        return {
            "vars": list(self.vars),
            "components": [expr_to_obj(c) for c in self.components],
        }

    @classmethod
    def from_obj(cls, o: dict) -> "ExprMap":
        if not isinstance(o, dict) or "vars" not in o or "components" not in o:
            raise SpecValidationError('expected {"vars": [...], "components": [...]}')
        return cls(
            vars=tuple(o["vars"]),
            components=tuple(expr_from_obj(c) for c in o["components"]),
        )

    def reparametrized(self, new_vars: Sequence[str], images: Sequence[Expr]) -> "ExprMap":
        """Compose with a substitution old_var -> expression in new_vars."""
        if len(images) != self.n_params:
            raise SpecValidationError("substitution must cover every parameter")
        mapping = dict(zip(self.vars, (as_expr(im) for im in images)))
        return ExprMap(
            vars=tuple(new_vars),
            components=tuple(substitute(c, mapping) for c in self.components),
        )


def linear_combo(coeffs: Iterable[complex], exprs: Iterable[Expr], shift: complex = 0.0) -> Expr:
    """Sum of coeff*expr terms plus a constant, skipping exact-zero coefficients."""
    acc: Expr | None = None
    for c, e in zip(coeffs, exprs):
        c = complex(c)
        if c == 0:
            continue
        term = e if c == 1 else Mul(Const(c), e)
        acc = term if acc is None else Add(acc, term)
    shift = complex(shift)
    if acc is None:
        return Const(shift)
    if shift != 0:
        acc = Add(acc, Const(shift))
    return acc


def affine_image(m: ExprMap, M: np.ndarray, c: np.ndarray) -> ExprMap:
    """The map x -> M f(x) + c, componentwise as expression trees."""
    M = np.asarray(M, dtype=complex)
    c = np.asarray(c, dtype=complex)
    if M.shape != (len(c), m.n_out):
        raise SpecValidationError("affine data shape does not match the map")
    comps = tuple(linear_combo(M[i], m.components, shift=c[i]) for i in range(M.shape[0]))
    return ExprMap(vars=m.vars, components=comps)


def fractional_linear_image(
    m: ExprMap, M: np.ndarray, b: np.ndarray, c: np.ndarray, d: complex
) -> ExprMap:
    """The map x -> (M f(x) + b) / (<c, f(x)> + d).

    Used to move a hyperplane to infinity and back; components become
    rational expression trees sharing one denominator subtree.
    """
    M = np.asarray(M, dtype=complex)
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    den = linear_combo(c, m.components, shift=complex(d))
    comps = []
    for i in range(M.shape[0]):
        num = linear_combo(M[i], m.components, shift=b[i])
        comps.append(Div(num, den))
    return ExprMap(vars=m.vars, components=tuple(comps))


def random_polynomial(
    rng: np.random.Generator,
    var_names: Sequence[str],
    degree: int = 2,
    terms: int = 4,
    scale: float = 1.0,
) -> Expr:
    """A random polynomial expression with the given variables.

    Deterministic for a fixed generator state.  Exponent tuples are drawn
    with replacement and deduplicated, so the term count is an upper bound.
    """
    k = len(var_names)
    seen: set[tuple[int, ...]] = set()
    for _ in range(terms):
        total = int(rng.integers(1, degree + 1))
        exps = [0] * k
        for _ in range(total):
            exps[int(rng.integers(0, k))] += 1
        seen.add(tuple(exps))
    acc: Expr | None = None
    for exps in sorted(seen):
        coeff = scale * float(rng.standard_normal())
        term: Expr = Const(coeff)
        for name, e in zip(var_names, exps):
            if e == 0:
                continue
            factor = Var(name) if e == 1 else Pow(Var(name), e)
            term = Mul(term, factor)
        acc = term if acc is None else Add(acc, term)
    assert acc is not None
    return acc
