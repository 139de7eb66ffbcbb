"""Exact symbolic expression kernel.

Expressions are immutable trees over Gaussian-rational constants, the
independent variable ``x``, named parameters (constants under the
derivation), named symbols whose derivatives come from a
:class:`DerivationTable`, registered radicals, and applications of
registered functions (``exp`` is built in).

Normalization rewrites any expression as a canonical ratio of expanded
multivariate polynomials with Gaussian-rational coefficients.  Radical
symbols carry their defining relation ``s**2 == square`` and the
relation is applied during normalization, so zero-testing stays exact:
``a`` equals ``b`` iff ``normalize(a - b)`` is the zero constant.

Fractional powers never appear as free exponents; they enter only
through radical symbols.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

Scalar = Union[int, Fraction, "GaussRat"]


class KitError(Exception):
    """Base class for all errors raised by this package."""


class UnknownSymbol(KitError):
    """A symbol was differentiated without a derivation-table entry."""


class UnboundSymbol(KitError):
    """A symbol was evaluated without a numeric binding."""


class EvalSingularity(KitError):
    """Numeric evaluation hit a division by zero."""


class DivisionByZeroExpr(KitError):
    """A denominator normalized to the zero expression."""


_FRACTION_ZERO = Fraction(0)


class GaussRat:
    """A Gaussian rational ``re + im*i`` with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Scalar = 0, im: Scalar = 0):
        if isinstance(re, GaussRat):
            re, im = re.re, re.im + Fraction(im)
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _make(re: Fraction, im: Fraction) -> "GaussRat":
        out = object.__new__(GaussRat)
        out.re = re
        out.im = im
        return out

    def __repr__(self):
        return f"GaussRat({self.re!r}, {self.im!r})"

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GaussRat(other)
        if not isinstance(other, GaussRat):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other: "GaussRat") -> "GaussRat":
        return GaussRat._make(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussRat") -> "GaussRat":
        return GaussRat._make(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussRat":
        return GaussRat._make(-self.re, -self.im)

    def __mul__(self, other: "GaussRat") -> "GaussRat":
        a, b, c, d = self.re, self.im, other.re, other.im
        if b == 0 and d == 0:
            return GaussRat._make(a * c, _FRACTION_ZERO)
        return GaussRat._make(a * c - b * d, a * d + b * c)

    def __truediv__(self, other: "GaussRat") -> "GaussRat":
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise DivisionByZeroExpr("division by zero Gaussian rational")
        return GaussRat._make(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


# ---------------------------------------------------------------------------
# Expression nodes
# ---------------------------------------------------------------------------


class Expr:
    """Immutable expression tree node.

    Arithmetic operators build trees without simplifying; call
    :func:`normalize` for the canonical form.  Structural equality and
    hashing are supported so expressions can key dictionaries.
    """

    __slots__ = ("_h",)

    def _key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        h = getattr(self, "_h", None)
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_h", h)
        return h

    def __repr__(self):
        return f"<Expr {to_sexpr(self)}>"

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Mul((const(-1), as_expr(other)))))

    def __rsub__(self, other):
        return Add((as_expr(other), Mul((const(-1), self))))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __pow__(self, exponent: int):
        return Pow(self, exponent)

    def __neg__(self):
        return Mul((const(-1), self))


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Scalar):
        object.__setattr__(self, "value", value if isinstance(value, GaussRat) else GaussRat(value))

    def _key(self):
        return (self.value,)


class Var(Expr):
    """The independent variable ``x``."""

    __slots__ = ()

    def _key(self):
        return ()


class Param(Expr):
    """A named constant parameter (derivative zero)."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)


class Sym(Expr):
    """A named symbol whose derivative is looked up in a DerivationTable."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)


class Radical(Expr):
    """A symbol ``s`` constrained by ``s**2 == square``.

    The relation travels with the node and is applied during
    normalization, so ``s**2 - square`` normalizes to zero.  Its
    derivative defaults to ``square' / (2*square) * s`` unless the
    derivation table overrides it.
    """

    __slots__ = ("name", "square")

    def __init__(self, name: str, square: Expr):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "square", square)

    def _key(self):
        return (self.name, self.square)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Expr]):
        object.__setattr__(self, "terms", tuple(terms))

    def _key(self):
        return self.terms


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[Expr]):
        object.__setattr__(self, "factors", tuple(factors))

    def _key(self):
        return self.factors


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        if not isinstance(exponent, int):
            raise TypeError(
                "only integer exponents are allowed; use a Radical for square roots"
            )
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)

    def _key(self):
        return (self.base, self.exponent)


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def _key(self):
        return (self.num, self.den)


class Apply(Expr):
    """Application of a registered function to one argument."""

    __slots__ = ("func", "arg")

    def __init__(self, func: str, arg: Expr):
        if func not in _FUNCTIONS:
            raise KitError(f"unregistered function {func!r}")
        object.__setattr__(self, "func", func)
        object.__setattr__(self, "arg", arg)

    def _key(self):
        return (self.func, self.arg)


# -- constructors ----------------------------------------------------------

X = Var()
I = Const(GaussRat(0, 1))
ZERO = Const(0)
ONE = Const(1)


def const(value: Scalar) -> Const:
    return Const(value)


def rat(num: int, den: int) -> Const:
    return Const(Fraction(num, den))


def param(name: str) -> Param:
    return Param(name)


def sym(name: str) -> Sym:
    return Sym(name)


def exp(arg) -> Expr:
    return Apply("exp", as_expr(arg))


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction, GaussRat)):
        return Const(value)
    raise TypeError(f"cannot interpret {value!r} as an expression")


class _FunctionRule:
    __slots__ = ("evaluate", "derivative")

    def __init__(self, evaluate: Callable[[complex], complex],
                 derivative: Callable[[Expr, Expr], Expr]):
        self.evaluate = evaluate
        self.derivative = derivative


_FUNCTIONS: dict[str, _FunctionRule] = {}


def register_function(name: str, evaluate: Callable[[complex], complex],
                      derivative: Callable[[Expr, Expr], Expr]) -> None:
    """Register a unary function usable in Apply nodes.

    ``derivative(arg, d_arg)`` must return the derivative of
    ``name(arg)`` given the argument and its derivative.
    """
    _FUNCTIONS[name] = _FunctionRule(evaluate, derivative)


register_function("exp", cmath.exp, lambda arg, d_arg: d_arg * Apply("exp", arg))


# ---------------------------------------------------------------------------
# Derivation tables
# ---------------------------------------------------------------------------


class DerivationTable:
    """Immutable map from symbol name to its derivative expression.

    Entries may reference x, parameters, radicals, and symbols that are
    themselves in the table, so derivatives of arbitrary order stay
    resolvable (or fail loudly with UnknownSymbol).
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[str, Expr] | None = None):
        self._entries = dict(entries or {})

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def get(self, name: str) -> Expr | None:
        return self._entries.get(name)

    def items(self):
        return self._entries.items()

    def extended(self, entries: Mapping[str, Expr]) -> "DerivationTable":
        merged = dict(self._entries)
        merged.update(entries)
        return DerivationTable(merged)

    def closure_defect(self) -> set[str]:
        """Symbol names referenced by entries but not registered.

        Derivative towers deliberately end in one unregistered symbol so
        that differentiating past them raises instead of truncating;
        this reports exactly those loose ends.  Parameters and the
        variable never appear (they are always derivable).
        """
        loose: set[str] = set()
        for entry in self._entries.values():
            for name in _sym_names(entry):
                if name not in self._entries:
                    loose.add(name)
        return loose

    def __repr__(self):
        names = ", ".join(sorted(self._entries))
        return f"DerivationTable({names})"


EMPTY_TABLE = DerivationTable()


def symbol_tower(base: str, depth: int) -> dict[str, Expr]:
    """Derivative chain ``base -> base_d1 -> ... -> base_d<depth>``.

    The deepest symbol has no entry, so differentiating past the tower
    raises UnknownSymbol instead of silently truncating.
    """
    entries: dict[str, Expr] = {}
    prev = base
    for k in range(1, depth + 1):
        nxt = f"{base}_d{k}"
        entries[prev] = Sym(nxt)
        prev = nxt
    return entries


# ---------------------------------------------------------------------------
# Normal form: rational functions over expanded polynomials
# ---------------------------------------------------------------------------
#
# A generator is a hashable key describing one multiplicand kind:
#   ("x",), ("param", name), ("sym", name), ("rad", name, square_expr),
#   ("app", func, normalized_arg_expr)
# A monomial is a sorted tuple of (generator, positive power); a
# polynomial maps monomials to nonzero GaussRat coefficients.

Gen = tuple
Mono = tuple
Poly = dict


_GEN_KEY_CACHE: dict[Gen, tuple] = {}


def _gen_sort_key(gen: Gen):
    key = _GEN_KEY_CACHE.get(gen)
    if key is not None:
        return key
    kind = gen[0]
    if kind == "x":
        key = (0, "x", "")
    elif kind == "param":
        key = (1, gen[1], "")
    elif kind == "sym":
        key = (2, gen[1], "")
    elif kind == "rad":
        key = (3, gen[1], to_sexpr(gen[2]))
    else:
        key = (4, gen[1], to_sexpr(gen[2]))
    _GEN_KEY_CACHE[gen] = key
    return key


def _mono_sort_key(mono: Mono):
    degree = sum(p for _, p in mono)
    parts = tuple((_gen_sort_key(g), p) for g, p in mono)
    return (degree, parts)


_EMPTY_MONO: Mono = ()


def _poly_const(c: GaussRat) -> Poly:
    return {} if c.is_zero() else {_EMPTY_MONO: c}


_POLY_ONE = {_EMPTY_MONO: GaussRat(1)}


def _poly_gen(gen: Gen) -> Poly:
    return {((gen, 1),): GaussRat(1)}


def _poly_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for mono, coeff in b.items():
        s = out.get(mono)
        if s is None:
            out[mono] = coeff
        else:
            s = s + coeff
            if s.is_zero():
                del out[mono]
            else:
                out[mono] = s
    return out


def _poly_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def _mono_mul(a: Mono, b: Mono) -> Mono:
    # monomials keep their factors sorted by generator key, so products
    # are sorted merges
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        ga, pa = a[i]
        gb, pb = b[j]
        if ga == gb:
            out.append((ga, pa + pb))
            i += 1
            j += 1
        elif _gen_sort_key(ga) < _gen_sort_key(gb):
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            mono = _mono_mul(ma, mb)
            coeff = ca * cb
            s = out.get(mono)
            if s is None:
                out[mono] = coeff
            else:
                s = s + coeff
                if s.is_zero():
                    del out[mono]
                else:
                    out[mono] = s
    return out


def _poly_scale(a: Poly, c: GaussRat) -> Poly:
    if c.is_zero():
        return {}
    return {m: v * c for m, v in a.items()}


def _poly_is_zero(a: Poly) -> bool:
    return not a


def _mono_div(a: Mono, b: Mono) -> Mono | None:
    """Exponentwise a / b, or None when not divisible."""
    powers = dict(a)
    for g, p in b:
        have = powers.get(g, 0) - p
        if have < 0:
            return None
        if have == 0:
            del powers[g]
        else:
            powers[g] = have
    return tuple(sorted(powers.items(), key=lambda item: _gen_sort_key(item[0])))


def _poly_exact_div(num: Poly, den: Poly) -> Poly | None:
    """Quotient num/den when the division is exact, else None."""
    if not num:
        return {}
    if len(den) == 1:
        (dm, dc), = den.items()
        out = {}
        for mono, coeff in num.items():
            qm = _mono_div(mono, dm)
            if qm is None:
                return None
            out[qm] = coeff / dc
        return out
    quot: Poly = {}
    rem = dict(num)
    den_lead = max(den, key=_mono_sort_key)
    den_lc = den[den_lead]
    # bounded by the term count of the true quotient; bail out early
    # when the remainder grows past any exact-division bound
    limit = 4 * (len(num) + len(den)) + 16
    while rem:
        if len(quot) > limit:
            return None
        lead = max(rem, key=_mono_sort_key)
        qm = _mono_div(lead, den_lead)
        if qm is None:
            return None
        qc = rem[lead] / den_lc
        quot[qm] = qc
        for mono, coeff in den.items():
            key = _mono_mul(qm, mono)
            s = rem.get(key)
            s = (-qc * coeff) if s is None else s - qc * coeff
            if s.is_zero():
                rem.pop(key, None)
            else:
                rem[key] = s
    return quot


def _poly_cancel_content(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    """Strip the common monomial factor of two polynomials."""
    common: dict | None = None
    for poly in (num, den):
        for mono in poly:
            powers = dict(mono)
            if common is None:
                common = powers
            else:
                common = {
                    g: min(p, powers[g]) for g, p in common.items() if g in powers
                }
            if not common:
                return num, den
    if not common:
        return num, den
    factor = tuple(sorted(common.items(), key=lambda item: _gen_sort_key(item[0])))

    def strip(poly: Poly) -> Poly:
        return {_mono_div(mono, factor): coeff for mono, coeff in poly.items()}

    return strip(num), strip(den)


def _poly_radical_gens(a: Poly) -> set[Gen]:
    gens = set()
    for mono in a:
        for g, _ in mono:
            if g[0] == "rad":
                gens.add(g)
    return gens


class _RatFunc:
    """Reduced fraction of polynomials; denominators are radical-free."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        self.num = num
        self.den = den


def _reduce_radicals(a: Poly) -> "_RatFunc":
    """Rewrite every radical power >= 2 via its defining square."""
    while True:
        target = None
        for mono, coeff in a.items():
            for g, p in mono:
                if g[0] == "rad" and p >= 2:
                    target = (mono, coeff, g, p)
                    break
            if target:
                break
        if target is None:
            return _RatFunc(a, dict(_POLY_ONE))
        mono, coeff, g, p = target
        rest = tuple((gg, pp) for gg, pp in mono if gg != g)
        if p % 2:
            rest = _mono_mul(rest, ((g, 1),))
        square_rf = _to_ratfunc(g[2])
        if not _poly_is_zero(square_rf.den) and square_rf.den != _POLY_ONE:
            raise KitError(
                f"radical {g[1]!r} has a non-polynomial square; normalize it first"
            )
        if _poly_radical_gens(square_rf.num) & {g}:
            raise KitError(f"radical {g[1]!r} appears in its own defining square")
        power = p // 2
        repl: Poly = dict(_POLY_ONE)
        for _ in range(power):
            repl = _poly_mul(repl, square_rf.num)
        del a[mono]
        a = _poly_add(a, _poly_mul({rest: coeff}, repl))


def _rf(num: Poly, den: Poly) -> _RatFunc:
    """Build a reduced rational function with a canonical monic denominator."""
    if _poly_is_zero(den):
        raise DivisionByZeroExpr("denominator normalized to zero")
    rnum = _reduce_radicals(dict(num))
    rden = _reduce_radicals(dict(den))
    # cross-multiply the auxiliary denominators produced by reduction
    num_p = _poly_mul(rnum.num, rden.den)
    den_p = _poly_mul(rden.num, rnum.den)
    # rationalize radicals out of the denominator, one radical at a time
    while True:
        rads = _poly_radical_gens(den_p)
        if not rads:
            break
        g = sorted(rads, key=_gen_sort_key)[0]
        plain: Poly = {}
        radpart: Poly = {}
        for mono, coeff in den_p.items():
            if any(gg == g for gg, _ in mono):
                stripped = tuple((gg, pp) for gg, pp in mono if gg != g)
                radpart[stripped] = coeff
            else:
                plain[mono] = coeff
        # den = plain + radpart*g ; multiply by the conjugate plain - radpart*g
        conj = _poly_add(plain, _poly_mul(_poly_neg(radpart), _poly_gen(g)))
        num_r = _reduce_radicals(_poly_mul(num_p, conj))
        den_r = _reduce_radicals(_poly_mul(den_p, conj))
        num_p = _poly_mul(num_r.num, den_r.den)
        den_p = _poly_mul(den_r.num, num_r.den)
        if _poly_is_zero(den_p):
            raise DivisionByZeroExpr("denominator normalized to zero")
    if _poly_is_zero(num_p):
        return _RatFunc({}, dict(_POLY_ONE))
    if den_p != _POLY_ONE:
        num_p, den_p = _poly_cancel_content(num_p, den_p)
        quotient = _poly_exact_div(num_p, den_p)
        if quotient is not None:
            return _RatFunc(quotient, dict(_POLY_ONE))
    lead = max(den_p, key=_mono_sort_key)
    scale = den_p[lead]
    if not (scale == GaussRat(1)):
        inv = GaussRat(1) / scale
        num_p = _poly_scale(num_p, inv)
        den_p = _poly_scale(den_p, inv)
    return _RatFunc(num_p, den_p)


def _rf_same_den_or_divisible(a: _RatFunc, b: _RatFunc):
    """(num_a', num_b', den) for the cheap common-denominator cases."""
    if a.den == b.den:
        return a.num, b.num, a.den
    q = _poly_exact_div(b.den, a.den)
    if q is not None:
        return _poly_mul(a.num, q), b.num, b.den
    q = _poly_exact_div(a.den, b.den)
    if q is not None:
        return a.num, _poly_mul(b.num, q), a.den
    return None


def _rf_add(a: _RatFunc, b: _RatFunc) -> _RatFunc:
    shared = _rf_same_den_or_divisible(a, b)
    if shared is not None:
        num_a, num_b, den = shared
        return _rf(_poly_add(num_a, num_b), dict(den))
    num = _poly_add(_poly_mul(a.num, b.den), _poly_mul(b.num, a.den))
    return _rf(num, _poly_mul(a.den, b.den))


def _rf_mul(a: _RatFunc, b: _RatFunc) -> _RatFunc:
    return _rf(_poly_mul(a.num, b.num), _poly_mul(a.den, b.den))


def _rf_div(a: _RatFunc, b: _RatFunc) -> _RatFunc:
    if _poly_is_zero(b.num):
        raise DivisionByZeroExpr("denominator normalized to zero")
    return _rf(_poly_mul(a.num, b.den), _poly_mul(a.den, b.num))


def _rf_pow(a: _RatFunc, n: int) -> _RatFunc:
    if n == 0:
        return _RatFunc(dict(_POLY_ONE), dict(_POLY_ONE))
    if n < 0:
        if _poly_is_zero(a.num):
            raise DivisionByZeroExpr("zero raised to a negative power")
        a = _RatFunc(a.den, a.num)
        n = -n
    out = _RatFunc(dict(_POLY_ONE), dict(_POLY_ONE))
    for _ in range(n):
        out = _rf_mul(out, a)
    return out


def _to_ratfunc(e: Expr) -> _RatFunc:
    if isinstance(e, Const):
        return _RatFunc(_poly_const(e.value), dict(_POLY_ONE))
    if isinstance(e, Var):
        return _RatFunc(_poly_gen(("x",)), dict(_POLY_ONE))
    if isinstance(e, Param):
        return _RatFunc(_poly_gen(("param", e.name)), dict(_POLY_ONE))
    if isinstance(e, Sym):
        return _RatFunc(_poly_gen(("sym", e.name)), dict(_POLY_ONE))
    if isinstance(e, Radical):
        return _rf(_poly_gen(("rad", e.name, e.square)), dict(_POLY_ONE))
    if isinstance(e, Add):
        out = _RatFunc({}, dict(_POLY_ONE))
        for t in e.terms:
            out = _rf_add(out, _to_ratfunc(t))
        return out
    if isinstance(e, Mul):
        out = _RatFunc(dict(_POLY_ONE), dict(_POLY_ONE))
        for f in e.factors:
            out = _rf_mul(out, _to_ratfunc(f))
        return out
    if isinstance(e, Pow):
        return _rf_pow(_to_ratfunc(e.base), e.exponent)
    if isinstance(e, Div):
        return _rf_div(_to_ratfunc(e.num), _to_ratfunc(e.den))
    if isinstance(e, Apply):
        arg = normalize(e.arg)
        if isinstance(arg, Const) and arg.value.is_zero() and e.func == "exp":
            return _RatFunc(dict(_POLY_ONE), dict(_POLY_ONE))
        return _RatFunc(_poly_gen(("app", e.func, arg)), dict(_POLY_ONE))
    raise TypeError(f"unknown node {e!r}")


def _gen_to_expr(gen: Gen) -> Expr:
    kind = gen[0]
    if kind == "x":
        return X
    if kind == "param":
        return Param(gen[1])
    if kind == "sym":
        return Sym(gen[1])
    if kind == "rad":
        return Radical(gen[1], gen[2])
    return Apply(gen[1], gen[2])


def _poly_to_expr(p: Poly) -> Expr:
    if not p:
        return ZERO
    terms = []
    for mono in sorted(p, key=_mono_sort_key, reverse=True):
        coeff = p[mono]
        factors: list[Expr] = []
        if not (coeff == GaussRat(1)) or not mono:
            factors.append(Const(coeff))
        for gen, power in mono:
            base = _gen_to_expr(gen)
            factors.append(base if power == 1 else Pow(base, power))
        terms.append(factors[0] if len(factors) == 1 else Mul(tuple(factors)))
    return terms[0] if len(terms) == 1 else Add(tuple(terms))


_NORMAL_CACHE: dict[Expr, Expr] = {}
_NORMAL_CACHE_LIMIT = 1 << 16


def normalize(e: Expr) -> Expr:
    """Return the canonical form of ``e``.

    The result is an expanded polynomial, or a Div of two expanded
    polynomials whose denominator is radical-free and monic in the
    canonical monomial order.  Idempotent, and exact: the result is the
    zero constant iff ``e`` is identically zero under the radical
    relations it contains.
    """
    cached = _NORMAL_CACHE.get(e)
    if cached is not None:
        return cached
    rf = _to_ratfunc(e)
    if rf.den == _POLY_ONE:
        out = _poly_to_expr(rf.num)
    elif _poly_is_zero(rf.num):
        out = ZERO
    else:
        out = Div(_poly_to_expr(rf.num), _poly_to_expr(rf.den))
    if len(_NORMAL_CACHE) > _NORMAL_CACHE_LIMIT:
        _NORMAL_CACHE.clear()
    _NORMAL_CACHE[e] = out
    _NORMAL_CACHE[out] = out
    return out


def is_zero(e: Expr) -> bool:
    n = normalize(e)
    return isinstance(n, Const) and n.value.is_zero()


def equal(a: Expr, b: Expr) -> bool:
    return is_zero(a - b)


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def differentiate(e: Expr, table: DerivationTable = EMPTY_TABLE) -> Expr:
    """Derivative of ``e`` with table rewrites applied, normalized."""
    return normalize(_diff(e, table))


def _diff(e: Expr, table: DerivationTable) -> Expr:
    if isinstance(e, (Const, Param)):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Sym):
        entry = table.get(e.name)
        if entry is None:
            raise UnknownSymbol(f"no derivative registered for symbol {e.name!r}")
        return entry
    if isinstance(e, Radical):
        entry = table.get(e.name)
        if entry is not None:
            return entry
        # s' = square' * s / (2 * square), from s**2 == square
        return Div(Mul((_diff(e.square, table), e)), Mul((const(2), e.square)))
    if isinstance(e, Add):
        return Add(tuple(_diff(t, table) for t in e.terms))
    if isinstance(e, Mul):
        factors = e.factors
        terms = []
        for k in range(len(factors)):
            parts = list(factors)
            parts[k] = _diff(factors[k], table)
            terms.append(Mul(tuple(parts)))
        return Add(tuple(terms))
    if isinstance(e, Pow):
        if e.exponent == 0:
            return ZERO
        return Mul((const(e.exponent), Pow(e.base, e.exponent - 1), _diff(e.base, table)))
    if isinstance(e, Div):
        du = _diff(e.num, table)
        dv = _diff(e.den, table)
        return Div(Add((Mul((du, e.den)), Mul((const(-1), e.num, dv)))), Pow(e.den, 2))
    if isinstance(e, Apply):
        return _FUNCTIONS[e.func].derivative(e.arg, _diff(e.arg, table))
    raise TypeError(f"unknown node {e!r}")


def nth_derivative(e: Expr, table: DerivationTable, n: int) -> Expr:
    out = e
    for _ in range(n):
        out = differentiate(out, table)
    return out


# ---------------------------------------------------------------------------
# Evaluation and substitution
# ---------------------------------------------------------------------------


def evaluate(e: Expr, bindings: Mapping[str, complex]) -> complex:
    """IEEE double-complex value of ``e``; every free name must be bound.

    The independent variable is bound under the key ``"x"``.
    """
    if isinstance(e, Const):
        return e.value.to_complex()
    if isinstance(e, Var):
        if "x" not in bindings:
            raise UnboundSymbol("no binding for x")
        return complex(bindings["x"])
    if isinstance(e, (Param, Sym, Radical)):
        if e.name not in bindings:
            raise UnboundSymbol(f"no binding for {e.name!r}")
        return complex(bindings[e.name])
    if isinstance(e, Add):
        return sum(evaluate(t, bindings) for t in e.terms)
    if isinstance(e, Mul):
        out = 1 + 0j
        for f in e.factors:
            out *= evaluate(f, bindings)
        return out
    if isinstance(e, Pow):
        base = evaluate(e.base, bindings)
        if base == 0 and e.exponent < 0:
            raise EvalSingularity("zero base with negative exponent")
        return base ** e.exponent
    if isinstance(e, Div):
        den = evaluate(e.den, bindings)
        if den == 0:
            raise EvalSingularity("division by numeric zero")
        return evaluate(e.num, bindings) / den
    if isinstance(e, Apply):
        return _FUNCTIONS[e.func].evaluate(evaluate(e.arg, bindings))
    raise TypeError(f"unknown node {e!r}")


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Simultaneously replace named leaves by expressions, then normalize.

    Keys match Sym, Param, and Radical nodes by name; the key ``"x"``
    replaces the independent variable.
    """
    return normalize(_subst(e, mapping))


def _subst(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get("x", e)
    if isinstance(e, (Sym, Param, Radical)):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return Add(tuple(_subst(t, mapping) for t in e.terms))
    if isinstance(e, Mul):
        return Mul(tuple(_subst(f, mapping) for f in e.factors))
    if isinstance(e, Pow):
        return Pow(_subst(e.base, mapping), e.exponent)
    if isinstance(e, Div):
        return Div(_subst(e.num, mapping), _subst(e.den, mapping))
    if isinstance(e, Apply):
        return Apply(e.func, _subst(e.arg, mapping))
    raise TypeError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# Introspection helpers
# ---------------------------------------------------------------------------


def free_names(e: Expr) -> set[str]:
    """Names of all Sym/Param/Radical leaves occurring in ``e``."""
    out: set[str] = set()
    _collect_names(e, out)
    return out


def _sym_names(e: Expr) -> set[str]:
    """Names of Sym leaves only (the table-dependent kind)."""
    out: set[str] = set()

    def walk(node: Expr) -> None:
        if isinstance(node, Sym):
            out.add(node.name)
        elif isinstance(node, Add):
            for t in node.terms:
                walk(t)
        elif isinstance(node, Mul):
            for f in node.factors:
                walk(f)
        elif isinstance(node, Pow):
            walk(node.base)
        elif isinstance(node, Div):
            walk(node.num)
            walk(node.den)
        elif isinstance(node, Apply):
            walk(node.arg)
        elif isinstance(node, Radical):
            walk(node.square)

    walk(e)
    return out


def _collect_names(e: Expr, out: set[str]) -> None:
    if isinstance(e, (Sym, Param, Radical)):
        out.add(e.name)
        if isinstance(e, Radical):
            _collect_names(e.square, out)
    elif isinstance(e, Add):
        for t in e.terms:
            _collect_names(t, out)
    elif isinstance(e, Mul):
        for f in e.factors:
            _collect_names(f, out)
    elif isinstance(e, Pow):
        _collect_names(e.base, out)
    elif isinstance(e, Div):
        _collect_names(e.num, out)
        _collect_names(e.den, out)
    elif isinstance(e, Apply):
        _collect_names(e.arg, out)


def depends_on_x(e: Expr) -> bool:
    n = normalize(e)
    return _uses_x(n)


def _uses_x(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, (Const, Param)):
        return False
    if isinstance(e, (Sym, Radical)):
        # symbols are x-dependent unless proven otherwise; callers that
        # need a sharper test should substitute them away first
        return True
    if isinstance(e, Add):
        return any(_uses_x(t) for t in e.terms)
    if isinstance(e, Mul):
        return any(_uses_x(f) for f in e.factors)
    if isinstance(e, Pow):
        return _uses_x(e.base)
    if isinstance(e, Div):
        return _uses_x(e.num) or _uses_x(e.den)
    if isinstance(e, Apply):
        return _uses_x(e.arg)
    return False


def param_coefficients(e: Expr, name: str) -> dict[int, Expr]:
    """Coefficients of powers of a parameter in the normal form of ``e``.

    Requires the normalized denominator to be free of the parameter.
    Returns a map power -> coefficient expression (normalized).
    """
    rf = _to_ratfunc(e)
    gen = ("param", name)
    for mono in rf.den:
        if any(g == gen for g, _ in mono):
            raise KitError(f"denominator depends on parameter {name!r}")
    by_power: dict[int, Poly] = {}
    for mono, coeff in rf.num.items():
        power = 0
        rest = []
        for g, p in mono:
            if g == gen:
                power = p
            else:
                rest.append((g, p))
        by_power.setdefault(power, {})[tuple(rest)] = coeff
    den_expr = _poly_to_expr(rf.den)
    out: dict[int, Expr] = {}
    for power, poly in by_power.items():
        num_expr = _poly_to_expr(poly)
        out[power] = normalize(num_expr if rf.den == _POLY_ONE else Div(num_expr, den_expr))
    return out


# ---------------------------------------------------------------------------
# Canonical text serialization (S-expressions)
# ---------------------------------------------------------------------------
#
# Grammar (tokens separated by whitespace or parentheses):
#   expr  := const | x | (param NAME) | (sym NAME) | (rad NAME expr)
#          | (+ expr ...) | (* expr ...) | (^ expr INT) | (/ expr expr)
#          | (apply NAME expr)
#   const := RAT | (c RAT RAT)          -- (c re im) for nonreal constants
#   RAT   := optionally signed integer or integer/integer


def _rat_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def to_sexpr(e: Expr) -> str:
    """Canonical S-expression text for ``e`` (not normalized first)."""
    if isinstance(e, Const):
        v = e.value
        if v.im == 0:
            return _rat_str(v.re)
        return f"(c {_rat_str(v.re)} {_rat_str(v.im)})"
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Param):
        return f"(param {e.name})"
    if isinstance(e, Sym):
        return f"(sym {e.name})"
    if isinstance(e, Radical):
        return f"(rad {e.name} {to_sexpr(e.square)})"
    if isinstance(e, Add):
        return "(+ " + " ".join(to_sexpr(t) for t in e.terms) + ")"
    if isinstance(e, Mul):
        return "(* " + " ".join(to_sexpr(f) for f in e.factors) + ")"
    if isinstance(e, Pow):
        return f"(^ {to_sexpr(e.base)} {e.exponent})"
    if isinstance(e, Div):
        return f"(/ {to_sexpr(e.num)} {to_sexpr(e.den)})"
    if isinstance(e, Apply):
        return f"(apply {e.func} {to_sexpr(e.arg)})"
    raise TypeError(f"unknown node {e!r}")


def _tokenize_sexpr(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_sexpr(text: str) -> Expr:
    """Parse the canonical S-expression serialization back to an Expr."""
    tokens = _tokenize_sexpr(text)
    expr, rest = _parse_tokens(tokens)
    if rest:
        raise KitError(f"trailing tokens in expression text: {rest!r}")
    return expr


def _parse_rat(token: str) -> Fraction:
    return Fraction(token)


def _parse_tokens(tokens: list[str]) -> tuple[Expr, list[str]]:
    if not tokens:
        raise KitError("empty expression text")
    tok, rest = tokens[0], tokens[1:]
    if tok == "(":
        head, rest = rest[0], rest[1:]
        args: list = []
        while rest and rest[0] != ")":
            if head in ("param", "sym", "apply", "rad", "c") and not args:
                args.append(rest[0])
                rest = rest[1:]
                continue
            if head == "c":
                args.append(rest[0])
                rest = rest[1:]
                continue
            if head == "^" and len(args) == 1:
                args.append(rest[0])
                rest = rest[1:]
                continue
            sub, rest = _parse_tokens(rest)
            args.append(sub)
        if not rest:
            raise KitError("unbalanced parenthesis in expression text")
        rest = rest[1:]
        if head == "+":
            return Add(tuple(args)), rest
        if head == "*":
            return Mul(tuple(args)), rest
        if head == "^":
            return Pow(args[0], int(args[1])), rest
        if head == "/":
            return Div(args[0], args[1]), rest
        if head == "param":
            return Param(args[0]), rest
        if head == "sym":
            return Sym(args[0]), rest
        if head == "rad":
            return Radical(args[0], args[1]), rest
        if head == "apply":
            return Apply(args[0], args[1]), rest
        if head == "c":
            return Const(GaussRat(_parse_rat(args[0]), _parse_rat(args[1]))), rest
        raise KitError(f"unknown S-expression head {head!r}")
    if tok == "x":
        return X, rest
    return Const(GaussRat(_parse_rat(tok))), rest


# ---------------------------------------------------------------------------
# Infix parsing (for CLI flags) and pretty printing
# ---------------------------------------------------------------------------


def parse_infix(text: str, params: Iterable[str] = (), symbols: Iterable[str] = ()) -> Expr:
    """Parse ``"2 - i*w1"`` style input.

    Operators + - * / ^ with usual precedence, parentheses, integer and
    a/b rational literals, ``i`` for the imaginary unit, ``x`` for the
    variable.  Other names become Param if listed in ``params``, else
    Sym.  ``exp(...)`` and other registered functions are recognized.
    """
    params = set(params)
    symbols = set(symbols)
    tokens = _tokenize_infix(text)
    parser = _InfixParser(tokens, params, symbols)
    expr = parser.parse_expression()
    if parser.peek() is not None:
        raise KitError(f"unexpected token {parser.peek()!r} in {text!r}")
    return expr


def _tokenize_infix(text: str) -> list[str]:
    out: list[str] = []
    k = 0
    while k < len(text):
        ch = text[k]
        if ch.isspace():
            k += 1
        elif ch.isdigit():
            j = k
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(text[k:j])
            k = j
        elif ch.isalpha() or ch == "_":
            j = k
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[k:j])
            k = j
        elif ch in "+-*/^()":
            out.append(ch)
            k += 1
        else:
            raise KitError(f"bad character {ch!r} in expression text")
    return out


class _InfixParser:
    def __init__(self, tokens: list[str], params: set[str], symbols: set[str]):
        self.tokens = tokens
        self.pos = 0
        self.params = params
        self.symbols = symbols

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse_expression(self) -> Expr:
        expr = self.parse_term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.parse_term()
            expr = expr + rhs if op == "+" else expr - rhs
        return expr

    def parse_term(self) -> Expr:
        expr = self.parse_unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.parse_unary()
            expr = expr * rhs if op == "*" else expr / rhs
        return expr

    def parse_unary(self) -> Expr:
        if self.peek() == "-":
            self.take()
            return -self.parse_unary()
        if self.peek() == "+":
            self.take()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            tok = self.take()
            if tok is None or not tok.isdigit():
                raise KitError("exponent must be an integer")
            return Pow(base, sign * int(tok))
        return base

    def parse_atom(self) -> Expr:
        tok = self.take()
        if tok is None:
            raise KitError("unexpected end of expression")
        if tok == "(":
            expr = self.parse_expression()
            if self.take() != ")":
                raise KitError("missing closing parenthesis")
            return expr
        if tok.isdigit():
            return Const(int(tok))
        if tok == "i":
            return I
        if tok == "x":
            return X
        if tok in _FUNCTIONS and self.peek() == "(":
            self.take()
            arg = self.parse_expression()
            if self.take() != ")":
                raise KitError("missing closing parenthesis")
            return Apply(tok, arg)
        if tok in self.params:
            return Param(tok)
        return Sym(tok)


def to_pretty(e: Expr) -> str:
    """Human-oriented infix rendering (lossy; use to_sexpr to round-trip)."""
    return _pretty(e, 0)


def _pretty(e: Expr, prec: int) -> str:
    if isinstance(e, Const):
        v = e.value
        if v.im == 0:
            s = _rat_str(v.re)
            return f"({s})" if (v.re < 0 and prec > 0) else s
        if v.re == 0:
            if v.im == 1:
                return "i"
            return f"{_rat_str(v.im)}*i" if prec <= 1 else f"({_rat_str(v.im)}*i)"
        s = f"{_rat_str(v.re)}{'+' if v.im > 0 else '-'}{_rat_str(abs(v.im))}*i"
        return f"({s})"
    if isinstance(e, Var):
        return "x"
    if isinstance(e, (Param, Sym, Radical)):
        return e.name
    if isinstance(e, Add):
        s = " + ".join(_pretty(t, 1) for t in e.terms).replace("+ -", "- ")
        return f"({s})" if prec > 1 else s
    if isinstance(e, Mul):
        s = "*".join(_pretty(f, 2) for f in e.factors)
        return f"({s})" if prec > 2 else s
    if isinstance(e, Pow):
        return f"{_pretty(e.base, 3)}^{e.exponent}"
    if isinstance(e, Div):
        return f"{_pretty(e.num, 2)}/{_pretty(e.den, 3)}"
    if isinstance(e, Apply):
        return f"{e.func}({_pretty(e.arg, 0)})"
    raise TypeError(f"unknown node {e!r}")
