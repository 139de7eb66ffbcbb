"""Linear differential systems, companion forms, and gauge calculus.

Every system is stored under the single sign convention ``X' = -A X``.
Constructors that ingest other presentations (flow forms ``Z' = M Z``,
cross-product forms) convert explicitly and record the conversion in
the system metadata, so no sign ever changes silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .expr import (
    DerivationTable,
    EMPTY_TABLE,
    Expr,
    KitError,
    Param,
    Radical,
    Sym,
    ZERO,
    ONE,
    as_expr,
    const,
    differentiate,
    equal,
    is_zero,
    normalize,
    parse_sexpr,
    sym,
    to_sexpr,
)


class SingularGauge(KitError):
    """Gauge matrix with determinant normalizing to zero."""


class ExprMatrix:
    """Dense matrix of expressions with exact arithmetic.

    Sizes stay tiny (n <= 3 throughout), so determinants and inverses
    use cofactor expansion / adjugates rather than elimination.
    """

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(tuple(as_expr(e) for e in row) for row in rows)
        width = {len(r) for r in self.rows}
        if len(width) > 1:
            raise ValueError("ragged matrix rows")

    @staticmethod
    def identity(n: int) -> "ExprMatrix":
        return ExprMatrix(
            [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
        )

    @staticmethod
    def zeros(n: int, m: int | None = None) -> "ExprMatrix":
        m = n if m is None else m
        return ExprMatrix([[ZERO] * m for _ in range(n)])

    @staticmethod
    def diagonal(entries: Sequence) -> "ExprMatrix":
        n = len(entries)
        return ExprMatrix(
            [[as_expr(entries[i]) if i == j else ZERO for j in range(n)] for i in range(n)]
        )

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def __iter__(self):
        return iter(self.rows)

    def __add__(self, other: "ExprMatrix") -> "ExprMatrix":
        return ExprMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ]
        )

    def __sub__(self, other: "ExprMatrix") -> "ExprMatrix":
        return ExprMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.rows, other.rows)
            ]
        )

    def __matmul__(self, other: "ExprMatrix") -> "ExprMatrix":
        if self.ncols != other.nrows:
            raise ValueError("matrix size mismatch")
        cols = other.ncols
        out = []
        for row in self.rows:
            new_row = []
            for j in range(cols):
                acc = ZERO
                for k, a in enumerate(row):
                    acc = acc + a * other.rows[k][j]
                new_row.append(acc)
            out.append(new_row)
        return ExprMatrix(out)

    def scale(self, c) -> "ExprMatrix":
        c = as_expr(c)
        return ExprMatrix([[c * e for e in row] for row in self.rows])

    def transpose(self) -> "ExprMatrix":
        return ExprMatrix(list(zip(*self.rows)))

    def map(self, fn: Callable[[Expr], Expr]) -> "ExprMatrix":
        return ExprMatrix([[fn(e) for e in row] for row in self.rows])

    def normalized(self) -> "ExprMatrix":
        return self.map(normalize)

    def diff(self, table: DerivationTable) -> "ExprMatrix":
        return self.map(lambda e: differentiate(e, table))

    def apply(self, vector: Sequence[Expr]) -> list[Expr]:
        return [
            normalize(sum((a * v for a, v in zip(row, vector)), ZERO))
            for row in self.rows
        ]

    def trace(self) -> Expr:
        return normalize(sum((self.rows[i][i] for i in range(self.nrows)), ZERO))

    def det(self) -> Expr:
        n = self.nrows
        if n != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        return normalize(self._det_raw())

    def _det_raw(self) -> Expr:
        n = self.nrows
        if n == 1:
            return self.rows[0][0]
        if n == 2:
            a, b = self.rows[0]
            c, d = self.rows[1]
            return a * d - b * c
        acc = ZERO
        for j in range(n):
            minor = ExprMatrix(
                [
                    [self.rows[i][k] for k in range(n) if k != j]
                    for i in range(1, n)
                ]
            )
            term = self.rows[0][j] * minor._det_raw()
            acc = acc + (term if j % 2 == 0 else -term)
        return acc

    def inverse(self) -> "ExprMatrix":
        """Exact inverse via adjugate over determinant."""
        n = self.nrows
        d = self.det()
        if is_zero(d):
            raise SingularGauge("matrix determinant normalizes to zero")
        if n == 1:
            return ExprMatrix([[normalize(1 / self.rows[0][0])]])
        cof = []
        for i in range(n):
            row = []
            for j in range(n):
                minor = ExprMatrix(
                    [
                        [self.rows[a][b] for b in range(n) if b != j]
                        for a in range(n) if a != i
                    ]
                )
                m = minor._det_raw()
                row.append(m if (i + j) % 2 == 0 else -m)
            cof.append(row)
        adj = ExprMatrix(cof).transpose()
        return adj.map(lambda e: normalize(e / d))

    def is_zero_matrix(self) -> bool:
        return all(is_zero(e) for row in self.rows for e in row)

    def equals(self, other: "ExprMatrix") -> bool:
        if self.nrows != other.nrows or self.ncols != other.ncols:
            return False
        return (self - other).is_zero_matrix()

    def __repr__(self):
        body = "; ".join(
            ", ".join(to_sexpr(normalize(e)) for e in row) for row in self.rows
        )
        return f"ExprMatrix[{body}]"


def matrix_commutator(a: ExprMatrix, b: ExprMatrix) -> ExprMatrix:
    return (a @ b) - (b @ a)


CONVENTION = "Xp=-AX"


@dataclass(frozen=True)
class LinearSystem:
    """First-order linear system ``X' = -A X`` with exact coefficients."""

    a: ExprMatrix
    table: DerivationTable = EMPTY_TABLE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.a.nrows != self.a.ncols:
            raise ValueError("system matrix must be square")
        object.__setattr__(self, "a", self.a.normalized())

    @property
    def n(self) -> int:
        return self.a.nrows

    @property
    def convention(self) -> str:
        return CONVENTION

    def rhs_matrix(self) -> ExprMatrix:
        """Matrix M of the flow form X' = M X (that is, -A)."""
        return self.a.scale(const(-1)).normalized()

    def flow_table(self, names: Sequence[str]) -> DerivationTable:
        """Extend the table with component symbols driven by the flow.

        Registering ``names[i]' = (-A z)_i`` lets first integrals and
        residuals be checked by plain differentiation.
        """
        if len(names) != self.n:
            raise ValueError("one name per component required")
        vec = [sym(name) for name in names]
        rhs = self.rhs_matrix().apply(vec)
        return self.table.extended({name: r for name, r in zip(names, rhs)})


def from_flow_matrix(m: ExprMatrix, table: DerivationTable = EMPTY_TABLE,
                     meta: Mapping | None = None) -> LinearSystem:
    """Ingest a system written as ``X' = M X`` (no leading minus)."""
    info = {"converted_from": "Xp=MX"}
    info.update(meta or {})
    return LinearSystem(m.scale(const(-1)), table, info)


class GaugeMatrix:
    """Invertible change of variables ``X = P Y`` with cached exact inverse."""

    __slots__ = ("p", "p_inv")

    def __init__(self, p: ExprMatrix, p_inv: ExprMatrix | None = None):
        self.p = p.normalized()
        self.p_inv = p_inv.normalized() if p_inv is not None else self.p.inverse()
        if not (self.p @ self.p_inv).normalized().equals(ExprMatrix.identity(p.nrows)):
            raise SingularGauge("supplied inverse does not invert the gauge matrix")

    @property
    def n(self) -> int:
        return self.p.nrows

    def inv(self) -> "GaugeMatrix":
        return GaugeMatrix(self.p_inv, self.p)


def gauge(system: LinearSystem, p: GaugeMatrix) -> LinearSystem:
    """Transform ``X' = -A X`` under ``X = P Y`` into ``Y' = -P[A] Y``.

    ``P[A] = P^{ -1} A P + P^{-1} P'``.  If X solves the input system,
    ``Y = P^{-1} X`` solves the result.
    """
    if p.n != system.n:
        raise ValueError("gauge size mismatch")
    a = system.a
    new_a = (p.p_inv @ a @ p.p) + (p.p_inv @ p.p.diff(system.table))
    meta = dict(system.meta)
    meta["gauged"] = True
    return LinearSystem(new_a.normalized(), system.table, meta)


def residual(system: LinearSystem, candidate: ExprMatrix) -> ExprMatrix:
    """Normalized ``candidate' + A . candidate``; all-zero certifies a solution."""
    return (candidate.diff(system.table) + (system.a @ candidate)).normalized()


# ---------------------------------------------------------------------------
# Second-order operator families  y'' + p y' + (q - m r) y = 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecondOrderFamily:
    """Operator family ``d2 + p d + (q - m r)`` with Wronskian datum w.

    ``w`` satisfies ``w' = p w`` (so ``p = w'/w``); the constructor
    checks this against the derivation table.  ``sqrt_r`` realizes the
    square root of r, defaulting to 1 when r is 1 and to a radical
    symbol otherwise.
    """

    p: Expr
    q: Expr
    r: Expr
    w: Expr
    table: DerivationTable
    m_name: str = "m"
    sqrt_r: Expr | None = None

    def __post_init__(self):
        if is_zero(self.r):
            raise ValueError("r must be nonzero")
        wp = differentiate(self.w, self.table)
        if not is_zero(self.p - wp / self.w):
            raise ValueError("p must equal w'/w under the derivation table")
        if self.sqrt_r is None:
            if equal(self.r, ONE):
                root: Expr = ONE
            else:
                root = Radical("sqrt_r", normalize(self.r))
            object.__setattr__(self, "sqrt_r", root)
        else:
            if not is_zero(self.sqrt_r * self.sqrt_r - self.r):
                raise ValueError("sqrt_r squared must equal r")

    @property
    def m(self) -> Param:
        return Param(self.m_name)

    def q_effective(self) -> Expr:
        """The zeroth-order coefficient ``q - m r`` with symbolic m."""
        return normalize(self.q - self.m * self.r)

    def with_q(self, new_q: Expr, table: DerivationTable | None = None) -> "SecondOrderFamily":
        return SecondOrderFamily(
            p=self.p,
            q=normalize(new_q),
            r=self.r,
            w=self.w,
            table=table if table is not None else self.table,
            m_name=self.m_name,
            sqrt_r=self.sqrt_r,
        )

    def solution_symbols(self, *names: str) -> tuple[list[tuple[Sym, Sym]], DerivationTable]:
        """Register abstract solutions with the companion rewrite.

        For each name ``y`` adds ``y' = y_p`` and
        ``y_p' = -p y_p - (q - m r) y``; returns the (y, y') node pairs
        and the extended table.
        """
        entries = {}
        pairs = []
        for name in names:
            y, yp = Sym(name), Sym(name + "_p")
            entries[name] = yp
            entries[name + "_p"] = -self.p * yp - self.q_effective() * y
            pairs.append((y, yp))
        return pairs, self.table.extended(entries)


def companion(family: SecondOrderFamily) -> LinearSystem:
    """Companion system for the family: ``A = A0 + m N``.

    ``A0 = [[0, -1], [q, p]]`` and ``N = [[0, 0], [-r, 0]]``; note that
    ``N @ N`` is the zero matrix.
    """
    m = family.m
    a = ExprMatrix(
        [
            [ZERO, const(-1)],
            [family.q - m * family.r, family.p],
        ]
    )
    return LinearSystem(a, family.table, {"form": "companion", "m": family.m_name})


def companion_matrices(family: SecondOrderFamily) -> tuple[ExprMatrix, ExprMatrix]:
    """The pair (A0, N) with companion matrix A0 + m N."""
    a0 = ExprMatrix([[ZERO, const(-1)], [family.q, family.p]])
    n = ExprMatrix([[ZERO, ZERO], [-family.r, ZERO]])
    return a0, n


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def system_to_json(system: LinearSystem) -> dict:
    return {
        "n": system.n,
        "convention": CONVENTION,
        "matrix": [[to_sexpr(e) for e in row] for row in system.a.rows],
        "table": {name: to_sexpr(e) for name, e in sorted(system.table.items())},
    }


def system_from_json(data: Mapping) -> LinearSystem:
    if data.get("convention") != CONVENTION:
        raise KitError(f"unsupported convention {data.get('convention')!r}")
    a = ExprMatrix([[parse_sexpr(s) for s in row] for row in data["matrix"]])
    table = DerivationTable({k: parse_sexpr(v) for k, v in data.get("table", {}).items()})
    return LinearSystem(a, table)


def system_to_json_text(system: LinearSystem) -> str:
    return json.dumps(system_to_json(system), indent=2, sort_keys=True)


def family_to_json(family: SecondOrderFamily) -> dict:
    return {
        "p": to_sexpr(normalize(family.p)),
        "q": to_sexpr(normalize(family.q)),
        "r": to_sexpr(normalize(family.r)),
        "w": to_sexpr(normalize(family.w)),
        "sqrt_r": to_sexpr(normalize(family.sqrt_r)),
        "m": family.m_name,
        "table": {name: to_sexpr(e) for name, e in sorted(family.table.items())},
    }


def family_from_json(data: Mapping) -> SecondOrderFamily:
    table = DerivationTable({k: parse_sexpr(v) for k, v in data.get("table", {}).items()})
    return SecondOrderFamily(
        p=parse_sexpr(data["p"]),
        q=parse_sexpr(data["q"]),
        r=parse_sexpr(data["r"]),
        w=parse_sexpr(data["w"]),
        table=table,
        m_name=data.get("m", "m"),
        sqrt_r=parse_sexpr(data["sqrt_r"]) if "sqrt_r" in data else None,
    )
