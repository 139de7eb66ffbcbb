"""Lifted Darboux transformations for second-symmetric-power and
orthogonal (so(3)) systems: the constant Q/S gauges, the diagonal
Delta-gauge, fundamental matrices, first integrals, and the Riccati
parametrization of orthogonal flows.

Two independent routes lift a second-order family to a 3x3 orthogonal
system.  The first conjugates the symmetric square of the companion
system by the constant matrix Q (solutions pick up a factor w, the
antiderivative datum of p); the second first rebalances the companion
state by Delta = diag(1, w) into a traceless system and conjugates its
symmetric square by the constant matrix S.  The routes are not
equivalent unless w = 1.

Every lifted transformation matrix here is *constructed* from the
functorial definitions (symmetric powers of the 2x2 gauge), and the
closed-form entry matrices are provided separately; tests pin their
agreement.  Orientation conventions are fixed by re-deriving each
conjugation identity symbolically, never by trusting a remembered
sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .expr import (
    DerivationTable,
    Expr,
    I,
    KitError,
    ONE,
    Sym,
    ZERO,
    as_expr,
    const,
    differentiate,
    equal,
    is_zero,
    normalize,
    param_coefficients,
    rat,
    sym,
)
from .linsys import (
    ExprMatrix,
    GaugeMatrix,
    LinearSystem,
    SecondOrderFamily,
    companion,
    gauge,
)
from .darboux import DarbouxSeed, darboux_gauge
from .sympow import sym_group, sym_system


class NotTraceless(KitError):
    """The 2x2 matrix handed to the orthogonal correspondence has trace != 0."""


class OmegaOneZero(KitError):
    """The Riccati leading coefficient vanishes; no linear form exists."""


class NotUnitNorm(KitError):
    """The orthogonal solution does not satisfy the unit quadratic invariant."""


# The two constant gauges and their exact inverses.
Q_GAUGE = ExprMatrix([[ONE, ZERO, const(-1)], [I, ZERO, I], [ZERO, const(-1), ZERO]])
Q_GAUGE_INV = ExprMatrix(
    [[rat(1, 2), -I / 2, ZERO], [ZERO, ZERO, const(-1)], [rat(-1, 2), -I / 2, ZERO]]
)
S_GAUGE = ExprMatrix([[ONE, ZERO, ONE], [ZERO, I, ZERO], [I, ZERO, -I]])
S_GAUGE_INV = ExprMatrix(
    [[rat(1, 2), ZERO, -I / 2], [ZERO, -I, ZERO], [rat(1, 2), ZERO, I / 2]]
)


def skew_matrix(f: Expr, g: Expr, h: Expr) -> ExprMatrix:
    """The matrix of ``Z -> Z x (f, g, h)``: rows (0, h, -g; -h, 0, f; g, -f, 0)."""
    return ExprMatrix([[ZERO, h, -as_expr(g)], [-as_expr(h), ZERO, f], [g, -as_expr(f), ZERO]])


@dataclass(frozen=True)
class OrthogonalSystem:
    """A 3x3 system with skew coefficient matrix, ``Z' = Z x Omega``.

    ``omega = (f, g, h)`` is the vector of the flow form
    ``Z' = skew(f, g, h) Z``; :meth:`system` converts to the internal
    ``X' = -A X`` convention with the conversion recorded in metadata.
    The quadratic form alpha^2 + beta^2 + gamma^2 is a first integral
    of any such flow (checked symbolically at construction).
    """

    f: Expr
    g: Expr
    h: Expr
    table: DerivationTable = field(default_factory=DerivationTable)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "f", normalize(self.f))
        object.__setattr__(self, "g", normalize(self.g))
        object.__setattr__(self, "h", normalize(self.h))
        # d/dx (a^2+b^2+c^2) along the flow vanishes identically
        drift = flow_derivative(self.system(), first_integral_orthogonal(),
                                ("alpha", "beta", "gamma"))
        if not is_zero(drift):
            raise KitError("quadratic invariant is not conserved; flow is not skew")

    @property
    def omega(self) -> tuple[Expr, Expr, Expr]:
        return (self.f, self.g, self.h)

    def skew(self) -> ExprMatrix:
        return skew_matrix(self.f, self.g, self.h)

    def system(self) -> LinearSystem:
        meta = {"converted_from": "Zp=ZxOmega", **self.meta}
        return LinearSystem(self.skew().scale(const(-1)), self.table, meta)

    def m_split(self, m_name: str) -> tuple[ExprMatrix, ExprMatrix]:
        """Split the internal coefficient matrix as base + m * perturbation."""
        base_rows, pert_rows = [], []
        for row in self.system().a.rows:
            base_row, pert_row = [], []
            for e in row:
                coeffs = param_coefficients(e, m_name)
                base_row.append(coeffs.get(0, ZERO))
                pert_row.append(coeffs.get(1, ZERO))
                if any(k > 1 for k in coeffs):
                    raise KitError("coefficient matrix is not affine in the parameter")
            base_rows.append(base_row)
            pert_rows.append(pert_row)
        return ExprMatrix(base_rows), ExprMatrix(pert_rows)


# ---------------------------------------------------------------------------
# The sl(2) <-> so(3) correspondence
# ---------------------------------------------------------------------------


def so3_from_sym2(c: ExprMatrix, table: DerivationTable | None = None,
                  meta: dict | None = None) -> OrthogonalSystem:
    """Orthogonal system matching a traceless 2x2 flow ``U' = C U``.

    ``C = (1/2) [[i h, g + i f], [-(g - i f), -i h]]``; conjugating the
    symmetric square of the flow by Q turns it into ``Z' = Z x (f,g,h)``.
    Exact inverse of :func:`sym2_from_so3`.
    """
    if not is_zero(c.trace()):
        raise NotTraceless("the 2x2 matrix must be traceless")
    f = normalize(-I * (c[0, 1] + c[1, 0]))
    g = normalize(c[0, 1] - c[1, 0])
    h = normalize(-2 * I * c[0, 0])
    return OrthogonalSystem(f, g, h, table or DerivationTable(), meta or {})


def sym2_from_so3(system: OrthogonalSystem) -> ExprMatrix:
    f, g, h = system.omega
    return ExprMatrix(
        [
            [I * h / 2, (g + I * f) / 2],
            [-(g - I * f) / 2, -I * h / 2],
        ]
    ).normalized()


def so3_vector_from_operator(p: Expr, q: Expr) -> tuple[Expr, Expr, Expr]:
    """Flow vector of the orthogonal system equivalent to ``y'' + p y' + q y``.

    Obtained by shifting the companion matrix to trace zero (which
    weights solutions by sqrt of the Wronskian datum) and applying
    :func:`so3_from_sym2`: ``(f, g, h) = (i(q - 1), q + 1, -i p)``.
    The sign of the third entry is forced by the conjugation identity.
    """
    return (normalize(I * (q - 1)), normalize(q + 1), normalize(-I * p))


def so3_system_first(family: SecondOrderFamily) -> OrthogonalSystem:
    """Q-route orthogonal lift of the family.

    Fundamental solutions are ``w * Q * Sym2(X)`` for X the companion
    fundamental matrix; the coefficient matrix is affine in m with the
    perturbation ``r * (0 0 -1; 0 0 i; 1 -i 0)`` in the internal
    convention.
    """
    f, g, h = so3_vector_from_operator(family.p, family.q_effective())
    meta = {"route": "first", "solution_scale": "w", "m": family.m_name}
    return OrthogonalSystem(f, g, h, family.table, meta)


def so3_system_second(family: SecondOrderFamily) -> OrthogonalSystem:
    """S-route orthogonal lift of the family.

    Fundamental solutions are ``S * Sym2(Delta X)`` with
    Delta = diag(1, w); no extra scaling is needed because the
    rebalanced companion system is already traceless.
    """
    q_eff = family.q_effective()
    w = family.w
    f = normalize(-(1 / w + w * q_eff))
    g = ZERO
    h = normalize(-I * (1 / w - w * q_eff))
    meta = {"route": "second", "solution_scale": "1", "m": family.m_name}
    return OrthogonalSystem(f, g, h, family.table, meta)


# ---------------------------------------------------------------------------
# Lifted transformation matrices
# ---------------------------------------------------------------------------


def delta_gauge(family: SecondOrderFamily) -> ExprMatrix:
    return ExprMatrix.diagonal([ONE, family.w])


def p1_matrix(family: SecondOrderFamily, seed: DarbouxSeed) -> ExprMatrix:
    """First lifted transformation: the symmetric square of the 2x2 gauge."""
    return sym_group(darboux_gauge(family, seed).p_m, 2)


def p1_factors(family: SecondOrderFamily, seed: DarbouxSeed) -> tuple[ExprMatrix, ExprMatrix]:
    g = darboux_gauge(family, seed)
    return sym_group(g.l_m, 2), sym_group(g.r_factor, 2)


def p1_explicit(family: SecondOrderFamily, seed: DarbouxSeed) -> ExprMatrix:
    """Closed-form entries of the first lifted transformation.

    The (2,1) and (3,2) signs follow from expanding
    ``Sym2((1/sqrt r)[[-theta0, 1], [nu, rho]])`` directly.
    """
    th, rho, nu, r = seed.theta0, seed.rho, seed.nu, family.r
    rows = [
        [th * th, -th, ONE],
        [-2 * th * nu, nu - th * rho, 2 * rho],
        [nu * nu, rho * nu, rho * rho],
    ]
    return ExprMatrix(rows).scale(1 / r).normalized()


def p2_matrix(family: SecondOrderFamily, seed: DarbouxSeed) -> ExprMatrix:
    """Second lifted transformation: Sym2 of the Delta-conjugated gauge."""
    d = delta_gauge(family)
    conj = (d @ darboux_gauge(family, seed).p_m @ d.inverse()).normalized()
    return sym_group(conj, 2)


def p2_factors(family: SecondOrderFamily, seed: DarbouxSeed) -> tuple[ExprMatrix, ExprMatrix]:
    g = darboux_gauge(family, seed)
    d = delta_gauge(family)
    left = sym_group((d @ g.l_m).normalized(), 2)
    right = sym_group((g.r_factor @ d.inverse()).normalized(), 2)
    return left, right


def p2_explicit(family: SecondOrderFamily, seed: DarbouxSeed) -> ExprMatrix:
    """Closed-form entries of the second lifted transformation.

    Orientation in w is the one produced by conjugating with
    Delta = diag(1, w); it reduces to :func:`p1_explicit` at w = 1.
    """
    th, rho, nu, r, w = seed.theta0, seed.rho, seed.nu, family.r, family.w
    rows = [
        [th * th, -th / w, 1 / (w * w)],
        [-2 * w * th * nu, nu - th * rho, 2 * rho / w],
        [w * w * nu * nu, w * rho * nu, rho * rho],
    ]
    return ExprMatrix(rows).scale(1 / r).normalized()


def p1_gauge(family: SecondOrderFamily, seed: DarbouxSeed) -> GaugeMatrix:
    """P1 as a gauge with its inverse built by functoriality.

    ``Sym2`` turns matrix inversion into inversion of the underlying
    2x2 gauge, which is far cheaper than a symbolic 3x3 adjugate.
    """
    p_m = darboux_gauge(family, seed).p_m
    return GaugeMatrix(sym_group(p_m, 2), sym_group(p_m.inverse(), 2))


def p2_gauge(family: SecondOrderFamily, seed: DarbouxSeed) -> GaugeMatrix:
    d = delta_gauge(family)
    d_inv = d.inverse()
    p_m = darboux_gauge(family, seed).p_m
    conj = (d @ p_m @ d_inv).normalized()
    conj_inv = (d @ p_m.inverse() @ d_inv).normalized()
    return GaugeMatrix(sym_group(conj, 2), sym_group(conj_inv, 2))


def t1_gauge(family: SecondOrderFamily, seed: DarbouxSeed) -> GaugeMatrix:
    p1 = p1_gauge(family, seed)
    return GaugeMatrix(
        (Q_GAUGE @ p1.p @ Q_GAUGE_INV).normalized(),
        (Q_GAUGE @ p1.p_inv @ Q_GAUGE_INV).normalized(),
    )


def t2_gauge(family: SecondOrderFamily, seed: DarbouxSeed) -> GaugeMatrix:
    p2 = p2_gauge(family, seed)
    return GaugeMatrix(
        (S_GAUGE @ p2.p @ S_GAUGE_INV).normalized(),
        (S_GAUGE @ p2.p_inv @ S_GAUGE_INV).normalized(),
    )


def t1_matrix(family: SecondOrderFamily, seed: DarbouxSeed) -> ExprMatrix:
    """First orthogonal transformation ``Q P1 Q^{-1}``."""
    return (Q_GAUGE @ p1_matrix(family, seed) @ Q_GAUGE_INV).normalized()


def t1_factors(family: SecondOrderFamily, seed: DarbouxSeed) -> tuple[ExprMatrix, ExprMatrix]:
    left, right = p1_factors(family, seed)
    return (Q_GAUGE @ left).normalized(), (right @ Q_GAUGE_INV).normalized()


def t1_explicit(family: SecondOrderFamily, seed: DarbouxSeed) -> ExprMatrix:
    th, rho, nu, r = seed.theta0, seed.rho, seed.nu, family.r
    th2, rho2, nu2 = th * th, rho * rho, nu * nu
    rows = [
        [-nu2 + rho2 + th2 - 1, I * (nu2 + rho2 - th2 - 1), 2 * (nu * rho + th)],
        [I * (nu2 - rho2 + th2 - 1), nu2 + rho2 + th2 + 1, 2 * I * (th - nu * rho)],
        [2 * (nu * th + rho), -2 * I * (nu * th - rho), 2 * (nu - th * rho)],
    ]
    return ExprMatrix(rows).scale(1 / (2 * r)).normalized()


def t2_matrix(family: SecondOrderFamily, seed: DarbouxSeed) -> ExprMatrix:
    """Second orthogonal transformation ``S P2 S^{-1}``."""
    return (S_GAUGE @ p2_matrix(family, seed) @ S_GAUGE_INV).normalized()


def t2_factors(family: SecondOrderFamily, seed: DarbouxSeed) -> tuple[ExprMatrix, ExprMatrix]:
    left, right = p2_factors(family, seed)
    return (S_GAUGE @ left).normalized(), (right @ S_GAUGE_INV).normalized()


def t2_explicit(family: SecondOrderFamily, seed: DarbouxSeed) -> ExprMatrix:
    """Closed-form entries of the second orthogonal transformation.

    The w-orientation follows :func:`p2_explicit` (conjugation by
    Delta = diag(1, w)); at w = 1 this coincides with t1 conjugated by
    S instead of Q.
    """
    th, rho, nu, r, w = seed.theta0, seed.rho, seed.nu, family.r, family.w
    th2, rho2, nu2, w2 = th * th, rho * rho, nu * nu, w * w
    rows = [
        [
            1 / w2 + rho2 + th2 + nu2 * w2,
            2 * I * (th / w - w * nu * rho),
            I * (1 / w2 + rho2 - th2 - nu2 * w2),
        ],
        [
            2 * I * (rho / w - w * nu * th),
            2 * (nu - rho * th),
            -2 * (rho / w + w * nu * th),
        ],
        [
            I * (1 / w2 - rho2 + th2 - nu2 * w2),
            -2 * (th / w + w * nu * rho),
            -1 / w2 + rho2 + th2 - nu2 * w2,
        ],
    ]
    return ExprMatrix(rows).scale(1 / (2 * r)).normalized()


# ---------------------------------------------------------------------------
# Fundamental matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FundamentalPair:
    matrix: ExprMatrix
    system: LinearSystem


@dataclass(frozen=True)
class FundamentalSet:
    """Six fundamental matrices with the systems they solve.

    Built over abstract solution symbols with the companion rewrite;
    each pair satisfies ``matrix' + A matrix == 0`` exactly.
    """

    table: DerivationTable
    companion: FundamentalPair
    sym2: FundamentalPair
    orthogonal: FundamentalPair
    balanced: FundamentalPair
    balanced_sym2: FundamentalPair
    orthogonal2: FundamentalPair

    def pairs(self) -> dict[str, FundamentalPair]:
        return {
            "companion": self.companion,
            "sym2": self.sym2,
            "orthogonal": self.orthogonal,
            "balanced": self.balanced,
            "balanced_sym2": self.balanced_sym2,
            "orthogonal2": self.orthogonal2,
        }


def fundamental_matrices(family: SecondOrderFamily,
                         names: Sequence[str] = ("y1", "y2")) -> FundamentalSet:
    (pair1, pair2), table = family.solution_symbols(*names)
    y1, y1p = pair1
    y2, y2p = pair2
    w = family.w

    x_mat = ExprMatrix([[y1, y2], [y1p, y2p]])
    x_sys = LinearSystem(companion(family).a, table)

    y_mat = sym_group(x_mat, 2)
    y_sys = sym_system(x_sys, 2)

    z_mat = (Q_GAUGE @ y_mat).scale(w).normalized()
    z_sys = LinearSystem(so3_system_first(family).system().a, table,
                         {"route": "first"})

    d = delta_gauge(family)
    x1_mat = (d @ x_mat).normalized()
    x1_sys = gauge(x_sys, GaugeMatrix(d.inverse(), d))

    y1_mat = sym_group(x1_mat, 2)
    y1_sys = sym_system(x1_sys, 2)

    z1_mat = (S_GAUGE @ y1_mat).normalized()
    z1_sys = LinearSystem(so3_system_second(family).system().a, table,
                          {"route": "second"})

    return FundamentalSet(
        table=table,
        companion=FundamentalPair(x_mat, x_sys),
        sym2=FundamentalPair(y_mat, y_sys),
        orthogonal=FundamentalPair(z_mat, z_sys),
        balanced=FundamentalPair(x1_mat, x1_sys),
        balanced_sym2=FundamentalPair(y1_mat, y1_sys),
        orthogonal2=FundamentalPair(z1_mat, z1_sys),
    )


# ---------------------------------------------------------------------------
# First integrals
# ---------------------------------------------------------------------------


def first_integral_orthogonal(names: Sequence[str] = ("alpha", "beta", "gamma")) -> Expr:
    a, b, c = (Sym(n) for n in names)
    return a * a + b * b + c * c


def first_integral_sym2(w: Expr | None = None,
                        names: Sequence[str] = ("z1", "z2", "z3")) -> Expr:
    """``w^2 (4 z1 z3 - z2^2)``, conserved along any lifted sym2 flow."""
    z1, z2, z3 = (Sym(n) for n in names)
    w = w if w is not None else sym("w")
    return w * w * (4 * z1 * z3 - z2 * z2)


def flow_derivative(system: LinearSystem, integral: Expr,
                    names: Sequence[str]) -> Expr:
    """Symbolic derivative of ``integral`` along trajectories of the system."""
    table = system.flow_table(list(names))
    return differentiate(integral, table)


# ---------------------------------------------------------------------------
# Riccati parametrization of orthogonal flows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiccatiData:
    """Riccati reduction ``theta' = omega0 + mu theta + omega1 theta^2``
    of an orthogonal flow, with the associated linear second-order form.

    ``omega0 = (g - i f)/2``, ``omega1 = (g + i f)/2``, ``mu = -i h``.
    Under ``u = -(1/omega1) y'/y``, solutions of the Riccati equation
    are logarithmic-derivative data of
    ``y'' - (mu + omega1'/omega1) y' + omega0 omega1 y = 0``; the
    coefficient of y' is forced by the classical change of variables.
    """

    omega0: Expr
    omega1: Expr
    mu: Expr
    table: DerivationTable

    def rhs(self, theta: Expr) -> Expr:
        return normalize(self.omega0 + self.mu * theta + self.omega1 * theta * theta)

    def linear_form(self) -> tuple[Expr, Expr]:
        """Coefficients (b, c) of ``y'' + b y' + c y = 0``."""
        if is_zero(self.omega1):
            raise OmegaOneZero("omega1 normalizes to zero; no linear form")
        d_omega1 = differentiate(self.omega1, self.table)
        b = normalize(-self.mu - d_omega1 / self.omega1)
        c = normalize(self.omega0 * self.omega1)
        return b, c


def so3_to_riccati(system: OrthogonalSystem) -> RiccatiData:
    f, g, h = system.omega
    return RiccatiData(
        omega0=normalize((g - I * f) / 2),
        omega1=normalize((g + I * f) / 2),
        mu=normalize(-I * h),
        table=system.table,
    )


def riccati_parametrize(u: Expr, v: Expr) -> tuple[Expr, Expr, Expr]:
    """Unit-norm orthogonal solution from two distinct Riccati solutions.

    ``alpha = (1 - u v)/(u - v)``, ``beta = i (1 + u v)/(u - v)``,
    ``gamma = (u + v)/(u - v)``; alpha^2 + beta^2 + gamma^2 == 1 is a
    polynomial identity.
    """
    denom = u - v
    alpha = normalize((1 - u * v) / denom)
    beta = normalize(I * (1 + u * v) / denom)
    gamma = normalize((u + v) / denom)
    return alpha, beta, gamma


def riccati_invert(alpha: Expr, beta: Expr, gamma: Expr) -> tuple[Expr, Expr]:
    """Recover (u, v) from a unit-norm orthogonal solution.

    Requires alpha^2 + beta^2 + gamma^2 == 1 exactly; behavior for
    non-unit solutions is undefined, so they are rejected.
    """
    if not equal(alpha * alpha + beta * beta + gamma * gamma, ONE):
        raise NotUnitNorm("inversion requires the unit quadratic invariant")
    u = normalize((alpha + I * beta) / (1 - gamma))
    v = normalize(-(1 - gamma) / (alpha - I * beta))
    return u, v
