"""The classical Darboux transformation as potential map, solution map,
and factored gauge matrix, plus chain iteration.

Given the family ``y'' + p y' + (q - m r) y = 0`` and a seed
``theta0 = y0'/y0`` built from a solution at parameter value ``level``
(zero in the classical statement), the transformation produces a family
with the same p, r, and m-dependence and a new potential ``q + q0``.
The parameter stays symbolic throughout: the gauge matrix degenerates
exactly at ``m = level`` (its determinant is ``-(m - level)``), so
specialization happens only at evaluation time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .expr import (
    DerivationTable,
    Expr,
    KitError,
    Sym,
    ZERO,
    as_expr,
    differentiate,
    is_zero,
    normalize,
)
from .linsys import (
    ExprMatrix,
    GaugeMatrix,
    LinearSystem,
    SecondOrderFamily,
    companion,
    gauge,
)


class SeedNotSolution(KitError):
    """The candidate seed fails its Riccati certificate."""


@dataclass(frozen=True)
class DarbouxSeed:
    """Seed data for one transformation step.

    ``theta0`` is the logarithmic derivative of a solution of the family
    at parameter value ``level``; the certificate
    ``theta0' = -(q - level*r) - p*theta0 - theta0^2`` is checked at
    construction.  ``rho = -theta0 - p - r'/(2r)`` and
    ``nu = (m - level)*r - theta0*rho`` are the derived quantities that
    populate every transformation matrix.
    """

    theta0: Expr
    rho: Expr
    nu: Expr
    level: Expr


def riccati_defect(family: SecondOrderFamily, theta0: Expr, level: Expr = ZERO) -> Expr:
    """Normalized ``theta0' + (q - level*r) + p*theta0 + theta0^2``."""
    d = differentiate(theta0, family.table)
    q_eff = family.q - as_expr(level) * family.r
    return normalize(d + q_eff + family.p * theta0 + theta0 * theta0)


def make_seed(family: SecondOrderFamily, theta0: Expr, level: Expr = ZERO) -> DarbouxSeed:
    theta0 = normalize(theta0)
    level = normalize(as_expr(level))
    defect = riccati_defect(family, theta0, level)
    if not is_zero(defect):
        raise SeedNotSolution(
            "seed fails the Riccati certificate; defect normalizes to "
            + repr(defect)
        )
    r_hat = differentiate(family.r, family.table) / (2 * family.r)
    rho = normalize(-theta0 - family.p - r_hat)
    nu = normalize((family.m - level) * family.r - theta0 * rho)
    return DarbouxSeed(theta0=theta0, rho=rho, nu=nu, level=level)


def auto_level_seed(family: SecondOrderFamily, theta0: Expr) -> DarbouxSeed:
    """Seed from theta0 alone, solving for the parameter value it certifies.

    ``level = (theta0' + q + p theta0 + theta0^2)/r`` must be free of
    the variable; this recovers seeds taken anywhere in the family, not
    just at parameter value zero (spectra shift along chains).
    """
    from .expr import depends_on_x

    theta0 = normalize(theta0)
    defect0 = riccati_defect(family, theta0, ZERO)
    level = normalize(defect0 / family.r)
    if depends_on_x(level):
        raise SeedNotSolution(
            "theta0 does not certify any parameter value; residual "
            + repr(defect0)
        )
    return make_seed(family, theta0, level)


def attach_generic_seed(
    family: SecondOrderFamily, name: str = "theta0", level: Expr = ZERO
) -> tuple[SecondOrderFamily, DarbouxSeed]:
    """Adjoin a fresh symbol certified by the Riccati rewrite.

    The returned family carries the extended derivation table, so the
    transformed potential remains differentiable.
    """
    theta = Sym(name)
    if name in family.table:
        raise KitError(f"symbol {name!r} already has a table entry")
    q_eff = family.q - as_expr(level) * family.r
    entry = normalize(-q_eff - family.p * theta - theta * theta)
    table = family.table.extended({name: entry})
    fam = SecondOrderFamily(
        p=family.p, q=family.q, r=family.r, w=family.w,
        table=table, m_name=family.m_name, sqrt_r=family.sqrt_r,
    )
    return fam, make_seed(fam, theta, level)


def potential_shift(family: SecondOrderFamily, seed: DarbouxSeed) -> Expr:
    """The additive change ``q0`` of the potential.

    With ``rh = r'/(2r)``:

        q0 = 2*theta0' + rh' + p' - rh*(rh + p + 2*theta0)

    This is the expansion of the classical closed form
    ``q~ = u * (p/u - (1/u)')'`` with ``u = y0*sqrt(r)``; see
    ``potential_shift_compact`` for that route.
    """
    table = family.table
    theta0 = seed.theta0
    r_hat = normalize(differentiate(family.r, table) / (2 * family.r))
    q0 = (
        2 * differentiate(theta0, table)
        + differentiate(r_hat, table)
        + differentiate(family.p, table)
        - r_hat * (r_hat + family.p + 2 * theta0)
    )
    return normalize(q0)


def potential_compact(
    family: SecondOrderFamily, seed: DarbouxSeed, y0_name: str = "_y0_compact"
) -> Expr:
    """The transformed potential via ``u*(p/u - (1/u)')'`` with ``u = y0*sqrt(r)``.

    A scratch symbol realizes y0 through ``y0' = theta0*y0``; the result
    is independent of it.  Useful as a cross-check of potential_shift.
    """
    y0 = Sym(y0_name)
    table = family.table.extended({y0_name: seed.theta0 * y0})
    u = y0 * family.sqrt_r
    inner = normalize(family.p / u - differentiate(normalize(1 / u), table))
    return normalize(u * differentiate(inner, table))


def darboux_potential(family: SecondOrderFamily, seed: DarbouxSeed) -> SecondOrderFamily:
    """Transformed family: same p, r, m-dependence, potential ``q + q0``."""
    q0 = potential_shift(family, seed)
    return family.with_q(normalize(family.q + q0))


def darboux_solution(
    family: SecondOrderFamily,
    seed: DarbouxSeed,
    y: Expr,
    table: DerivationTable | None = None,
) -> Expr:
    """Map a solution ``y`` of the family to ``(y' - theta0 y)/sqrt(r)``.

    ``y`` is usually an abstract solution symbol registered via
    ``family.solution_symbols``; the result then has residual zero under
    the transformed operator, for symbolic ``m != level``.  The seed's
    own solution maps to zero.
    """
    table = table if table is not None else family.table
    yprime = differentiate(y, table)
    return normalize((yprime - seed.theta0 * y) / family.sqrt_r)


@dataclass(frozen=True)
class DarbouxGauge:
    """The gauge matrix of the transformation with its factorization.

    ``p_m = l_m @ r_factor`` exactly;
    ``p_m = (1/sqrt(r)) [[-theta0, 1], [nu, rho]]`` has determinant
    ``-(m - level)``.  New solutions arise as ``X~ = p_m X``; in the
    ``X = P Y`` gauge convention the companion system of the transformed
    family is ``gauge(companion(family), inverse of p_m)``.
    """

    p_m: ExprMatrix
    l_m: ExprMatrix
    r_factor: ExprMatrix


def darboux_gauge(family: SecondOrderFamily, seed: DarbouxSeed) -> DarbouxGauge:
    s = family.sqrt_r
    theta0, rho, nu = seed.theta0, seed.rho, seed.nu
    p_m = ExprMatrix([[-theta0 / s, 1 / s], [nu / s, rho / s]])
    l_m = ExprMatrix([[ZERO, 1], [(family.m - seed.level) * family.r, rho]])
    r_factor = ExprMatrix([[1 / s, ZERO], [-theta0 / s, 1 / s]])
    return DarbouxGauge(
        p_m=p_m.normalized(), l_m=l_m.normalized(), r_factor=r_factor.normalized()
    )


def transformed_companion(family: SecondOrderFamily, seed: DarbouxSeed) -> LinearSystem:
    """Companion system of the transformed family obtained by gauging.

    Must coincide exactly with ``companion(darboux_potential(...))``;
    the pair is the double-entry check on the whole construction.
    """
    g = darboux_gauge(family, seed)
    return gauge(companion(family), GaugeMatrix(g.p_m).inv())


@dataclass(frozen=True)
class ChainStep:
    family: SecondOrderFamily
    seed: DarbouxSeed | None


def darboux_chain(
    family: SecondOrderFamily,
    seeds: Sequence[Expr | tuple[Expr, Expr]],
    k: int,
) -> list[ChainStep]:
    """Iterate the transformation ``k`` times.

    ``seeds[i]`` certifies step i: either a theta0 expression (level 0)
    or a ``(theta0, level)`` pair for a seed taken at a nonzero
    parameter value.  Returns k+1 steps; step 0 is the input family and
    each step records the seed that leaves it.  Raises SeedNotSolution
    with the failing index.
    """
    if k < 0:
        raise ValueError("chain length must be nonnegative")
    if k > len(seeds):
        raise ValueError("not enough seeds for the requested chain length")
    steps: list[ChainStep] = []
    current = family
    for idx in range(k):
        spec = seeds[idx]
        theta0, level = spec if isinstance(spec, tuple) else (spec, ZERO)
        try:
            seed = make_seed(current, theta0, level)
        except SeedNotSolution as exc:
            raise SeedNotSolution(f"chain step {idx}: {exc}") from exc
        steps.append(ChainStep(current, seed))
        current = darboux_potential(current, seed)
    steps.append(ChainStep(current, None))
    return steps
