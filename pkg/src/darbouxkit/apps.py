"""Frame and rigid-solid applications of the orthogonal lifts.

Maps curvature/torsion data (moving frames) and planar angular-velocity
data (the Poisson kinematic equation) onto the two orthogonal routes,
producing the second-order family, the parametric orthogonal system,
and the fundamental matrix for each; builds the perturbed families and
their transformation chains.

Both applications restrict to r = 1.  The frame antiderivative datum
``exp(i * integral of kappa)`` is a registered symbol with derivative
``i kappa w``; no symbolic integration is attempted because only the
logarithmic derivative ever enters a formula.
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
    is_zero,
    normalize,
    sym,
)
from .linsys import ExprMatrix, SecondOrderFamily
from .darboux import DarbouxSeed, attach_generic_seed, darboux_potential, make_seed
from .tensordt import (
    FundamentalPair,
    OrthogonalSystem,
    fundamental_matrices,
    so3_system_first,
    so3_system_second,
    t1_matrix,
    t2_matrix,
)


class RouteConstraintViolated(KitError):
    """The data does not satisfy the route's defining identity."""


class RouteMismatch(KitError):
    """A perturbation shape was requested on the wrong route."""


ROUTE_Q = "Q"
ROUTE_S = "S"
FRAME_DATUM = "w_frame"


@dataclass(frozen=True)
class FrenetData:
    """Curvature and torsion of a space curve with a route choice.

    The Q route only represents frames with ``tau == -2i`` (the
    degenerate coupled case); the S route handles any frame with
    ``i kappa - tau`` nonzero.
    """

    kappa: Expr
    tau: Expr
    route: str
    table: DerivationTable = field(default_factory=DerivationTable)

    def __post_init__(self):
        if self.route not in (ROUTE_Q, ROUTE_S):
            raise ValueError(f"unknown route {self.route!r}")
        if self.route == ROUTE_Q and not is_zero(self.tau + 2 * I):
            raise RouteConstraintViolated("Q route requires tau == -2i")
        if self.route == ROUTE_S and is_zero(I * self.kappa - self.tau):
            raise RouteConstraintViolated("S route requires i*kappa - tau != 0")


@dataclass(frozen=True)
class RigidData:
    """Planar angular-velocity components with a route choice.

    The Q route represents the coupled case ``i omega1 + omega2 == 2``;
    the S route represents motion on a line (``omega2 == 0``) with
    ``omega1`` nonzero.
    """

    omega1: Expr
    omega2: Expr
    route: str
    table: DerivationTable = field(default_factory=DerivationTable)

    def __post_init__(self):
        if self.route not in (ROUTE_Q, ROUTE_S):
            raise ValueError(f"unknown route {self.route!r}")
        if self.route == ROUTE_Q and not is_zero(I * self.omega1 + self.omega2 - 2):
            raise RouteConstraintViolated("Q route requires i*omega1 + omega2 == 2")
        if self.route == ROUTE_S:
            if not is_zero(self.omega2):
                raise RouteConstraintViolated("S route requires omega2 == 0")
            if is_zero(self.omega1):
                raise RouteConstraintViolated("S route requires omega1 != 0")


@dataclass(frozen=True)
class FrameApplication:
    """One application instance: family, orthogonal system, fundamental pair."""

    route: str
    family: SecondOrderFamily
    orthogonal: OrthogonalSystem
    fundamental: FundamentalPair
    table: DerivationTable


def _application(route: str, family: SecondOrderFamily) -> FrameApplication:
    fset = fundamental_matrices(family)
    if route == ROUTE_Q:
        ortho = so3_system_first(family)
        pair = fset.orthogonal
    else:
        ortho = so3_system_second(family)
        pair = fset.orthogonal2
    return FrameApplication(route, family, ortho, pair, fset.table)


def frenet_family(data: FrenetData) -> FrameApplication:
    """Second-order family behind the frame equations, on either route.

    Q route: ``y'' + i kappa y' - y = 0`` with the registered frame
    datum; S route: ``y'' - (eta'/eta) y' + (kappa^2 + tau^2)/4 y = 0``
    with ``eta = i kappa - tau`` and ``w = 2/eta``.  The orthogonal
    system's flow vector reproduces ``(tau, 0, kappa)`` at m = 0.
    """
    if data.route == ROUTE_Q:
        w = Sym(FRAME_DATUM)
        table = data.table.extended({FRAME_DATUM: I * data.kappa * w})
        family = SecondOrderFamily(
            p=normalize(I * data.kappa), q=normalize(as_expr(-1)), r=ONE,
            w=w, table=table,
        )
    else:
        eta = normalize(I * data.kappa - data.tau)
        w = normalize(2 / eta)
        family = SecondOrderFamily(
            p=normalize(-_log_derivative(eta, data.table)),
            q=normalize((data.kappa ** 2 + data.tau ** 2) / 4),
            r=ONE, w=w, table=data.table,
        )
    return _application(data.route, family)


def rigid_family(data: RigidData) -> FrameApplication:
    """Second-order family behind the Poisson kinematic equation.

    Q route: ``y'' + (omega2 - 1) y = 0`` with w = 1; S route:
    ``y'' - (omega1'/omega1) y' + omega1^2/4 y = 0`` with
    ``w = -2/omega1``.  The orthogonal flow vector reproduces
    ``(omega1, omega2, 0)`` at m = 0.
    """
    if data.route == ROUTE_Q:
        family = SecondOrderFamily(
            p=ZERO, q=normalize(data.omega2 - 1), r=ONE, w=ONE, table=data.table
        )
    else:
        family = SecondOrderFamily(
            p=normalize(-_log_derivative(data.omega1, data.table)),
            q=normalize(data.omega1 ** 2 / 4),
            r=ONE, w=normalize(-2 / data.omega1), table=data.table,
        )
    return _application(data.route, family)


def _log_derivative(e: Expr, table: DerivationTable) -> Expr:
    from .expr import differentiate

    return normalize(differentiate(e, table) / e)


def perturbed_system(app: FrameApplication, route: str) -> OrthogonalSystem:
    """The parametric orthogonal family of the application.

    ``route`` must match the application's route: the perturbation
    shapes differ (``r (0 0 -1; 0 0 i; 1 -i 0)`` on the Q route versus
    ``w r (0 i 0; -i 0 -1; 0 1 0)`` on the S route) and mixing them
    silently would corrupt every chain step.
    """
    if route != app.route:
        raise RouteMismatch(f"application uses route {app.route!r}, not {route!r}")
    return app.orthogonal


@dataclass(frozen=True)
class ChainLink:
    family: SecondOrderFamily
    orthogonal: OrthogonalSystem
    seed: DarbouxSeed | None
    transform: ExprMatrix | None


def application_chain(
    app: FrameApplication,
    seeds: Sequence[Expr] | str,
    k: int,
) -> list[ChainLink]:
    """Iterate the orthogonal transformation ``k`` times along a route.

    ``seeds`` is one log-derivative expression per step (each must
    solve the current step's scalar equation at parameter value zero),
    or the string "generic" to adjoin Riccati-certified seed symbols.
    Each link records the transformation matrix that leaves it; the Q
    route uses the Q-conjugated lift, the S route the S-conjugated one.
    """
    if k < 0:
        raise ValueError("chain length must be nonnegative")
    generic = isinstance(seeds, str)
    if generic and seeds != "generic":
        raise ValueError("string seed spec must be 'generic'")
    if not generic and k > len(seeds):
        raise ValueError("not enough seeds for the requested chain length")
    links: list[ChainLink] = []
    family = app.family
    lift = so3_system_first if app.route == ROUTE_Q else so3_system_second
    transform_of = t1_matrix if app.route == ROUTE_Q else t2_matrix
    for idx in range(k):
        if generic:
            family, seed = attach_generic_seed(family, name=f"theta0_{idx}")
        else:
            seed = make_seed(family, seeds[idx])
        links.append(
            ChainLink(family, lift(family), seed, transform_of(family, seed))
        )
        family = darboux_potential(family, seed)
    links.append(ChainLink(family, lift(family), None, None))
    return links
