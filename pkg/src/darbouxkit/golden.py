"""Shipped verification suite.

Named checks re-derive the package's core identities (symbolically
where exact, numerically through the RK4 oracle elsewhere) and report
machine-readable results.  Sampled checks draw from a seeded generator
so runs are reproducible; the seed is recorded in every report.

Report schema: {"check", "max_residual", "tolerance", "pass"} plus
informational extras ("mode" is "max" when the measurement must stay
below tolerance, "min" when it must exceed it, as in mutation checks).
"""

from __future__ import annotations

import math
from fractions import Fraction
from random import Random
from typing import Callable, Iterable

from .expr import (
    Const,
    DerivationTable,
    GaussRat,
    I,
    ONE,
    Sym,
    X,
    ZERO,
    const,
    differentiate,
    is_zero,
    normalize,
    substitute,
    sym,
    symbol_tower,
)
from .linsys import (
    ExprMatrix,
    GaugeMatrix,
    LinearSystem,
    SecondOrderFamily,
    companion,
    gauge,
    residual,
)
from .sympow import sym_group, sym_lie, sym_system
from .darboux import (
    attach_generic_seed,
    darboux_gauge,
    darboux_potential,
    darboux_solution,
    make_seed,
    potential_compact,
    potential_shift,
    transformed_companion,
)
from .tensordt import (
    OrthogonalSystem,
    first_integral_orthogonal,
    first_integral_sym2,
    flow_derivative,
    fundamental_matrices,
    p1_explicit,
    p1_factors,
    p1_gauge,
    p1_matrix,
    p2_explicit,
    p2_matrix,
    riccati_invert,
    riccati_parametrize,
    so3_system_first,
    so3_to_riccati,
    t1_explicit,
    t1_matrix,
    t2_explicit,
    t2_matrix,
)
from .susyqm import (
    hermite,
    matrix_formalism,
    oscillator_states,
    partner_potentials,
)
from .apps import FrenetData, RigidData, frenet_family, rigid_family
from .numverify import (
    companion_solution_grid,
    convergence_ratio,
    drift,
    integrate,
    residual_sweep,
)

DEFAULT_SEED = 20260810


class VerifyConfig:
    """Numeric knobs for the sampled/integrated checks.

    ``tolerance`` overrides the 1e-8 pass bound of the numeric checks
    (exactness checks and the mutation floor stay pinned); ``step`` and
    ``interval`` control every integration.
    """

    __slots__ = ("step", "interval", "tolerance")

    def __init__(self, step: float = 1e-3,
                 interval: tuple[float, float] = (0.0, 1.0),
                 tolerance: float = 1e-8):
        if tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if step <= 0:
            raise ValueError("step must be positive")
        self.step = step
        self.interval = interval
        self.tolerance = tolerance


DEFAULT_CONFIG = VerifyConfig()


def _report(check: str, value: float, tolerance: float, mode: str = "max",
            **extra) -> dict:
    ok = value >= tolerance if mode == "min" else value <= tolerance
    out = {
        "check": check,
        "max_residual": value,
        "tolerance": tolerance,
        "pass": bool(ok),
        "mode": mode,
    }
    out.update(extra)
    return out


def _exact(check: str, holds: bool, **extra) -> dict:
    return _report(check, 0.0 if holds else 1.0, 0.0, **extra)


def _generic_family() -> SecondOrderFamily:
    entries: dict = {}
    for base in ("p", "q", "r"):
        entries.update(symbol_tower(base, 6))
    entries["w"] = sym("p") * sym("w")
    return SecondOrderFamily(
        p=sym("p"), q=sym("q"), r=sym("r"), w=sym("w"),
        table=DerivationTable(entries),
    )


def _oscillator() -> SecondOrderFamily:
    return SecondOrderFamily(
        p=ZERO, q=normalize(-(X ** 2) + 1), r=ONE, w=ONE, table=DerivationTable()
    )


def _random_matrix(rng: Random, n: int = 2) -> ExprMatrix:
    return ExprMatrix(
        [
            [Const(GaussRat(Fraction(rng.randint(-3, 3), rng.choice((1, 2))))) for _ in range(n)]
            for _ in range(n)
        ]
    )


# -- individual checks --------------------------------------------------------


def check_rk4_closed_form(seed: int, config: VerifyConfig) -> dict:
    fam = SecondOrderFamily(p=ZERO, q=ONE, r=ONE, w=ONE, table=DerivationTable())
    x0, x1 = config.interval
    traj = integrate(companion(fam), [1.0, 0.0], config.interval, config.step, {"m": 0})
    end = traj.endpoint()
    exact = [math.cos(x1 - x0), -math.sin(x1 - x0)]
    err = max(abs(end[0] - exact[0]), abs(end[1] - exact[1]))
    return _report("rk4-closed-form", float(err), 1e-10)


def check_rk4_order(seed: int, config: VerifyConfig) -> dict:
    fam = SecondOrderFamily(p=ZERO, q=ONE, r=ONE, w=ONE, table=DerivationTable())
    x0, x1 = config.interval
    ratio = convergence_ratio(
        companion(fam), [1.0, 0.0], [math.cos(x1 - x0), -math.sin(x1 - x0)],
        config.interval, 1e-2, {"m": 0},
    )
    return _report("rk4-order", abs(ratio - 16.0), 4.0, ratio=ratio)


def check_darboux_covariance(seed: int, config: VerifyConfig) -> dict:
    fam, sd = attach_generic_seed(_generic_family())
    (pair,), table = fam.solution_symbols("ym")
    ym, _ = pair
    new_fam = darboux_potential(fam, sd)
    ytilde = darboux_solution(fam, sd, ym, table)
    d1 = differentiate(ytilde, table)
    d2 = differentiate(d1, table)
    res = normalize(d2 + new_fam.p * d1 + new_fam.q_effective() * ytilde)
    forms_agree = is_zero(
        normalize(fam.q + potential_shift(fam, sd)) - potential_compact(fam, sd)
    )
    return _exact("darboux-covariance", is_zero(res) and forms_agree)


def check_darboux_gauge(seed: int, config: VerifyConfig) -> dict:
    fam, sd = attach_generic_seed(_generic_family())
    g = darboux_gauge(fam, sd)
    ok = g.p_m.equals((g.l_m @ g.r_factor).normalized())
    ok = ok and is_zero(g.p_m.det() + fam.m)
    ok = ok and transformed_companion(fam, sd).a.equals(
        companion(darboux_potential(fam, sd)).a
    )
    return _exact("darboux-gauge", ok)


def check_sym_power(seed: int, config: VerifyConfig) -> dict:
    rng = Random(seed)
    p, q, r, w = sym("p"), sym("q"), sym("r"), sym("w")
    s2 = ExprMatrix([[ZERO, const(-1), ZERO], [2 * q, p, const(-2)], [ZERO, q, 2 * p]])
    ok = sym_lie(ExprMatrix([[ZERO, const(-1)], [q, p]]), 2).equals(s2)
    s2_hat = ExprMatrix(
        [[ZERO, -1 / w, ZERO], [2 * w * q, ZERO, -2 / w], [ZERO, w * q, ZERO]]
    )
    ok = ok and sym_lie(ExprMatrix([[ZERO, -1 / w], [w * q, ZERO]]), 2).equals(s2_hat)
    n2 = ExprMatrix([[ZERO, ZERO, ZERO], [-2 * r, ZERO, ZERO], [ZERO, -r, ZERO]])
    ok = ok and sym_lie(ExprMatrix([[ZERO, ZERO], [-r, ZERO]]), 2).equals(n2)
    n2_hat = ExprMatrix([[ZERO, ZERO, ZERO], [-2 * w * r, ZERO, ZERO], [ZERO, -w * r, ZERO]])
    ok = ok and sym_lie(ExprMatrix([[ZERO, ZERO], [-w * r, ZERO]]), 2).equals(n2_hat)
    for _ in range(10):
        m1, m2 = _random_matrix(rng), _random_matrix(rng)
        ok = ok and sym_group(m1 @ m2, 2).equals(
            (sym_group(m1, 2) @ sym_group(m2, 2)).normalized()
        )
    fam = _generic_family()
    (pair1, pair2), table = fam.solution_symbols("y1", "y2")
    fund = ExprMatrix([[pair1[0], pair2[0]], [pair1[1], pair2[1]]])
    base = LinearSystem(companion(fam).a, table)
    ok = ok and residual(sym_system(base, 2), sym_group(fund, 2)).is_zero_matrix()
    return _exact("sym-power", ok, samples=10, seed=seed)


def check_lifted_transforms(seed: int, config: VerifyConfig) -> dict:
    fam, sd = attach_generic_seed(_generic_family())
    m = fam.m
    p1 = p1_matrix(fam, sd)
    left1, right1 = p1_factors(fam, sd)
    ok = p1.equals(p1_explicit(fam, sd))
    ok = ok and p1.equals((left1 @ right1).normalized())
    ok = ok and is_zero(p1.det() + m ** 3)
    p2 = p2_matrix(fam, sd)
    ok = ok and p2.equals(p2_explicit(fam, sd))
    ok = ok and is_zero(p2.det() + m ** 3)
    at_w1 = lambda e: substitute(e, {"w": ONE, "p": ZERO})
    ok = ok and p2_explicit(fam, sd).map(at_w1).equals(p1_explicit(fam, sd).map(at_w1))
    ok = ok and t1_matrix(fam, sd).equals(t1_explicit(fam, sd))
    ok = ok and t2_matrix(fam, sd).equals(t2_explicit(fam, sd))
    lifted = sym_system(companion(fam), 2)
    target = sym_system(companion(darboux_potential(fam, sd)), 2)
    moved = gauge(lifted, p1_gauge(fam, sd).inv())
    ok = ok and moved.a.equals(target.a)
    return _exact("lifted-transforms", ok)


def check_first_integrals(seed: int, config: VerifyConfig) -> dict:
    fam = _generic_family()
    lifted = sym_system(companion(fam), 2)
    sym_ok = is_zero(
        flow_derivative(lifted, first_integral_sym2(fam.w), ("z1", "z2", "z3"))
    )
    f, g, h = sym("f"), sym("g"), sym("h")
    table = DerivationTable(
        {**symbol_tower("f", 1), **symbol_tower("g", 1), **symbol_tower("h", 1)}
    )
    ortho = OrthogonalSystem(f, g, h, table).system()
    sym_ok = sym_ok and is_zero(
        flow_derivative(ortho, first_integral_orthogonal(), ("alpha", "beta", "gamma"))
    )
    if not sym_ok:
        return _exact("first-integrals", False)
    osc = _oscillator()
    traj = integrate(sym_system(companion(osc), 2), [1.0, 0.25, 2.0],
                     config.interval, config.step, {"m": 1})
    worst = drift(first_integral_sym2(osc.w), traj, ("z1", "z2", "z3"), {"w": 1.0})
    ortho_sys = so3_system_first(osc).system()
    traj2 = integrate(ortho_sys, [1.0, 0.5j, -0.25], config.interval, config.step, {"m": -2})
    worst = max(
        worst,
        drift(first_integral_orthogonal(), traj2, ("alpha", "beta", "gamma")),
    )
    return _report("first-integrals", float(worst), config.tolerance)


def check_riccati_parametrization(seed: int, config: VerifyConfig) -> dict:
    u, v = sym("u"), sym("v")
    alpha, beta, gamma = riccati_parametrize(u, v)
    ok = is_zero(alpha * alpha + beta * beta + gamma * gamma - 1)
    f, g, h = sym("f"), sym("g"), sym("h")
    table = DerivationTable(
        {**symbol_tower("f", 2), **symbol_tower("g", 2), **symbol_tower("h", 2)}
    )
    system = OrthogonalSystem(f, g, h, table)
    data = so3_to_riccati(system)
    table2 = table.extended({"u": data.rhs(Sym("u")), "v": data.rhs(Sym("v"))})
    flow = system.skew()
    state = [alpha, beta, gamma]
    for i in range(3):
        lhs = differentiate(state[i], table2)
        rhs = normalize(sum((flow[i, j] * state[j] for j in range(3)), ZERO))
        ok = ok and is_zero(normalize(lhs - rhs))
    u_back, v_back = riccati_invert(alpha, beta, gamma)
    ok = ok and is_zero(u_back - u) and is_zero(v_back - v)
    table3 = table.extended(
        {"u": data.rhs(Sym("u")), "y": normalize(-data.omega1 * Sym("u")) * Sym("y")}
    )
    data3 = so3_to_riccati(OrthogonalSystem(f, g, h, table3))
    b, c = data3.linear_form()
    y = Sym("y")
    res = normalize(
        differentiate(differentiate(y, table3), table3)
        + b * differentiate(y, table3)
        + c * y
    )
    ok = ok and is_zero(res)
    return _exact("riccati-parametrization", ok)


def check_susy_oscillator(seed: int, config: VerifyConfig) -> dict:
    pair = partner_potentials(X)
    ok = is_zero(pair.v_minus - (X ** 2 - 1)) and is_zero(pair.v_plus - (X ** 2 + 1))
    mf2 = matrix_formalism(pair, 2)
    ok = ok and mf2.v_plus.equals(mf2.v_minus + mf2.minus_n.scale(const(2)))
    mf3 = matrix_formalism(pair, 3)
    ok = ok and mf3.v_plus.equals(mf3.v_minus + mf3.minus_n.scale(const(2)))
    states, table = oscillator_states(5, order=2)
    psi0 = Sym("psi0")
    for n, state in enumerate(states):
        ok = ok and is_zero(state[0] - normalize(hermite(n) * psi0))
        h_state = mf2.hamiltonian_apply("minus", state, table)
        e_state = mf2.energy(const(2 * n)).apply(state)
        ok = ok and all(is_zero(a - b) for a, b in zip(h_state, e_state))
    return _exact("susy-oscillator", ok)


def _sweep_rigid_q(rng: Random, config: VerifyConfig) -> float:
    worst = 0.0
    for _ in range(5):
        omega2 = normalize(const(Fraction(rng.randint(1, 4))) +
                           const(Fraction(rng.randint(-2, 2), 4)) * X)
        app = rigid_family(
            RigidData(normalize(-I * (2 - omega2)), omega2, "Q", DerivationTable())
        )
        m_value = rng.uniform(-1, 1)
        grid = companion_solution_grid(
            companion(app.family), bindings={"m": m_value},
            interval=config.interval, h=config.step,
        )
        worst = max(
            worst,
            residual_sweep(
                app.fundamental.matrix,
                LinearSystem(app.fundamental.system.a, app.table),
                grid.binder(),
                grid.sample_indices(5),
                grid.xs,
                bindings={"m": m_value},
            ),
        )
    return worst


def _sweep_frenet_s(rng: Random, config: VerifyConfig) -> float:
    worst = 0.0
    for _ in range(5):
        kappa = normalize(const(Fraction(rng.randint(2, 4))) +
                          const(Fraction(rng.randint(-1, 1), 4)) * X)
        tau = normalize(const(Fraction(rng.randint(-2, 2), 3)) * X)
        app = frenet_family(FrenetData(kappa, tau, "S", DerivationTable()))
        m_value = rng.uniform(-1, 1)
        grid = companion_solution_grid(
            companion(app.family), bindings={"m": m_value},
            interval=config.interval, h=config.step,
        )
        worst = max(
            worst,
            residual_sweep(
                app.fundamental.matrix,
                LinearSystem(app.fundamental.system.a, app.table),
                grid.binder(),
                grid.sample_indices(5),
                grid.xs,
                bindings={"m": m_value},
            ),
        )
    return worst


def check_applications(seed: int, config: VerifyConfig) -> dict:
    rng = Random(seed)
    table = DerivationTable(
        {**symbol_tower("kappa", 4), **symbol_tower("tau", 4), **symbol_tower("w1", 4)}
    )
    kappa, tau, w1 = sym("kappa"), sym("tau"), sym("w1")
    frenet_q = frenet_family(FrenetData(kappa, -2 * I, "Q", table))
    ok = is_zero(frenet_q.family.q + 1)
    frenet_s = frenet_family(FrenetData(kappa, tau, "S", table))
    ok = ok and is_zero(frenet_s.family.w - 2 / (I * kappa - tau))
    ok = ok and is_zero(frenet_s.family.q - (kappa ** 2 + tau ** 2) / 4)
    rigid_q = rigid_family(RigidData(w1, normalize(2 - I * w1), "Q", table))
    ok = ok and is_zero(rigid_q.family.q - (2 - I * w1 - 1))
    rigid_s = rigid_family(RigidData(w1, ZERO, "S", table))
    ok = ok and is_zero(rigid_s.family.w + 2 / w1)
    ok = ok and is_zero(rigid_s.family.q - w1 ** 2 / 4)
    if not ok:
        return _exact("applications", False, seed=seed)
    worst = max(_sweep_rigid_q(rng, config), _sweep_frenet_s(rng, config))
    return _report("applications", float(worst), config.tolerance, seed=seed, samples=5)


def check_orientation_mutation(seed: int, config: VerifyConfig) -> dict:
    fam = SecondOrderFamily(p=ZERO, q=ONE, r=ONE, w=ONE, table=DerivationTable())
    fset = fundamental_matrices(fam)
    ortho = so3_system_first(fam)
    flipped = LinearSystem(ortho.skew(), fset.table)
    grid = companion_solution_grid(
        companion(fam), bindings={"m": 0}, w_rate=fam.p,
        interval=config.interval, h=config.step,
    )
    value = residual_sweep(
        fset.orthogonal.matrix, flipped, grid.binder(),
        grid.sample_indices(5), grid.xs, bindings={"m": 0},
    )
    return _report("orientation-mutation", float(value), 1e-2, mode="min")


CHECKS: dict[str, Callable[[int, VerifyConfig], dict]] = {
    "rk4-closed-form": check_rk4_closed_form,
    "rk4-order": check_rk4_order,
    "darboux-covariance": check_darboux_covariance,
    "darboux-gauge": check_darboux_gauge,
    "sym-power": check_sym_power,
    "lifted-transforms": check_lifted_transforms,
    "first-integrals": check_first_integrals,
    "riccati-parametrization": check_riccati_parametrization,
    "susy-oscillator": check_susy_oscillator,
    "applications": check_applications,
    "orientation-mutation": check_orientation_mutation,
}


def run_checks(names: Iterable[str] | None = None,
               seed: int = DEFAULT_SEED,
               config: VerifyConfig | None = None) -> dict:
    config = config or DEFAULT_CONFIG
    selected = list(names) if names else list(CHECKS)
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}")
    reports = [CHECKS[name](seed, config) for name in selected]
    return {
        "seed": seed,
        "step": config.step,
        "interval": list(config.interval),
        "checks": reports,
        "pass": all(r["pass"] for r in reports),
    }
