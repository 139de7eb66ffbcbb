"""Acceptance gate: every shipped guarantee, one test per criterion.

Each criterion prints one PASS/FAIL line (run with ``pytest -s`` to see
them on success).  Symbolic criteria are exact: the check is that a
normal form is literally zero.  Numeric criteria carry the pinned
tolerances stated in the assertions; nothing is calibrated at runtime.
"""

import functools
import math
from fractions import Fraction
from random import Random

from darbouxkit.expr import (
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
    equal,
    is_zero,
    normalize,
    substitute,
    sym,
    symbol_tower,
)
from darbouxkit.linsys import (
    ExprMatrix,
    LinearSystem,
    SecondOrderFamily,
    companion,
    gauge,
    residual,
)
from darbouxkit.sympow import sym_group, sym_lie, sym_system
from darbouxkit.darboux import (
    attach_generic_seed,
    darboux_gauge,
    darboux_potential,
    darboux_solution,
    potential_compact,
    potential_shift,
    transformed_companion,
)
from darbouxkit.tensordt import (
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
    p2_factors,
    p2_gauge,
    p2_matrix,
    riccati_invert,
    riccati_parametrize,
    so3_system_first,
    so3_to_riccati,
    t1_explicit,
    t1_factors,
    t1_matrix,
    t2_explicit,
    t2_factors,
    t2_matrix,
)
from darbouxkit.susyqm import (
    hermite,
    matrix_formalism,
    oscillator_states,
    partner_potentials,
)
from darbouxkit.apps import (
    FRAME_DATUM,
    FrenetData,
    RigidData,
    application_chain,
    frenet_family,
    rigid_family,
)
from darbouxkit.numverify import (
    companion_solution_grid,
    convergence_ratio,
    drift,
    integrate,
    residual_sweep,
)
from conftest import generic_family, oscillator_family

SEED = 20260810


@functools.lru_cache(maxsize=None)
def _seeded():
    return attach_generic_seed(generic_family())


def _criterion(number: int, description: str, results: dict[str, bool]) -> None:
    ok = all(results.values())
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {number}: {description}")
    failing = [name for name, good in results.items() if not good]
    assert ok, f"criterion {number} failed: {failing}"


def test_criterion_1_darboux_covariance():
    fam, seed = _seeded()
    (pair,), table = fam.solution_symbols("ym")
    ym, _ = pair
    new_fam = darboux_potential(fam, seed)
    ytilde = darboux_solution(fam, seed, ym, table)
    d1 = differentiate(ytilde, table)
    d2 = differentiate(d1, table)
    res = normalize(d2 + new_fam.p * d1 + new_fam.q_effective() * ytilde)
    results = {
        "transformed-solution-residual-zero": is_zero(res),
        "shift-formula-equals-compact-form": equal(
            normalize(fam.q + potential_shift(fam, seed)),
            potential_compact(fam, seed),
        ),
    }
    _criterion(1, "transformation covariance, fully symbolic", results)


def test_criterion_2_gauge_equivalence():
    fam, seed = _seeded()
    g = darboux_gauge(fam, seed)
    results = {
        "factorization": g.p_m.equals((g.l_m @ g.r_factor).normalized()),
        "determinant-minus-m": equal(g.p_m.det(), -fam.m),
        "gauged-companion-matches": transformed_companion(fam, seed).a.equals(
            companion(darboux_potential(fam, seed)).a
        ),
    }
    _criterion(2, "the transformation is the expected gauge", results)


def test_criterion_3_symmetric_power_coherence():
    p, q, r, w = sym("p"), sym("q"), sym("r"), sym("w")
    s2 = ExprMatrix([[ZERO, const(-1), ZERO], [2 * q, p, const(-2)], [ZERO, q, 2 * p]])
    s2_hat = ExprMatrix(
        [[ZERO, -1 / w, ZERO], [2 * w * q, ZERO, -2 / w], [ZERO, w * q, ZERO]]
    )
    n2 = ExprMatrix([[ZERO, ZERO, ZERO], [-2 * r, ZERO, ZERO], [ZERO, -r, ZERO]])
    n2_hat = ExprMatrix(
        [[ZERO, ZERO, ZERO], [-2 * w * r, ZERO, ZERO], [ZERO, -w * r, ZERO]]
    )
    results = {
        "lifted-companion": sym_lie(
            ExprMatrix([[ZERO, const(-1)], [q, p]]), 2
        ).equals(s2),
        "lifted-balanced": sym_lie(
            ExprMatrix([[ZERO, -1 / w], [w * q, ZERO]]), 2
        ).equals(s2_hat),
        "lifted-perturbation": sym_lie(
            ExprMatrix([[ZERO, ZERO], [-r, ZERO]]), 2
        ).equals(n2),
        "lifted-balanced-perturbation": sym_lie(
            ExprMatrix([[ZERO, ZERO], [-w * r, ZERO]]), 2
        ).equals(n2_hat),
    }
    rng = Random(SEED)
    functorial = True
    for _ in range(50):
        m1 = ExprMatrix(
            [
                [Const(GaussRat(Fraction(rng.randint(-3, 3), rng.choice((1, 2)))))
                 for _ in range(2)]
                for _ in range(2)
            ]
        )
        m2 = ExprMatrix(
            [
                [Const(GaussRat(Fraction(rng.randint(-3, 3), rng.choice((1, 2)))))
                 for _ in range(2)]
                for _ in range(2)
            ]
        )
        functorial = functorial and sym_group(m1 @ m2, 2).equals(
            (sym_group(m1, 2) @ sym_group(m2, 2)).normalized()
        )
    results["functoriality-50-random"] = functorial
    fam = generic_family()
    (pair1, pair2), table = fam.solution_symbols("y1", "y2")
    fund = ExprMatrix([[pair1[0], pair2[0]], [pair1[1], pair2[1]]])
    base = LinearSystem(companion(fam).a, table)
    results["lifted-fundamental-residual-zero"] = residual(
        sym_system(base, 2), sym_group(fund, 2)
    ).is_zero_matrix()
    _criterion(3, "symmetric-power coherence", results)


def test_criterion_4_lifted_transformations():
    fam, seed = _seeded()
    m = fam.m
    p1 = p1_matrix(fam, seed)
    p2 = p2_matrix(fam, seed)
    t1 = t1_matrix(fam, seed)
    t2 = t2_matrix(fam, seed)
    left1, right1 = p1_factors(fam, seed)
    left2, right2 = p2_factors(fam, seed)
    tl1, tr1 = t1_factors(fam, seed)
    tl2, tr2 = t2_factors(fam, seed)
    at_w1 = lambda e: substitute(e, {"w": ONE, "p": ZERO})
    lifted = sym_system(companion(fam), 2)
    lifted_target = sym_system(companion(darboux_potential(fam, seed)), 2)
    delta = ExprMatrix.diagonal([ONE, sym("w")])
    from darbouxkit.linsys import GaugeMatrix

    balanced = gauge(companion(fam), GaugeMatrix(delta.inverse(), delta))
    balanced_target = gauge(
        companion(darboux_potential(fam, seed)), GaugeMatrix(delta.inverse(), delta)
    )
    results = {
        "p1-entrywise": p1.equals(p1_explicit(fam, seed)),
        "p1-factorization": p1.equals((left1 @ right1).normalized()),
        "p2-entrywise": p2.equals(p2_explicit(fam, seed)),
        "p2-factorization": p2.equals((left2 @ right2).normalized()),
        "t1-entrywise": t1.equals(t1_explicit(fam, seed)),
        "t1-factorization": t1.equals((tl1 @ tr1).normalized()),
        "t2-entrywise": t2.equals(t2_explicit(fam, seed)),
        "t2-factorization": t2.equals((tl2 @ tr2).normalized()),
        "det-p1": equal(p1.det(), -(m ** 3)),
        "det-p2": equal(p2.det(), -(m ** 3)),
        "p2-reduces-to-p1-at-w1": p2_explicit(fam, seed)
        .map(at_w1)
        .equals(p1_explicit(fam, seed).map(at_w1)),
        "diagram-sym2-route": gauge(lifted, p1_gauge(fam, seed).inv()).a.equals(
            lifted_target.a
        ),
        "diagram-balanced-route": gauge(
            sym_system(balanced, 2), p2_gauge(fam, seed).inv()
        ).a.equals(sym_system(balanced_target, 2).a),
    }
    _criterion(4, "lifted transformation matrices and diagrams", results)


def test_criterion_5_first_integrals():
    fam = generic_family()
    lifted = sym_system(companion(fam), 2)
    f, g, h = sym("f"), sym("g"), sym("h")
    table = DerivationTable(
        {**symbol_tower("f", 1), **symbol_tower("g", 1), **symbol_tower("h", 1)}
    )
    ortho = OrthogonalSystem(f, g, h, table).system()
    results = {
        "sym2-integral-symbolic": is_zero(
            flow_derivative(lifted, first_integral_sym2(fam.w), ("z1", "z2", "z3"))
        ),
        "orthogonal-integral-symbolic": is_zero(
            flow_derivative(
                ortho, first_integral_orthogonal(), ("alpha", "beta", "gamma")
            )
        ),
    }
    osc = oscillator_family()
    traj = integrate(
        sym_system(companion(osc), 2), [1.0, 0.25, 2.0], (0.0, 1.0), 1e-3, {"m": 1}
    )
    drift_sym2 = drift(first_integral_sym2(osc.w), traj, ("z1", "z2", "z3"), {"w": 1.0})
    traj2 = integrate(
        so3_system_first(osc).system(), [1.0, 0.5j, -0.25], (0.0, 1.0), 1e-3, {"m": -2}
    )
    drift_ortho = drift(
        first_integral_orthogonal(), traj2, ("alpha", "beta", "gamma")
    )
    results["sym2-drift-below-1e-8"] = drift_sym2 <= 1e-8
    results["orthogonal-drift-below-1e-8"] = drift_ortho <= 1e-8
    _criterion(5, "first integrals, symbolic and along trajectories", results)


def test_criterion_6_riccati_parametrization():
    u, v = sym("u"), sym("v")
    alpha, beta, gamma = riccati_parametrize(u, v)
    results = {
        "unit-norm-identity": equal(
            alpha * alpha + beta * beta + gamma * gamma, ONE
        ),
    }
    f, g, h = sym("f"), sym("g"), sym("h")
    table = DerivationTable(
        {**symbol_tower("f", 2), **symbol_tower("g", 2), **symbol_tower("h", 2)}
    )
    system = OrthogonalSystem(f, g, h, table)
    data = so3_to_riccati(system)
    table_uv = table.extended({"u": data.rhs(Sym("u")), "v": data.rhs(Sym("v"))})
    flow = system.skew()
    state = [alpha, beta, gamma]
    flow_ok = True
    for i in range(3):
        lhs = differentiate(state[i], table_uv)
        rhs = normalize(sum((flow[i, j] * state[j] for j in range(3)), ZERO))
        flow_ok = flow_ok and is_zero(normalize(lhs - rhs))
    results["parametrized-solution-solves-flow"] = flow_ok
    table_y = table.extended(
        {"u": data.rhs(Sym("u")), "y": normalize(-data.omega1 * Sym("u")) * Sym("y")}
    )
    data_y = so3_to_riccati(OrthogonalSystem(f, g, h, table_y))
    b, c = data_y.linear_form()
    y = Sym("y")
    res = normalize(
        differentiate(differentiate(y, table_y), table_y)
        + b * differentiate(y, table_y)
        + c * y
    )
    results["linear-form-agrees-with-riccati"] = is_zero(res)
    u_back, v_back = riccati_invert(alpha, beta, gamma)
    results["inversion-recovers-riccati-solutions"] = equal(u_back, u) and equal(
        v_back, v
    )
    _criterion(6, "Riccati parametrization of orthogonal flows", results)


def test_criterion_7_susy_oscillator():
    pair = partner_potentials(X)
    mf2 = matrix_formalism(pair, 2)
    mf3 = matrix_formalism(pair, 3)
    results = {
        "partner-potentials": equal(pair.v_minus, X ** 2 - 1)
        and equal(pair.v_plus, X ** 2 + 1),
        "remainder-2x2": mf2.v_plus.equals(
            mf2.v_minus + ExprMatrix([[ZERO, ZERO], [const(2), ZERO]])
        ),
        "remainder-3x3": mf3.v_plus.equals(
            mf3.v_minus
            + ExprMatrix(
                [[ZERO, ZERO, ZERO], [const(4), ZERO, ZERO], [ZERO, const(2), ZERO]]
            )
        ),
    }
    states, table = oscillator_states(5, order=2)
    ladder_ok = True
    psi0 = Sym("psi0")
    for n, state in enumerate(states):
        ladder_ok = ladder_ok and equal(state[0], normalize(hermite(n) * psi0))
        h_state = mf2.hamiltonian_apply("minus", state, table)
        e_state = mf2.energy(const(2 * n)).apply(state)
        ladder_ok = ladder_ok and all(
            is_zero(a - b) for a, b in zip(h_state, e_state)
        )
    results["ladder-eigenstates-n-le-5"] = ladder_ok
    from darbouxkit.expr import param
    from darbouxkit.susyqm import ParametricPotential, spectrum_sum

    a = param("a")
    pot = ParametricPotential(w=a * X, a_name="a", f=a, remainder=2 * a)
    spectrum_ok = all(
        equal(substitute(spectrum_sum(pot, n), {"a": ONE}), const(2 * n))
        for n in range(6)
    )
    results["spectrum-2n"] = spectrum_ok
    _criterion(7, "supersymmetric oscillator formalism", results)


def _random_linear(rng: Random, lo: int, hi: int, slope_den: int = 4):
    c0 = Const(Fraction(rng.randint(lo, hi)))
    c1 = Const(Fraction(rng.randint(-1, 1), slope_den))
    return normalize(c0 + c1 * X)


def _sweep(app, bindings, w_symbol=None, interval=(0.0, 1.0)):
    grid = companion_solution_grid(
        companion(app.family),
        interval=interval,
        bindings=bindings,
        w_rate=app.family.p if w_symbol else None,
        w_name=w_symbol or "w",
    )
    return residual_sweep(
        app.fundamental.matrix,
        LinearSystem(app.fundamental.system.a, app.table),
        grid.binder(),
        grid.sample_indices(5),
        grid.xs,
        bindings=bindings,
    )


def test_criterion_8_applications():
    table = DerivationTable(
        {**symbol_tower("kappa", 4), **symbol_tower("tau", 4), **symbol_tower("w1", 4)}
    )
    kappa, tau, w1 = sym("kappa"), sym("tau"), sym("w1")
    frenet_q = frenet_family(FrenetData(kappa, -2 * I, "Q", table))
    frenet_s = frenet_family(FrenetData(kappa, tau, "S", table))
    rigid_q = rigid_family(RigidData(w1, normalize(2 - I * w1), "Q", table))
    rigid_s = rigid_family(RigidData(w1, ZERO, "S", table))
    results = {
        "frenet-q-identification": equal(frenet_q.family.q, const(-1))
        and equal(frenet_q.family.p, I * kappa),
        "frenet-s-identification": equal(frenet_s.family.w, 2 / (I * kappa - tau))
        and equal(frenet_s.family.q, (kappa ** 2 + tau ** 2) / 4),
        "rigid-q-identification": equal(rigid_q.family.q, 2 - I * w1 - 1),
        "rigid-s-identification": equal(rigid_s.family.w, -2 / w1)
        and equal(rigid_s.family.q, w1 ** 2 / 4),
    }
    # step-1 chain transformations against their closed forms
    rigid_links = application_chain(rigid_q, "generic", 1)
    th = Sym("theta0_0")
    m = rigid_q.family.m
    nu = normalize(m + th * th)
    rigid_expected = ExprMatrix(
        [
            [-(nu ** 2) + 2 * th ** 2 - 1, I * (nu ** 2 - 1), 2 * th * (1 - nu)],
            [I * (nu ** 2 - 1), nu ** 2 + 2 * th ** 2 + 1, 2 * I * th * (1 + nu)],
            [2 * th * (nu - 1), -2 * I * th * (nu + 1), 2 * (nu + th ** 2)],
        ]
    ).scale(Const(Fraction(1, 2)))
    results["rigid-step1-transform"] = rigid_links[0].transform.equals(
        rigid_expected.normalized()
    )
    frenet_links = application_chain(frenet_s, "generic", 1)
    f_fam, f_seed = frenet_links[0].family, frenet_links[0].seed
    results["frenet-step1-transform"] = frenet_links[0].transform.equals(
        t2_explicit(f_fam, f_seed)
    )
    # numeric sweeps: five random parameter samples on each route
    rng = Random(SEED)
    worst = {"frenet-q": 0.0, "frenet-s": 0.0, "rigid-q": 0.0, "rigid-s": 0.0}
    for _ in range(5):
        m_val = rng.uniform(-1, 1)
        app = frenet_family(
            FrenetData(_random_linear(rng, 1, 3), -2 * I, "Q", DerivationTable())
        )
        worst["frenet-q"] = max(
            worst["frenet-q"], _sweep(app, {"m": m_val}, w_symbol=FRAME_DATUM)
        )
        app = frenet_family(
            FrenetData(
                _random_linear(rng, 2, 4),
                normalize(Const(Fraction(rng.randint(-2, 2), 3)) * X),
                "S",
                DerivationTable(),
            )
        )
        worst["frenet-s"] = max(worst["frenet-s"], _sweep(app, {"m": m_val}))
        omega2 = _random_linear(rng, 1, 4)
        app = rigid_family(
            RigidData(normalize(-I * (2 - omega2)), omega2, "Q", DerivationTable())
        )
        worst["rigid-q"] = max(worst["rigid-q"], _sweep(app, {"m": m_val}))
        app = rigid_family(
            RigidData(_random_linear(rng, 2, 4), ZERO, "S", DerivationTable())
        )
        worst["rigid-s"] = max(worst["rigid-s"], _sweep(app, {"m": m_val}))
    for route, value in worst.items():
        results[f"sweep-{route}-below-1e-8"] = value <= 1e-8
    _criterion(8, "frame and rigid-solid applications", results)


def test_criterion_9_oracle_health():
    fam = SecondOrderFamily(p=ZERO, q=ONE, r=ONE, w=ONE, table=DerivationTable())
    ratio = convergence_ratio(
        companion(fam),
        [1.0, 0.0],
        [math.cos(1.0), -math.sin(1.0)],
        (0.0, 1.0),
        1e-2,
        {"m": 0},
    )
    results = {"rk4-order-ratio-in-12-20": 12.0 <= ratio <= 20.0}
    fset = fundamental_matrices(fam)
    flipped = LinearSystem(so3_system_first(fam).skew(), fset.table)
    grid = companion_solution_grid(companion(fam), bindings={"m": 0}, w_rate=fam.p)
    mutated = residual_sweep(
        fset.orthogonal.matrix,
        flipped,
        grid.binder(),
        grid.sample_indices(5),
        grid.xs,
        bindings={"m": 0},
    )
    results["orientation-mutation-detected"] = mutated >= 1e-2
    _criterion(9, "numerical oracle health and mutation detection", results)
