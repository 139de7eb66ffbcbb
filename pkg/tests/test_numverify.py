import cmath
import math

import numpy as np
import pytest

from darbouxkit.expr import (
    DerivationTable,
    EvalSingularity,
    I,
    ONE,
    X,
    ZERO,
    const,
    normalize,
    sym,
)
from darbouxkit.linsys import ExprMatrix, LinearSystem, companion, residual
from darbouxkit.numverify import (
    SolutionGrid,
    companion_solution_grid,
    convergence_ratio,
    drift,
    fundamental_trajectories,
    integrate,
    residual_sweep,
)
from darbouxkit.susyqm import hermite
from darbouxkit.tensordt import (
    first_integral_orthogonal,
    first_integral_sym2,
    fundamental_matrices,
    so3_system_first,
)
from darbouxkit.sympow import sym_group, sym_lie, sym_system
from conftest import oscillator_family, schrodinger_family


def _circle_system():
    # y'' = -y as a companion system
    fam = schrodinger_family(ONE)
    return companion(fam)


def test_rk4_against_closed_form_circle():
    traj = integrate(_circle_system(), [1.0, 0.0], (0.0, 1.0), 1e-3, {"m": 0})
    end = traj.endpoint()
    assert abs(end[0] - math.cos(1.0)) < 1e-10
    assert abs(end[1] + math.sin(1.0)) < 1e-10


def test_rk4_oscillator_state_propagation():
    # first excited state at energy 2: q - m r with m = -2 makes
    # psi = H1 exp(-x^2/2) an exact solution
    fam = oscillator_family()
    sys = companion(fam)

    def psi(x):
        return 2 * x * math.exp(-(x ** 2) / 2)

    def psi_prime(x):
        return (2 - 2 * x ** 2) * math.exp(-(x ** 2) / 2)

    traj = integrate(sys, [psi(0.0), psi_prime(0.0)], (0.0, 1.0), 1e-3, {"m": -2})
    end = traj.endpoint()
    assert abs(end[0] - psi(1.0)) < 1e-8
    assert abs(end[1] - psi_prime(1.0)) < 1e-8


def test_rk4_orthogonal_norm_preservation():
    # the rigid coupled case with omega2 = 2, omega1 = 0 gives q = 1
    fam = schrodinger_family(ONE)
    sys = so3_system_first(fam).system()
    for traj in fundamental_trajectories(sys, (0.0, 1.0), 1e-3, {"m": 0}):
        norms = np.abs(np.einsum("ij,ij->i", traj.states, traj.states))
        assert np.max(np.abs(norms - norms[0])) < 1e-9


def test_rk4_order_four_convergence():
    ratio = convergence_ratio(
        _circle_system(),
        [1.0, 0.0],
        [math.cos(1.0), -math.sin(1.0)],
        (0.0, 1.0),
        1e-2,
        {"m": 0},
    )
    assert 12.0 <= ratio <= 20.0


def test_integrate_reports_singularities():
    table = DerivationTable()
    sys = LinearSystem(ExprMatrix([[1 / X, ZERO], [ZERO, ZERO]]), table)
    with pytest.raises(EvalSingularity):
        integrate(sys, [1.0, 0.0], (0.0, 1.0), 0.5)


def test_residual_sweep_zero_candidate():
    sys = _circle_system()
    grid = companion_solution_grid(sys, bindings={"m": 0})
    value = residual_sweep(
        ExprMatrix.zeros(2),
        LinearSystem(sys.a, sys.table),
        grid.binder(),
        grid.sample_indices(5),
        grid.xs,
        bindings={"m": 0},
    )
    assert value == 0.0


def test_residual_sweep_orthogonal_fundamental():
    # the lifted fundamental matrix solves the orthogonal system along
    # numerically integrated trajectories
    fam = schrodinger_family(ONE)
    fset = fundamental_matrices(fam)
    sys = companion(fam)
    grid = companion_solution_grid(sys, bindings={"m": 0}, w_rate=fam.p)
    pair = fset.orthogonal
    value = residual_sweep(
        pair.matrix,
        LinearSystem(pair.system.a, fset.table),
        grid.binder(),
        grid.sample_indices(5),
        grid.xs,
        bindings={"m": 0},
    )
    assert value <= 1e-8


def test_residual_sweep_detects_wrong_flow_orientation():
    # the orthogonal flow orientation cannot be flipped silently: the
    # correctly built fundamental matrix has a large residual against
    # the sign-mutated system
    fam = schrodinger_family(ONE)
    fset = fundamental_matrices(fam)
    orthosys = so3_system_first(fam)
    flipped = LinearSystem(orthosys.skew(), fset.table)  # A = +skew, not -skew
    grid = companion_solution_grid(companion(fam), bindings={"m": 0}, w_rate=fam.p)
    value = residual_sweep(
        fset.orthogonal.matrix,
        flipped,
        grid.binder(),
        grid.sample_indices(5),
        grid.xs,
        bindings={"m": 0},
    )
    assert value >= 1e-2


def test_lifted_fundamental_tracks_lifted_flow_numerically():
    # the symmetric square of an integrated fundamental matrix solves
    # the lifted system: d/dx Sym2(Phi) = sym_lie(Phi' Phi^{-1}) Sym2(Phi)
    fam = oscillator_family()
    fset = fundamental_matrices(fam)
    grid = companion_solution_grid(companion(fam), bindings={"m": -2})
    value = residual_sweep(
        fset.sym2.matrix,
        LinearSystem(fset.sym2.system.a, fset.table),
        grid.binder(),
        grid.sample_indices(5),
        grid.xs,
        bindings={"m": -2},
    )
    assert value <= 1e-8


def test_drift_constant_expression():
    traj = integrate(_circle_system(), [1.0, 0.0], (0.0, 1.0), 1e-2, {"m": 0})
    assert drift(const(7), traj, ("y", "y_p")) == 0.0


def test_drift_orthogonal_first_integral():
    fam = schrodinger_family(ONE)
    sys = so3_system_first(fam).system()
    traj = integrate(sys, [1.0, 1j, 0.5], (0.0, 1.0), 1e-3, {"m": 0})
    value = drift(
        first_integral_orthogonal(), traj, ("alpha", "beta", "gamma")
    )
    assert value <= 1e-8


def test_drift_sym2_first_integral():
    fam = oscillator_family()
    lifted = sym_system(companion(fam), 2)
    traj = integrate(lifted, [1.0, 0.25, 2.0], (0.0, 1.0), 1e-3, {"m": 1})
    value = drift(
        first_integral_sym2(fam.w),
        traj,
        ("z1", "z2", "z3"),
        bindings={"w": 1.0},
    )
    assert value <= 1e-8
