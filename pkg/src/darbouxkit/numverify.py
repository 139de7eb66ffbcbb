"""Independent numerical oracle.

Classical fixed-step RK4 over complex state vectors, plus residual and
first-integral drift measurements of symbolic predictions along
integrated trajectories.  Defaults: step 1e-3 on [0, 1], pass
tolerance 1e-8 (global RK4 error ~ h^4 leaves three orders of margin
for roundoff).  No adaptivity and no stiffness handling; coefficient
poles are avoided by shifting the interval, never by special-casing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .expr import EvalSingularity, Expr, evaluate, normalize
from .linsys import ExprMatrix, LinearSystem

DEFAULT_STEP = 1e-3
DEFAULT_INTERVAL = (0.0, 1.0)
DEFAULT_TOLERANCE = 1e-8


@dataclass(frozen=True)
class Trajectory:
    """Grid values of one integrated initial-value problem."""

    xs: np.ndarray
    states: np.ndarray  # shape (len(xs), n), complex128
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.xs) != len(self.states):
            raise ValueError("grid and states disagree in length")
        if len(self.xs) > 1 and not np.all(np.diff(self.xs) > 0):
            raise ValueError("grid must be strictly increasing")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def endpoint(self) -> np.ndarray:
        return self.states[-1]


def _compile_matrix(a: ExprMatrix, bindings: Mapping[str, complex]):
    rows = [[normalize(e) for e in row] for row in a.rows]

    def rhs(x: float) -> np.ndarray:
        env = dict(bindings)
        env["x"] = x
        try:
            vals = [[evaluate(e, env) for e in row] for row in rows]
        except EvalSingularity as exc:
            raise EvalSingularity(f"coefficient singular at x = {x}: {exc}") from exc
        return np.array(vals, dtype=np.complex128)

    return rhs


def integrate(
    system: LinearSystem,
    x0_state: Sequence[complex],
    interval: tuple[float, float] = DEFAULT_INTERVAL,
    h: float = DEFAULT_STEP,
    bindings: Mapping[str, complex] | None = None,
) -> Trajectory:
    """RK4 integration of ``X' = -A(x) X`` from the given state.

    ``bindings`` fixes numeric values for every parameter and symbol
    appearing in the coefficient matrix.
    """
    a_of_x = _compile_matrix(system.a, bindings or {})
    x_start, x_end = interval
    if x_end <= x_start:
        raise ValueError("empty integration interval")
    steps = max(1, round((x_end - x_start) / h))
    h = (x_end - x_start) / steps
    xs = np.empty(steps + 1)
    states = np.empty((steps + 1, len(x0_state)), dtype=np.complex128)
    xs[0] = x_start
    states[0] = np.asarray(x0_state, dtype=np.complex128)

    def f(x, y):
        return -a_of_x(x) @ y

    y = states[0]
    x = x_start
    for k in range(steps):
        k1 = f(x, y)
        k2 = f(x + h / 2, y + (h / 2) * k1)
        k3 = f(x + h / 2, y + (h / 2) * k2)
        k4 = f(x + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        x = x_start + (k + 1) * h
        xs[k + 1] = x
        states[k + 1] = y
    return Trajectory(xs, states, {"h": h, "interval": interval})


def fundamental_trajectories(
    system: LinearSystem,
    interval: tuple[float, float] = DEFAULT_INTERVAL,
    h: float = DEFAULT_STEP,
    bindings: Mapping[str, complex] | None = None,
) -> list[Trajectory]:
    """One trajectory per canonical basis initial state."""
    n = system.n
    out = []
    for k in range(n):
        e_k = [0.0] * n
        e_k[k] = 1.0
        out.append(integrate(system, e_k, interval, h, bindings))
    return out


def residual_sweep(
    candidate: ExprMatrix,
    system: LinearSystem,
    binder: Callable[[int, float], Mapping[str, complex]],
    sample_indices: Sequence[int],
    xs: np.ndarray,
    bindings: Mapping[str, complex] | None = None,
) -> float:
    """Max magnitude of ``candidate' + A candidate`` over sample points.

    Derivatives are taken symbolically (table rewrites applied) but the
    sum against ``A . candidate`` is left unnormalized and evaluated
    numerically, so the sweep cross-checks the symbolic residual rather
    than re-evaluating its normal form.  ``binder(k, x)`` supplies
    numeric values of the abstract solution symbols at grid index k,
    ``bindings`` the constant parameter values.
    """
    raw = candidate.diff(system.table) + (system.a @ candidate)
    worst = 0.0
    for k in sample_indices:
        env = dict(bindings or {})
        env.update(binder(int(k), float(xs[k])))
        env["x"] = float(xs[k])
        for row in raw.rows:
            for e in row:
                worst = max(worst, abs(evaluate(e, env)))
    return worst


def drift(
    integral: Expr,
    trajectory: Trajectory,
    names: Sequence[str],
    bindings: Mapping[str, complex] | None = None,
    extra: Callable[[int, float], Mapping[str, complex]] | None = None,
) -> float:
    """Max deviation of a first integral from its initial value."""
    integral = normalize(integral)
    base = None
    worst = 0.0
    for k, x in enumerate(trajectory.xs):
        env = dict(bindings or {})
        if extra is not None:
            env.update(extra(k, float(x)))
        env["x"] = float(x)
        env.update({name: trajectory.states[k][i] for i, name in enumerate(names)})
        value = evaluate(integral, env)
        if base is None:
            base = value
        else:
            worst = max(worst, abs(value - base))
    return worst


@dataclass(frozen=True)
class SolutionGrid:
    """Numeric values of abstract solution symbols along one grid.

    Integrates the system behind ``pairs`` (typically a companion
    system) from canonical initial states and exposes a binder mapping
    grid index to symbol values, including derived symbols such as an
    integrated Wronskian datum.
    """

    xs: np.ndarray
    values: dict[str, np.ndarray]

    def binder(self) -> Callable[[int, float], dict[str, complex]]:
        def bind(k: int, _x: float) -> dict[str, complex]:
            return {name: vals[k] for name, vals in self.values.items()}

        return bind

    def sample_indices(self, count: int) -> list[int]:
        step = max(1, (len(self.xs) - 1) // count)
        return list(range(0, len(self.xs), step))


def companion_solution_grid(
    system: LinearSystem,
    names: tuple[str, str] = ("y1", "y2"),
    interval: tuple[float, float] = DEFAULT_INTERVAL,
    h: float = DEFAULT_STEP,
    bindings: Mapping[str, complex] | None = None,
    w_rate: Expr | None = None,
    w_name: str = "w",
) -> SolutionGrid:
    """Integrate two companion solutions (and optionally the Wronskian
    datum ``w' = rate * w`` alongside) to back abstract symbols.

    The first solution starts at (1, 0), the second at (0, 1); the
    datum starts at 1, any nonzero scaling being equally valid.
    """
    bindings = dict(bindings or {})
    n = system.n
    a_rows = system.a.rows
    if w_rate is not None:
        rate = normalize(w_rate)
        aug = ExprMatrix(
            [list(row) + [0] for row in a_rows] + [[0] * n + [-rate]]
        )
        aug_system = LinearSystem(aug, system.table, dict(system.meta))
    else:
        aug_system = system
    trajectories = []
    for k in range(2):
        state = [0.0] * aug_system.n
        state[k] = 1.0
        if w_rate is not None:
            state[-1] = 1.0
        trajectories.append(integrate(aug_system, state, interval, h, bindings))
    xs = trajectories[0].xs
    values: dict[str, np.ndarray] = {}
    for idx, name in enumerate(names):
        values[name] = trajectories[idx].states[:, 0]
        values[name + "_p"] = trajectories[idx].states[:, 1]
    if w_rate is not None:
        values[w_name] = trajectories[0].states[:, -1]
    return SolutionGrid(xs, values)


def convergence_ratio(
    system: LinearSystem,
    x0_state: Sequence[complex],
    exact_endpoint: Sequence[complex],
    interval: tuple[float, float] = DEFAULT_INTERVAL,
    h: float = 1e-2,
    bindings: Mapping[str, complex] | None = None,
) -> float:
    """Endpoint-error ratio when halving the step; ~16 for order 4."""
    exact = np.asarray(exact_endpoint, dtype=np.complex128)
    err_coarse = np.max(
        np.abs(integrate(system, x0_state, interval, h, bindings).endpoint() - exact)
    )
    err_fine = np.max(
        np.abs(integrate(system, x0_state, interval, h / 2, bindings).endpoint() - exact)
    )
    if err_fine == 0:
        return float("inf")
    return float(err_coarse / err_fine)
