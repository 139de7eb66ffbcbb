"""Exact Darboux and gauge transformations for second-order operator
families, their symmetric-power and orthogonal lifts, and the
supporting symbolic kernel and numerical verification harness."""

from .expr import (
    DerivationTable,
    Expr,
    GaussRat,
    I,
    KitError,
    Param,
    Radical,
    Sym,
    Var,
    X,
    const,
    differentiate,
    equal,
    evaluate,
    exp,
    is_zero,
    normalize,
    param,
    parse_infix,
    parse_sexpr,
    substitute,
    sym,
    symbol_tower,
    to_pretty,
    to_sexpr,
)
from .linsys import (
    ExprMatrix,
    GaugeMatrix,
    LinearSystem,
    SecondOrderFamily,
    companion,
    family_from_json,
    family_to_json,
    gauge,
    residual,
    system_from_json,
    system_to_json,
)
from .sympow import sym2_operator, sym_group, sym_lie, sym_power_vector, sym_system
from .darboux import (
    DarbouxSeed,
    SeedNotSolution,
    attach_generic_seed,
    auto_level_seed,
    darboux_chain,
    darboux_gauge,
    darboux_potential,
    darboux_solution,
    make_seed,
)
from .tensordt import (
    OrthogonalSystem,
    fundamental_matrices,
    p1_matrix,
    p2_matrix,
    riccati_invert,
    riccati_parametrize,
    so3_from_sym2,
    so3_system_first,
    so3_system_second,
    so3_to_riccati,
    t1_matrix,
    t2_matrix,
)
from .susyqm import (
    ParametricPotential,
    SusyPair,
    hermite,
    matrix_formalism,
    oscillator_states,
    partner_potentials,
    shape_invariance,
    spectrum_sum,
    superpotential,
)
from .apps import (
    FrenetData,
    RigidData,
    application_chain,
    frenet_family,
    perturbed_system,
    rigid_family,
)
from .numverify import (
    Trajectory,
    companion_solution_grid,
    convergence_ratio,
    drift,
    integrate,
    residual_sweep,
)
from .golden import run_checks

__version__ = "0.1.0"
