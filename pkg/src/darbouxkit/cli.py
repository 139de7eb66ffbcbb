"""Command-line front end.

Subcommands mirror the library layout: darboux, sympow, so3, susy,
frenet, rigid, verify.  Inputs are family JSON files (canonical
S-expression entries) or inline infix expressions ("-x", "2-i*w1");
every artifact is UTF-8 JSON with sorted keys, so runs are
reproducible byte for byte.  Exit status: 0 on success and for passing
verification, 1 when a requested verification or construction fails,
2 on malformed input.  Set DARBOUXKIT_LOG=debug for progress logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from .expr import (
    DerivationTable,
    Expr,
    I,
    KitError,
    ONE,
    ZERO,
    free_names,
    normalize,
    parse_infix,
    parse_sexpr,
    symbol_tower,
    to_pretty,
    to_sexpr,
)
from .linsys import (
    ExprMatrix,
    SecondOrderFamily,
    companion,
    family_from_json,
    family_to_json,
    system_to_json,
)
from .sympow import sym2_operator, sym_system
from .darboux import (
    SeedNotSolution,
    attach_generic_seed,
    auto_level_seed,
    darboux_chain,
    darboux_gauge,
    darboux_potential,
    make_seed,
)
from .tensordt import (
    OmegaOneZero,
    so3_system_first,
    so3_system_second,
    so3_to_riccati,
    t1_matrix,
    t2_matrix,
)
from .susyqm import (
    ParametricPotential,
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
    rigid_family,
)
from .golden import CHECKS, DEFAULT_SEED, VerifyConfig, run_checks

log = logging.getLogger("darbouxkit")


class InputError(Exception):
    """Malformed user input (exit status 2)."""


def _matrix_json(mat: ExprMatrix) -> list[list[str]]:
    return [[to_sexpr(normalize(e)) for e in row] for row in mat.rows]


def _expr_flag(text: str, params: Sequence[str] = ("m",)) -> Expr:
    try:
        if text.lstrip().startswith("("):
            return parse_sexpr(text)
        return parse_infix(text, params=params)
    except KitError as exc:
        raise InputError(f"cannot parse expression {text!r}: {exc}") from exc


def _tower_table_for(exprs: Sequence[Expr], depth: int = 4,
                     base: DerivationTable | None = None) -> DerivationTable:
    """Free symbols appearing in CLI expressions get derivative towers."""
    table = base or DerivationTable()
    entries = {}
    for e in exprs:
        for name in sorted(free_names(normalize(e))):
            if name not in table and name not in entries:
                entries.update(symbol_tower(name, depth))
    return table.extended(entries)


def _load_family(path: str) -> SecondOrderFamily:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return family_from_json(data)
    except (OSError, json.JSONDecodeError, KeyError, KitError, ValueError) as exc:
        raise InputError(f"cannot load family from {path!r}: {exc}") from exc


def _emit(document: dict, out: str | None) -> None:
    text = json.dumps(document, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        log.info("wrote %s", out)
    else:
        print(text)


def _seed_for(family: SecondOrderFamily, args) -> tuple[SecondOrderFamily, object]:
    text = args.theta0
    if text == "generic":
        return attach_generic_seed(family)
    theta0 = _expr_flag(text, params=(family.m_name,))
    family2 = SecondOrderFamily(
        p=family.p, q=family.q, r=family.r, w=family.w,
        table=_tower_table_for([theta0], base=family.table),
        m_name=family.m_name, sqrt_r=family.sqrt_r,
    )
    if getattr(args, "level", None) in (None, "auto"):
        return family2, auto_level_seed(family2, theta0)
    level = _expr_flag(args.level, params=(family.m_name,))
    return family2, make_seed(family2, theta0, level)


# -- darboux -------------------------------------------------------------------


def cmd_darboux_apply(args) -> int:
    family = _load_family(args.family)
    family, seed = _seed_for(family, args)
    new_family = darboux_potential(family, seed)
    g = darboux_gauge(family, seed)
    _emit(
        {
            "command": "darboux apply",
            "input_family": family_to_json(family),
            "theta0": to_sexpr(seed.theta0),
            "level": to_sexpr(seed.level),
            "transformed_family": family_to_json(new_family),
            "transformed_q_pretty": to_pretty(new_family.q),
            "gauge": {
                "p_m": _matrix_json(g.p_m),
                "l_m": _matrix_json(g.l_m),
                "r_factor": _matrix_json(g.r_factor),
                "det": to_sexpr(g.p_m.det()),
            },
        },
        args.out,
    )
    return 0


def cmd_darboux_chain(args) -> int:
    if args.k < 0:
        raise InputError("chain length must be nonnegative")
    family = _load_family(args.family)
    theta0 = _expr_flag(args.theta0, params=(family.m_name,))
    family = SecondOrderFamily(
        p=family.p, q=family.q, r=family.r, w=family.w,
        table=_tower_table_for([theta0], base=family.table),
        m_name=family.m_name, sqrt_r=family.sqrt_r,
    )
    steps = []
    current = family
    for _ in range(args.k):
        seed = auto_level_seed(current, theta0)
        steps.append((current, seed))
        current = darboux_potential(current, seed)
    document = {
        "command": "darboux chain",
        "k": args.k,
        "theta0": to_sexpr(normalize(theta0)),
        "families": [family_to_json(fam) for fam, _ in steps]
        + [family_to_json(current)],
        "levels": [to_sexpr(seed.level) for _, seed in steps],
        "q_pretty": [to_pretty(fam.q) for fam, _ in steps] + [to_pretty(current.q)],
    }
    _emit(document, args.out)
    return 0


# -- sympow --------------------------------------------------------------------


def cmd_sympow_operator(args) -> int:
    family = _load_family(args.family)
    a2, a1, a0 = sym2_operator(family)
    _emit(
        {
            "command": "sympow operator",
            "coefficients": {
                "d2": to_sexpr(a2),
                "d1": to_sexpr(a1),
                "d0": to_sexpr(a0),
            },
            "pretty": f"d3 + ({to_pretty(a2)}) d2 + ({to_pretty(a1)}) d + ({to_pretty(a0)})",
        },
        args.out,
    )
    return 0


def cmd_sympow_system(args) -> int:
    family = _load_family(args.family)
    lifted = sym_system(companion(family), args.power)
    _emit(
        {
            "command": "sympow system",
            "power": args.power,
            "system": system_to_json(lifted),
        },
        args.out,
    )
    return 0


# -- so3 -----------------------------------------------------------------------


def _so3_family_from_args(args) -> tuple[SecondOrderFamily, str]:
    if args.family:
        return _load_family(args.family), args.route
    app = _application_from_args(args)
    return app.family, args.route


def _application_from_args(args):
    route = args.route
    if getattr(args, "rigid", False):
        omega1 = _expr_flag(args.omega1) if args.omega1 else None
        omega2 = _expr_flag(args.omega2) if args.omega2 else None
        if route == "Q":
            if omega1 is None and omega2 is not None:
                omega1 = normalize(-I * (2 - omega2))
            elif omega2 is None and omega1 is not None:
                omega2 = normalize(2 - I * omega1)
            elif omega1 is None and omega2 is None:
                raise InputError("rigid Q route needs --omega1 or --omega2")
        else:
            if omega1 is None:
                raise InputError("rigid S route needs --omega1")
            omega2 = ZERO if omega2 is None else omega2
        table = _tower_table_for([omega1, omega2])
        return rigid_family(RigidData(omega1, omega2, route, table))
    if getattr(args, "frenet", False):
        kappa = _expr_flag(args.kappa) if args.kappa else None
        if kappa is None:
            raise InputError("frenet routes need --kappa")
        tau = _expr_flag(args.tau) if args.tau else (
            normalize(-2 * I) if route == "Q" else None
        )
        if tau is None:
            raise InputError("frenet S route needs --tau")
        table = _tower_table_for([kappa, tau])
        return frenet_family(FrenetData(kappa, tau, route, table))
    raise InputError("need --family, --rigid, or --frenet")


def cmd_so3_lift(args) -> int:
    family, route = _so3_family_from_args(args)
    ortho = so3_system_first(family) if route == "Q" else so3_system_second(family)
    _emit(
        {
            "command": "so3 lift",
            "route": route,
            "f": to_sexpr(ortho.f),
            "g": to_sexpr(ortho.g),
            "h": to_sexpr(ortho.h),
            "system": system_to_json(ortho.system()),
        },
        args.out,
    )
    return 0


def cmd_so3_darboux(args) -> int:
    family, route = _so3_family_from_args(args)
    family, seed = _seed_for(family, args)
    lift = so3_system_first if route == "Q" else so3_system_second
    transform = t1_matrix if route == "Q" else t2_matrix
    t_mat = transform(family, seed)
    new_family = darboux_potential(family, seed)
    _emit(
        {
            "command": "so3 darboux",
            "route": route,
            "theta0": to_sexpr(seed.theta0),
            "transform": _matrix_json(t_mat),
            "base_system": system_to_json(lift(family).system()),
            "transformed_system": system_to_json(lift(new_family).system()),
        },
        args.out,
    )
    return 0


def cmd_so3_riccati(args) -> int:
    if args.family:
        family, route = _so3_family_from_args(args)
        ortho = so3_system_first(family) if route == "Q" else so3_system_second(family)
    else:
        f = _expr_flag(args.f) if args.f else ZERO
        g = _expr_flag(args.g) if args.g else ZERO
        h = _expr_flag(args.h) if args.h else ZERO
        from .tensordt import OrthogonalSystem

        ortho = OrthogonalSystem(f, g, h, _tower_table_for([f, g, h]))
    data = so3_to_riccati(ortho)
    document = {
        "command": "so3 riccati",
        "omega0": to_sexpr(data.omega0),
        "omega1": to_sexpr(data.omega1),
        "mu": to_sexpr(data.mu),
    }
    try:
        b, c = data.linear_form()
        document["linear_form"] = {"d1": to_sexpr(b), "d0": to_sexpr(c)}
    except OmegaOneZero as exc:
        document["linear_form"] = None
        document["note"] = str(exc)
    _emit(document, args.out)
    return 0


# -- susy ----------------------------------------------------------------------


def cmd_susy_partners(args) -> int:
    w = _expr_flag(args.w)
    table = _tower_table_for([w])
    pair = partner_potentials(w, table)
    mf = matrix_formalism(pair, args.order, table)
    _emit(
        {
            "command": "susy partners",
            "w": to_sexpr(pair.w),
            "v_minus": to_sexpr(pair.v_minus),
            "v_plus": to_sexpr(pair.v_plus),
            "v_minus_matrix": _matrix_json(mf.v_minus),
            "v_plus_matrix": _matrix_json(mf.v_plus),
            "pretty": {
                "v_minus": to_pretty(pair.v_minus),
                "v_plus": to_pretty(pair.v_plus),
            },
        },
        args.out,
    )
    return 0


def cmd_susy_spectrum(args) -> int:
    w = _expr_flag(args.w, params=(args.a,))
    f = _expr_flag(args.f, params=(args.a,))
    remainder = _expr_flag(args.remainder, params=(args.a,)) if args.remainder else None
    pot = ParametricPotential(
        w=w, a_name=args.a, f=f, remainder=remainder,
        table=_tower_table_for([w]),
    )
    shift = shape_invariance(pot)
    energies = [spectrum_sum(pot, n) for n in range(args.n + 1)]
    _emit(
        {
            "command": "susy spectrum",
            "a": args.a,
            "shift": to_sexpr(shift),
            "energies": [to_sexpr(e) for e in energies],
            "energies_pretty": [to_pretty(e) for e in energies],
        },
        args.out,
    )
    return 0


def cmd_susy_states(args) -> int:
    states, _table = oscillator_states(args.n, order=args.order)
    _emit(
        {
            "command": "susy states",
            "order": args.order,
            "ground_state_symbol": "psi0",
            "states": [[to_sexpr(c) for c in state] for state in states],
            "hermite_factors": [to_sexpr(hermite(n)) for n in range(args.n + 1)],
        },
        args.out,
    )
    return 0


# -- frenet / rigid --------------------------------------------------------------


def _emit_application(app, name: str, out) -> None:
    _emit(
        {
            "command": name,
            "route": app.route,
            "family": family_to_json(app.family),
            "orthogonal": {
                "f": to_sexpr(app.orthogonal.f),
                "g": to_sexpr(app.orthogonal.g),
                "h": to_sexpr(app.orthogonal.h),
                "system": system_to_json(app.orthogonal.system()),
            },
            "fundamental_matrix": _matrix_json(app.fundamental.matrix),
        },
        out,
    )


def cmd_frenet_build(args) -> int:
    args.frenet = True
    args.rigid = False
    app = _application_from_args(args)
    _emit_application(app, "frenet build", args.out)
    return 0


def cmd_rigid_build(args) -> int:
    args.rigid = True
    args.frenet = False
    app = _application_from_args(args)
    _emit_application(app, "rigid build", args.out)
    return 0


def _emit_chain(app, args, name: str) -> int:
    if args.k < 0:
        raise InputError("chain length must be nonnegative")
    seeds = "generic" if args.theta0 == "generic" else [
        _expr_flag(args.theta0) for _ in range(args.k)
    ]
    links = application_chain(app, seeds, args.k)
    document = {
        "command": name,
        "route": app.route,
        "k": args.k,
        "steps": [
            {
                "family": family_to_json(link.family),
                "orthogonal": {
                    "f": to_sexpr(link.orthogonal.f),
                    "g": to_sexpr(link.orthogonal.g),
                    "h": to_sexpr(link.orthogonal.h),
                },
                "transform": _matrix_json(link.transform) if link.transform else None,
            }
            for link in links
        ],
    }
    _emit(document, args.out)
    return 0


def cmd_frenet_chain(args) -> int:
    args.frenet = True
    args.rigid = False
    app = _application_from_args(args)
    return _emit_chain(app, args, "frenet chain")


def cmd_rigid_chain(args) -> int:
    args.rigid = True
    args.frenet = False
    app = _application_from_args(args)
    return _emit_chain(app, args, "rigid chain")


# -- verify ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    names = args.check if args.check else None
    if args.all:
        names = None
    try:
        config = VerifyConfig(
            step=args.step,
            interval=tuple(args.interval),
            tolerance=args.tol,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    try:
        result = run_checks(names, seed=args.seed, config=config)
    except KeyError as exc:
        raise InputError(str(exc)) from exc
    result["command"] = "verify"
    _emit(result, args.out)
    return 0 if result["pass"] else 1


# -- parser -----------------------------------------------------------------------


def _interval(text: str) -> list[float]:
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("interval must be 'a,b'") from exc
    if hi <= lo:
        raise argparse.ArgumentTypeError("interval must be increasing")
    return [lo, hi]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darbouxkit",
        description="Construct and verify Darboux/gauge transformations of "
        "second-order operator families and their orthogonal lifts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", help="write the JSON artifact here instead of stdout")

    # darboux
    p_darboux = sub.add_parser("darboux", help="classical transformation")
    sub_darboux = p_darboux.add_subparsers(dest="subcommand", required=True)
    p_apply = sub_darboux.add_parser("apply", help="one transformation step")
    p_apply.add_argument("--family", required=True, help="family JSON path")
    p_apply.add_argument("--theta0", required=True,
                         help="seed log-derivative (infix), or 'generic'")
    p_apply.add_argument("--level", default="auto",
                         help="parameter value the seed certifies (default: solve for it)")
    add_out(p_apply)
    p_apply.set_defaults(func=cmd_darboux_apply)
    p_chain = sub_darboux.add_parser("chain", help="iterate the transformation")
    p_chain.add_argument("--family", required=True)
    p_chain.add_argument("--theta0", required=True)
    p_chain.add_argument("--k", type=int, default=1)
    add_out(p_chain)
    p_chain.set_defaults(func=cmd_darboux_chain)

    # sympow
    p_sympow = sub.add_parser("sympow", help="symmetric-power constructions")
    sub_sympow = p_sympow.add_subparsers(dest="subcommand", required=True)
    p_op = sub_sympow.add_parser("operator", help="third-order lifted operator")
    p_op.add_argument("--family", required=True)
    add_out(p_op)
    p_op.set_defaults(func=cmd_sympow_operator)
    p_sys = sub_sympow.add_parser("system", help="lifted first-order system")
    p_sys.add_argument("--family", required=True)
    p_sys.add_argument("--power", type=int, default=2)
    add_out(p_sys)
    p_sys.set_defaults(func=cmd_sympow_system)

    # so3
    p_so3 = sub.add_parser("so3", help="orthogonal systems")
    sub_so3 = p_so3.add_subparsers(dest="subcommand", required=True)

    def add_so3_source(p):
        p.add_argument("--family", help="family JSON path")
        p.add_argument("--route", choices=("Q", "S"), required=True)
        p.add_argument("--rigid", action="store_true")
        p.add_argument("--frenet", action="store_true")
        p.add_argument("--omega1")
        p.add_argument("--omega2")
        p.add_argument("--kappa")
        p.add_argument("--tau")

    p_lift = sub_so3.add_parser("lift", help="orthogonal lift of a family")
    add_so3_source(p_lift)
    add_out(p_lift)
    p_lift.set_defaults(func=cmd_so3_lift)
    p_sdar = sub_so3.add_parser("darboux", help="lifted transformation matrix")
    add_so3_source(p_sdar)
    p_sdar.add_argument("--theta0", default="generic")
    p_sdar.add_argument("--level", default="auto")
    add_out(p_sdar)
    p_sdar.set_defaults(func=cmd_so3_darboux)
    p_ric = sub_so3.add_parser("riccati", help="Riccati reduction data")
    add_so3_source(p_ric)
    p_ric.add_argument("--f")
    p_ric.add_argument("--g")
    p_ric.add_argument("--h")
    add_out(p_ric)
    p_ric.set_defaults(func=cmd_so3_riccati)

    # susy
    p_susy = sub.add_parser("susy", help="supersymmetric partner machinery")
    sub_susy = p_susy.add_subparsers(dest="subcommand", required=True)
    p_part = sub_susy.add_parser("partners", help="partner potentials")
    p_part.add_argument("--w", required=True, help="superpotential (infix)")
    p_part.add_argument("--order", type=int, choices=(2, 3), default=2)
    add_out(p_part)
    p_part.set_defaults(func=cmd_susy_partners)
    p_spec = sub_susy.add_parser("spectrum", help="shape-invariant spectrum")
    p_spec.add_argument("--n", type=int, required=True)
    p_spec.add_argument("--w", default="a*x")
    p_spec.add_argument("--a", default="a", help="parameter name")
    p_spec.add_argument("--f", default="a", help="reparametrization map")
    p_spec.add_argument("--remainder", default=None)
    add_out(p_spec)
    p_spec.set_defaults(func=cmd_susy_spectrum)
    p_states = sub_susy.add_parser("states", help="oscillator ladder states")
    p_states.add_argument("--n", type=int, required=True)
    p_states.add_argument("--order", type=int, choices=(2, 3), default=2)
    add_out(p_states)
    p_states.set_defaults(func=cmd_susy_states)

    # frenet / rigid
    for name, build_fn, chain_fn in (
        ("frenet", cmd_frenet_build, cmd_frenet_chain),
        ("rigid", cmd_rigid_build, cmd_rigid_chain),
    ):
        p_app = sub.add_parser(name, help=f"{name} application")
        sub_app = p_app.add_subparsers(dest="subcommand", required=True)
        p_build = sub_app.add_parser("build", help="family + orthogonal system")
        p_build.add_argument("--route", choices=("Q", "S"), required=True)
        p_build.add_argument("--kappa")
        p_build.add_argument("--tau")
        p_build.add_argument("--omega1")
        p_build.add_argument("--omega2")
        add_out(p_build)
        p_build.set_defaults(func=build_fn)
        p_ch = sub_app.add_parser("chain", help="iterated transformations")
        p_ch.add_argument("--route", choices=("Q", "S"), required=True)
        p_ch.add_argument("--kappa")
        p_ch.add_argument("--tau")
        p_ch.add_argument("--omega1")
        p_ch.add_argument("--omega2")
        p_ch.add_argument("--k", type=int, default=1)
        p_ch.add_argument("--theta0", default="generic")
        add_out(p_ch)
        p_ch.set_defaults(func=chain_fn)

    # verify
    p_verify = sub.add_parser("verify", help="run the shipped verification suite")
    p_verify.add_argument("--all", action="store_true", help="run every check")
    p_verify.add_argument("--check", action="append", choices=sorted(CHECKS),
                          help="run one named check (repeatable)")
    p_verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_verify.add_argument("--tol", type=float, default=1e-8)
    p_verify.add_argument("--step", type=float, default=1e-3)
    p_verify.add_argument("--interval", type=_interval, default=[0.0, 1.0])
    add_out(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    return parser


_EXPRESSION_FLAGS = {
    "--theta0", "--level", "--w", "--f", "--g", "--h",
    "--kappa", "--tau", "--omega1", "--omega2", "--remainder",
}


def _join_expression_flags(argv: list[str]) -> list[str]:
    """Merge ``--theta0 -x`` into ``--theta0=-x``.

    Expression values routinely start with a minus sign, which argparse
    would otherwise read as an option.
    """
    out: list[str] = []
    skip = False
    for k, token in enumerate(argv):
        if skip:
            skip = False
            continue
        if (
            token in _EXPRESSION_FLAGS
            and k + 1 < len(argv)
            and argv[k + 1].startswith("-")
        ):
            out.append(f"{token}={argv[k + 1]}")
            skip = True
        else:
            out.append(token)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("DARBOUXKIT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        stream=sys.stderr, format="%(name)s: %(message)s")
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_join_expression_flags(argv))
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(json.dumps({"error": "bad-input", "detail": str(exc)}), file=sys.stderr)
        return 2
    except (SeedNotSolution, KitError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
