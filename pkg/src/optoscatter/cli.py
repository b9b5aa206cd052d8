"""Command-line interface: ``optoscatter <subcommand> [options]``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
Data goes to ``--out`` (default standard output); diagnostics to standard error.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import sys
import warnings

import numpy as np

from . import __version__, dynamics, oracle, sweep
from .errors import NoStationaryStateError, NumericalError, ValidationError
from .params import PARAM_KEYS, SystemParams, load_params, validate
from .rates import ThermalEnv, sideband_rates, thermal_rates, transition_rates

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _global_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    grp = parent.add_argument_group("common options")
    grp.add_argument("--config", help="flat key = value parameter file")
    for key in PARAM_KEYS:
        grp.add_argument(f"--{key}", default=None,
                         help="cavity or atom" if key == "pump" else "override, units of the mechanical frequency")
    grp.add_argument("--out", default="-", help="output path, '-' for standard output")
    grp.add_argument("--threads", type=int, default=1)
    grp.add_argument("--seed", type=int, default=None, help="accepted for compatibility; results are deterministic")
    grp.add_argument("--eta-max", type=float, default=0.3, help="perturbative threshold for chi")
    return parent


def _thermal_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--m_th", type=float, default=0.0, help="bath occupation")
    parent.add_argument("--gamma_th", type=float, default=0.0, help="mechanical damping rate")
    return parent


def _truncation_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--n-cav-max", type=int, default=2)
    parent.add_argument("--n-mech-max", type=int, default=14)
    parent.add_argument("--max-dim", type=int, default=oracle.MAX_DIM)
    return parent


def build_parser() -> argparse.ArgumentParser:
    common, thermal, trunc = _global_options(), _thermal_options(), _truncation_options()
    parser = _Parser(prog="optoscatter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("rates", parents=[common, thermal], help="closed-form rates at one point")

    p = sub.add_parser("sweep", parents=[common], help="rates over a detuning grid, as CSV")
    p.add_argument("--delta-cav-axis", nargs=3, type=float, metavar=("MIN", "MAX", "N"), required=True)
    p.add_argument("--delta-atom-axis", nargs=3, type=float, metavar=("MIN", "MAX", "N"), required=True)

    p = sub.add_parser("evolve", parents=[common], help="phonon rate-equation trajectory, as CSV")
    p.add_argument("--m0", type=int, default=5, help="initial Fock level")
    p.add_argument("--truncation", "-M", type=int, default=None, help="top phonon level")
    p.add_argument("--t-final", type=float, default=None, help="default: 20 / gamma_cool")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--a-plus", type=float, default=None, help="use this A+ instead of the computed one")
    p.add_argument("--a-minus", type=float, default=None)

    p = sub.add_parser("oracle", parents=[common, thermal, trunc], help="master-equation run, as CSV")
    p.add_argument("--t-final", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--method", choices=("rk4", "stiff"), default="rk4")
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--m0", type=int, default=0, help="initial mechanical Fock state")
    p.add_argument("--steady", choices=("solve", "evolve", "none"), default="solve",
                   help="steady-state method for the summary block")

    p = sub.add_parser("compare", parents=[common, thermal, trunc], help="oracle against closed form")
    p.add_argument("--m0", type=int, default=1)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--no-cutoff-check", action="store_true")

    p = sub.add_parser("resonances", parents=[common], help="dressed-state resonance curves, as CSV")
    p.add_argument("--delta-cav-axis", nargs=3, type=float, metavar=("MIN", "MAX", "N"), required=True)
    p.add_argument("--target", type=float, action="append", default=None,
                   help="dressed frequency to match (repeatable; default 0, -1, 1)")
    p.add_argument("--branch", choices=("plus", "minus", "both"), default="both")
    return parser


def _params(args) -> SystemParams:
    overrides = {k: getattr(args, k) for k in PARAM_KEYS}
    params = load_params(args.config, overrides)
    for w in validate(params, args.eta_max):
        print(f"warning: {w}", file=sys.stderr)
    return params


def _env(args) -> ThermalEnv | None:
    if args.gamma_th == 0 and args.m_th == 0:
        return None
    return ThermalEnv(m_th=args.m_th, gamma_th=args.gamma_th)


def _truncation(args) -> oracle.Truncation:
    return oracle.Truncation(args.n_cav_max, args.n_mech_max, args.max_dim)


def _axis(values) -> sweep.Axis:
    lo, hi, n = values
    if n != int(n):
        raise ValidationError("axis count must be an integer")
    return sweep.Axis(lo, hi, int(n))


def _cmd_rates(args, out):
    params = _params(args)
    r = transition_rates(params)
    values = {k: getattr(r, k) for k in r.__dataclass_fields__}
    values["m_inf"] = sweep.M_INF_SENTINEL if r.m_inf is None else r.m_inf
    values["heating"] = r.heating
    if r.m_inf is not None:
        sb = sideband_rates(r, r.m_inf)
        values.update({k: getattr(sb, k) for k in sb.__dataclass_fields__})
    env = _env(args)
    if env is not None:
        th = thermal_rates(r, env)
        values.update({k: getattr(th, k) for k in th.__dataclass_fields__})
        if th.m_inf_prime is None:
            values["m_inf_prime"] = sweep.M_INF_SENTINEL
    out.write(oracle.summary_block(values))


def _cmd_sweep(args, out):
    params = _params(args)
    grid = sweep.SweepGrid(_axis(args.delta_cav_axis), _axis(args.delta_atom_axis), params)
    result = sweep.run_sweep(grid, threads=args.threads)
    n_flag = int(result.column("flag").sum())
    if n_flag:
        print(f"warning: {n_flag} grid point(s) flagged (vanishing denominator)", file=sys.stderr)
    sweep.write_sweep_csv(result, out)


def _cmd_evolve(args, out):
    if args.a_plus is not None or args.a_minus is not None:
        if args.a_plus is None or args.a_minus is None:
            raise ValidationError("give both --a-plus and --a-minus")
        ladder = (args.a_plus, args.a_minus)
    else:
        r = transition_rates(_params(args))
        ladder = (r.a_plus, r.a_minus)
    a_plus, a_minus = ladder
    gamma_cool = a_minus - a_plus
    if args.t_final is None:
        if not gamma_cool > 0:
            raise ValidationError("heating ladder: give --t-final explicitly")
        t_final = 20.0 / gamma_cool
    else:
        t_final = args.t_final
    if args.truncation is not None:
        M = args.truncation
    elif gamma_cool > 0:
        M = max(dynamics.adequate_truncation(ladder, 1e-9), args.m0 + 20)
    else:
        raise ValidationError("heating ladder: give --truncation explicitly")
    dt = args.dt if args.dt is not None else 0.5 * dynamics.STABILITY_BOUND / (M * (a_plus + a_minus) or 1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        traj = dynamics.population_trajectory(ladder, dynamics.PhononDistribution.fock(args.m0, M),
                                              t_final, dt, n_samples=args.samples)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out.write(f"# a_plus = {sweep.format_number(a_plus)}\n# a_minus = {sweep.format_number(a_minus)}\n")
    dynamics.write_trajectory_csv(traj, out)


def _cmd_oracle(args, out):
    params = _params(args)
    env, trunc = _env(args), _truncation(args)
    rho0 = oracle.QuantumState.product(trunc, mech=args.m0)
    ev = oracle.evolve(params, env, trunc, rho0, args.t_final, args.dt,
                       n_samples=args.samples, method=args.method)
    ops = oracle.build_operators(trunc)
    summary = {"method": args.method, "dt": ev.dt, "dimension": trunc.dim,
               "final_n_cav": float(ev.n_cav[-1]), "final_n_mech": float(ev.n_mech[-1]),
               "final_p_excited": float(ev.p_excited[-1])}
    if args.steady != "none":
        ss = oracle.steady_state(params, env, trunc, method=args.steady)
        summary.update({"steady_method": args.steady, "ss_n_cav": ss.expect(ops.n_cav),
                        "ss_n_mech": ss.expect(ops.n_mech), "ss_p_excited": ss.expect(ops.p_excited)})
    for line in oracle.summary_block(summary).splitlines():
        out.write(f"# {line}\n")
    oracle.write_series_csv(ev, out)


def _cmd_compare(args, out):
    params = _params(args)
    cmp = oracle.compare(params, _env(args), _truncation(args), m0=args.m0, n_samples=args.samples,
                         check_cutoff=not args.no_cutoff_check)
    if cmp.fit.flagged:
        print(f"warning: rate fit flagged: {cmp.fit.message}", file=sys.stderr)
    report = {k: (float(v) if isinstance(v, np.floating) else v) for k, v in cmp.report().items()}
    out.write(oracle.summary_block(report))


def _cmd_resonances(args, out):
    params = _params(args)
    axis = _axis(args.delta_cav_axis)
    targets = args.target if args.target else [0.0, -1.0, 1.0]
    branches = ("plus", "minus") if args.branch == "both" else (args.branch,)
    curves = [(b, t, sweep.resonance_curves(params, t, b, axis)) for t in targets for b in branches]
    sweep.write_resonance_csv(curves, out, [f"g = {params.g}"])


_COMMANDS = {
    "rates": _cmd_rates,
    "sweep": _cmd_sweep,
    "evolve": _cmd_evolve,
    "oracle": _cmd_oracle,
    "compare": _cmd_compare,
    "resonances": _cmd_resonances,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    buffer = io.StringIO()
    try:
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        _COMMANDS[args.command](args, buffer)
    except (ValidationError, NoStationaryStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.out == "-":
            sys.stdout.write(buffer.getvalue())
            sys.stdout.flush()
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buffer.getvalue())
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    with contextlib.suppress(BrokenPipeError):
        sys.exit(main())
