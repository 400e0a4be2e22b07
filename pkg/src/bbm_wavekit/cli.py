"""Command line entry point: bbm-wavekit <command> [options].

Exit codes: 0 pass, 1 check failure, 2 usage or configuration error,
3 numerical failure.
"""
import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import bbm_solver, experiment, phase_theory
from .dyson_normal_form import QuadratureError, dyson_terms
from .experiment import ConfigError, ExperimentConfig, NumericalFailure
from .spectral_core import SpectralField, TorusSpec, sobolev_norm
from .stochastic_data import profile_by_name, sample_initial_datum
from .tree_calculus.resonance import certify_window

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _common(p, config_required=False):
    p.add_argument("--config", required=config_required, help="INI experiment file")
    p.add_argument("--seed", type=int, default=None, help="overrides BBM_SEED and the config")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--override", action="append", default=[], metavar="KEY=VAL")


def build_parser():
    parser = _Parser(prog="bbm-wavekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("correlate", "simulate", "dyson"):
        _common(sub.add_parser(name), config_required=True)
    _common(sub.add_parser("trees"))
    ph = sub.add_parser("phase")
    _common(ph)
    ph.add_argument("--xi-list", default="0,0.5,1,2,5")
    ph.add_argument("--profile", default="inverse_bracket")
    ph.add_argument("--L", default="20", help="torus size; rational L^2 may be given as L2:801/2")
    ph.add_argument("--K", type=int, default=None, help="default 50 L")
    ph.add_argument("--compare", choices=("closed", "quadrature", "discrete"), default="discrete")
    rs = sub.add_parser("resonance")
    _common(rs)
    rs.add_argument("--L", default="sqrt2", help="L, or L2:p/q for a rational L^2")
    rs.add_argument("--K", type=int, default=8)
    su = sub.add_parser("suite")
    _common(su)
    su.add_argument("name", choices=sorted(experiment.SUITES))
    return parser


def _L_squared(text):
    if text.startswith("L2:"):
        return Fraction(text[3:])
    if text == "sqrt2":
        return Fraction(2)
    return Fraction(text) ** 2


def _load(args):
    overrides = list(args.override)
    seed = args.seed if args.seed is not None else os.environ.get("BBM_SEED")
    if seed is not None:
        overrides.append(f"seed={int(seed)}")
    if args.out:
        overrides.append(f"output_path={args.out}")
    return ExperimentConfig.from_file(args.config, overrides)


def cmd_correlate(args):
    cfg = _load(args)
    records = experiment.run_correlation(cfg, workers=args.workers)
    cert = certify_window(cfg.spec)
    experiment.emit_report(records, cfg.output_path, cfg, cert)
    for r in records:
        print(f"t={r.t_slow:g} xi={r.xi:.6g} est={r.est:.6g} pred={r.pred:.6g} "
              f"stderr={r.stderr:.3g}")
    return EXIT_OK


def cmd_simulate(args):
    cfg = _load(args)
    a = sample_initial_datum(cfg.spec, cfg.profile, cfg.seed)
    T = max(abs(t) for t in cfg.t_slow_list) / (cfg.epsilon ** 2 if cfg.epsilon else 1.0)
    scfg = bbm_solver.SolverConfig(cfg.epsilon, dt=cfg.dt, t_final=T, allow_long=True)
    traj = bbm_solver.evolve(a, scfg, times=np.linspace(0.0, T, 11))
    if args.out or cfg.output_path:
        bbm_solver.dump_trajectory(traj, args.out or cfg.output_path)
    drift = traj.h1_drift()
    print(json.dumps({"t_final": T, "h1_drift": drift}))
    return EXIT_OK if drift <= 1e-8 else EXIT_CHECK


def cmd_dyson(args):
    cfg = _load(args)
    N = 6 if cfg.N is None else cfg.N
    a = sample_initial_datum(cfg.spec, cfg.profile, cfg.seed)
    t = max(abs(t) for t in cfg.t_slow_list) / (cfg.epsilon ** 2 if cfg.epsilon else 1.0)
    ref = SpectralField(cfg.spec, bbm_solver.advance(a.amps, cfg.spec, cfg.epsilon, t,
                                                     cfg.dt or bbm_solver.default_dt(cfg.epsilon))[0])
    stack = dyson_terms(a, N, t, cfg.epsilon)
    rows = [{"N": n, "remainder": sobolev_norm(ref - stack.partial_sum(n), cfg.s_prime)}
            for n in range(N + 1)]
    print(json.dumps(rows))
    return EXIT_OK


def _print_verdict(v):
    print(json.dumps(v, indent=2))
    return EXIT_OK if v["passed"] else EXIT_CHECK


def cmd_trees(args):
    return _print_verdict(experiment.run_suite("trees"))


def cmd_suite(args):
    return _print_verdict(experiment.run_suite(args.name))


def cmd_phase(args):
    L2 = _L_squared(args.L)
    L = math.sqrt(L2)
    spec = TorusSpec(L2, args.K or int(round(50 * L)))
    prof = profile_by_name(args.profile)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["xi", "phi_closed", "phi_quad", "rate_discrete", "gap"])
        for item in args.xi_list.split(","):
            x = float(item)
            k = int(round(x * L))
            xi = k / L
            closed = float(phase_theory.phi_closed(xi)) if prof.kind == "inverse_bracket" else float("nan")
            quad = phase_theory.phi_continuum(xi, prof)
            rate = 0.0 if k == 0 else math.copysign(phase_theory.phase_rate(spec, prof)[abs(k) - 1], k)
            if args.compare == "discrete":
                gap = abs(rate - xi * quad)
            elif args.compare == "closed":
                gap = abs(quad - closed)
            else:
                gap = abs(quad - closed) if math.isfinite(closed) else 0.0
            w.writerow(["%.17g" % v for v in (xi, closed, quad, rate, gap)])
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_resonance(args):
    spec = TorusSpec(_L_squared(args.L), args.K)
    cert = certify_window(spec)
    print(json.dumps(cert.summary(), indent=2))
    return EXIT_OK if cert.certified else EXIT_CHECK


COMMANDS = {"correlate": cmd_correlate, "simulate": cmd_simulate, "dyson": cmd_dyson,
            "trees": cmd_trees, "phase": cmd_phase, "resonance": cmd_resonance,
            "suite": cmd_suite}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, QuadratureError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
