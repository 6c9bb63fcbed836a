"""Command-line entry point.

Exit codes: 0 success, 1 a trajectory did not settle, 2 configuration error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, example1_config, load_config, with_overrides
from .harness import _certify, execute
from .oracle import contraction_audit, forward_backward_solve, mvi_inequality_min
from .certificates import xi
from .problem import assess


def _common(sp):
    sp.add_argument("--output-dir")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--dt", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fxtmvi", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run-example1", help="reproduce the NCP example"))
    for name, text in (("run", "run an experiment config"),
                       ("certify", "print the settling-time certificate"),
                       ("audit", "probe assumptions and cross-check with the discrete solver")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config")
        _common(sp)
    return ap


def _load(args):
    if args.command == "run-example1":
        cfg = example1_config()
    else:
        cfg = load_config(args.config)
    try:
        return with_overrides(cfg, args.output_dir, args.seed, args.t_end, args.dt)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _audit(cfg) -> int:
    p = cfg.build_problem()
    rep = assess(p, cfg.probe_samples, cfg.probe_radius, cfg.seed)
    print("\n".join(rep.lines()))
    w0 = np.asarray(cfg.initial_conditions[0], dtype=float)
    step = p.mu if rep.step_condition_holds else min(p.mu, rep.zeta_used / rep.lipschitz_used ** 2)
    res = forward_backward_solve(p, w0, step=step, tol=1e-12)
    print(f"oracle.step={step!r}")
    print(f"oracle.converged={res.converged}")
    print(f"oracle.iterations={res.iterations}")
    print(f"oracle.solution={' '.join(format(v, '.12g') for v in res.solution)}")
    if p.known_solution is not None:
        print(f"oracle.error={float(np.linalg.norm(res.solution - p.known_solution))!r}")
    w_star = p.known_solution if p.known_solution is not None else res.solution
    print(f"mvi.min_gap={mvi_inequality_min(p, w_star, seed=cfg.seed)!r}")
    if rep.step_condition_holds:
        factor = xi(p.mu, rep.zeta_used, rep.lipschitz_used)
        audit = contraction_audit(p, w_star, factor, seed=cfg.seed)
        print(f"contraction.worst_violation={audit.worst!r}")
    else:
        print("contraction.skipped=step condition mu L^2 < 2 zeta fails")
    return 0 if res.converged else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "certify":
        p = cfg.build_problem()
        rep = assess(p, cfg.probe_samples, cfg.probe_radius, cfg.seed)
        cert, refusal = _certify(cfg, p, rep)
        print("\n".join(rep.lines()))
        print("\n".join(cert.lines()) if cert is not None else f"refused={refusal}")
        return 0
    if args.command == "audit":
        return _audit(cfg)
    try:
        report = execute(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print("\n".join(report.lines()))
    for tr in report.trajectories:
        if tr.settled_at is None:
            print(f"not settled: {tr.label} ({tr.terminated_reason}, final residual "
                  f"{tr.residual_norms[-1]:.3g})", file=sys.stderr)
    print(f"outputs in {report.output_dir}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
