"""Command-line front end.

Verbs: check (first-order residuals), compile (emit a schedule document),
simulate (replay a document), sweep (figure reproductions), mpf (one hybrid
estimate).  A JSON config file may supply any flag; explicit flags win.

Exit codes: 0 success, 2 argument/config errors, 3 residual or precondition
failures, 4 numerical guard trips.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .compiler import NegTimeRouter, compile_c1, compile_c2, naive_slot_impl
from .document import (
    load_document,
    save_document,
    schedule_from_document,
    schedule_to_document,
)
from .mpf import MPFError, MPFJob, basis_density, c1_branch_builder, c2_branch_builder, mpf_estimate
from .negtime import MagnusGuardError, NegativeTimeError, sym_eulerian_identity_block
from .operators import hermitian_expm
from .schedule import ResidualError, Simulator, check_first_order, simulation_error
from .sweeps import SweepError, observable_from_label, preset, run_sweep, write_csv
from .trotter import TrotterError, mpf_coefficients
from . import experiments as xp

EXIT_PARSE, EXIT_RESIDUAL, EXIT_GUARD = 2, 3, 4

_SEQ_MODEL = {"va": "ising_all2all", "vb": "cr_chain", "vc": "heisenberg_chain"}
_SEQ_N = {"va": 3, "vb": 4, "vc": 4}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _model_and_sequence(args):
    which = args.sequence
    model = xp.build_model(_SEQ_MODEL[which], n=_SEQ_N[which], j=args.j, seed=args.seed)
    seq = xp.builtin_sequence(model, which, args.horizon, args.tp)
    return model, seq


def _cmd_check(args) -> int:
    model, seq = _model_and_sequence(args)
    free_resid, width_resid = check_first_order(seq, include_width=seq.robust)
    print(f"sequence {seq.name}: free-evolution residual = {free_resid:.6e}")
    if seq.robust:
        print(f"sequence {seq.name}: pulse-width residual  = {width_resid:.6e}")
    else:
        print(f"sequence {seq.name}: pulse-width residual not required (ideal-pulse input)")
    from .schedule import residual_tolerance

    tol = residual_tolerance(seq)
    if free_resid > tol or (seq.robust and width_resid > tol):
        print(f"FAIL: residual exceeds tolerance {tol:.2e}", file=sys.stderr)
        return EXIT_RESIDUAL
    print(f"OK (tolerance {tol:.2e})")
    return 0


def _neg_router(args, model, lib) -> NegTimeRouter:
    if args.neg_mode == "oracle":
        return NegTimeRouter("oracle")
    if args.neg_mode == "sym-eulerian":
        cycles = lib.neg_time_cycles()
        return NegTimeRouter(
            "symEulerian",
            lambda tau: sym_eulerian_identity_block(cycles, tau, model.h0))
    raise SweepError(f"unsupported neg-mode {args.neg_mode!r}")


def _cmd_compile(args) -> int:
    model, seq = _model_and_sequence(args)
    if args.p >= 2 and args.neg_mode is None:
        print("error: p >= 2 requires --neg-mode (negative-time segments appear)",
              file=sys.stderr)
        return EXIT_PARSE
    args.neg_mode = args.neg_mode or "oracle"
    sim = Simulator()
    if args.construction == "c2":
        neg = NegTimeRouter("oracle") if args.neg_mode == "oracle" else None
        if neg is None:
            lib = xp.library_for(model, args.tp)
            neg = _neg_router(args, model, lib)
        compiled = compile_c2(seq, args.p, neg, c=args.c)
    else:
        if args.q == 0:
            impl = naive_slot_impl(seq)
            neg = NegTimeRouter("oracle")
            if args.neg_mode != "oracle":
                lib = xp.library_for(model, args.tp)
                neg = _neg_router(args, model, lib)
        else:
            lib = xp.library_for(model, args.tp)
            impl = lib.slot_impl(seq, args.q)
            neg = _neg_router(args, model, lib)
        compiled = compile_c1(seq, args.p, impl, neg)
    sched = compiled.schedule
    target = hermitian_expm(model.h_targ, args.horizon)
    err = simulation_error(sched, model.h0, target, sim=sim)
    if args.construction == "c2":
        betas = compiled.plan.stretch_factors()
    else:
        from .dcg import max_pulse_stretch

        betas = [max(max_pulse_stretch(sched), 1.0)]
    plan = compiled.plan
    doc = schedule_to_document(sched, model.h0, target, notes={
        "sequence": args.sequence, "construction": args.construction,
        "p": args.p, "q": args.q, "neg_mode": args.neg_mode,
        "tp": args.tp, "horizon": args.horizon, "seed": args.seed,
        "slot_count": compiled.slot_count,
        "max_stretch": max(betas), "min_stretch": min(betas),
        "infidelity": err,
        "plan": {"order": plan.order, "blocks": list(plan.blocks),
                 "u": list(plan.u), "c_p": plan.c_p,
                 "max_stretch": plan.max_stretch},
    })
    save_document(args.out, doc)
    print(f"wrote {args.out}: {sched.pulse_count()} pulses, "
          f"duration {sched.duration:.6g}, max stretch {max(betas):.7g}, "
          f"infidelity {err:.3e}")
    return 0


def _cmd_simulate(args) -> int:
    doc = load_document(args.schedule)
    sched, h0, target = schedule_from_document(doc)
    sim = Simulator()
    u = sim.simulate(sched, h0)
    if target is not None:
        err = simulation_error(sched, h0, target, sim=sim)
        print(f"replayed {args.schedule}: {sched.pulse_count()} pulses, "
              f"infidelity vs target = {err:.12e}")
    else:
        print(f"replayed {args.schedule}: {sched.pulse_count()} pulses (no target stored)")
    if args.out:
        from .document import _mat_to_json

        with open(args.out, "w") as fh:
            json.dump({"propagator": _mat_to_json(u.mat)}, fh)
        print(f"wrote propagator to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = preset(args.figure, seed=args.seed)
    result = run_sweep(cfg)
    out = args.out or f"{args.figure}.csv"
    write_csv(out, result)
    print(f"wrote {out} ({len(result.rows)} rows, {result.elapsed:.1f}s)")
    for f in result.fits:
        print(f"  {f.method}: slope {f.slope:+.3f} over [{f.window[0]:.3g}, "
              f"{f.window[1]:.3g}] (r2 = {f.r2:.4f})")
    return 0


def _cmd_mpf(args) -> int:
    plan = mpf_coefficients([int(v) for v in args.m.split(",")])
    which = args.sequence
    model, seq = _model_and_sequence(args)
    if which == "vc":
        builder = c2_branch_builder(seq, plan)
    else:
        lib = xp.library_for(model, args.tp)
        builder = c1_branch_builder(seq, lib.slot_impl(seq, args.q or 1))
    rho0 = basis_density(model.n, args.rho0)
    obs = observable_from_label(model.n, args.observable)
    job = MPFJob(plan, builder, rho0, obs)
    est, exact, err = mpf_estimate(job, model.h0, model.h_targ, args.horizon)
    print(f"mpf-p{len(plan.m)} m={plan.m} b={tuple(round(b, 6) for b in plan.b)}")
    print(f"estimate = {est:.12g}  exact = {exact:.12g}  |error| = {err:.6e}")
    if args.out:
        with open(args.out, "a") as fh:
            if fh.tell() == 0:
                fh.write("x,method,error,meta\n")
            fh.write(f"{args.horizon!r},mpf-p{len(plan.m)},{err!r},"
                     f"estimate={est:.12g};exact={exact:.12g}\n")
    return 0


def build_parser() -> tuple[_Parser, dict]:
    parser = _Parser(prog="pulsekit", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="JSON file of default flag values")
    sub = parser.add_subparsers(dest="verb", required=True)
    verbs = {}

    def common(p):
        p.add_argument("--sequence", choices=("va", "vb", "vc"), default="vc")
        p.add_argument("--horizon", "--T", dest="horizon", type=float, default=0.1)
        p.add_argument("--tp", type=float, default=1e-4)
        p.add_argument("--j", type=float, default=1.0)
        p.add_argument("--seed", type=int, default=5)

    p = verbs["check"] = sub.add_parser(
        "check", help="print first-order residuals of a built-in sequence")
    common(p)
    p.set_defaults(func=_cmd_check)

    p = verbs["compile"] = sub.add_parser(
        "compile", help="compile a sequence and write a schedule document")
    common(p)
    p.add_argument("--construction", choices=("c1", "c2"), default="c2")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--q", type=int, default=0, help="DCG order for c1 slots (0 = naive)")
    p.add_argument("--c", type=float, default=None, help="override c_p for c2")
    p.add_argument("--neg-mode", choices=("oracle", "sym-eulerian"), default=None)
    p.add_argument("--out", default="schedule.json")
    p.set_defaults(func=_cmd_compile)

    p = verbs["simulate"] = sub.add_parser("simulate", help="replay a schedule document")
    p.add_argument("--schedule", required=True)
    p.add_argument("--out", default=None, help="write the propagator matrix as JSON")
    p.set_defaults(func=_cmd_simulate)

    p = verbs["sweep"] = sub.add_parser("sweep", help="run a figure preset and write its CSV")
    p.add_argument("--figure", required=True,
                   choices=("fig3", "fig5", "fig6", "fig8", "fig9"))
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for compatibility; sweeps are single-process")
    p.set_defaults(func=_cmd_sweep)

    p = verbs["mpf"] = sub.add_parser("mpf", help="run one hybrid multi-product estimate")
    common(p)
    p.add_argument("--m", default="1,2", help="comma-separated distinct integers")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--rho0", default="0101")
    p.add_argument("--observable", default="Y1X2")
    p.add_argument("--out", default=None, help="append a CSV row")
    p.set_defaults(func=_cmd_mpf)
    return parser, verbs


def main(argv=None) -> int:
    parser, verbs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error reading config: {exc}", file=sys.stderr)
            return EXIT_PARSE
        # config fills values the command line left at their parser defaults
        sp = verbs[args.verb]
        for key, value in defaults.items():
            key = key.replace("-", "_")
            if hasattr(args, key) and getattr(args, key) == sp.get_default(key):
                setattr(args, key, value)
    try:
        return args.func(args)
    except (ResidualError, MPFError) as exc:
        print(f"residual/precondition failure: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    except (MagnusGuardError,) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (NegativeTimeError, TrotterError, SweepError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
