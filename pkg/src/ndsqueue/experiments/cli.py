"""Command line entry point: ``ndsqueue <command> ...`` or ``python -m ndsqueue``.

Exit status is 0 on success, 1 for usage errors and 2 when a run fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from .. import diffusion, oracles
from ..distributions import ParameterError, RandomStream
from ..sim import SimConfig, simulate
from .config import ExperimentConfig, load_config
from .recipes import FIGURES, UnknownFigureError, reproduce
from .runner import rows_to_csv, run_experiment, write_rows


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def _words(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{x:.12g}" if isinstance(x, float) else x for x in r])
    return buf.getvalue()


# --- commands --------------------------------------------------------------------


def cmd_simulate(args) -> int:
    loads = dict(alphas=args.alpha or (), rhos=args.rho or ())
    cfg = ExperimentConfig("simulate", args.k, args.policy, disciplines=args.discipline, dists=args.dist,
                           replications=args.reps, arrivals_per_rep=args.arrivals, seed_base=args.seed,
                           warmup_fraction=args.warmup, engine=args.engine, **loads)
    if args.trace:
        pts = cfg.grid()
        if len(pts) != 1:
            raise UsageError("--trace needs a single grid point")
        p = pts[0]
        sc = SimConfig(k=p.k, lam=p.lam, service_dist=p.dist, discipline=p.discipline, policy=p.policy,
                       horizon_arrivals=args.arrivals, warmup_fraction=args.warmup, seed=args.seed,
                       stream_id=0, record_every=args.trace_every)
        simulate(sc, engine=args.engine, stream=RandomStream(args.seed, 0)).trace.to_csv(args.trace)
    rows = run_experiment(cfg)
    if args.out:
        write_rows(rows, args.out, {"command": "simulate", "replications": args.reps,
                                    "arrivals_per_rep": args.arrivals, "seed_base": args.seed,
                                    "warmup_fraction": args.warmup})
    else:
        sys.stdout.write(rows_to_csv(rows))
    return 0


def cmd_diffusion(args) -> int:
    what = args.what
    if what == "density":
        lo, hi, n = args.grid
        grid = np.linspace(lo, hi, int(n))
        dens = diffusion.closed_form(args.policy, args.alpha)
        rows = list(zip(grid.tolist(), np.atleast_1d(dens.pdf(grid)).tolist()))
    elif what == "mean":
        rows = [(a, diffusion.mean_of(args.policy, a)) for a in args.alphas]
    elif what == "ratio":
        rows = [(a, diffusion.mean_ratio(args.num, args.den, a)) for a in args.alphas]
    else:  # sup
        res = diffusion.ratio_sup(args.num, args.den)
        _emit(_table(["alpha_star", "sup_ratio"], [(res.alpha_star, res.sup_ratio)]), args.out)
        return 0
    _emit(_table(["alpha_or_n", "value"], rows), args.out)
    return 0


def cmd_oracle(args) -> int:
    kind = args.kind
    if kind == "mmk":
        pi, mean = oracles.mmk_stationary(args.lam, args.mu, args.k)
        rows = [("mean_N", mean), ("mean_N_per_k", mean / args.k), ("P_wait", float(pi[args.k:].sum())),
                ("support_size", len(pi))]
    elif kind == "hitting":
        chain = oracles.BirthDeathChain(len(args.up), args.up, args.down)
        rows = [("hitting_probability", oracles.hitting_probability(chain))]
    elif kind == "poisson":
        rows = [("bound", oracles.poisson_tail_bound(args.mean, args.x)),
                ("exact", oracles.poisson_tail_exact(args.mean, args.x))]
    elif kind == "excursion":
        st = oracles.ExcursionStats(args.arrival, args.service)
        rows = [("theta_star", st.theta_star), ("phi_min", st.phi_min),
                ("area_center", oracles.excursion_area_center(st))]
        rows += [(f"tail_bound_t={t:g}", oracles.excursion_tail_bound(st, t)) for t in args.t]
    else:  # pod
        rows = [(f"level={lev}", diffusion.pod_meanfield_tail(args.rho, lev, args.d)) for lev in args.levels]
    _emit(_table(["name", "value"], rows), args.out)
    return 0


def cmd_experiment(args) -> int:
    configs = load_config(args.config)
    if args.section:
        configs = [c for c in configs if c.experiment_id == args.section]
        if not configs:
            raise UsageError(f"no section [{args.section}] in {args.config}")
    for cfg in configs:
        rows = run_experiment(cfg)
        out = args.out if (args.out and len(configs) == 1) else cfg.output
        meta = {"experiment": cfg.experiment_id, "replications": cfg.replications,
                "arrivals_per_rep": cfg.arrivals_per_rep, "seed_base": cfg.seed_base,
                "warmup_fraction": cfg.warmup_fraction}
        if out:
            write_rows(rows, out, meta)
        else:
            sys.stdout.write(rows_to_csv(rows))
    return 0


def cmd_reproduce(args) -> int:
    if args.figure not in FIGURES:
        raise UsageError(f"unknown figure {args.figure!r}; expected one of {', '.join(FIGURES)}")
    rows, meta = reproduce(args.figure, reps=args.reps, arrivals=args.arrivals, seed=args.seed)
    if args.out:
        write_rows(rows, args.out, meta)
    else:
        sys.stdout.write(rows_to_csv(rows))
    return 0


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ndsqueue", description="Load balancing in the non-degenerate slowdown regime.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", help="simulate a grid of configurations")
    s.add_argument("--k", type=_ints, required=True)
    load = s.add_mutually_exclusive_group(required=True)
    load.add_argument("--alpha", type=_floats)
    load.add_argument("--rho", type=_floats)
    s.add_argument("--policy", type=_words, default=["jsq"])
    s.add_argument("--discipline", type=_words, default=["fifo"])
    s.add_argument("--dist", type=_words, default=["exp"])
    s.add_argument("--arrivals", type=int, default=1_000_000)
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--warmup", type=float, default=0.2)
    s.add_argument("--engine", choices=["auto", "ctmc", "event"], default="auto")
    s.add_argument("--trace", help="also write an event-sampled trace CSV of replication 0")
    s.add_argument("--trace-every", type=int, default=100)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("diffusion", help="densities, means and ratios of the limit diffusions")
    d.add_argument("what", choices=["density", "mean", "ratio", "sup"])
    d.add_argument("--policy", default="jsq")
    d.add_argument("--alpha", type=float, default=0.5)
    d.add_argument("--alphas", type=_floats, default=[0.1, 0.2, 0.5, 1.0, 2.0, 5.0])
    d.add_argument("--grid", type=_floats, default=[1.0, 10.0, 91], help="lo,hi,count for density")
    d.add_argument("--num", default="jsq")
    d.add_argument("--den", default="cq")
    d.add_argument("--out")
    d.set_defaults(func=cmd_diffusion)

    o = sub.add_parser("oracle", help="exact reference values")
    o.add_argument("kind", choices=["mmk", "hitting", "poisson", "excursion", "pod"])
    o.add_argument("--lam", type=float, default=0.5)
    o.add_argument("--mu", type=float, default=1.0)
    o.add_argument("--k", type=int, default=1)
    o.add_argument("--up", type=_floats, default=[1.0, 1.0, 1.0, 1.0])
    o.add_argument("--down", type=_floats, default=[1.0, 1.0, 1.0, 1.0])
    o.add_argument("--mean", type=float, default=1.0)
    o.add_argument("--x", type=float, default=10.0)
    o.add_argument("--arrival", type=float, default=1.0)
    o.add_argument("--service", type=float, default=2.0)
    o.add_argument("--t", type=_floats, default=[1.0, 2.0, 5.0, 10.0])
    o.add_argument("--rho", type=float, default=0.9)
    o.add_argument("--d", type=int, default=2)
    o.add_argument("--levels", type=_ints, default=[1, 2, 3, 4, 5])
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("experiment", help="run the experiments in a config file")
    e.add_argument("config")
    e.add_argument("--section")
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("reproduce", help="emit the data grid behind a figure")
    r.add_argument("figure")
    r.add_argument("--reps", type=int, default=10)
    r.add_argument("--arrivals", type=int, default=1_000_000)
    r.add_argument("--seed", type=int, default=1)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"ndsqueue: usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, UnknownFigureError, ParameterError, diffusion.DomainError) as exc:
        print(f"ndsqueue: usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit status
        print(f"ndsqueue: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
