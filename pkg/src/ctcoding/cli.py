"""Command-line front end: ``ctcoding {regions,broadcast,pliable,combnet}``.

Data goes to standard output (or ``--out``), diagnostics to standard error.
Exit codes: 0 success, 2 argument or domain error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import combnet, pliable, regions
from .broadcast_sim import ChannelParams, Workload, run_trials
from .gf import FieldError, PrimeField

SCHEMA = "ctc/1"
DEFAULT_SEED = 20150101

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_BUDGET = 3


class DomainError(Exception):
    pass


def _emit(text: str, out: str | None):
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _check_eps(args):
    for name in ("eps1", "eps2"):
        e = getattr(args, name)
        if not 0 <= e < 1:
            raise DomainError(f"{name} out of range [0, 1)")


def _check_alpha(alpha):
    if not 0 <= alpha <= 1:
        raise DomainError("alpha out of range [0, 1]")


def cmd_regions(args) -> int:
    _check_eps(args)
    _check_alpha(args.alpha)
    if args.rays < 2:
        raise DomainError("rays must be at least 2")
    ch = regions.derive_channel(args.eps1, args.eps2)
    case = regions.classify_case(ch, args.alpha)
    rows = []
    for which in ("content", "message"):
        for pt in regions.boundary_trace(ch, args.alpha, which, args.rays):
            rows.append((which, args.alpha, args.eps1, args.eps2, pt))
    head = (f"# phi1={ch.phi1:.12f} phi2={ch.phi2:.12f} case={case.label} "
            f"corner_achievable={str(case.corner_achievable).lower()}\n")
    _emit(head + regions.trace_csv(rows), args.out)
    return EXIT_OK


def cmd_broadcast(args) -> int:
    _check_eps(args)
    _check_alpha(args.alpha)
    if args.trials < 1:
        raise DomainError("trials must be at least 1")
    try:
        ch = ChannelParams(args.eps1, args.eps2)
        w = Workload(args.k1, args.k2, args.alpha)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    agg = run_trials(ch, w, args.strategy, args.trials, args.seed, args.mode)
    dch = regions.derive_channel(args.eps1, args.eps2)
    if args.strategy == "content":
        plan = regions.expected_quantities(dch, w.k1, w.k2, w.alpha)
        predicted = {"T": plan.T, "N1": plan.N1, "N2": plan.N2, "kprime1": plan.kprime1,
                     "kprime2": plan.kprime2, "kr1": plan.kr1, "kr2": plan.kr2, "r1": plan.r1, "r2": plan.r2}
    else:
        predicted = regions.expected_message_specific(dch, w.k1, w.k2, w.alpha)
    point = (agg.mean_r1, agg.mean_r2)
    lhs = regions.constraints(args.strategy, dch, w.alpha, point)
    out = {"schema": SCHEMA, "command": "broadcast"}
    out.update(agg.to_json_dict(per_trial=args.per_trial))
    out["predicted"] = predicted
    out["gap_T"] = abs(agg.mean_T - predicted["T"]) / predicted["T"]
    out["region"] = {"constraints": lhs, "binding": max(lhs),
                     "contains": regions.content_region_contains(dch, w.alpha, point) if args.strategy == "content"
                     else regions.message_region_contains(dch, w.alpha, point)}
    _emit(_json(out), args.out)
    return EXIT_OK


def cmd_pliable(args) -> int:
    try:
        field = PrimeField(args.q) if getattr(args, "q", None) else None
    except FieldError as exc:
        raise DomainError(str(exc)) from exc
    out: dict = {"schema": SCHEMA, "command": f"pliable {args.action}"}
    if args.action == "complete":
        try:
            inst = pliable.complete_instance(args.m)
        except ValueError as exc:
            raise DomainError(str(exc)) from exc
        out.update({"m": inst.m, "n": inst.n, "q": field.q,
                    "degree_counts": {str(d): len(js) for d, js in inst.degree_classes().items()}})
        if args.min_k:
            out["k_max"] = args.k_max
            out["min_K"] = pliable.min_code_length(inst, field, args.k_max)
        if args.emit_instance:
            out["instance"] = inst.dumps()
    elif args.action == "check":
        try:
            inst = pliable.PliableInstance.loads(Path(args.instance).read_text())
            a = pliable.load_matrix(Path(args.matrix).read_text())
            plan = pliable.CodingPlan(a)
            if a.cols != inst.m:
                raise ValueError(f"matrix has {a.cols} columns, instance has {inst.m} messages")
        except (OSError, ValueError) as exc:
            raise DomainError(str(exc)) from exc
        clients = []
        for j in range(inst.n):
            rank_ok = pliable.client_satisfied(inst, plan, j)
            oracle = pliable.brute_force_satisfied(inst, plan, j)
            clients.append({"client": j, "missing": sorted(inst.missing[j]), "rank_test": rank_ok, "oracle": oracle})
        out.update({"m": inst.m, "n": inst.n, "q": a.field.q, "K": a.rows, "clients": clients,
                    "all_satisfied": all(c["rank_test"] for c in clients),
                    "agreement": all(c["rank_test"] == c["oracle"] for c in clients)})
    else:
        try:
            rng = np.random.default_rng(args.seed)
            inst = pliable.random_instance(args.m, args.n, args.density, rng)
        except ValueError as exc:
            raise DomainError(str(exc)) from exc
        out.update({"m": inst.m, "n": inst.n, "density": args.density, "seed": args.seed,
                    "degree_counts": {str(d): len(js) for d, js in inst.degree_classes().items()},
                    "instance": inst.dumps()})
    _emit(_json(out), args.out)
    return EXIT_OK


def cmd_combnet(args) -> int:
    try:
        net = combnet.build(args.m, args.k, args.u)
        field = PrimeField(args.q) if args.q else None
        if args.trials < 1:
            raise ValueError("trials must be at least 1")
        report = combnet.gains(net, field, args.trials, args.seed)
    except (ValueError, FieldError) as exc:
        raise DomainError(str(exc)) from exc
    out = {"schema": SCHEMA, "command": "combnet"}
    out.update(report.to_json_dict())
    _emit(_json(out), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctcoding", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("regions", help="boundary traces of both rate regions as CSV")
    r.add_argument("--eps1", type=float, required=True)
    r.add_argument("--eps2", type=float, required=True)
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--rays", type=int, default=64)
    r.add_argument("--out")
    r.set_defaults(func=cmd_regions)

    b = sub.add_parser("broadcast", help="Monte Carlo of a broadcast strategy vs its prediction")
    b.add_argument("--strategy", choices=["content", "message"], default="content")
    b.add_argument("--eps1", type=float, required=True)
    b.add_argument("--eps2", type=float, required=True)
    b.add_argument("--alpha", type=float, required=True)
    b.add_argument("--k1", type=int, required=True)
    b.add_argument("--k2", type=int, required=True)
    b.add_argument("--trials", type=int, default=20)
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--mode", choices=["counting", "coded"], default="counting")
    b.add_argument("--per-trial", action="store_true")
    b.add_argument("--out")
    b.set_defaults(func=cmd_broadcast)

    pl = sub.add_parser("pliable", help="pliable index coding studies")
    psub = pl.add_subparsers(dest="action", required=True)
    c = psub.add_parser("complete")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--q", type=int, default=2)
    c.add_argument("--min-k", action="store_true")
    c.add_argument("--k-max", type=int, default=4)
    c.add_argument("--emit-instance", action="store_true")
    ch = psub.add_parser("check")
    ch.add_argument("--instance", required=True)
    ch.add_argument("--matrix", required=True)
    rnd = psub.add_parser("random")
    rnd.add_argument("--m", type=int, required=True)
    rnd.add_argument("--n", type=int, required=True)
    rnd.add_argument("--density", type=float, required=True)
    rnd.add_argument("--seed", type=int, default=DEFAULT_SEED)
    for sp in (c, ch, rnd):
        sp.add_argument("--out")
    pl.set_defaults(func=cmd_pliable)

    cn = sub.add_parser("combnet", help="gains in the combination network B(m,k,u)")
    cn.add_argument("--m", type=int, required=True)
    cn.add_argument("--k", type=int, required=True)
    cn.add_argument("--u", type=int, required=True)
    cn.add_argument("--q", type=int)
    cn.add_argument("--trials", type=int, default=1000)
    cn.add_argument("--seed", type=int, default=DEFAULT_SEED)
    cn.add_argument("--out")
    cn.set_defaults(func=cmd_combnet)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"ctcoding: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except pliable.BudgetExceeded as exc:
        print(f"ctcoding: budget exceeded: {exc} (limit {exc.limit}, at {exc.at})", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
