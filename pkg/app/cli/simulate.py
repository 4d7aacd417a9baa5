"""
    Подкоманда simulate: Монте-Карло оценка P_e в одной точке

    Публичный API:
        - register(subparsers) -> None
        - run(args) -> int

    Примечания:
        - CSV: rule,estimate,stderr,errors,trials,ties; одна строка на правило
        - --rule both прогоняет оба правила на общих случайных числах (один seed)
        - --trace пишет первые monte_carlo.trace_limit испытаний кодирования
"""

from __future__ import annotations
from typing import Any, Dict, List, Optional, Sequence

import argparse

from app.cli.common import (
    add_crowd_args,
    add_matrix_args,
    add_mc_args,
    build_crowd,
    check_shape,
    emit_text,
    matrix_inputs,
    parse_int_list,
    resolve_matrix,
)
from app.core.config import get_config
from app.core.errors import ValidationError
from app.sim.engine import McEstimate, Rule, SimConfig, run_mc, write_trace
from app.storage.artifacts import render_csv

SIMULATE_HEADER = ("rule", "estimate", "stderr", "errors", "trials", "ties")


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("simulate", help="Монте-Карло оценка P_e")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    add_matrix_args(p)
    add_crowd_args(p)
    add_mc_args(p)
    p.add_argument("--rule", choices=["coding", "majority", "both"], default="both")
    p.add_argument("--group-map", default=None, help="номер бита для каждого работника (большинство)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", default=None, help="CSV-трасса испытаний кодирования")
    p.add_argument("--out")
    p.set_defaults(func=run)


def _rules(name: str) -> List[Rule]:
    if name == "both":
        return [Rule.CODING, Rule.MAJORITY]
    return [Rule(name)]


def run(args: argparse.Namespace) -> int:
    rules = _rules(args.rule)
    a, inputs = resolve_matrix(args, args.m, args.n)
    if a is not None:
        check_shape(a, args.m, args.n)
    if Rule.CODING in rules and a is None:
        raise ValidationError("Для кодирования нужна --matrix или --columns")
    n: Optional[int] = a.num_workers if a is not None else args.n
    if n is None:
        raise ValidationError("Нужны --n или --matrix")

    group_map: Optional[Sequence[int]] = parse_int_list(args.group_map, "--group-map") if args.group_map else None
    crowd = build_crowd(args, args.m)
    trials = args.trials if args.trials is not None else get_config().monte_carlo.trials

    rows = []
    params: Dict[str, Any] = {"m": args.m, "n": n, "trials": trials, "crowd": crowd.to_dict(), "rules": []}
    for rule in rules:
        cfg = SimConfig(
            m=args.m,
            crowd=crowd,
            trials=trials,
            seed=args.seed,
            rule=rule,
            matrix=a if rule == Rule.CODING else None,
            n=n,
            group_map=tuple(group_map) if group_map is not None and rule == Rule.MAJORITY else None,
            resample=args.resample,
            placement=args.placement,
            missing_rate=args.missing_rate,
            workers=args.workers,
        )
        want_trace = bool(args.trace) and rule == Rule.CODING
        est: McEstimate = run_mc(cfg, trace=want_trace)
        if want_trace:
            write_trace(args.trace, est)
        rows.append((rule.value, est.estimate, est.stderr, est.errors, est.trials, est.ties))
        params["rules"].append(cfg.to_dict())

    emit_text(args, render_csv(SIMULATE_HEADER, rows), "simulate", params, matrix_inputs(a, inputs))
    return 0


__all__ = ["SIMULATE_HEADER", "register", "run"]
