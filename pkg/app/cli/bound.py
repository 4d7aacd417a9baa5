"""
    Подкоманда bound: верхняя граница Чернова для P_e кодирования

    Публичный API:
        - register(subparsers) -> None
        - run(args) -> int
"""

from __future__ import annotations

import argparse

from app.analytic.bound import chernoff_bound
from app.cli.common import add_matrix_args, check_shape, emit_json, matrix_inputs, parse_grid, resolve_matrix
from app.codes.codebook import fingerprint
from app.core.errors import ValidationError


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("bound", help="граница Чернова для P_e")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    add_matrix_args(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--mu", type=float, help="одинаковая надёжность всех работников")
    g.add_argument("--p", dest="p_vector", help="надёжности работников через запятую")
    p.add_argument("--theta-max", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    a, inputs = resolve_matrix(args, args.m, args.n)
    if a is None:
        raise ValidationError("Для границы нужна --matrix или --columns")
    check_shape(a, args.m, args.n)

    p = args.mu if args.p_vector is None else parse_grid(args.p_vector)
    report = chernoff_bound(a, p, theta_max=args.theta_max)
    doc = {**report.to_dict(), "fingerprint": fingerprint(a)}
    params = {"p": p, "theta_max": args.theta_max}
    emit_json(args, doc, "bound", params, matrix_inputs(a, inputs))
    return 0


__all__ = ["register", "run"]
