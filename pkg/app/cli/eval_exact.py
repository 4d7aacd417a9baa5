"""
    Подкоманда eval-exact: точная P_e для матрицы (кодирование) или группового голосования

    Публичный API:
        - register(subparsers) -> None
        - run(args) -> int

    Примечания:
        - Без --out печатает одно число; с --out пишет JSON-отчёт и манифест
        - --p задаёт фиксированную толпу p_1..p_N вместо распределения
"""

from __future__ import annotations
from typing import Dict, Tuple

import argparse
import sys

from app.analytic.exact import ExactPerfReport, coding_report, majority_report, pe_conditional_coding
from app.cli.common import (
    add_crowd_args,
    add_matrix_args,
    build_crowd,
    check_shape,
    emit_json,
    matrix_inputs,
    parse_int_list,
    parse_grid,
    resolve_matrix,
)
from app.core.errors import ValidationError


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("eval-exact", help="точная вероятность ошибки")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    add_matrix_args(p)
    add_crowd_args(p)
    p.add_argument("--rule", choices=["coding", "majority"], default="coding")
    p.add_argument("--p", dest="p_vector", default=None, help="надёжности работников через запятую")
    p.add_argument("--group-map", default=None, help="номер бита для каждого работника (большинство)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=run)


def _evaluate(args: argparse.Namespace) -> Tuple[ExactPerfReport, Dict[str, str]]:
    if args.rule == "majority":
        if args.m is None or args.n is None:
            raise ValidationError("Для --rule majority нужны --m и --n")
        group_map = parse_int_list(args.group_map, "--group-map") if args.group_map else None
        crowd = build_crowd(args, args.m)
        return majority_report(args.m, args.n, crowd, group_map), {}

    a, inputs = resolve_matrix(args, args.m, args.n)
    if a is None:
        raise ValidationError("Для кодирования нужна --matrix или --columns")
    check_shape(a, args.m, args.n)
    if args.p_vector:
        return pe_conditional_coding(a, parse_grid(args.p_vector)), matrix_inputs(a, inputs)
    crowd = build_crowd(args, a.num_classes)
    return coding_report(a, crowd), matrix_inputs(a, inputs)


def run(args: argparse.Namespace) -> int:
    report, inputs = _evaluate(args)
    if not args.out:
        sys.stdout.write(f"{report.value:.12g}\n")
        return 0
    params = {"rule": args.rule, "m": args.m, "n": args.n, **report.params}
    emit_json(args, report.to_dict(), "eval-exact", params, inputs)
    return 0


__all__ = ["register", "run"]
