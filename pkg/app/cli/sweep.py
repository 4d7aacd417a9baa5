"""
    Подкоманда sweep: перебор одного параметра толпы, CSV для кривых

    Публичный API:
        - register(subparsers) -> None
        - run(args) -> int

    Примечания:
        - Без --trials считаются только точные значения и граница
"""

from __future__ import annotations
from typing import Optional

import argparse

from app.cli.common import (
    add_crowd_args,
    add_matrix_args,
    add_mc_args,
    build_crowd,
    check_shape,
    emit_text,
    matrix_inputs,
    parse_grid,
    parse_int_list,
    resolve_matrix,
)
from app.core.errors import ValidationError
from app.sim.engine import Placement, Resample
from app.sim.sweep import AXES, SweepSpec, render_sweep, sweep


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("sweep", help="перебор параметра толпы")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    add_matrix_args(p)
    add_crowd_args(p)
    add_mc_args(p)
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--grid", required=True, help="значения через запятую или start:stop:step")
    p.add_argument("--bound", action="store_true", help="добавить границу Чернова (i.i.d.)")
    p.add_argument("--no-exact", action="store_true")
    p.add_argument("--no-majority", action="store_true")
    p.add_argument("--group-map", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    a, inputs = resolve_matrix(args, args.m, args.n)
    if a is not None:
        check_shape(a, args.m, args.n)
    n: Optional[int] = a.num_workers if a is not None else args.n
    if n is None:
        raise ValidationError("Нужны --n или --matrix")

    grid = parse_grid(args.grid)
    spec = SweepSpec(
        m=args.m,
        n=n,
        crowd=build_crowd(args, args.m),
        matrix=a,
        majority=not args.no_majority,
        trials=args.trials or 0,
        seed=args.seed,
        exact=not args.no_exact,
        bound=args.bound,
        group_map=tuple(parse_int_list(args.group_map, "--group-map")) if args.group_map else None,
        placement=Placement(args.placement),
        resample=Resample(args.resample),
        missing_rate=args.missing_rate,
        workers=args.workers,
    )
    rows = sweep(spec, args.axis, grid)
    params = {**spec.to_dict(), "axis": args.axis, "grid": grid, "bound": args.bound, "exact": spec.exact}
    emit_text(args, render_sweep(rows), "sweep", params, matrix_inputs(a, inputs))
    return 0


__all__ = ["register", "run"]
