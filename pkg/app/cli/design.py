"""
    Подкоманда design: подбор кодовой матрицы отжигом и/или заменой столбцов

    Публичный API:
        - register(subparsers) -> None
        - run(args) -> int
        - design_matrix(m, n, crowd, method, schedule, ...) -> DesignResult

    Примечания:
        - Результат - JSON-файл матрицы с блоком metadata (расписание, seed, толпа, трасса)
        - Метод anneal+ccr доводит лучшую матрицу отжига заменой столбцов
"""

from __future__ import annotations
from dataclasses import replace
from typing import Optional

import argparse

from app.cli.common import add_crowd_args, build_crowd, check_shape, emit_json, resolve_matrix
from app.codes.codebook import CodeMatrix, matrix_to_json, random_balanced_matrix
from app.codes.design import AnnealSchedule, DesignResult, anneal, coding_objective, cyclic_column_replacement
from app.core.config import get_config
from app.core.errors import ValidationError
from app.core.logging import get_logger
from app.crowd.models import CrowdSpec

log = get_logger(__name__)

METHODS = ("anneal", "ccr", "anneal+ccr")


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("design", help="подобрать кодовую матрицу под толпу")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    add_crowd_args(p)
    p.add_argument("--method", choices=METHODS, default="anneal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=None, help="по умолчанию anneal.restarts")
    p.add_argument("--move", choices=["flip", "column"], default=None)
    p.add_argument("--full-space", action="store_true", help="разрешить несбалансированные столбцы")
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--cooling", type=float, default=None)
    p.add_argument("--moves", type=int, default=None, help="ходов на температуру")
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--init", dest="matrix", default=None,
                   help="начальная матрица: файл или встроенная (по умолчанию случайная сбалансированная)")
    p.add_argument("--workers", type=int, default=1, help="потоков на перезапуски отжига")
    p.add_argument("--out")
    p.set_defaults(func=run, columns=None)


def design_matrix(
    m: int,
    n: int,
    crowd: CrowdSpec,
    method: str,
    schedule: AnnealSchedule,
    initial: Optional[CodeMatrix] = None,
    restarts: int = 1,
    workers: int = 1,
) -> DesignResult:
    if method not in METHODS:
        raise ValidationError(f"Метод должен быть одним из {METHODS}, получено {method!r}")
    objective = coding_objective(crowd, m, n)

    if method == "ccr":
        start = initial if initial is not None else random_balanced_matrix(m, n, schedule.seed)
        return replace(cyclic_column_replacement(start, objective, balanced=schedule.balanced), seed=schedule.seed)

    result = anneal(m, n, objective, schedule, initial=initial, restarts=restarts, workers=workers)
    if method == "anneal":
        return result

    polished = cyclic_column_replacement(result.matrix, objective, balanced=schedule.balanced)
    return replace(
        polished,
        method="anneal+ccr",
        seed=result.seed,
        trace=list(result.trace) + list(polished.trace[1:]),
        metadata={**result.metadata, "ccr_sweeps": polished.metadata["sweeps"]},
    )


def run(args: argparse.Namespace) -> int:
    crowd = build_crowd(args, args.m)
    initial, inputs = resolve_matrix(args, args.m, args.n)
    if initial is not None:
        check_shape(initial, args.m, args.n)

    schedule = AnnealSchedule.from_config(
        seed=args.seed,
        t0=args.t0,
        cooling=args.cooling,
        moves_per_temperature=args.moves,
        t_min=args.t_min,
        move=args.move,
        balanced=False if args.full_space else None,
    )
    restarts = args.restarts if args.restarts is not None else get_config().anneal.restarts

    result = design_matrix(args.m, args.n, crowd, args.method, schedule,
                           initial=initial, restarts=restarts, workers=args.workers)

    metadata = {
        **result.to_metadata(),
        "schedule": schedule.to_dict(args.n),
        "crowd": crowd.to_dict(),
    }
    params = {"m": args.m, "n": args.n, "method": args.method, "restarts": restarts,
              "schedule": schedule.to_dict(args.n), "crowd": crowd.to_dict()}
    emit_json(args, matrix_to_json(result.matrix, metadata), "design", params, inputs)
    log.info("Матрица подобрана: P_e=%.6g", result.objective)
    return 0


__all__ = ["METHODS", "register", "run", "design_matrix"]
