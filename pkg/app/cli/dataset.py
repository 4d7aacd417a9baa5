"""
    Подкоманда dataset: доля ошибок кодирования и большинства на размеченном наборе

    Публичный API:
        - register(subparsers) -> None
        - run(args) -> int

    Примечания:
        - Источник: --csv (task_id,gold,w1..wN) или --planted (синтетический набор)
        - --matrix design подбирает матрицу отжигом под надёжность --design-mu
          с фиксированным seed; отпечаток матрицы попадает в отчёт
"""

from __future__ import annotations
from typing import Dict, List, Optional, Tuple

import argparse

from app.cli.common import check_shape, emit_json, parse_int_list, resolve_matrix
from app.codes.codebook import CodeMatrix
from app.codes.design import AnnealSchedule, anneal, coding_objective
from app.core.errors import ValidationError
from app.core.logging import get_logger
from app.core.utils_hash import sha256_file
from app.crowd.models import CrowdSpec, SpammerHammer
from app.data.loaders.csv_loader import TaskRecord, load_csv, save_csv
from app.processing.evaluator import evaluate_dataset
from app.processing.quantizer import planted_dataset

log = get_logger(__name__)


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("dataset", help="сравнить кодирование и большинство на наборе с эталоном")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", help="CSV task_id,gold,w1..wN (пустая ячейка - пропуск)")
    src.add_argument("--planted", action="store_true", help="синтетический набор с известным шумом")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--n", type=int, default=None, help="число работников (для --planted обязательно)")
    p.add_argument("--tasks", type=int, default=500)
    p.add_argument("--p-correct", type=float, default=0.9)
    p.add_argument("--missing-rate", type=float, default=0.0)
    p.add_argument("--matrix", default="design", help="JSON-файл, design или встроенная матрица")
    p.add_argument("--columns", default=None)
    p.add_argument("--design-mu", type=float, default=None,
                   help="надёжность для подбора матрицы (по умолчанию из --p-correct)")
    p.add_argument("--group-map", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default=None)
    p.add_argument("--save-planted", default=None, help="сохранить синтетический набор в CSV")
    p.add_argument("--out")
    p.set_defaults(func=run)


def _records(args: argparse.Namespace) -> Tuple[List[TaskRecord], Dict[str, str], str]:
    if args.csv:
        records = load_csv(args.csv)
        return records, {"csv": sha256_file(args.csv)}, args.name or args.csv
    if args.n is None:
        raise ValidationError("Для --planted нужен --n")
    records = planted_dataset(args.tasks, args.m, args.n, args.p_correct, args.seed, missing_rate=args.missing_rate)
    if args.save_planted:
        save_csv(args.save_planted, records)
    return records, {}, args.name or "planted"


# Случайное значение попадает в верный класс с вероятностью 1/M
def _design_mu(args: argparse.Namespace) -> float:
    if args.design_mu is not None:
        return args.design_mu
    return args.p_correct + (1.0 - args.p_correct) / args.m


def _designed(m: int, n: int, mu: float, seed: int) -> CodeMatrix:
    crowd = CrowdSpec(dist=SpammerHammer(quality=1.0, p_spammer=1.0 / m, p_hammer=mu))
    result = anneal(m, n, coding_objective(crowd, m, n), AnnealSchedule.from_config(seed=seed))
    log.info("Матрица для набора подобрана: mu=%.4g, P_e=%.6g", mu, result.objective)
    return result.matrix


def run(args: argparse.Namespace) -> int:
    records, inputs, name = _records(args)
    n = records[0].num_workers if records else args.n
    if args.n is not None and n != args.n:
        raise ValidationError(f"В наборе {n} работников, а --n {args.n}")

    a: Optional[CodeMatrix]
    if args.matrix == "design" and not args.columns:
        a = _designed(args.m, n, _design_mu(args), args.seed)
    else:
        a, extra = resolve_matrix(args, args.m, n)
        inputs.update(extra)
    if a is None:
        raise ValidationError("Не задана кодовая матрица")
    check_shape(a, args.m, n)

    group_map = parse_int_list(args.group_map, "--group-map") if args.group_map else None
    report = evaluate_dataset(records, a, group_map=group_map, seed=args.seed, name=name)
    params = {
        "m": args.m,
        "n": n,
        "matrix": args.matrix,
        "design_mu": _design_mu(args) if args.matrix == "design" else None,
        "planted": bool(args.planted),
        "tasks": len(records),
        "p_correct": args.p_correct if args.planted else None,
        "missing_rate": args.missing_rate if args.planted else None,
    }
    emit_json(args, report.to_dict(), "dataset", params, {**inputs, "matrix_fingerprint": report.fingerprint})
    return 0


__all__ = ["register", "run"]
