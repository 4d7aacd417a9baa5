"""
    Общие флаги и помощники подкоманд CLI

    Публичный API:
        - add_crowd_args(parser) / build_crowd(args, m) -> CrowdSpec
        - add_matrix_args(parser) / resolve_matrix(args, m, n) -> (CodeMatrix | None, dict входов)
        - add_mc_args(parser)
        - parse_grid(text) -> list[float]                # "0,0.1,0.5" или "0:1:0.1"
        - parse_int_list(text, flag) -> list[int]
        - emit_text(args, text, subcommand, params, inputs) -> None   # stdout или --out + манифест
        - emit_json(args, doc, subcommand, params, inputs) -> None
"""

from __future__ import annotations
from typing import Any, Dict, List, Optional, Tuple

import argparse
import json
import pathlib
import sys

import numpy as np

from app.cli.manifest import RunManifest, write_manifest
from app.codes.codebook import (
    REFERENCE_M4_N10,
    REFERENCE_M8_N15,
    CodeMatrix,
    fingerprint,
    from_column_ints,
    load_matrix,
    majority_equivalent_matrix,
    random_balanced_matrix,
)
from app.core.errors import ValidationError
from app.core.utils_hash import sha256_file
from app.crowd.models import (
    BetaReliability,
    CrowdSpec,
    SpammerHammer,
    Variant,
    covariance_from_correlation,
    crowd_spec_from_dict,
)
from app.storage.artifacts import dumps_json, list_outputs, manifest_path_for, write_json, write_text

BUILTIN_MATRICES = ("ref-m4-n10", "ref-m8-n15", "majority", "random")


# =====================================================================
# Толпа
# =====================================================================

def add_crowd_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("толпа")
    g.add_argument("--crowd", help="JSON-файл CrowdSpec (перекрывает остальные флаги толпы)")
    g.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.IID.value)
    g.add_argument("--model", choices=["spammer-hammer", "beta"], default="spammer-hammer")
    g.add_argument("--q", type=float, default=1.0, help="доля молотков Q (spammer-hammer)")
    g.add_argument("--p-hammer", type=float, default=1.0)
    g.add_argument("--p-spammer", type=float, default=None, help="по умолчанию 1/M")
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--beta", type=float, default=0.5)
    g.add_argument("--mu", type=float, default=None,
                   help="фиксированная надёжность всех работников (вместо модели)")
    g.add_argument("--rho-corr", type=float, default=0.0)
    g.add_argument("--kappa", type=float, default=None)
    g.add_argument("--truncation", type=int, default=None)


def build_crowd(args: argparse.Namespace, m: int) -> CrowdSpec:
    if getattr(args, "crowd", None):
        path = pathlib.Path(args.crowd)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ValidationError(f"Не удалось прочитать CrowdSpec из {path}: {e}") from e
        return crowd_spec_from_dict(doc, m)

    if args.mu is not None:
        dist = SpammerHammer(quality=1.0, p_spammer=1.0 / m, p_hammer=args.mu)
    elif args.model == "beta":
        dist = BetaReliability(alpha=args.alpha, beta=args.beta)
    else:
        p_spammer = 1.0 / m if args.p_spammer is None else args.p_spammer
        dist = SpammerHammer(quality=args.q, p_spammer=p_spammer, p_hammer=args.p_hammer)

    variant = Variant(args.variant)
    rho = covariance_from_correlation(dist, args.rho_corr) if variant.paired else 0.0
    return CrowdSpec(
        dist=dist,
        variant=variant,
        rho=rho,
        kappa=args.kappa if variant.grouped else None,
        truncation=args.truncation if variant.grouped else None,
    )


# =====================================================================
# Матрица
# =====================================================================

def add_matrix_args(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--matrix", required=required,
                   help=f"JSON-файл матрицы или одно из {', '.join(BUILTIN_MATRICES)}")
    p.add_argument("--columns", help="столбцы целыми через запятую (строка 0 - младший бит)")


def resolve_matrix(args: argparse.Namespace, m: Optional[int], n: Optional[int]) -> Tuple[Optional[CodeMatrix], Dict[str, str]]:
    inputs: Dict[str, str] = {}
    if getattr(args, "columns", None):
        if m is None:
            raise ValidationError("Для --columns нужен --m")
        cols = parse_int_list(args.columns, "--columns")
        return from_column_ints(cols, m), inputs

    name = getattr(args, "matrix", None)
    if not name:
        return None, inputs
    if name == "ref-m4-n10":
        return from_column_ints(REFERENCE_M4_N10, 4), inputs
    if name == "ref-m8-n15":
        return from_column_ints(REFERENCE_M8_N15, 8), inputs
    if name in ("majority", "random"):
        if m is None or n is None:
            raise ValidationError(f"Для --matrix {name} нужны --m и --n")
        if name == "majority":
            return majority_equivalent_matrix(m, n), inputs
        return random_balanced_matrix(m, n, args.seed), inputs

    a, _ = load_matrix(name)
    inputs["matrix"] = sha256_file(name)
    return a, inputs


def check_shape(a: CodeMatrix, m: Optional[int], n: Optional[int]) -> None:
    if m is not None and a.num_classes != m:
        raise ValidationError(f"В матрице {a.num_classes} строк, а --m {m}")
    if n is not None and a.num_workers != n:
        raise ValidationError(f"В матрице {a.num_workers} столбцов, а --n {n}")


# =====================================================================
# Монте-Карло
# =====================================================================

def add_mc_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("Монте-Карло")
    g.add_argument("--trials", type=int, default=None, help="по умолчанию monte_carlo.trials")
    g.add_argument("--workers", type=int, default=None, help="потоков на блоки испытаний")
    g.add_argument("--missing-rate", type=float, default=0.0)
    g.add_argument("--placement", choices=["same-group", "independent"], default="same-group")
    g.add_argument("--resample", choices=["per-trial", "fixed"], default="per-trial")


def parse_grid(text: str) -> List[float]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"Диапазон сетки должен быть start:stop:step, получено {text!r}")
        try:
            start, stop, step = (float(x) for x in parts)
        except ValueError as e:
            raise ValidationError(f"Некорректная сетка {text!r}") from e
        if step <= 0:
            raise ValidationError("Шаг сетки должен быть > 0")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ValidationError(f"Некорректная сетка {text!r}") from e
    if not values:
        raise ValidationError("Пустая сетка")
    return values


def parse_int_list(text: str, flag: str) -> List[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ValidationError(f"{flag}: ожидаются целые через запятую, получено {text!r}") from e
    if not values:
        raise ValidationError(f"{flag}: пустой список")
    return values


# =====================================================================
# Вывод
# =====================================================================

def _manifest(args: argparse.Namespace, subcommand: str, params: Dict[str, Any],
              inputs: Dict[str, str], outputs: List[str]) -> RunManifest:
    return RunManifest(
        subcommand=subcommand,
        params=params,
        seed=getattr(args, "seed", None),
        inputs=inputs,
        outputs=list_outputs(outputs),
    )


def emit_text(args: argparse.Namespace, text: str, subcommand: str, params: Dict[str, Any],
              inputs: Optional[Dict[str, str]] = None) -> None:
    out = getattr(args, "out", None)
    if not out:
        sys.stdout.write(text)
        return
    write_text(out, text)
    write_manifest(out, _manifest(args, subcommand, params, inputs or {}, [out]))


def emit_json(args: argparse.Namespace, doc: Dict[str, Any], subcommand: str, params: Dict[str, Any],
              inputs: Optional[Dict[str, str]] = None) -> None:
    out = getattr(args, "out", None)
    if not out:
        sys.stdout.write(dumps_json(doc))
        return
    doc = {**doc, "manifest": manifest_path_for(out).name}
    write_json(out, doc)
    write_manifest(out, _manifest(args, subcommand, params, inputs or {}, [out]))


def matrix_inputs(a: Optional[CodeMatrix], inputs: Dict[str, str]) -> Dict[str, str]:
    if a is None:
        return inputs
    return {**inputs, "matrix_fingerprint": fingerprint(a)}


__all__ = [
    "BUILTIN_MATRICES",
    "add_crowd_args",
    "build_crowd",
    "add_matrix_args",
    "resolve_matrix",
    "check_shape",
    "add_mc_args",
    "parse_grid",
    "parse_int_list",
    "emit_text",
    "emit_json",
    "matrix_inputs",
]
