"""
    Подкоманда reproduce-figure: данные для эталонных кривых fig2..fig9

    Публичный API:
        - FIGURES                                     # имя -> построитель таблиц
        - FigureTable(name, header, rows)
        - build_figure(name, trials=None, seed=0, workers=None) -> list[FigureTable]
        - register(subparsers) -> None
        - run(args) -> int

    Примечания:
        - Несколько таблиц: в stdout каждая предваряется строкой "# <имя>",
          с --out суффикс вставляется перед расширением (fig4.csv -> fig4.n15.csv)
        - trials=None: точные фигуры без Монте-Карло, фигуры, где формулы нет,
          берут monte_carlo.trials
        - fig6 подбирает матрицу коротким отжигом: от случайной сбалансированной
          матрицы с тем же seed, поэтому подобранная не хуже случайной
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import argparse
import pathlib
import sys

from app.analytic.exact import majority_report, pe_iid_coding
from app.cli.manifest import RunManifest, write_manifest
from app.cli.common import parse_grid
from app.codes.codebook import (
    REFERENCE_M4_N10,
    REFERENCE_M8_N15,
    CodeMatrix,
    concatenate,
    fingerprint,
    from_column_ints,
    random_balanced_matrix,
)
from app.codes.design import AnnealSchedule, anneal, coding_objective
from app.core.config import get_config
from app.core.errors import ValidationError
from app.core.logging import get_logger
from app.crowd.models import BetaReliability, CrowdSpec, Variant, covariance_from_correlation, spammer_hammer
from app.sim.sweep import SWEEP_HEADER, SweepSpec, sweep
from app.storage.artifacts import list_outputs, render_csv, write_text

log = get_logger(__name__)

Q_GRID = "0:1:0.1"
KAPPA_GRID = (0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0)
FIG6_HEADER = ("param", "pe_designed", "pe_random", "pe_majority")

# Короткое расписание отжига для fig6: при M=8, N=15 каждая оценка перебирает 2^15 векторов
FIG6_SCHEDULE = dict(t0=0.05, cooling=0.7, moves_per_temperature=30, t_min=1e-3)


@dataclass(frozen=True)
class FigureTable:
    name: str
    header: Tuple[str, ...]
    rows: List[Tuple[Any, ...]]

    def render(self) -> str:
        return render_csv(self.header, self.rows)


@dataclass(frozen=True)
class _RunParams:
    trials: Optional[int]
    seed: int
    workers: Optional[int]

    # Для фигур без точной формулы кодирования
    def mc_trials(self) -> int:
        return self.trials if self.trials is not None else get_config().monte_carlo.trials

    def opt_trials(self) -> int:
        return self.trials or 0


def _ref4() -> CodeMatrix:
    return from_column_ints(REFERENCE_M4_N10, 4)


def _ref8() -> CodeMatrix:
    return from_column_ints(REFERENCE_M8_N15, 8)


def _table(name: str, spec: SweepSpec, axis: str, grid: Sequence[float]) -> FigureTable:
    rows = [r.as_tuple() for r in sweep(spec, axis, grid)]
    return FigureTable(name=name, header=SWEEP_HEADER, rows=rows)


# =====================================================================
# Фигуры
# =====================================================================

def _fig2(rp: _RunParams) -> List[FigureTable]:
    crowd = CrowdSpec(dist=spammer_hammer(1.0, 4))
    spec = SweepSpec(m=4, n=10, crowd=crowd, matrix=_ref4(), trials=rp.opt_trials(), seed=rp.seed,
                     bound=True, workers=rp.workers)
    return [_table("fig2", spec, "p", parse_grid("0.25:1:0.05"))]


def _fig3(rp: _RunParams) -> List[FigureTable]:
    crowd = CrowdSpec(dist=spammer_hammer(0.0, 4))
    spec = SweepSpec(m=4, n=10, crowd=crowd, matrix=_ref4(), trials=rp.opt_trials(), seed=rp.seed, workers=rp.workers)
    return [_table("fig3", spec, "q", parse_grid(Q_GRID))]


def _fig4(rp: _RunParams) -> List[FigureTable]:
    crowd = CrowdSpec(dist=spammer_hammer(0.0, 8))
    grid = parse_grid(Q_GRID)
    small = SweepSpec(m=8, n=15, crowd=crowd, matrix=_ref8(), trials=rp.opt_trials(), seed=rp.seed, workers=rp.workers)
    large = SweepSpec(m=8, n=90, crowd=crowd, matrix=concatenate(_ref8(), 6), trials=rp.mc_trials(),
                      seed=rp.seed, workers=rp.workers)
    return [_table("n15", small, "q", grid), _table("n90", large, "q", grid)]


def _fig5(rp: _RunParams) -> List[FigureTable]:
    crowd = CrowdSpec(dist=BetaReliability(alpha=0.5, beta=0.5))
    grid = parse_grid("0.5:5:0.5")
    return [
        _table("m4-n10", SweepSpec(m=4, n=10, crowd=crowd, matrix=_ref4(), trials=rp.opt_trials(),
                                   seed=rp.seed, workers=rp.workers), "beta", grid),
        _table("m8-n15", SweepSpec(m=8, n=15, crowd=crowd, matrix=_ref8(), trials=rp.opt_trials(),
                                   seed=rp.seed, workers=rp.workers), "beta", grid),
        _table("m8-n90", SweepSpec(m=8, n=90, crowd=crowd, matrix=concatenate(_ref8(), 6), trials=rp.mc_trials(),
                                   seed=rp.seed, workers=rp.workers), "beta", grid),
    ]


def _fig6(rp: _RunParams) -> List[FigureTable]:
    m, n = 8, 15
    random_matrix = random_balanced_matrix(m, n, rp.seed)
    schedule = AnnealSchedule.from_config(seed=rp.seed, **FIG6_SCHEDULE)
    rows: List[Tuple[Any, ...]] = []
    for q in parse_grid(Q_GRID):
        crowd = CrowdSpec(dist=spammer_hammer(q, m))
        designed = anneal(m, n, coding_objective(crowd, m, n), schedule)
        rows.append((
            q,
            designed.objective,
            pe_iid_coding(random_matrix, crowd.mean).value,
            majority_report(m, n, crowd).value,
        ))
        log.info("fig6: Q=%.2f подобранная %.6g, случайная %.6g", q, rows[-1][1], rows[-1][2])
    return [FigureTable(name="fig6", header=FIG6_HEADER, rows=rows)]


def _fig7(rp: _RunParams) -> List[FigureTable]:
    m, n = 8, 12
    matrix = from_column_ints(REFERENCE_M8_N15[:n], m)
    crowd = CrowdSpec(dist=BetaReliability(alpha=0.5, beta=0.5), variant=Variant.PAIRED)
    spec = SweepSpec(m=m, n=n, crowd=crowd, matrix=matrix, trials=rp.mc_trials(), seed=rp.seed, workers=rp.workers)
    return [_table("fig7", spec, "rho_corr", parse_grid("-0.9:0.9:0.3"))]


def _fig8(rp: _RunParams) -> List[FigureTable]:
    crowd = CrowdSpec(dist=BetaReliability(alpha=0.5, beta=0.5), variant=Variant.LATENT_GROUPS, kappa=1.0)
    spec = SweepSpec(m=8, n=15, crowd=crowd, matrix=_ref8(), trials=rp.mc_trials(), seed=rp.seed, workers=rp.workers)
    return [_table("fig8", spec, "kappa", KAPPA_GRID)]


def _fig9(rp: _RunParams) -> List[FigureTable]:
    m, n = 8, 12
    dist = BetaReliability(alpha=0.5, beta=0.5)
    crowd = CrowdSpec(
        dist=dist,
        variant=Variant.LATENT_GROUPS_PAIRED,
        rho=covariance_from_correlation(dist, -0.5),
        kappa=1.0,
    )
    matrix = from_column_ints(REFERENCE_M8_N15[:n], m)
    spec = SweepSpec(m=m, n=n, crowd=crowd, matrix=matrix, trials=rp.mc_trials(), seed=rp.seed, workers=rp.workers)
    return [_table("fig9", spec, "kappa", KAPPA_GRID)]


FIGURES: Dict[str, Callable[[_RunParams], List[FigureTable]]] = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
    "fig9": _fig9,
}


def build_figure(name: str, trials: Optional[int] = None, seed: int = 0, workers: Optional[int] = None) -> List[FigureTable]:
    if name not in FIGURES:
        raise ValidationError(f"Неизвестная фигура {name!r}, допустимы {sorted(FIGURES)}")
    if trials is not None and trials < 0:
        raise ValidationError(f"trials должно быть >= 0, получено {trials}")
    log.info("Фигура %s: trials=%s seed=%d", name, trials, seed)
    return FIGURES[name](_RunParams(trials=trials, seed=seed, workers=workers))


# =====================================================================
# CLI
# =====================================================================

def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("reproduce-figure", help="данные эталонной фигуры (CSV)")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=run)


def _output_path(out: str, table: str, figure: str, many: bool) -> pathlib.Path:
    path = pathlib.Path(out)
    if not many or table == figure:
        return path
    return path.with_name(f"{path.stem}.{table}{path.suffix}")


def run(args: argparse.Namespace) -> int:
    tables = build_figure(args.figure, trials=args.trials, seed=args.seed, workers=args.workers)
    many = len(tables) > 1

    if not args.out:
        for t in tables:
            if many:
                sys.stdout.write(f"# {t.name}\n")
            sys.stdout.write(t.render())
        return 0

    paths = [_output_path(args.out, t.name, args.figure, many) for t in tables]
    for t, path in zip(tables, paths):
        write_text(path, t.render())

    manifest = RunManifest(
        subcommand="reproduce-figure",
        params={"figure": args.figure, "trials": args.trials, "workers": args.workers},
        seed=args.seed,
        inputs={"ref-m4-n10": fingerprint(_ref4()), "ref-m8-n15": fingerprint(_ref8())},
        outputs=list_outputs(paths),
    )
    for path in paths:
        write_manifest(path, manifest)
    return 0


__all__ = ["FIGURES", "FIG6_HEADER", "FigureTable", "build_figure", "register", "run"]
