"""
    Точка входа CLI: python -m app.cli.main <подкоманда> ...

    Подкоманды:
        design, eval-exact, bound, simulate, sweep, dataset, reproduce-figure

    Коды возврата:
        0 - успех; 2 - ошибка входных данных или флагов; 1 - ошибка выполнения
"""

from __future__ import annotations
from typing import List, Optional

import argparse
import sys

from app.cli import bound, dataset, design, eval_exact, figures, simulate, sweep
from app.cli.manifest import TOOL_VERSION
from app.core.config import set_config_path
from app.core.errors import CrowdCodeError, ValidationError
from app.core.logging import get_logger, setup_logging

log = get_logger(__name__)

SUBCOMMANDS = (design, eval_exact, bound, simulate, sweep, dataset, figures)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdcode",
        description="Слияние ответов толпы кодами, исправляющими ошибки: точные P_e, границы, Монте-Карло",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    parser.add_argument("--log-level", default=None, help="DEBUG | INFO | WARNING (по умолчанию из config.yaml)")
    parser.add_argument("--config", default=None, help="YAML-файл конфигурации вместо app/config.yaml")
    sub = parser.add_subparsers(dest="command", required=True)
    for module in SUBCOMMANDS:
        module.register(sub)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    try:
        if args.config:
            set_config_path(args.config)
        setup_logging(args.log_level)
        return int(args.func(args))
    except ValidationError as e:
        log.error("%s", e)
        return 2
    except CrowdCodeError as e:
        log.error("%s", e)
        return 1
    except Exception:
        log.exception("Непредвиденная ошибка")
        return 1


if __name__ == "__main__":
    sys.exit(main())
