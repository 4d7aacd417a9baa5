"""
    Запись артефактов на диск (JSON + CSV)

    Состав:
        - <out>.json / <out>.csv      - результат подкоманды
        - <out>.manifest.json         - манифест запуска рядом с результатом

    Публичный API:
        - write_text(path, text) -> None                     # атомарно
        - write_json(path, doc) -> None                      # атомарно, ключи отсортированы
        - write_csv(path, header, rows) -> None              # атомарно, '\n' как разделитель строк
        - render_csv(header, rows) -> str                    # та же сериализация в строку (для stdout)
        - manifest_path_for(path) -> pathlib.Path
        - read_json(path) -> dict

    Примечания:
        - Никаких отметок времени: одинаковые параметры дают побайтно одинаковые файлы
        - Числа с плавающей точкой в CSV пишутся через repr (round-trip без потерь)
"""

from __future__ import annotations
from typing import Any, Dict, Iterable, List, Sequence

import csv
import io
import json
import os
import pathlib
import tempfile

# =====================================================================
# Вспомогательные
# =====================================================================

# Атомарная запись: пишем во временный файл и переименовываем
def _atomic_write_bytes(path: pathlib.Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile("wb", delete=False, dir=str(path.parent)) as tmp:
        tmp.write(data)
        tmp.flush()
        os.fsync(tmp.fileno())
        tmp_path = pathlib.Path(tmp.name)
    tmp_path.replace(path)


def _atomic_write_text(path: pathlib.Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# =====================================================================
# Базовые операции
# =====================================================================

def dumps_json(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def write_text(path: str | pathlib.Path, text: str) -> None:
    _atomic_write_text(pathlib.Path(path), text)


def write_json(path: str | pathlib.Path, doc: Dict[str, Any]) -> None:
    _atomic_write_text(pathlib.Path(path), dumps_json(doc))


def read_json(path: str | pathlib.Path) -> Dict[str, Any]:
    return json.loads(pathlib.Path(path).read_text(encoding="utf-8"))


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path: str | pathlib.Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    _atomic_write_text(pathlib.Path(path), render_csv(header, rows))


# result.csv -> result.csv.manifest.json
def manifest_path_for(path: str | pathlib.Path) -> pathlib.Path:
    p = pathlib.Path(path)
    return p.with_name(p.name + ".manifest.json")


def list_outputs(paths: Iterable[str | pathlib.Path | None]) -> List[str]:
    return [str(p) for p in paths if p]


__all__ = [
    "dumps_json",
    "write_text",
    "write_json",
    "read_json",
    "render_csv",
    "write_csv",
    "manifest_path_for",
    "list_outputs",
]
