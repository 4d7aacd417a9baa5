"""
    Отпечатки входных данных для манифестов и отчётов

    Публичный API:
        - sha256_text(text: str) -> str
        - sha256_file(path) -> str
        - short(fingerprint: str, n: int = 12) -> str
"""

from __future__ import annotations

import hashlib
import pathlib


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# Файл читаем блоками, данные бывают большими
def sha256_file(path: str | pathlib.Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def short(fingerprint: str, n: int = 12) -> str:
    return fingerprint[:n]


__all__ = ["sha256_text", "sha256_file", "short"]
