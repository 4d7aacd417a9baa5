"""
    Манифест запуска: всё, что нужно, чтобы повторить результат по одним флагам

    Публичный API:
        - TOOL_VERSION
        - RunManifest(subcommand, params, seed, version, inputs, outputs)
        - write_manifest(out_path, manifest) -> pathlib.Path   # <out>.manifest.json рядом с результатом
"""

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import pathlib

from app.storage.artifacts import manifest_path_for, write_json

TOOL_VERSION = "0.4.0"


@dataclass
class RunManifest:
    subcommand: str
    params: Dict[str, Any]
    seed: Optional[int] = None
    version: str = TOOL_VERSION

    # Имя входа -> sha256 (матрицы, CSV-наборы)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": list(self.outputs),
        }


def write_manifest(out_path: str | pathlib.Path, manifest: RunManifest) -> pathlib.Path:
    path = manifest_path_for(out_path)
    write_json(path, manifest.to_dict())
    return path


__all__ = ["TOOL_VERSION", "RunManifest", "write_manifest"]
