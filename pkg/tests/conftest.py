from __future__ import annotations

import numpy as np
import pytest

from app.codes.codebook import REFERENCE_M4_N10, REFERENCE_M8_N15, CodeMatrix, from_column_ints
from app.core.config import set_config_path


@pytest.fixture
def ref4() -> CodeMatrix:
    return from_column_ints(REFERENCE_M4_N10, 4)


@pytest.fixture
def ref8() -> CodeMatrix:
    return from_column_ints(REFERENCE_M8_N15, 8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _fresh_config(monkeypatch):
    monkeypatch.delenv("CROWDCODE_CONFIG", raising=False)
    set_config_path(None)
    yield
    set_config_path(None)
