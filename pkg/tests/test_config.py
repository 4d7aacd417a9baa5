from __future__ import annotations

import pytest

from app.core.config import ENV_VAR, get_config, load_config, set_config_path
from app.core.errors import ConfigError, ValidationError
from app.core.types import MISSING, as_answer_vector, format_answers
from app.storage.artifacts import manifest_path_for, read_json, render_csv, write_json


def test_defaults_from_bundled_file():
    cfg = load_config()
    assert cfg.exact.max_exact_workers == 22
    assert cfg.anneal.t_min == pytest.approx(1e-4)
    assert cfg.monte_carlo.chunk_size == 4096
    assert cfg.bound.theta_max == 50.0


def test_partial_override_keeps_defaults(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("anneal:\n  cooling: 0.8\n", encoding="utf-8")
    cfg = load_config(path)
    assert cfg.anneal.cooling == 0.8
    assert cfg.anneal.t0 == pytest.approx(0.1)
    assert cfg.exact.block_size == 16384


@pytest.mark.parametrize(
    "text",
    ["anneal:\n  colling: 0.8\n", "annealing:\n  t0: 1\n", "anneal: 3\n", "anneal:\n  t0: warm\n", "- 1\n"],
)
def test_bad_config(tmp_path, text):
    path = tmp_path / "c.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "none.yaml")


def test_env_and_override(tmp_path, monkeypatch):
    env = tmp_path / "env.yaml"
    env.write_text("monte_carlo:\n  trials: 7\n", encoding="utf-8")
    monkeypatch.setenv(ENV_VAR, str(env))
    set_config_path(None)
    assert get_config().monte_carlo.trials == 7

    flag = tmp_path / "flag.yaml"
    flag.write_text("monte_carlo:\n  trials: 9\n", encoding="utf-8")
    set_config_path(flag)
    assert get_config().monte_carlo.trials == 9


def test_answer_vectors():
    u = as_answer_vector("10-1")
    assert u.tolist() == [1, 0, MISSING, 1]
    assert format_answers(u) == "10-1"
    assert as_answer_vector([1, None, "0"]).tolist() == [1, MISSING, 0]
    with pytest.raises(ValidationError):
        as_answer_vector("102")


def test_artifacts(tmp_path):
    assert render_csv(("a", "b"), [(None, 0.5), (True, 3)]) == "a,b\n,0.5\n1,3\n"
    path = tmp_path / "sub" / "doc.json"
    write_json(path, {"b": 1, "a": "я"})
    assert read_json(path) == {"a": "я", "b": 1}
    assert manifest_path_for(path).name == "doc.json.manifest.json"
