from __future__ import annotations

import json

import pytest

from app.codes.codebook import majority_equivalent_matrix, random_balanced_matrix
from app.codes.design import AnnealSchedule, anneal, coding_objective, cyclic_column_replacement
from app.core.errors import ValidationError
from app.crowd.models import CrowdSpec, SpammerHammer
from app.data.loaders.csv_loader import TaskRecord, load_csv, save_csv
from app.processing.evaluator import evaluate_dataset, save_report
from app.processing.quantizer import planted_dataset, quantize


# =====================================================================
# Квантование
# =====================================================================

def test_quantize_examples():
    assert quantize(0, 8) == 0
    assert quantize(100, 8) == 7
    assert quantize(12.5, 8) == 1
    assert quantize(12.49, 8) == 0
    assert quantize(50, 2) == 1


@pytest.mark.parametrize("value", [-0.1, 100.5, float("nan")])
def test_quantize_rejects_out_of_range(value):
    with pytest.raises(ValidationError):
        quantize(value, 8)


# =====================================================================
# Загрузка CSV
# =====================================================================

def test_load_csv_with_missing(tmp_path):
    path = tmp_path / "anger.csv"
    path.write_text("task_id,gold,w1,w2,w3\na,10,12,,90\nb,100,100,99.5,\n\n", encoding="utf-8")
    records = load_csv(path)
    assert [r.task_id for r in records] == ["a", "b"]
    assert records[0].values == (12.0, None, 90.0)
    assert records[1].num_present == 2


def test_load_csv_cp1251(tmp_path):
    path = tmp_path / "ru.csv"
    path.write_bytes("task_id,gold,w1\nзадача,5,7\n".encode("cp1251"))
    assert load_csv(path)[0].task_id == "задача"


@pytest.mark.parametrize(
    "text,match",
    [
        ("id,gold,w1\na,1,2\n", "заголовок"),
        ("task_id,gold,w1\na,1,200\n", "Строка 2"),
        ("task_id,gold,w1\na,1,x\n", "не число"),
        ("task_id,gold,w1,w2\na,1,2\n", "ячеек"),
        ("task_id,gold,w1\na,1,\n", "ни один"),
        ("task_id,gold,w1\na,,3\n", "gold"),
    ],
)
def test_load_csv_errors(tmp_path, text, match):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ValidationError, match=match):
        load_csv(path)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        load_csv(tmp_path / "nope.csv")


def test_save_and_reload(tmp_path):
    records = planted_dataset(20, 8, 5, 0.7, seed=1, missing_rate=0.3)
    path = tmp_path / "planted.csv"
    save_csv(path, records)
    assert load_csv(path) == records


# =====================================================================
# Синтетические наборы
# =====================================================================

def test_planted_dataset_shape_and_determinism():
    records = planted_dataset(50, 8, 10, 0.9, seed=3, missing_rate=0.5)
    assert len(records) == 50
    assert all(r.num_workers == 10 and r.num_present >= 1 for r in records)
    assert records == planted_dataset(50, 8, 10, 0.9, seed=3, missing_rate=0.5)
    with pytest.raises(ValidationError):
        planted_dataset(10, 8, 10, 1.5, seed=0)


# =====================================================================
# Оценка
# =====================================================================

def test_perfect_workers_give_no_errors(ref8):
    records = planted_dataset(200, 8, 15, 1.0, seed=2)
    report = evaluate_dataset(records, ref8, seed=0, name="perfect")
    assert report.coding_error == 0.0
    assert report.majority_error == 0.0
    assert report.tasks == 200


def test_majority_matrix_agrees_with_majority():
    a = majority_equivalent_matrix(8, 9)
    records = planted_dataset(300, 8, 9, 0.6, seed=4)
    report = evaluate_dataset(records, a, seed=1)
    assert report.coding_error == report.majority_error
    assert report.group_map == [0, 0, 0, 1, 1, 1, 2, 2, 2]


def test_coding_competitive_on_planted_data():
    m, n, p_correct = 8, 10, 0.9
    records = planted_dataset(500, m, n, p_correct, seed=0)
    mu = p_correct + (1.0 - p_correct) / m
    objective = coding_objective(CrowdSpec(dist=SpammerHammer(quality=1.0, p_spammer=1.0 / m, p_hammer=mu)), m, n)
    schedule = AnnealSchedule(t0=0.05, cooling=0.5, moves_per_temperature=20, t_min=0.01, seed=0)
    designed = anneal(m, n, objective, schedule)
    a = cyclic_column_replacement(designed.matrix, objective, max_sweeps=2).matrix

    report = evaluate_dataset(records, a, seed=0, name="planted")
    assert report.coding_error <= report.majority_error + 0.05
    assert evaluate_dataset(records, a, seed=0, name="planted") == report


def test_evaluate_errors(ref8):
    with pytest.raises(ValidationError):
        evaluate_dataset([], ref8)
    short = [TaskRecord(task_id="a", gold=10.0, values=(10.0,) * 10)]
    with pytest.raises(ValidationError):
        evaluate_dataset(short, ref8)


def test_save_report(tmp_path):
    a = random_balanced_matrix(4, 6, seed=0)
    report = evaluate_dataset(planted_dataset(30, 4, 6, 0.8, seed=0), a, name="tiny")
    path = tmp_path / "report.json"
    save_report(report, path, manifest="report.json.manifest.json")
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["name"] == "tiny"
    assert doc["manifest"] == "report.json.manifest.json"
    assert 0.0 <= doc["coding_error"] <= 1.0
