from __future__ import annotations

import numpy as np
import pytest

from app.analytic.bound import chernoff_bound, q_matrix
from app.analytic.exact import pe_conditional_coding, pe_iid_coding
from app.codes.codebook import majority_equivalent_matrix, random_balanced_matrix
from app.core.errors import ValidationError


def test_q_matrix_counts_differing_rows(ref4):
    q = q_matrix(ref4, 0.7)
    assert q.shape == (4, 10)
    # Сбалансированный столбец: у каждой строки ровно две строки с другим битом
    assert np.allclose(q, 0.3 / 3 * 2)
    assert np.allclose(q_matrix(ref4, 1.0), 0.0)


def test_bound_dominates_exact(ref4, ref8):
    matrices = [ref4, majority_equivalent_matrix(4, 6), random_balanced_matrix(4, 8, seed=1), ref8]
    held = 0
    for a in matrices:
        for mu in (0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99):
            report = chernoff_bound(a, mu)
            if not report.condition_holds:
                continue
            held += 1
            assert report.value >= pe_iid_coding(a, mu).value - 1e-12
    assert held >= 20


def test_bound_for_perfect_crowd(ref4, ref8):
    for a in (ref4, ref8):
        report = chernoff_bound(a, 1.0)
        assert report.condition_holds
        assert report.value <= 1e-9


def test_condition_fails_for_uninformative_crowd(ref4):
    report = chernoff_bound(ref4, 0.25)
    assert not report.condition_holds
    assert report.value is None
    doc = report.to_dict()
    assert doc["value"] is None
    assert len(doc["margins"]) == 12


def test_per_worker_reliabilities(ref4):
    p = [0.95, 0.9, 0.99, 0.85, 0.9, 0.95, 0.9, 0.99, 0.9, 0.95]
    report = chernoff_bound(ref4, p)
    assert report.condition_holds
    assert report.value >= pe_conditional_coding(ref4, p).value


def test_bound_rejects_bad_input(ref4):
    with pytest.raises(ValidationError):
        chernoff_bound(ref4, [0.9] * 3)
    with pytest.raises(ValidationError):
        chernoff_bound(ref4, 1.5)
