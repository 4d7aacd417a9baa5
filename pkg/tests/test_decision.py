from __future__ import annotations

import itertools

import numpy as np
import pytest

from app.codes.codebook import CodeMatrix, decision_profile, majority_equivalent_matrix
from app.core.errors import ValidationError
from app.core.types import MISSING
from app.fusion.decision import (
    binary_answer,
    coding_answers,
    decode_hamming,
    decode_hamming_batch,
    decode_majority,
    decode_majority_batch,
    default_group_map,
    drop_answers,
    local_decision,
    local_decisions,
    majority_answer,
    majority_answers,
)


def _within(freq: float, p: float, n: int, sigmas: float = 4.0) -> bool:
    return abs(freq - p) <= sigmas * np.sqrt(p * (1 - p) / n)


def test_local_decision_extremes(rng):
    assert all(local_decision(2, 1.0, 4, rng) == 2 for _ in range(50))
    assert all(local_decision(0, 0.0, 2, rng) == 1 for _ in range(50))
    with pytest.raises(ValidationError):
        local_decision(0, 1.5, 4, rng)


def test_local_decisions_error_spread(rng):
    t = 100_000
    y = local_decisions(np.zeros(t, dtype=int), np.full((t, 1), 0.7), 4, rng)[:, 0]
    counts = np.bincount(y, minlength=4) / t
    assert _within(counts[0], 0.7, t)
    for k in (1, 2, 3):
        assert _within(counts[k], 0.1, t)


def test_binary_answer():
    assert binary_answer(2, [1, 0, 1, 0]) == 1
    assert binary_answer(3, [1, 1, 0, 0]) == 0
    assert all(binary_answer(y, [0, 0, 0, 0]) == 0 for y in range(4))


def test_majority_answer_is_big_endian():
    assert [majority_answer(2, g, 4) for g in (0, 1)] == [1, 0]
    assert [majority_answer(6, g, 8) for g in (0, 1, 2)] == [1, 1, 0]


def test_default_group_map():
    assert default_group_map(4, 6) == (0, 0, 0, 1, 1, 1)
    assert default_group_map(8, 10) == (0, 0, 0, 0, 1, 1, 1, 2, 2, 2)
    with pytest.raises(ValidationError):
        default_group_map(8, 2)
    with pytest.raises(ValidationError):
        default_group_map(6, 6)


def test_decode_hamming_exact_codeword(rng):
    a = majority_equivalent_matrix(4, 6)
    for l in range(4):
        d = decode_hamming(a, a.row(l), rng)
        assert d.decided == l and d.tie_count == 1 and not d.was_tie


def test_decode_hamming_symmetric_tie(rng):
    a = CodeMatrix(np.array([[0, 0], [1, 1]]))
    t = 20_000
    picks = [decode_hamming(a, [0, 1], rng).decided for _ in range(t)]
    assert _within(float(np.mean(picks)), 0.5, t)
    assert decode_hamming(a, [0, 1], rng).was_tie


def test_decode_hamming_all_missing_is_uniform(ref4, rng):
    t = 20_000
    u = [MISSING] * 10
    picks = np.array([decode_hamming(ref4, u, rng).decided for _ in range(t)])
    counts = np.bincount(picks, minlength=4) / t
    assert all(_within(c, 0.25, t) for c in counts)


def test_decode_majority_examples(rng):
    assert decode_majority(2, (0, 0, 0), [1, 1, 0], rng).decided == 1
    d = decode_majority(4, (0, 0, 0, 1, 1, 1), [1, 1, 1, 0, 0, 0], rng)
    assert d.decided == 2 and d.tie_count == 1


def test_decode_majority_tie_is_fair(rng):
    t = 20_000
    picks = [decode_majority(2, (0, 0), [1, 0], rng).decided for _ in range(t)]
    assert _within(float(np.mean(picks)), 0.5, t)
    assert decode_majority(2, (0, 0), [1, 0], rng).tie_count == 2


def test_decode_majority_missing_and_empty_group(rng):
    assert decode_majority(2, (0, 0, 0), [1, MISSING, MISSING], rng).decided == 1
    with pytest.raises(ValidationError):
        decode_majority(4, (0, 0, 0), [1, 1, 1], rng)


def test_perfect_crowd_recovers_truth(ref8, rng):
    for truth in range(8):
        u = [binary_answer(local_decision(truth, 1.0, 8, rng), ref8.column(j)) for j in range(15)]
        assert decode_hamming(ref8, u, rng).decided == truth


def test_hamming_on_majority_matrix_equals_majority(rng):
    a = majority_equivalent_matrix(4, 6)
    gm = default_group_map(4, 6)
    for u in itertools.product((0, 1), repeat=6):
        assert decode_hamming(a, list(u), rng).decided == decode_majority(4, gm, list(u), rng).decided


def test_batch_decoders_match_single(ref4, rng):
    answers = rng.integers(0, 2, size=(300, 10)).astype(np.int8)
    decided = decode_hamming_batch(ref4, answers, rng)
    for u, d in zip(answers, decided):
        assert d in decision_profile(ref4, u).argmin_rows

    gm = np.array(default_group_map(8, 9))
    odd = rng.integers(0, 2, size=(200, 9)).astype(np.int8)
    batch = decode_majority_batch(8, gm, odd, rng)
    single = [decode_majority(8, gm, u, rng).decided for u in odd]
    assert batch.tolist() == single


def test_batch_answers(ref4):
    y = np.array([[0, 1, 2, 3, 0, 1, 2, 3, 0, 1]])
    u = coding_answers(ref4, y)
    assert u[0].tolist() == [int(ref4.bits[y[0, j], j]) for j in range(10)]
    bits = majority_answers(np.array([[2, 2, 3, 1]]), np.array([0, 1, 1, 0]), 4)
    assert bits[0].tolist() == [1, 0, 1, 0]


def test_drop_answers(rng):
    answers = np.ones((1000, 10), dtype=np.int8)
    assert drop_answers(answers, 0.0, rng) is answers
    dropped = drop_answers(answers, 0.3, rng)
    assert _within(float(np.mean(dropped == MISSING)), 0.3, answers.size)
    assert set(np.unique(dropped).tolist()) <= {1, MISSING}
