from __future__ import annotations

import numpy as np
import pytest

from app.codes.codebook import (
    REFERENCE_M4_N10,
    REFERENCE_M8_N15,
    CodeMatrix,
    complement,
    concatenate,
    decision_profile,
    duplicate_rows,
    fingerprint,
    from_column_ints,
    hamming_distance,
    load_matrix,
    majority_equivalent_matrix,
    minimum_row_distance,
    random_balanced_matrix,
    rows_distinct,
    save_matrix,
    to_column_ints,
    validate,
)
from app.core.errors import ValidationError
from app.core.types import MISSING


def test_column_ints_row_zero_is_lsb(ref4):
    assert ref4.column(0).tolist() == [1, 0, 1, 0]
    assert to_column_ints(ref4) == list(REFERENCE_M4_N10)


def test_zero_column():
    a = from_column_ints([0], 2)
    assert a.shape == (2, 1)
    assert a.bits.sum() == 0
    assert to_column_ints(CodeMatrix(np.zeros((2, 3), dtype=int))) == [0, 0, 0]


def test_reference_m8_round_trip(ref8):
    assert ref8.shape == (8, 15)
    assert to_column_ints(ref8) == list(REFERENCE_M8_N15)


def test_column_out_of_range_names_index():
    with pytest.raises(ValidationError, match="Столбец 1"):
        from_column_ints([3, 16], 4)


def test_rejects_non_binary_and_small_shapes():
    with pytest.raises(ValidationError):
        CodeMatrix(np.array([[0, 2], [1, 0]]))
    with pytest.raises(ValidationError):
        CodeMatrix(np.array([[0, 1]]))


def test_random_matrix_round_trip():
    a = random_balanced_matrix(4, 6, seed=3)
    assert from_column_ints(to_column_ints(a), 4) == a


def test_hamming_distance_examples():
    assert hamming_distance([1, 0, 1], [1, 0, 1]) == 0
    assert hamming_distance([0, 0, 0, 0], [1, 1, 1, 1]) == 4
    u = [1, MISSING, 0]
    assert hamming_distance(u, [1, 1, 0]) == 0
    assert hamming_distance(u, [1, 0, 0]) == 0
    assert hamming_distance("1-0", [1, 1, 0]) == 0


def test_hamming_distance_length_mismatch():
    with pytest.raises(ValidationError):
        hamming_distance([1, 0], [1, 0, 1])


def test_complement_distance_identity(ref4, rng):
    for _ in range(20):
        u = rng.integers(0, 2, size=10)
        for row in ref4.bits:
            assert hamming_distance(u, row) + hamming_distance(complement(u), row) == 10


def test_decision_profile_ties():
    a = CodeMatrix(np.array([[0, 0], [1, 1]]))
    p = decision_profile(a, [0, 0])
    assert p.argmin_rows == frozenset({0}) and p.tie_count == 1
    p = decision_profile(a, [0, 1])
    assert p.argmin_rows == frozenset({0, 1}) and p.tie_count == 2


def test_decision_profile_on_codeword(ref4):
    p = decision_profile(ref4, ref4.row(2))
    assert p.argmin_rows == frozenset({2})
    assert p.min_distance == 0


def test_decision_profile_invariant_under_worker_permutation(ref8, rng):
    perm = rng.permutation(15)
    shuffled = CodeMatrix(ref8.bits[:, perm])
    for _ in range(20):
        u = rng.integers(0, 2, size=15)
        assert decision_profile(ref8, u) == decision_profile(shuffled, u[perm])


def test_majority_equivalent_matrix():
    assert to_column_ints(majority_equivalent_matrix(2, 3)) == [2, 2, 2]
    a = majority_equivalent_matrix(4, 2)
    assert a.column(0).tolist() == [0, 0, 1, 1]
    assert a.column(1).tolist() == [0, 1, 0, 1]
    six = majority_equivalent_matrix(4, 6)
    assert to_column_ints(six) == [12, 12, 12, 10, 10, 10]
    assert len(set(to_column_ints(majority_equivalent_matrix(8, 9)))) == 3


@pytest.mark.parametrize("m,n", [(3, 3), (4, 3), (8, 10)])
def test_majority_equivalent_matrix_rejects(m, n):
    with pytest.raises(ValidationError):
        majority_equivalent_matrix(m, n)


def test_random_balanced_matrix_properties():
    assert random_balanced_matrix(4, 10, seed=7) == random_balanced_matrix(4, 10, seed=7)
    a = random_balanced_matrix(8, 15, seed=11)
    assert a.bits.sum(axis=0).tolist() == [4] * 15
    odd = random_balanced_matrix(5, 12, seed=2)
    assert set(odd.bits.sum(axis=0).tolist()) == {3}


def test_concatenate(ref8, ref4):
    assert concatenate(ref4, 1) == ref4
    big = concatenate(ref8, 6)
    assert big.shape == (8, 90)
    assert to_column_ints(big) == list(REFERENCE_M8_N15) * 6


def test_duplicate_rows_reported_not_raised():
    a = CodeMatrix(np.array([[0, 1], [0, 1], [1, 0]]))
    assert duplicate_rows(a) == [(0, 1)]
    assert not rows_distinct(a)
    assert len(validate(a)) == 1
    # Декодирование остаётся определённым
    assert decision_profile(a, [0, 1]).argmin_rows == frozenset({0, 1})


def test_minimum_row_distance():
    assert minimum_row_distance(majority_equivalent_matrix(4, 6)) == 3
    assert minimum_row_distance(CodeMatrix(np.array([[0, 1], [0, 1]]))) == 0


def test_matrix_file_round_trip(tmp_path, ref4):
    path = tmp_path / "a.json"
    save_matrix(ref4, path, metadata={"seed": 7})
    a, meta = load_matrix(path)
    assert a == ref4
    assert meta == {"seed": 7}
    assert fingerprint(a) == fingerprint(ref4)


def test_load_matrix_errors(tmp_path):
    with pytest.raises(ValidationError):
        load_matrix(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"columns": [1, 2]}', encoding="utf-8")
    with pytest.raises(ValidationError):
        load_matrix(bad)
