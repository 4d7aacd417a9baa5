from __future__ import annotations

import math

import numpy as np
import pytest

from app.analytic.exact import (
    pe_conditional_coding,
    pe_iid_coding,
    pe_iid_majority,
    pe_paired_coding,
    pe_paired_majority,
)
from app.codes.codebook import CodeMatrix, majority_equivalent_matrix, random_balanced_matrix
from app.core.errors import ValidationError
from app.crowd.models import (
    BetaReliability,
    CrowdSpec,
    Variant,
    covariance_from_correlation,
    spammer_hammer,
)
from app.crowd.sampling import sample_reliability_matrix
from app.sim.engine import TRACE_HEADER, Placement, Resample, Rule, SimConfig, run_mc, write_trace
from app.sim.rng import Stream, chunk_bounds, derive_seed, stream


def _sigma(pe: float, trials: int) -> float:
    return math.sqrt(pe * (1.0 - pe) / trials)


# =====================================================================
# Потоки случайных чисел
# =====================================================================

def test_streams_are_keyed():
    a = stream(7, 3, Stream.CROWD).random(5)
    assert np.array_equal(a, stream(7, 3, Stream.CROWD).random(5))
    assert not np.array_equal(a, stream(7, 4, Stream.CROWD).random(5))
    assert not np.array_equal(a, stream(7, 3, Stream.TIES).random(5))
    with pytest.raises(ValidationError):
        stream(-1, 0, Stream.CROWD)


def test_chunk_bounds():
    assert chunk_bounds(10, 4) == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]
    assert chunk_bounds(3, 100) == [(0, 0, 3)]
    with pytest.raises(ValidationError):
        chunk_bounds(0, 4)


def test_derive_seed():
    assert derive_seed(1, 0) == derive_seed(1, 0)
    assert derive_seed(1, 0) != derive_seed(1, 1)


# =====================================================================
# Конфигурация
# =====================================================================

def test_sim_config_validation(ref4):
    crowd = CrowdSpec(dist=spammer_hammer(0.6, 4))
    with pytest.raises(ValidationError):
        SimConfig(m=4, crowd=crowd, trials=10)
    with pytest.raises(ValidationError):
        SimConfig(m=8, crowd=crowd, trials=10, matrix=ref4)
    with pytest.raises(ValidationError):
        SimConfig(m=4, crowd=crowd, trials=0, matrix=ref4)
    with pytest.raises(ValidationError):
        SimConfig(m=4, crowd=crowd, trials=10, rule=Rule.MAJORITY)
    with pytest.raises(ValidationError):
        SimConfig(m=4, crowd=crowd, trials=10, matrix=ref4, missing_rate=1.0)
    cfg = SimConfig(m=4, crowd=crowd, trials=10, rule="majority", n=10)
    assert cfg.group_map == (0,) * 5 + (1,) * 5
    assert cfg.to_dict()["placement"] == "same-group"


# =====================================================================
# Прогоны
# =====================================================================

def test_perfect_crowd_never_errs(ref4):
    crowd = CrowdSpec(dist=spammer_hammer(1.0, 4))
    for rule in (Rule.CODING, Rule.MAJORITY):
        est = run_mc(SimConfig(m=4, crowd=crowd, trials=2000, rule=rule, matrix=ref4 if rule == Rule.CODING else None, n=10))
        assert est.errors == 0 and est.estimate == 0.0 and est.stderr == 0.0


def test_deterministic_across_workers(ref4):
    crowd = CrowdSpec(dist=BetaReliability(0.5, 0.5), variant=Variant.LATENT_GROUPS, kappa=1.0)
    base = SimConfig(m=4, crowd=crowd, trials=5000, seed=3, matrix=ref4, chunk_size=512, workers=1)
    one = run_mc(base)
    many = run_mc(SimConfig(m=4, crowd=crowd, trials=5000, seed=3, matrix=ref4, chunk_size=512, workers=4))
    assert one == many
    other = run_mc(SimConfig(m=4, crowd=crowd, trials=5000, seed=4, matrix=ref4, chunk_size=512))
    assert other.errors != one.errors or other.ties != one.ties


def test_common_random_numbers_for_rules():
    # На матрице большинства с нечётным размером групп оба правила решают одинаково
    crowd = CrowdSpec(dist=spammer_hammer(0.5, 4))
    a = majority_equivalent_matrix(4, 6)
    coding = run_mc(SimConfig(m=4, crowd=crowd, trials=4000, seed=9, matrix=a))
    majority = run_mc(SimConfig(m=4, crowd=crowd, trials=4000, seed=9, rule=Rule.MAJORITY, n=6))
    assert coding.errors == majority.errors


def test_fixed_crowd_matches_conditional(ref4):
    crowd = CrowdSpec(dist=BetaReliability(3.0, 1.0))
    trials = 40_000
    est = run_mc(SimConfig(m=4, crowd=crowd, trials=trials, seed=5, matrix=ref4, resample=Resample.FIXED))
    p = sample_reliability_matrix(crowd, 10, 1, stream(5, 0, Stream.FIXED_CROWD))[0]
    exact = pe_conditional_coding(ref4, p).value
    assert abs(est.estimate - exact) <= 4 * _sigma(exact, trials)


def test_missing_answers_hurt(ref4):
    crowd = CrowdSpec(dist=spammer_hammer(0.8, 4))
    full = run_mc(SimConfig(m=4, crowd=crowd, trials=20_000, seed=2, matrix=ref4))
    sparse = run_mc(SimConfig(m=4, crowd=crowd, trials=20_000, seed=2, matrix=ref4, missing_rate=0.5))
    assert sparse.estimate > full.estimate


def test_independent_placement_runs():
    crowd = CrowdSpec(dist=BetaReliability(2.0, 2.0), variant=Variant.PAIRED, rho=0.03)
    est = run_mc(SimConfig(m=4, crowd=crowd, trials=2000, rule=Rule.MAJORITY, n=8, placement=Placement.INDEPENDENT))
    assert 0.0 < est.estimate < 1.0


def test_split_pairs_under_same_group_placement():
    crowd = CrowdSpec(dist=BetaReliability(2.0, 2.0), variant=Variant.PAIRED, rho=0.03)
    assert SimConfig(m=4, crowd=crowd, trials=10, rule=Rule.MAJORITY, n=10).split_pairs == ((4, 5),)
    assert SimConfig(m=4, crowd=crowd, trials=10, rule=Rule.MAJORITY, n=8).split_pairs == ()
    assert SimConfig(m=4, crowd=crowd, trials=10, rule=Rule.MAJORITY, n=10,
                     placement=Placement.INDEPENDENT).split_pairs == ()
    iid = CrowdSpec(dist=BetaReliability(2.0, 2.0))
    assert SimConfig(m=4, crowd=iid, trials=10, rule=Rule.MAJORITY, n=10).split_pairs == ()


def test_trace_csv(tmp_path, ref4):
    crowd = CrowdSpec(dist=spammer_hammer(0.6, 4))
    est = run_mc(SimConfig(m=4, crowd=crowd, trials=300, seed=1, matrix=ref4, missing_rate=0.2), trace=True)
    assert len(est.trace) == 300
    trial, truth, answers, decoded = est.trace[0]
    assert trial == 0 and 0 <= truth < 4 and 0 <= decoded < 4
    assert len(answers) == 10 and set(answers) <= {"0", "1", "-"}
    path = tmp_path / "trace.csv"
    write_trace(path, est)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(TRACE_HEADER)
    assert len(lines) == 301
    assert run_mc(SimConfig(m=4, crowd=crowd, trials=300, seed=1, matrix=ref4)).trace == []


# =====================================================================
# Согласие с точными значениями
# =====================================================================

TRIALS = 100_000


@pytest.mark.slow
def test_mc_matches_iid_exact(ref4):
    crowd = CrowdSpec(dist=spammer_hammer(0.6, 4))
    coding = run_mc(SimConfig(m=4, crowd=crowd, trials=TRIALS, seed=1, matrix=ref4))
    exact = pe_iid_coding(ref4, 0.7).value
    assert abs(coding.estimate - exact) <= 3 * _sigma(exact, TRIALS)

    majority = run_mc(SimConfig(m=4, crowd=crowd, trials=TRIALS, seed=1, rule=Rule.MAJORITY, n=10))
    exact = pe_iid_majority(4, 10, 0.7).value
    assert abs(majority.estimate - exact) <= 3 * _sigma(exact, TRIALS)


@pytest.mark.slow
def test_mc_matches_paired_exact():
    dist = BetaReliability(4.0, 1.0)
    crowd = CrowdSpec(dist=dist, variant=Variant.PAIRED, rho=covariance_from_correlation(dist, 0.6))
    a = random_balanced_matrix(4, 8, seed=4)
    coding = run_mc(SimConfig(m=4, crowd=crowd, trials=TRIALS, seed=2, matrix=a))
    exact = pe_paired_coding(a, 0.8, crowd.rho).value
    assert abs(coding.estimate - exact) <= 3 * _sigma(exact, TRIALS)

    majority = run_mc(SimConfig(m=4, crowd=crowd, trials=TRIALS, seed=2, rule=Rule.MAJORITY, n=8))
    exact = pe_paired_majority(4, 8, 0.8, crowd.rho).value
    assert abs(majority.estimate - exact) <= 3 * _sigma(exact, TRIALS)


@pytest.mark.slow
def test_only_mean_reliability_matters(ref4):
    hammer = run_mc(SimConfig(m=4, crowd=CrowdSpec(dist=spammer_hammer(0.6, 4)), trials=TRIALS, seed=1, matrix=ref4))
    beta = run_mc(SimConfig(m=4, crowd=CrowdSpec(dist=BetaReliability(7.0, 3.0)), trials=TRIALS, seed=2, matrix=ref4))
    assert abs(hammer.estimate - beta.estimate) <= 3 * math.hypot(hammer.stderr, beta.stderr)


@pytest.mark.slow
def test_pair_correlation_raises_error(ref8):
    a = CodeMatrix(ref8.bits[:, :12])
    dist = BetaReliability(0.5, 0.5)
    estimates = []
    for rho_corr in (-0.9, 0.0, 0.9):
        crowd = CrowdSpec(dist=dist, variant=Variant.PAIRED, rho=covariance_from_correlation(dist, rho_corr))
        estimates.append(run_mc(SimConfig(m=8, crowd=crowd, trials=TRIALS, seed=1, matrix=a)))
    low, mid, high = estimates
    assert high.estimate - low.estimate >= 3 * math.hypot(low.stderr, high.stderr)
    assert low.estimate <= mid.estimate + 3 * math.hypot(low.stderr, mid.stderr)
    assert mid.estimate <= high.estimate + 3 * math.hypot(mid.stderr, high.stderr)


@pytest.mark.slow
def test_concentration_trend(ref8):
    dist = BetaReliability(0.5, 0.5)
    coding, majority = [], []
    for kappa in (0.1, 1.0, 10.0, 100.0):
        crowd = CrowdSpec(dist=dist, variant=Variant.LATENT_GROUPS, kappa=kappa)
        coding.append(run_mc(SimConfig(m=8, crowd=crowd, trials=TRIALS, seed=1, matrix=ref8)))
        majority.append(run_mc(SimConfig(m=8, crowd=crowd, trials=TRIALS, seed=1, rule=Rule.MAJORITY, n=15)))
    for prev, nxt in zip(coding, coding[1:]):
        assert nxt.estimate <= prev.estimate + 3 * math.hypot(prev.stderr, nxt.stderr)
    gap_low = majority[0].estimate - coding[0].estimate
    gap_high = majority[-1].estimate - coding[-1].estimate
    slack = 3 * math.sqrt(sum(e.stderr ** 2 for e in (coding[0], coding[-1], majority[0], majority[-1])))
    assert gap_high >= gap_low - slack


@pytest.mark.slow
def test_concentration_trend_with_pairs(ref8):
    a = CodeMatrix(ref8.bits[:, :12])
    dist = BetaReliability(0.5, 0.5)
    rho = covariance_from_correlation(dist, -0.5)
    coding = []
    for kappa in (0.1, 10.0, 100.0):
        crowd = CrowdSpec(dist=dist, variant=Variant.LATENT_GROUPS_PAIRED, rho=rho, kappa=kappa)
        coding.append(run_mc(SimConfig(m=8, crowd=crowd, trials=TRIALS, seed=1, matrix=a)))
    for prev, nxt in zip(coding, coding[1:]):
        assert nxt.estimate <= prev.estimate + 3 * math.hypot(prev.stderr, nxt.stderr)
    majority = run_mc(SimConfig(m=8, crowd=CrowdSpec(dist=dist, variant=Variant.LATENT_GROUPS_PAIRED, rho=rho,
                                                      kappa=100.0), trials=TRIALS, seed=1, rule=Rule.MAJORITY, n=12))
    assert 0.0 < majority.estimate < 1.0
