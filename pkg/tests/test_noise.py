import numpy as np
import pytest
from scipy import stats

from heavyhex import build_code, uniform_model
from heavyhex.noise import (
    ONE_QUBIT_PAULIS,
    TWO_QUBIT_PAULIS,
    FaultLocation,
    NoiseModel,
    sample_faults,
    schedule_locations,
    single_source_model,
)


@pytest.fixture(scope="module")
def sched():
    return build_code(3).schedule


def test_two_qubit_pauli_set_excludes_identity():
    assert len(TWO_QUBIT_PAULIS) == 15
    assert "II" not in TWO_QUBIT_PAULIS


def test_uniform_rejects_out_of_range():
    with pytest.raises(ValueError):
        uniform_model(-0.1)
    with pytest.raises(ValueError):
        uniform_model(1.5)


def test_zero_rate_gives_empty_pattern(sched):
    pat = sample_faults(sched, uniform_model(0.0), np.random.default_rng(0))
    assert len(pat) == 0


def test_certainty_rate_faults_every_location(sched):
    locs = schedule_locations(sched)
    pat = sample_faults(sched, uniform_model(1.0), np.random.default_rng(0))
    assert len(pat) == len(locs)


def test_same_seed_same_pattern(sched):
    model = uniform_model(0.01)
    a = sample_faults(sched, model, np.random.default_rng(99))
    b = sample_faults(sched, model, np.random.default_rng(99))
    assert [(f.location.loc_id, f.value) for f in a.faults] == [
        (f.location.loc_id, f.value) for f in b.faults
    ]


def test_binomial_bounds_on_100_locations():
    # 100 one-qubit locations at p=0.5: count within [30, 70] has probability
    # > 0.99 (binomial tail bound); checked for a few fixed seeds
    locs = [FaultLocation(i, "1q", 0, (i,)) for i in range(100)]
    model = uniform_model(0.5)
    for seed in range(5):
        pat = sample_faults(locs, model, np.random.default_rng(seed))
        assert 30 <= len(pat) <= 70


def test_pauli_histogram_uniform_thirds():
    locs = [FaultLocation(i, "idle", 0, (i,)) for i in range(20)]
    model = uniform_model(1.0)
    rng = np.random.default_rng(42)
    counts = {p: 0 for p in ONE_QUBIT_PAULIS}
    draws = 0
    for _ in range(5000):
        for f in sample_faults(locs, model, rng).faults:
            counts[f.value] += 1
            draws += 1
    expected = draws / 3
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < stats.chi2.ppf(0.999, df=2)


def test_cnot_faults_uniform_over_fifteen_pairs():
    locs = [FaultLocation(i, "2q", 0, (0, 1)) for i in range(20)]
    model = uniform_model(1.0)
    rng = np.random.default_rng(1)
    counts = {p: 0 for p in TWO_QUBIT_PAULIS}
    draws = 0
    for _ in range(5000):
        for f in sample_faults(locs, model, rng).faults:
            counts[f.value] += 1
            draws += 1
    expected = draws / 15
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < stats.chi2.ppf(0.999, df=14)


def test_per_location_frequency_chi_square(sched):
    """Empirical fault frequency per location matches the configured rate."""
    locs = schedule_locations(sched)[:20]
    p = 0.01
    model = uniform_model(p)
    rng = np.random.default_rng(7)
    n = 100_000
    hits = np.zeros(len(locs))
    for _ in range(n):
        for f in sample_faults(locs, model, rng).faults:
            hits[f.location.loc_id] += 1
    # chi-square against Binomial(n, p) per location at significance 0.001
    chi2 = ((hits - n * p) ** 2 / (n * p * (1 - p))).sum()
    assert chi2 < stats.chi2.ppf(0.999, df=len(locs))


def test_single_source_model():
    m = single_source_model("readout", 0.02)
    assert m.p_readout == 0.02
    assert m.p_1q == m.p_2q == m.p_init == m.p_idle == 0.0
    with pytest.raises(ValueError):
        single_source_model("cosmic", 0.1)


def test_map_based_rates_raise_on_missing_entries():
    model = NoiseModel(p_2q={(0, 1): 0.1})
    assert model.rate_2q(1, 0) == 0.1
    with pytest.raises(KeyError):
        model.rate_2q(3, 4)
