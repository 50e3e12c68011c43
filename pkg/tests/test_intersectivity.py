"""Exact decider, heuristic search, and the sampling layer."""
from itertools import combinations

import numpy as np
import pytest

from aplab.counting import DifferenceSequence, SubsetMask, ap_average
from aplab.groups import ApParams, Group, as_density, density_target
from aplab.intersectivity import (ExactLimitError, estimate_critical_size,
                                  is_intersective_exact, max_free_heuristic,
                                  minimal_forbidden_sets, run_trials, trial,
                                  wilson_interval)
from aplab.rng import stream


def oracle_decide(seq, params):
    """Check every subset at the density target for progression freeness.

    A free set of exactly the target size certifies larger free sets are
    unnecessary to rule out intersectivity, and removing points never
    creates progressions, so testing one size settles every size above it.
    """
    n = seq.group.modulus
    target = density_target(seq.group, params)
    for combo in combinations(range(n), target):
        mask = SubsetMask.from_indices(seq.group, combo)
        if ap_average(mask, seq, params.k).numerator == 0:
            return False
    return True


def test_known_verdicts():
    g = Group(5)
    p = ApParams(3, as_density(0.6))
    v = is_intersective_exact(DifferenceSequence(g, (1,)), p)
    assert not v.intersective
    assert sorted(v.witness.indices()) == [0, 1, 3]
    assert v.method == "exact"
    # zero difference repeats a point, so every nonempty set is covered
    assert is_intersective_exact(DifferenceSequence(g, (0,)), p).intersective
    assert is_intersective_exact(DifferenceSequence(g, (1, 2, 3, 4)), p).intersective


def test_exact_matches_oracle_small():
    rng = stream(41, 0)
    for _ in range(60):
        n = int(rng.integers(4, 11))
        m = int(rng.integers(1, 5))
        eps = float(rng.choice([0.4, 0.6]))
        g = Group(n)
        params = ApParams(3, as_density(eps))
        seq = DifferenceSequence.sample(g, m, rng)
        got = is_intersective_exact(seq, params)
        assert got.intersective == oracle_decide(seq, params)
        if got.witness is not None:
            assert ap_average(got.witness, seq, 3).numerator == 0
            assert got.witness.cardinality >= density_target(g, params)


def test_exact_limit_enforced():
    g = Group(50)
    seq = DifferenceSequence(g, (1,))
    with pytest.raises(ExactLimitError):
        is_intersective_exact(seq, ApParams(3), exact_limit=40)


def test_minimal_forbidden_sets():
    g = Group(7)
    seq = DifferenceSequence(g, (1, 1, 2))  # repeat collapses
    sets = minimal_forbidden_sets(seq, 3)
    assert all(len(s) in (1, 3) or len(s) == len(set(s)) for s in sets)
    # no forbidden set contains another
    for a in sets:
        for b in sets:
            if a is not b:
                assert not set(a) <= set(b)
    # d = 0 collapses to singletons which dominate everything
    single = minimal_forbidden_sets(DifferenceSequence(g, (0, 1)), 3)
    assert all(len(s) == 1 for s in single)
    assert len(single) == 7


def test_heuristic_returns_free_set():
    rng = stream(41, 1)
    for _ in range(25):
        n = int(rng.integers(5, 30))
        m = int(rng.integers(1, 5))
        g = Group(n)
        seq = DifferenceSequence.sample(g, m, rng)
        free = max_free_heuristic(seq, ApParams(3), rng)
        if free.cardinality:
            assert ap_average(free, seq, 3).numerator == 0


def test_heuristic_finds_known_maximum():
    # N=7, D=(1): the largest progression-free set has 4 points
    g = Group(7)
    seq = DifferenceSequence(g, (1,))
    free = max_free_heuristic(seq, ApParams(3), stream(41, 2))
    assert free.cardinality == 4


def test_trial_agreement_with_exact():
    g = Group(9)
    params = ApParams(3, as_density(0.5))
    for t in range(40):
        rng = stream(43, 3, t)
        seq = DifferenceSequence.sample(g, 2, rng)
        want = is_intersective_exact(seq, params).intersective
        got = trial(g, params, 2, stream(43, 3, t))
        assert got == want


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert 0.40 < lo < 0.5 < hi < 0.60
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    with pytest.raises(ValueError):
        wilson_interval(5, 0)


def test_run_trials_scheduling_independent():
    g = Group(5)
    p = ApParams(3, as_density(0.6))
    a = run_trials(g, p, 1, 64, 7, workers=1)
    b = run_trials(g, p, 1, 64, 7, workers=4)
    assert a == b
    # offset extends the index range rather than replaying draws
    c = run_trials(g, p, 1, 32, 7) + run_trials(g, p, 1, 32, 7, offset=32)
    assert c == a


def test_estimate_known_cases():
    est = estimate_critical_size(Group(5), ApParams(3, as_density(1.0)),
                                 trials_per_m=50, seed=2)
    assert est.m_star == 1  # the full set always carries a progression
    est2 = estimate_critical_size(Group(5), ApParams(3, as_density(0.6)),
                                  trials_per_m=100, seed=2)
    assert est2.m_star >= 2  # p(1) = 1/5 sits far below one half
    curve_m = [pt.m for pt in est2.curve]
    assert curve_m == sorted(curve_m)
    probed = {pt.m: pt for pt in est2.curve}
    assert probed[est2.m_star].p_hat >= 0.5
