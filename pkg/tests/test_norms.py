"""Operator norms: exact enumeration, power iteration, bounds, sign sums."""
from itertools import product
from math import log, sqrt

import numpy as np
import pytest

from aplab import norms as N
from aplab.counting import DifferenceSequence
from aplab.embedding import pair_embedding
from aplab.groups import Group
from aplab.rng import stream


def test_identity_matrix():
    eye = np.eye(8)
    spec, conv = N.spectral_norm(eye)
    assert conv and spec == pytest.approx(1.0)
    val, u = N.inf_to_one_exact(eye)
    assert val == 8.0
    assert np.abs(eye @ u).sum() == 8.0
    assert N.one_to_one_norm(eye) == 1.0


def test_rank_one_and_diagonal():
    v = np.array([3.0, -4.0])
    mat = np.outer(v, v)  # spectral norm 25
    spec, _ = N.spectral_norm(mat)
    assert spec == pytest.approx(25.0)
    diag = np.diag([1.0, -7.0, 2.0])
    spec2, _ = N.spectral_norm(diag)
    assert spec2 == pytest.approx(7.0)
    assert N.one_to_one_norm(diag) == 7.0
    val, _ = N.inf_to_one_exact(diag)
    assert val == 10.0  # signs select every diagonal magnitude


def test_inf_to_one_exact_matches_double_enumeration():
    rng = stream(83, 0)
    for _ in range(25):
        d = int(rng.integers(1, 9))
        mat = rng.integers(-3, 4, size=(d, d)).astype(np.float64)
        val, u = N.inf_to_one_exact(mat)
        best = 0.0
        for us in product((1.0, -1.0), repeat=d):
            row = np.array(us) @ mat
            best = max(best, np.abs(row).sum())
        assert val == best
        assert np.abs(u @ mat).sum() == pytest.approx(val)


def test_inf_to_one_bounds_sandwich():
    rng = stream(83, 1)
    for _ in range(15):
        d = int(rng.integers(2, 12))
        mat = rng.integers(-5, 6, size=(d, d)).astype(np.float64)
        exact, _ = N.inf_to_one_exact(mat)
        lo, up = N.inf_to_one_bounds(mat, rng=rng)
        assert lo <= exact + 1e-9
        assert exact <= up + 1e-9


def test_spectral_norm_sparse_path_matches_dense():
    rng = stream(83, 2)
    for _ in range(10):
        d = int(rng.integers(5, 40))
        half = rng.integers(-3, 4, size=(d, d)).astype(np.float64)
        mat = half + half.T
        want = np.linalg.norm(mat, 2)
        got, conv = N.spectral_norm(mat, dense_limit=4)  # force iteration
        assert conv
        assert got == pytest.approx(want, rel=1e-6, abs=1e-9)


def test_spectral_norm_on_embedding_matrix():
    seq = DifferenceSequence(Group(11), (1, 3))
    mat = pair_embedding(seq, 0, 1, 2, 1, 20000)
    want = np.linalg.norm(mat.to_dense().astype(np.float64), 2)
    got, conv = N.spectral_norm(mat, dense_limit=4)
    assert conv
    assert got == pytest.approx(want, rel=1e-6)
    got_dense, _ = N.spectral_norm(mat)  # dense route for small dims
    assert got_dense == pytest.approx(want, rel=1e-12)


def test_one_to_one_norm_is_max_column_mass():
    rng = stream(83, 3)
    mat = rng.integers(-4, 5, size=(7, 7)).astype(np.float64)
    want = np.abs(mat).sum(axis=0).max()
    assert N.one_to_one_norm(mat) == want
    seq = DifferenceSequence(Group(11), (1, 3))
    emb = pair_embedding(seq, 0, 1, 2, 1, 20000)
    assert N.one_to_one_norm(emb) == np.abs(emb.to_dense()).sum(axis=0).max()


def test_norm_report_consistency():
    rng = stream(83, 4)
    half = rng.integers(-3, 4, size=(10, 10))
    mat = (half + half.T).astype(np.float64)
    rep = N.norm_report(mat)
    assert rep.dim == 10
    assert rep.inf_to_one_exact is not None
    assert rep.inf_to_one_lower == rep.inf_to_one_exact == rep.inf_to_one_upper
    assert rep.inf_to_one_exact <= rep.dim * rep.spectral + 1e-6
    assert rep.spectral <= rep.one_to_one + 1e-9
    big = rng.standard_normal((30, 30))
    rep2 = N.norm_report(big, enum_limit=24, rng=rng)
    assert rep2.inf_to_one_exact is None
    assert rep2.inf_to_one_lower <= rep2.inf_to_one_upper


def test_khintchine_bound_formula():
    mats = [np.eye(4), 2 * np.eye(4)]
    want = 10.0 * sqrt(log(4)) * sqrt(1.0 + 4.0)
    assert N.khintchine_bound(mats) == pytest.approx(want)
    with pytest.raises(ValueError):
        N.khintchine_bound([])
    with pytest.raises(ValueError):
        N.khintchine_bound([np.eye(1)])  # log 1 = 0 makes the bound empty
    with pytest.raises(ValueError):
        N.khintchine_bound([np.eye(3), np.eye(4)])


def test_khintchine_bench_within_bound():
    rng = stream(83, 5)
    mats = [rng.standard_normal((12, 12)) for _ in range(6)]
    rep = N.khintchine_bench(mats, 200, stream(83, 6))
    assert rep.dim == 12 and rep.count == 6 and rep.trials == 200
    assert rep.mean_norm <= rep.max_norm <= rep.bound
    assert rep.mean_ratio == pytest.approx(rep.mean_norm / rep.bound)
    # ratios stay well inside 1 because the constant is generous
    assert rep.max_ratio < 0.5


def test_khintchine_bench_deterministic():
    mats = [stream(83, 7).standard_normal((8, 8)) for _ in range(4)]
    a = N.khintchine_bench(mats, 50, stream(83, 8))
    b = N.khintchine_bench(mats, 50, stream(83, 8))
    assert a.mean_norm == b.mean_norm and a.max_norm == b.max_norm
