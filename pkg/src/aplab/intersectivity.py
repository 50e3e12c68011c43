"""Deciding intersectivity of a difference sequence and estimating the
critical sequence length.

A sequence D is (k-1, epsilon)-intersective in Z/N when every subset of
size at least ceil(epsilon * N) contains a full k-point progression with
some difference from D.  Deciding this is a hypergraph independent-set
problem: the forbidden sets are the progression supports, and D fails to
be intersective exactly when some subset of size ceil(epsilon * N) avoids
all of them.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from statistics import NormalDist
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .counting import DifferenceSequence, SubsetMask, ap_average
from .groups import ApParams, Group, density_target
from .rng import stream

EXACT_LIMIT_DEFAULT = 40
HEURISTIC_RESTARTS_DEFAULT = 32
HEURISTIC_PASSES_DEFAULT = 8
_STABILIZE_ROUNDS = 12


class ExactLimitError(ValueError):
    """Raised when an exact decision is requested beyond the configured size."""


@dataclass(frozen=True)
class IntersectivityVerdict:
    intersective: bool
    witness: Optional[SubsetMask]  # progression-free set of target size, when one exists
    method: str  # "exact" or "heuristic"


def minimal_forbidden_sets(seq: DifferenceSequence, k: int) -> list[tuple[int, ...]]:
    """Distinct progression supports with supersets removed.

    A subset is progression-free iff it includes none of these vertex
    sets, so dropping supersets changes nothing while shrinking the
    search.  Deterministic order: by size, then lexicographic.
    """
    n = seq.group.modulus
    supports = set()
    for d in seq.distinct():
        for x in range(n):
            supports.add(frozenset((x + step * d) % n for step in range(k)))
    kept: list[frozenset] = []
    for s in sorted(supports, key=lambda f: (len(f), sorted(f))):
        if not any(t <= s for t in kept):
            kept.append(s)
    return [tuple(sorted(s)) for s in kept]


def exact_free_set(seq: DifferenceSequence, k: int, target: int) -> Optional[tuple[int, ...]]:
    """A progression-free subset of size exactly ``target``, or None.

    Branch and bound over vertices in decreasing-degree order: try
    including the vertex first (skipping it when that would complete a
    forbidden set), prune a branch once the undecided vertices cannot
    reach the target.  Free subsets are downward closed, so searching at
    exactly the target size is complete.
    """
    n = seq.group.modulus
    if target <= 0:
        return ()
    if target > n:
        return None
    edges = minimal_forbidden_sets(seq, k)
    banned = {e[0] for e in edges if len(e) == 1}
    edges = [e for e in edges if len(e) > 1]
    avail = [v for v in range(n) if v not in banned]
    if target > len(avail):
        return None
    vert_edges: dict[int, list[int]] = {v: [] for v in avail}
    for ei, e in enumerate(edges):
        for v in e:
            if v in vert_edges:
                vert_edges[v].append(ei)
    order = sorted(avail, key=lambda v: (-len(vert_edges[v]), v))
    edge_size = [len(e) for e in edges]
    edge_in = [0] * len(edges)
    chosen: list[int] = []

    def descend(pos: int, needed: int) -> bool:
        if needed == 0:
            return True
        if len(order) - pos < needed:
            return False
        v = order[pos]
        completes = False
        for ei in vert_edges[v]:
            if edge_in[ei] == edge_size[ei] - 1:
                completes = True
                break
        if not completes:
            for ei in vert_edges[v]:
                edge_in[ei] += 1
            chosen.append(v)
            if descend(pos + 1, needed - 1):
                return True
            chosen.pop()
            for ei in vert_edges[v]:
                edge_in[ei] -= 1
        return descend(pos + 1, needed)

    if descend(0, target):
        return tuple(sorted(chosen))
    return None


def is_intersective_exact(seq: DifferenceSequence, params: ApParams,
                          exact_limit: int = EXACT_LIMIT_DEFAULT) -> IntersectivityVerdict:
    """Complete decision by branch and bound; feasible for small N only."""
    group = seq.group
    if group.modulus > exact_limit:
        raise ExactLimitError(
            f"N={group.modulus} exceeds the exact decision limit {exact_limit}; "
            "use the heuristic searcher")
    target = density_target(group, params)
    found = exact_free_set(seq, params.k, target)
    if found is None:
        return IntersectivityVerdict(True, None, "exact")
    witness = SubsetMask.from_indices(group, found)
    if witness.cardinality > 0 and ap_average(witness, seq, params.k).numerator != 0:
        raise AssertionError("internal error: claimed witness contains a progression")
    return IntersectivityVerdict(False, witness, "exact")


def _edge_arrays(edges: list[tuple[int, ...]], n: int):
    sizes = np.array([len(e) for e in edges], dtype=np.int64)
    edge_ptr = np.zeros(len(edges) + 1, dtype=np.int64)
    np.cumsum(sizes, out=edge_ptr[1:])
    edge_vtx = np.fromiter((v for e in edges for v in e), dtype=np.int64,
                           count=int(edge_ptr[-1]))
    incid: list[list[int]] = [[] for _ in range(n)]
    for ei, e in enumerate(edges):
        for v in e:
            incid[v].append(ei)
    v_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.array([len(b) for b in incid], dtype=np.int64), out=v_ptr[1:])
    v_edges = np.fromiter((ei for b in incid for ei in b), dtype=np.int64,
                          count=int(v_ptr[-1]))
    return edge_ptr, edge_vtx, sizes, v_ptr, v_edges


def _heuristic_free_set(seq: DifferenceSequence, k: int, target: int, rng,
                        restarts: int, passes: int) -> tuple[int, np.ndarray]:
    """Greedy-plus-swaps search; returns (best size, membership vector)."""
    n = seq.group.modulus
    edges = minimal_forbidden_sets(seq, k)
    edge_ptr, edge_vtx, sizes, v_ptr, v_edges = _edge_arrays(edges, n)
    perms = np.stack([rng.permutation(n) for _ in range(restarts)]).astype(np.int64)
    removals = rng.integers(0, n, size=(restarts, passes), dtype=np.int64)
    best_size, best_mask = _kernels.apfree_search_kernel(
        n, target, edge_ptr, edge_vtx, sizes, v_ptr, v_edges, perms, removals)
    return int(best_size), np.asarray(best_mask, dtype=np.uint8)


def max_free_heuristic(seq: DifferenceSequence, params: ApParams, rng,
                       restarts: int = HEURISTIC_RESTARTS_DEFAULT,
                       passes: int = HEURISTIC_PASSES_DEFAULT) -> SubsetMask:
    """Best progression-free subset the randomized search can find.

    The result is always genuinely progression-free (asserted on return);
    only its maximality is heuristic.
    """
    size, mem = _heuristic_free_set(seq, params.k, seq.group.modulus + 1, rng,
                                    restarts, passes)
    mask = SubsetMask(seq.group, mem)
    if mask.cardinality > 0 and ap_average(mask, seq, params.k).numerator != 0:
        raise AssertionError("internal error: heuristic returned a non-free set")
    return mask


def trial(group: Group, params: ApParams, m: int, rng,
          exact_limit: int = EXACT_LIMIT_DEFAULT,
          restarts: int = HEURISTIC_RESTARTS_DEFAULT,
          passes: int = HEURISTIC_PASSES_DEFAULT) -> bool:
    """Sample D of length m from the given generator and decide intersectivity.

    The heuristic searcher runs first: any free set it finds settles the
    answer (False) exactly.  When it finds none and N is within the exact
    limit, branch and bound settles the answer completely; beyond the
    limit the trial reports True on heuristic evidence alone, which can
    overstate intersectivity but never understate it.
    """
    if m < 1:
        raise ValueError("sequence length m must be at least 1")
    seq = DifferenceSequence.sample(group, m, rng)
    target = density_target(group, params)
    size, mem = _heuristic_free_set(seq, params.k, target, rng, restarts, passes)
    if size >= target:
        mask = SubsetMask(group, mem)
        if ap_average(mask, seq, params.k).numerator != 0:
            raise AssertionError("internal error: heuristic returned a non-free set")
        return False
    if group.modulus <= exact_limit:
        return is_intersective_exact(seq, params, exact_limit).intersective
    return True


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError("successes outside [0, trials]")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
    # degenerate counts have exact endpoints; rounding would leave dust
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return (lo, hi)


def worker_count() -> int:
    """Worker cap from APLAB_THREADS, defaulting to the machine's cores."""
    raw = os.environ.get("APLAB_THREADS", "")
    if raw:
        count = int(raw)
        if count < 1:
            raise ValueError("APLAB_THREADS must be a positive integer")
        return count
    return os.cpu_count() or 1


class ProbePoint(NamedTuple):
    m: int
    trials: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class CriticalSizeEstimate:
    m_star: int
    curve: tuple[ProbePoint, ...]  # aggregated per probed m, ascending
    modulus: int
    k: int
    epsilon: Fraction
    trials_per_m: int
    confidence: float
    seed: int


def run_trials(group: Group, params: ApParams, m: int, count: int, seed: int, *,
               offset: int = 0, exact_limit: int = EXACT_LIMIT_DEFAULT,
               restarts: int = HEURISTIC_RESTARTS_DEFAULT,
               passes: int = HEURISTIC_PASSES_DEFAULT,
               workers: Optional[int] = None) -> int:
    """Number of intersective samples among trials offset..offset+count-1.

    Trial index t always uses the generator keyed by (seed, m, t), so the
    result is independent of worker count and chunk scheduling.
    """
    if count < 1:
        raise ValueError("trial count must be at least 1")

    def block(indices) -> int:
        total = 0
        for t in indices:
            rng = stream(seed, m, t)
            total += trial(group, params, m, rng, exact_limit, restarts, passes)
        return total

    nworkers = workers if workers is not None else worker_count()
    indices = range(offset, offset + count)
    if nworkers <= 1 or count < 2 * nworkers:
        return block(indices)
    chunks = np.array_split(np.asarray(indices), nworkers)
    with ThreadPoolExecutor(max_workers=nworkers) as pool:
        return sum(pool.map(block, (c.tolist() for c in chunks if c.size)))


def estimate_critical_size(group: Group, params: ApParams, *,
                           trials_per_m: int = 200, seed: int = 0,
                           confidence: float = 0.95,
                           exact_limit: int = EXACT_LIMIT_DEFAULT,
                           restarts: int = HEURISTIC_RESTARTS_DEFAULT,
                           passes: int = HEURISTIC_PASSES_DEFAULT,
                           workers: Optional[int] = None,
                           m_cap: Optional[int] = None) -> CriticalSizeEstimate:
    """Estimate the smallest m whose intersectivity probability reaches 1/2.

    Search policy: double m until the empirical rate crosses 1/2, binary
    search the crossing, then re-test the boundary with four times the
    trial budget and probe both neighbors.  The estimate is the smallest
    probed m whose aggregated rate is at least 1/2 with Wilson lower bound
    at least 0.45; extra boundary rounds run until one qualifies.
    Repeat probes of the same m extend its trial-index range, so every
    trial is a fresh draw and aggregation stays unbiased.
    """
    if trials_per_m < 1:
        raise ValueError("trials_per_m must be at least 1")
    cap = m_cap if m_cap is not None else max(64, 8 * group.modulus)
    curve: dict[int, list[int]] = {}
    offsets: dict[int, int] = {}

    def probe(m: int, count: int):
        off = offsets.get(m, 0)
        got = run_trials(group, params, m, count, seed, offset=off,
                         exact_limit=exact_limit, restarts=restarts,
                         passes=passes, workers=workers)
        offsets[m] = off + count
        entry = curve.setdefault(m, [0, 0])
        entry[0] += count
        entry[1] += got

    def p_hat(m: int) -> float:
        t, s = curve[m]
        return s / t

    def qualifier() -> Optional[int]:
        for m in sorted(curve):
            t, s = curve[m]
            if s / t >= 0.5 and wilson_interval(s, t, confidence)[0] >= 0.45:
                return m
        return None

    probe(1, trials_per_m)
    m = 1
    lo = 0
    while p_hat(m) < 0.5:
        if m >= cap:
            raise RuntimeError(f"intersectivity rate stayed below 1/2 up to m={cap}")
        lo = m
        m = min(2 * m, cap)
        probe(m, trials_per_m)
    hi = m
    while hi - lo > 1:
        mid = (lo + hi) // 2
        probe(mid, trials_per_m)
        if p_hat(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
    cand = hi
    probe(cand, 4 * trials_per_m)
    if cand > 1:
        probe(cand - 1, trials_per_m)
    probe(cand + 1, trials_per_m)
    chosen = qualifier()
    rounds = 0
    while chosen is None:
        rounds += 1
        if rounds > _STABILIZE_ROUNDS or cand > cap:
            raise RuntimeError("critical size estimate failed to stabilize")
        if p_hat(cand) < 0.5:
            cand += 1
        probe(cand, 4 * trials_per_m)
        chosen = qualifier()
    points = tuple(
        ProbePoint(m, t, s, s / t, *wilson_interval(s, t, confidence))
        for m, (t, s) in sorted(curve.items()))
    return CriticalSizeEstimate(chosen, points, group.modulus, params.k,
                                params.epsilon, trials_per_m, confidence, seed)
