"""Time each compiled kernel against its numpy fallback.

Run as a script:

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Every workload is checked for agreement between the two paths before it
is timed, so the table doubles as a parity test.  Witness vectors may
legitimately differ on ties; only values are compared.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

import aplab._kernels as K
from aplab.counting import DifferenceSequence
from aplab.discrepancy import _01_terms, _pm_terms, _term_arrays
from aplab.groups import Group
from aplab.hyperpoly import build_pair_weight_hypergraph
from aplab.intersectivity import _edge_arrays, minimal_forbidden_sets
from aplab.rng import stream


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(name: str, jit_fn, numpy_fn, repeat: int, rows: list) -> None:
    if K.HAVE_NUMBA:
        jit_fn()  # compile before the clock starts
        t_jit = best_of(jit_fn, repeat)
    else:
        t_jit = float("nan")
    t_np = best_of(numpy_fn, repeat)
    rows.append((name, t_jit, t_np))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="samples per measurement, best is kept")
    ap.add_argument("--quick", action="store_true",
                    help="shrink workloads roughly 4x")
    args = ap.parse_args()
    q = 2 if args.quick else 1
    rng = stream(99, 0)
    rows: list[tuple[str, float, float]] = []

    # progression counting over a large modulus
    n = 20011 // q
    mem = (rng.integers(0, 2, size=n)).astype(np.uint8)
    want = int(K.ap_count_numpy(mem, 7, 3))
    assert int(K.ap_count_jit(mem, 7, 3)) == want if K.HAVE_NUMBA else True
    bench(f"ap_count (N={n})",
          lambda: K.ap_count_jit(mem, 7, 3),
          lambda: K.ap_count_numpy(mem, 7, 3), args.repeat, rows)

    n2 = 4001 // q
    mem2 = (rng.integers(0, 2, size=n2)).astype(np.uint8)
    if K.HAVE_NUMBA:
        assert int(K.all_diffs_count_jit(mem2, 3)) == int(K.all_diffs_count_numpy(mem2, 3))
    bench(f"all_diffs_count (N={n2})",
          lambda: K.all_diffs_count_jit(mem2, 3),
          lambda: K.all_diffs_count_numpy(mem2, 3), args.repeat, rows)

    # sign and 0/1 enumeration on a real discrepancy instance
    nv = 20 - 2 * (q - 1)
    seq = DifferenceSequence.sample(Group(nv), 6, rng)
    for label, build in (("pm_enum", _pm_terms), ("z01_enum", _01_terms)):
        terms, base = build(seq, np.ones(6, dtype=np.int64), 3)
        involved, coef, ptr, vtx, v_ptr, v_terms, masks = _term_arrays(terms)
        kj = K.pm_enum_jit if label == "pm_enum" else K.z01_enum_jit
        kn = K.pm_enum_numpy if label == "pm_enum" else K.z01_enum_numpy
        if K.HAVE_NUMBA:
            got_j = kj(len(involved), base, coef, ptr, vtx, v_ptr, v_terms)[0]
            assert int(got_j) == int(kn(len(involved), base, coef, masks)[0])
        bench(f"{label} ({len(involved)} vertices)",
              lambda kj=kj: kj(len(involved), base, coef, ptr, vtx, v_ptr, v_terms),
              lambda kn=kn: kn(len(involved), base, coef, masks), args.repeat, rows)

    # full inf->1 sign scan on a dense matrix
    d = 18 - 2 * (q - 1)
    mat = rng.integers(-3, 4, size=(d, d)).astype(np.float64)
    mat = mat + mat.T
    if K.HAVE_NUMBA:
        assert K.infone_enum_jit(mat)[0] == K.infone_enum_numpy(mat)[0]
    bench(f"infone_enum (dim={d})",
          lambda: K.infone_enum_jit(mat),
          lambda: K.infone_enum_numpy(mat), args.repeat, rows)

    # hypergraph evaluation, batched: single calls are microseconds
    g = Group(101)
    seqh = DifferenceSequence.sample(g, 8, rng)
    h = build_pair_weight_hypergraph(seqh, 0, range(1, 8), 1)
    eptr, evtx, emult = h._arrays()
    xs = [(rng.integers(0, 2, size=101)).astype(np.uint8) for _ in range(200 // q)]
    if K.HAVE_NUMBA:
        for x in xs[:3]:
            assert int(K.poly_eval01_jit(eptr, evtx, emult, x)) == \
                   int(K.poly_eval01_numpy(eptr, evtx, emult, x))
    bench(f"poly_eval01 ({len(h.edges())} edges, {len(xs)} evals)",
          lambda: [K.poly_eval01_jit(eptr, evtx, emult, x) for x in xs],
          lambda: [K.poly_eval01_numpy(eptr, evtx, emult, x) for x in xs],
          args.repeat, rows)

    nw = 2003 // q
    seqw = DifferenceSequence.sample(Group(nw), 6, rng)
    u = (rng.integers(0, 2, size=nw)).astype(np.uint8)
    good = np.array(seqw.entries[1:], dtype=np.int64)
    if K.HAVE_NUMBA:
        assert int(K.row_weight_jit(u, seqw.entries[0], good, 1, nw)) == \
               int(K.row_weight_numpy(u, seqw.entries[0], good, 1, nw))
    bench(f"row_weight (N={nw})",
          lambda: K.row_weight_jit(u, seqw.entries[0], good, 1, nw),
          lambda: K.row_weight_numpy(u, seqw.entries[0], good, 1, nw),
          args.repeat, rows)

    # randomized free-set search; same perms feed both paths
    ns = 41
    seqs = DifferenceSequence.sample(Group(ns), 3, rng)
    edges = minimal_forbidden_sets(seqs, 3)
    eptr2, evtx2, sizes, vptr2, vedges2 = _edge_arrays(edges, ns)
    restarts = 64 // q
    perms = np.stack([rng.permutation(ns) for _ in range(restarts)]).astype(np.int64)
    removals = rng.integers(0, ns, size=(restarts, 4), dtype=np.int64)
    if K.HAVE_NUMBA:
        a = K.apfree_search_jit(ns, ns + 1, eptr2, evtx2, sizes, vptr2, vedges2,
                                perms, removals)
        b = K.apfree_search_py(ns, ns + 1, eptr2, evtx2, sizes, vptr2, vedges2,
                               perms, removals)
        assert int(a[0]) == int(b[0])
    bench(f"apfree_search (N={ns}, {restarts} restarts)",
          lambda: K.apfree_search_jit(ns, ns + 1, eptr2, evtx2, sizes, vptr2,
                                      vedges2, perms, removals),
          lambda: K.apfree_search_py(ns, ns + 1, eptr2, evtx2, sizes, vptr2,
                                     vedges2, perms, removals),
          args.repeat, rows)

    wid = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{wid}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, tj, tn in rows:
        ratio = tn / tj if tj == tj and tj > 0 else float("nan")
        sj = f"{tj * 1e3:.2f}ms" if tj == tj else "n/a"
        print(f"{name:<{wid}}  {sj:>10}  {tn * 1e3:>8.2f}ms  {ratio:>7.1f}x")
    if not K.HAVE_NUMBA:
        print("numba not importable; numpy fallback timed alone")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
