"""Compare the compiled and numpy discharge kernels on seeded corpora.

    python3 benchmarks/bench_discharge.py [--count N] [--max-vertices K] [--weight-min W] [--repeat R]

Each backend sweeps the full initial box of every graph for the spin
classes; results are checked for equality before timings are reported.
"""

import argparse
import statistics
import time

from plumb import kernels
from plumb.graph import GeneratorParams, generate_candidates
from plumb.invariants import full_path_table
from plumb.lattice import build_intersection_form
from plumb.spin import enumerate_wu_sets


def sweep(jobs, backend):
    return [full_path_table(g, reps, Q, backend=backend) for g, Q, reps in jobs]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--max-vertices", type=int, default=8)
    p.add_argument("--weight-min", type=int, default=-9)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    corpus = generate_candidates(GeneratorParams(args.max_vertices, args.weight_min, args.seed, args.count, True))
    jobs = []
    box = 0
    for g in corpus:
        Q = build_intersection_form(g)
        jobs.append((g, Q, [S.char for S in enumerate_wu_sets(g, Q)]))
        size = 1
        for n in Q.diagonal:
            size *= -n
        box += size
    print(f"{len(jobs)} graphs, {box} initial vectors in total")

    backends = sorted(kernels.BACKENDS)
    results, best_times = {}, {}
    for name in backends:
        times = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            results[name] = sweep(jobs, name)
            times.append(time.perf_counter() - t0)
        best = min(times)
        best_times[name] = best
        print(f"{name:9s} best {best:8.3f} s  median {statistics.median(times):8.3f} s  "
              f"{box / best / 1e6:7.2f} M vectors/s")
    if len(backends) > 1:
        assert all(results[b] == results[backends[0]] for b in backends), "backends disagree"
        print("outputs identical across backends; "
              f"compiled speedup {best_times['python'] / best_times['compiled']:.1f}x")
    else:
        print("compiled kernel not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
