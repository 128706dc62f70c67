"""Time the compiled Euler tour forest against the pure-Python fallback.

Two workloads per size:

* ``forest``: a random mix of link / cut / root on a bare forest.
* ``dbscan``: blob insertions through DynamicDBSCAN, which adds the hashing
  and bucket bookkeeping on top of the forest.

Usage::

    python3 benchmarks/compare_backends.py --sizes 1000,10000 --ops 20000
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from dydbscan import DynamicDBSCAN, generate_blobs, standardize
from dydbscan.forest import available_backends, make_forest


def forest_workload(backend: str, n: int, ops: int, seed: int) -> float:
    f = make_forest(seed, backend)
    nodes = [f.add() for _ in range(n)]
    rng = random.Random(seed)
    edges: list[tuple[int, int]] = []
    t0 = time.perf_counter()
    for _ in range(ops):
        r = rng.random()
        if r < 0.45:
            u, v = rng.sample(nodes, 2)
            if f.link(u, v):
                edges.append((u, v))
        elif r < 0.7 and edges:
            f.cut(*edges.pop(rng.randrange(len(edges))))
        else:
            f.root(rng.choice(nodes))
    return (time.perf_counter() - t0) / ops * 1e6


def dbscan_workload(backend: str, n: int, seed: int) -> float:
    X = standardize(generate_blobs(n, 10, 10, 10.0, 0.5, seed=seed).points)
    db = DynamicDBSCAN(k=10, t=10, epsilon=0.75, seed=seed, backend=backend)
    t0 = time.perf_counter()
    for x in X:
        db.add_point(x)
    return (time.perf_counter() - t0) / n * 1e6


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000")
    ap.add_argument("--ops", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    backends = available_backends()
    if "ext" not in backends:
        print("compiled forest not built; only the Python backend is available")
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"{'workload':<8} {'n':>7} " + " ".join(f"{b + ' us/op':>14}" for b in backends) + "  speedup")
    for n in sizes:
        for name, fn in (
            ("forest", lambda b: forest_workload(b, n, args.ops, args.seed)),
            ("dbscan", lambda b: dbscan_workload(b, n, args.seed)),
        ):
            times = {b: fn(b) for b in backends}
            cells = " ".join(f"{times[b]:>14.2f}" for b in backends)
            speed = times["python"] / times["ext"] if "ext" in times else float("nan")
            print(f"{name:<8} {n:>7} {cells}  {speed:6.1f}x")


if __name__ == "__main__":
    main()
