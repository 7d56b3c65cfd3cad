"""Benchmark the merge kernel backends against each other.

Two workloads: raw unification over random structures (kernel-bound) and
full corpus resolution (kernel plus parsing, staging, and analysis).

Usage: python benchmarks/bench_kernel.py [--pairs N] [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import statistics
import time
from pathlib import Path

from cfl import kernel
from cfl.dsl import parse_frame
from cfl.lexicon import load_lexicon, prelude_path
from cfl.randgen import random_lattice, random_structure
from cfl.resolver import resolve
from cfl.fs import unify

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "cfl" / "fixtures"


def build_unify_workload(n_pairs: int):
    rng = random.Random(99)
    work = []
    while len(work) < n_pairs:
        lat = random_lattice(rng, n_types=rng.randint(6, 24), n_features=rng.randint(3, 8))
        for _ in range(20):
            work.append(
                (
                    random_structure(rng, lat, max_nodes=16),
                    random_structure(rng, lat, max_nodes=16),
                )
            )
    return work[:n_pairs]


def bench_unify(work, repeat: int) -> list[float]:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for a, b in work:
            unify(a, b)
        times.append(time.perf_counter() - t0)
    return times


def bench_corpus(repeat: int) -> list[float]:
    lex = load_lexicon([FIXTURES / "turkish.cfl"])
    frames_dir = FIXTURES / "frames"
    frames = []
    for line in (frames_dir / "gold.tsv").read_text(encoding="utf-8").splitlines():
        name = line.split("\t")[0]
        frames.append(parse_frame((frames_dir / name).read_text(encoding="utf-8"), lex))
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for frame in frames:
            resolve(lex, frame)
        times.append(time.perf_counter() - t0)
    return times


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", type=int, default=4000, help="random unifications per run")
    ap.add_argument("--repeat", type=int, default=5, help="timed repetitions")
    args = ap.parse_args()

    if "compiled" not in kernel.available():
        raise SystemExit("compiled kernel not built; install with the extension first")

    work = build_unify_workload(args.pairs)
    results: dict[str, dict[str, float]] = {}
    for backend in ("pure", "compiled"):
        kernel.use(backend)
        results[backend] = {
            "unify": min(bench_unify(work, args.repeat)),
            "corpus": min(bench_corpus(args.repeat)),
        }
    kernel.use("compiled")

    print(f"workload: {args.pairs} random unifications; corpus: 23 frames resolved")
    print(f"{'workload':<10} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for name in ("unify", "corpus"):
        p = results["pure"][name]
        c = results["compiled"][name]
        print(f"{name:<10} {p * 1e3:>8.1f}ms {c * 1e3:>8.1f}ms {p / c:>7.2f}x")


if __name__ == "__main__":
    main()
