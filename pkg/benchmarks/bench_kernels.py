"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 50,100,200] [--batch 16] [--repeat 5]

For each torus size and neighborhood it times one batched step and one
batched run to the cycle, checks that both backends agree, and prints the
speedup.  Without the compiled extension only the fallback is timed.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from majority_automata import _backend
from majority_automata.dynamics import auto_budget
from majority_automata.topology import build_lattice


def best_of(repeat: int, fn) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="50,100,200")
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--p-b", type=float, default=0.5)
    args = parser.parse_args()

    impls = _backend.available()
    names = sorted(impls)
    print(f"backends: {', '.join(names)} (default: {_backend.kernels.NAME})")
    header = f"{'torus':>14} {'op':>5}" + "".join(f" {n + ' ms':>12}" for n in names)
    if "cython" in impls:
        header += f" {'speedup':>8}"
    print(header)

    rng = np.random.default_rng(1)
    for n in (int(x) for x in args.sizes.split(",")):
        for kind in ("neumann", "moore"):
            t = build_lattice(n, kind, True)
            states = (rng.random((args.batch, t.vertex_count)) < args.p_b).astype(np.uint8)
            budget = auto_budget(t)
            ops = {
                "step": lambda impl: _backend.step_batch(t, states, 0, impl=impl),
                "run": lambda impl: _backend.run_batch(t, states, 0, budget, impl=impl),
            }
            for op, fn in ops.items():
                results = {name: fn(impls[name]) for name in names}
                ref = results[names[0]]
                for name in names[1:]:
                    other = results[name]
                    same = (
                        np.array_equal(ref, other)
                        if op == "step"
                        else all(np.array_equal(a, b) for a, b in zip(ref, other))
                    )
                    if not same:
                        raise SystemExit(f"backends disagree on {kind} n={n} ({op})")
                timing = {name: best_of(args.repeat, lambda: fn(impls[name])) for name in names}
                line = f"{kind + ' ' + str(n):>14} {op:>5}" + "".join(
                    f" {timing[name] * 1e3:>12.2f}" for name in names
                )
                if "cython" in impls:
                    line += f" {timing['python'] / timing['cython']:>7.1f}x"
                print(line)


if __name__ == "__main__":
    main()
