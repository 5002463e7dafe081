"""Benchmark the pure-Python kernel against the compiled extension.

Runs each workload in a fresh interpreter per backend (the backend is fixed
at import time) and prints a comparison table:

    python benchmarks/bench_kernel.py
"""

import json
import os
import subprocess
import sys
import time

WORKLOADS = ("canon", "set_ops", "relation_ops", "membership", "solver_goal")
REPEATS = 3


def build_inputs():
    import random

    from setforge.values import Atom, IntV, SetV, TupV

    rng = random.Random(42)
    atoms = [Atom(f"a{i}") for i in range(1, 40)]
    values = [rng.choice(atoms) for _ in range(4000)] + [
        IntV(rng.randrange(1000)) for _ in range(4000)
    ]
    rng.shuffle(values)
    sets = [SetV([rng.choice(values) for _ in range(rng.randrange(0, 60))]) for _ in range(300)]
    rels = [
        SetV([TupV((rng.choice(atoms), rng.choice(values))) for _ in range(rng.randrange(0, 60))])
        for _ in range(300)
    ]
    keys = [SetV([rng.choice(atoms) for _ in range(10)]) for _ in range(50)]
    return values, sets, rels, keys


def run_workload(name):
    from setforge import kernel

    values, sets, rels, keys = build_inputs()
    t0 = time.perf_counter()
    if name == "canon":
        from setforge.values import SetV

        for _ in range(40):
            for s in sets:
                SetV(list(s.elems) + list(reversed(s.elems)))
    elif name == "set_ops":
        for _ in range(10):
            for a, b in zip(sets, sets[1:]):
                kernel.union(a, b)
                kernel.difference(a, b)
                kernel.intersection(a, b)
    elif name == "relation_ops":
        for _ in range(10):
            for r, g in zip(rels, rels[1:]):
                kernel.override(r, g)
                kernel.dom(r)
                kernel.is_pfun(r)
            for d, r in zip(keys, rels):
                kernel.dres(d, r)
    elif name == "membership":
        probes = values[:200]
        for s in sets[:80]:
            for v in probes:
                _ = v in s
    elif name == "solver_goal":
        from setforge import goals

        goals.prove_goal("psd-psas-disjoint")
    return time.perf_counter() - t0


def worker(name):
    times = [run_workload(name) for _ in range(REPEATS)]
    print(json.dumps({"workload": name, "best": min(times)}))


def measure(backend, name):
    env = dict(os.environ, SETFORGE_KERNEL=backend)
    out = subprocess.run(
        [sys.executable, __file__, "--worker", name],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    return json.loads(out.stdout)["best"]


def main():
    if len(sys.argv) == 3 and sys.argv[1] == "--worker":
        worker(sys.argv[2])
        return
    try:
        import setforge._kernel_c  # noqa: F401
    except ImportError:
        print("compiled kernel not built; run pip install -e . first")
        return
    print(f"{'workload':<14} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name in WORKLOADS:
        py = measure("py", name)
        cc = measure("c", name)
        print(f"{name:<14} {py:>9.3f}s {cc:>9.3f}s {py / cc:>7.2f}x")


if __name__ == "__main__":
    main()
