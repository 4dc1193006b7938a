"""Whale, particle-swarm and genetic optimisers.

Maximises -(x^2 + y^2) on [-10, 10]^2 with each algorithm over several
seeds, prints the best fitness reached and writes the convergence curves.

    python3 demos/05_metaheuristics.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from pqdetect import fileio
from pqdetect.optimizers import OptimizerConfig, SearchSpace, optimize

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
box = SearchSpace((-10.0, -10.0), (10.0, 10.0))


def sphere(x):
    return -float(np.sum(x * x))


for algo in ("WOA", "PSO", "GA"):
    best = []
    for seed in range(10):
        run = optimize(sphere, box, OptimizerConfig(algorithm=algo, seed=seed))
        best.append(run.best_fitness)
        if seed == 0:
            fileio.write_convergence(out / f"sphere_{algo}.csv", run.convergence)
    print(f"{algo}: median best fitness {np.median(best):.2e}, worst {min(best):.2e}, "
          f"{run.evaluations} evaluations per run")

# WOA's control parameter falls linearly from 2 to 0.
run = optimize(sphere, box, OptimizerConfig(algorithm="WOA", max_iters=10))
print("WOA a schedule:", [round(a, 2) for a in run.diagnostics["a_schedule"]])
print("WOA branch counts:", run.diagnostics["branches"])
