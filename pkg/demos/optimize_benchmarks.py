"""Run the optimizer on every built-in objective in both modes.

Usage: python3 demos/optimize_benchmarks.py [seed]
"""

import sys

from pmco.objectives import OBJECTIVES
from pmco.optimizer import RunConfig, convergence_metrics, run


def main(seed: int = 0):
    print(f"{'objective':<12}{'mode':<12}{'best_f':>14}{'iters':>8}  converged")
    for name in sorted(OBJECTIVES):
        for mode, extra in (("algorithm1", {}), ("theorem", {"conditions": ["h1"]})):
            cfg = RunConfig.from_json({"mode": mode, "n": 2, "q": 8, "objective": name,
                                       "max_iters": 2000, "seed": seed, **extra})
            res = run(cfg, workers=2)
            trend = convergence_metrics(res.trace)["velocity_sup_trend"]
            print(f"{name:<12}{mode:<12}{res.best_f:>14.3e}{res.iterations:>8}  {res.converged}"
                  f"  (final max speed {trend.get('final', float('nan')):.1e})")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
