"""Run a small verification sweep and show which checks hold.

Usage: python3 demos/verify_sweep.py [instances]
"""

import sys

from pmco.verify import SweepConfig, run_sweep, summarize


def main(instances: int = 100):
    summary = summarize(run_sweep(SweepConfig(instances=instances, seed=1), workers=4))
    for name, entry in summary["by_check"].items():
        print(f"{name:<28} pass={entry['pass']:<5} fail={entry['fail']:<5} "
              f"replay seeds: {entry['failing_seeds'][:2]}")
    print("all pass" if summary["all_pass"] else f"{summary['failed']} failing records")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 100)
