"""Run every shipped preset and print a one-line summary per experiment.

Traces go to ``--out`` (default ``traces/``). Method-2 presets train their
symmetry-preserving circuit first; the reflection +1 sector is the slow one
(a few minutes on a single core).
"""

import argparse
import time
from pathlib import Path

from symvqe.cli import load_preset, preset_names, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="traces")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--only", nargs="*", default=None, help="subset of preset names")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = args.only or preset_names()
    print(f"{'preset':34} {'energy error':>13} {'fidelity':>10} {'iters':>6} {'train err':>10} {'secs':>7}")
    for name in names:
        cfg = load_preset(name, seed=args.seed, output=str(out / f"{name}.csv"))
        start = time.perf_counter()
        outcome = run_experiment(cfg)
        secs = time.perf_counter() - start
        last = outcome.result.traces[-1]
        train = f"{outcome.trained.achieved_mean_error:.2e}" if outcome.trained else "-"
        print(
            f"{name:34} {last.energy_error:13.3e} {last.fidelity:10.6f} "
            f"{len(outcome.result.traces):6d} {train:>10} {secs:7.1f}"
        )


if __name__ == "__main__":
    main()
