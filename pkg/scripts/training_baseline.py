"""Baselines for the symmetry-preserving circuit trainer.

For each sector this reports the cost of untrained random parameters, whether
a depth-0 circuit (rotations only) can reach the target, and how many random
starts a depth-5 run needed.
"""

import argparse

import numpy as np

from symvqe.ansatz import AnsatzSpec, build_layered_circuit, build_subspace_ansatz, initial_parameters
from symvqe.cli import load_preset
from symvqe.trainer import TrainingError, symmetry_cost, train_unitary

SECTORS = ("xxz_reflection_plus", "xxz_reflection_minus", "xxz_rotation_plus", "xxz_rotation_minus", "h2_s2_zero")


def untrained(sector, ansatz, depth, entangler, draws=20, seed=0):
    rng = np.random.default_rng(seed)
    circuit = build_layered_circuit(sector.n_qubits, depth, entangler=entangler)
    costs = [
        symmetry_cost(rng.normal(size=circuit.n_params), sector, initial_parameters(ansatz, rng, 100), ansatz, circuit)
        for _ in range(draws)
    ]
    return float(np.mean(costs)), float(np.min(costs))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--skip-full", action="store_true", help="skip the full-depth training runs")
    args = parser.parse_args()

    for name in SECTORS:
        cfg = load_preset(f"{name}_method2", environ={})
        sector = cfg.sector()
        ansatz = build_subspace_ansatz(AnsatzSpec(sector.n_qubits, sector.dim_k, cfg.ansatz_depth))
        mean, best = untrained(sector, ansatz, cfg.utilde_depth, cfg.utilde_entangler)
        print(f"{name}: untrained cost mean {mean:.3f}, best of 20 {best:.3f}")

        shallow = cfg.training_config()
        shallow = type(shallow)(**{**shallow.__dict__, "depth": 0, "max_iterations": 2000, "restart_iterations": 500})
        try:
            t = train_unitary(sector, shallow, ansatz)
            print(f"  depth 0: reached {t.achieved_mean_error:.2e}")
        except TrainingError as err:
            print(f"  depth 0: best {err.best_error:.3e} after {err.iterations} iterations (fails)")

        if args.skip_full:
            continue
        t = train_unitary(sector, cfg.training_config(), ansatz)
        finals = np.array([cost for _, cost in t.start_log])
        print(
            f"  depth {cfg.utilde_depth}: {t.achieved_mean_error:.2e} after {t.iterations_used} iterations "
            f"over {t.starts} start(s); median final cost per start {np.median(finals):.3e}"
        )


if __name__ == "__main__":
    main()
