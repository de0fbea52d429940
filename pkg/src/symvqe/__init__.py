"""Symmetry-restricted variational eigensolvers on a dense state-vector simulator.

Two ways of keeping a variational state inside a chosen symmetry sector are
provided. Method 1 maps a subspace ansatz into the sector with the exact
eigenvector unitary. Method 2 replaces that unitary with a shallow trained circuit.
"""

from .ansatz import AnsatzSpec, build_layered_circuit, build_subspace_ansatz
from .operators import build_reflection, build_rotation, build_xxz, h2_hamiltonian, s2_operator
from .oracle import OracleResult, subspace_ground
from .symmetry import SymmetrySector, build_exact_unitary, extract_sector
from .trainer import TrainedUnitary, TrainingConfig, TrainingError, train_unitary
from .vqe import TraceRecord, VqeConfig, VqeResult, method1_prep, method2_prep, minimize

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec",
    "OracleResult",
    "SymmetrySector",
    "TraceRecord",
    "TrainedUnitary",
    "TrainingConfig",
    "TrainingError",
    "VqeConfig",
    "VqeResult",
    "build_exact_unitary",
    "build_layered_circuit",
    "build_reflection",
    "build_rotation",
    "build_subspace_ansatz",
    "build_xxz",
    "extract_sector",
    "h2_hamiltonian",
    "method1_prep",
    "method2_prep",
    "minimize",
    "s2_operator",
    "subspace_ground",
    "train_unitary",
]
