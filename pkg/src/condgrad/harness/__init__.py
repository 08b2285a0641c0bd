"""Datasets, experiment orchestration and brute-force reference oracles."""
from .data import Dataset, load_idx, load_mnist, read_idx, synthetic_dataset, write_idx
from .experiment import rescale_into_ball, run_experiment
from .oracles import (
    brute_force_lmo,
    brute_force_lp,
    brute_force_path_norm,
    jacobi_eigenvalues,
    top_singular_value,
    tv_flow_lp,
    tv_lmo_lp,
)
