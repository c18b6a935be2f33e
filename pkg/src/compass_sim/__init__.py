"""Fault-injection simulation of [[9,1,3]] compass codes on a trapped-ion chain."""

from .pauli import PauliOperator, commutes, multiply
from .codes import CODE_NAMES, PUBLISHED_CHAINS, CodeSpec, build_code
from .layout import ChainLayout
from .noise import NoiseParams, crosstalk_probability, idle_flip_probability, physical_comparator_rate
from .chain import build_graph, min_extra_edge_path, optimal_chain, validate_chain
from .experiment import ExperimentResult, ExperimentSpec, build_experiment_circuit, run_experiment
from .sweep import bias_zz, sweep_and_map

__all__ = [
    "CODE_NAMES",
    "PUBLISHED_CHAINS",
    "ChainLayout",
    "CodeSpec",
    "ExperimentResult",
    "ExperimentSpec",
    "NoiseParams",
    "PauliOperator",
    "bias_zz",
    "build_code",
    "build_experiment_circuit",
    "build_graph",
    "commutes",
    "crosstalk_probability",
    "idle_flip_probability",
    "min_extra_edge_path",
    "multiply",
    "optimal_chain",
    "physical_comparator_rate",
    "run_experiment",
    "sweep_and_map",
    "validate_chain",
]
