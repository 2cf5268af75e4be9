"""Photon-mediated quantum state transfer between two atom-cavity nodes.

Design the driving pulses that make a sender cavity emit a time-symmetric
photon which a receiver cavity absorbs without reflection, simulate the
conditional dynamics of the cascaded pair with and without losses, and
quantify the transfer by fidelities and photodetection statistics.
"""

from ._backend import available_backends, backend_name, set_backend
from .dynamics import EvolutionConfig, effective_rhs, evolve, \
    kernel_coefficients, qubit_transfer_check, transfer_fidelity
from .errors import AdiabaticityWarning, CascadeSimError, ConfigError, \
    DegenerateSynthesisError, InvalidParameterError, NumericFailureError, \
    PulseDomainError, SynthesisInconsistencyError, TruncationWarning
from .model import AmplitudeState, PulseShape, SystemParams, \
    TransferRecord, derive_effective_coupling, excited_node1, ground_state, \
    pulse_consistency_residual, rabi_from_coupling, \
    spontaneous_emission_estimate, stark_shift
from .runner import ScenarioConfig, SweepResult, cli_main, run_qubit_sphere, \
    run_sweep, run_synthesize, run_trajectory_batch, run_transfer, \
    scenario_config
from .synthesis import ForwardSolution, SynthesisResult, SynthesisSpec, \
    initial_amplitudes, integrate_forward, synthesize
from .trajectories import TrajectoryBatch, apply_jump, jump_rate, \
    run_trajectories

__version__ = "0.1.0"

__all__ = [
    "AdiabaticityWarning", "AmplitudeState", "CascadeSimError",
    "ConfigError", "DegenerateSynthesisError", "EvolutionConfig",
    "ForwardSolution", "InvalidParameterError", "NumericFailureError",
    "PulseDomainError", "PulseShape", "ScenarioConfig", "SweepResult",
    "SynthesisInconsistencyError", "SynthesisResult", "SynthesisSpec",
    "SystemParams", "TrajectoryBatch", "TransferRecord",
    "TruncationWarning", "apply_jump", "available_backends", "backend_name",
    "cli_main", "derive_effective_coupling", "effective_rhs",
    "evolve", "excited_node1", "ground_state", "initial_amplitudes",
    "integrate_forward", "jump_rate", "kernel_coefficients",
    "pulse_consistency_residual", "qubit_transfer_check",
    "rabi_from_coupling", "run_qubit_sphere", "run_sweep", "run_synthesize",
    "run_trajectories", "run_trajectory_batch", "run_transfer",
    "scenario_config", "set_backend", "spontaneous_emission_estimate",
    "stark_shift", "synthesize", "transfer_fidelity",
]
