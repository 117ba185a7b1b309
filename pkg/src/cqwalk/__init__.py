"""Open-system simulator of a discrete-time quantum walk on a chain of
superconducting qutrits linked by cavities.

The walk step is compiled to three global pulse segments (coin drive,
qutrit-to-cavity transfer, cavity-to-next-qutrit transfer) and evolved
under a Lindblad master equation; the resulting walker distribution is
scored against the exact walk by the squared Bhattacharyya overlap.
"""

from .config import ConfigError, ExperimentConfig, load_config
from .harness import (Report, SweepSpec, emit_distribution, emit_plot_script,
                      emit_report, initial_density_matrix, run_experiment,
                      run_sweep, validate_truncation)
from .idealwalk import CoinState, coin_matrix, coin_preset, run_ideal
from .lindblad import (CollapseSet, DecoherenceRates, EvolutionResult,
                       IntegrationError, IntegratorConfig, build_collapse_set,
                       evolve_schedule, evolve_segment)
from .metrics import (Distribution, extract_distribution, similarity,
                      similarity_report)
from .protocol import Schedule, Segment, build_schedule, coin_pulse_unitary
from .statespace import (BasisLabel, DeviceParams, StateSpace,
                         embedding_matrix)

__version__ = "0.1.0"

__all__ = [
    "BasisLabel", "CoinState", "CollapseSet", "ConfigError",
    "DecoherenceRates", "DeviceParams", "Distribution", "EvolutionResult",
    "ExperimentConfig", "IntegrationError", "IntegratorConfig", "Report",
    "Schedule", "Segment", "StateSpace", "SweepSpec", "build_collapse_set",
    "build_schedule", "coin_matrix", "coin_preset", "coin_pulse_unitary",
    "emit_distribution", "emit_plot_script", "emit_report",
    "embedding_matrix", "evolve_schedule", "evolve_segment",
    "extract_distribution", "initial_density_matrix", "load_config",
    "run_experiment", "run_ideal", "run_sweep", "similarity",
    "similarity_report", "validate_truncation",
]
