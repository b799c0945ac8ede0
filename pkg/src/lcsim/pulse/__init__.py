"""Pulse-level CZ simulation, waveform optimisation and process tomography."""
from .transmon import (
    GateMetrics,
    Propagator,
    TransmonPair,
    Waveform,
    default_waveform,
    embed_cz,
    evolve,
    evolve_static,
    gate_metrics,
    objective,
    sample_trajectory,
)
