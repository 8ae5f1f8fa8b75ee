"""Chirality of a two-level molecule in a symmetric double well under a
mean-field nonlinearity, weak dissipation and phase-randomising collisions."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    AmplitudeState,
    ModelError,
    ModelParams,
    ParameterError,
    PhaseState,
    PoleError,
    asymmetric_fixed_point,
    derive_params,
    energy,
    to_amplitude,
    to_phase,
    vector_field,
)
from .integrate import IntegrationConfig, IntegrationError, Trajectory, integrate_amplitude, integrate_phase  # noqa: E402
from .stationary import StationaryPoint, bifurcation_scan, jacobian, relaxation_time, stationary_points  # noqa: E402
from .separatrix import chirality_criterion, classify_region, separatrix_curve  # noqa: E402
from .basin import basin_map  # noqa: E402
from .collisions import CollisionProcess, apply_kick, ensemble_run, pulse_collision, simulate_with_collisions  # noqa: E402
