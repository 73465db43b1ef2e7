"""Labeled multi-Bernoulli tracking with task-driven mobile-sensor control."""

from .assignment import optimal_assignment, ranked_assignments
from .cbmember import MbDensity, cbmember_update, mb_predict, strip_labels
from .config import ConfigError, RunConfig, config_from_dict, load_config
from .control import (
    ControlConfig,
    SensorCommand,
    SensorState,
    admissible_commands,
    cardinality_error,
    peecs_cost,
    pims,
    pre_estimate,
    select_command,
    state_error,
)
from .lmb import (
    LmbDensity,
    TruncationConfig,
    extract_tracks,
    predict,
    psi_z,
    resample,
    top_k_label_subsets,
    update,
)
from .models import (
    BirthModel,
    MeasurementModel,
    MotionModel,
    clutter_intensity,
    ct_transition_matrix,
    detection_prob,
    generate_ground_truth,
    likelihood,
    measure,
    propagate,
    sample_clutter,
)
from .ospa import OspaParams, ospa
from .rfs import (
    BernoulliComponent,
    Label,
    LmbComponent,
    ParticleDensity,
    eap_estimate,
    lmb_subset_weight,
    normalize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
