"""Shortest online experiments for exact identification of LTI systems."""

from .analysis import (
    ExperimentLog,
    InformativityReport,
    actual_lag_bound,
    check_informativity,
    delta,
    delta_profile,
    hankel_g,
    hankel_io,
    minimal_experiment_length,
    shortest_lag_min_states,
)
from .design import (
    AvoidanceHyperplane,
    CanonicalScan,
    ClosedForm,
    DesignTrace,
    Replay,
    ReplayPlant,
    SeededRandom,
    SimulatedPlant,
    avoidance_hyperplane,
    baseline_sample_counts,
    choose_input,
    design_pe_input,
    make_policy,
    online_experiment,
)
from .exceptions import (
    BlanketAssumptionError,
    DepthExhausted,
    IdentificationError,
    NotInformative,
    PriorBoundsViolated,
    ReplayMismatch,
    ShortexpError,
)
from .linalg import Mode
from .lti import (
    StateSpaceSystem,
    Trajectory,
    are_isomorphic,
    is_minimal,
    lag,
    markov_parameters,
    random_minimal_system,
    simulate,
)
from .realization import IdentifiedModel, identify

__version__ = "0.1.0"
