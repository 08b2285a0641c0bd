"""Conditional-gradient training of feedforward networks under norm-ball constraints."""
from .config import ExperimentConfig, parse_config
from .constraints import ConstraintSpec, Kind, LmoResult, constraint_value, lmo, project
from .estimator import CGClassifier
from .exceptions import (
    CondGradError,
    ConfigError,
    ConvergenceError,
    DegenerateInputError,
    DimensionError,
    IdxFormatError,
    InfeasibleError,
    UnboundedError,
    UnsupportedOperationError,
)
from .linalg import SingularTriple, dot, frobenius_norm, power_method
from .network import (
    Batch,
    FeedForwardNet,
    GammaTable,
    IncidenceMatrix,
    ParamBlock,
    compute_gammas,
    forward,
    incidence_matrix,
    init_network,
    loss_and_gradient,
    path_norm,
    rescale_node,
)
from .optim import RunMetrics, StepSchedule, cg_step, fw_gap, path_cg, step_schedule, train_cg, train_pgd, train_sgd

__version__ = "0.1.0"
