"""Numerical simulator and benchmark harness for the spontaneous-symmetry-breaking machine."""

__version__ = "0.1.0"

from .analysis import (
    canonical_pattern,
    cut_histogram,
    cut_value,
    ising_energy,
    pattern_census,
    psi_landscape,
    threshold_states,
)
from .core import (
    NestSchedule,
    RunConfig,
    RunRecord,
    UpdateRule,
    base_map,
    composite_update,
    evolved_update,
    init_state,
    nest,
    psi_field,
    psi_update,
    run,
)
from .errors import (
    ConfigurationError,
    DimensionError,
    EvaluationError,
    ParseError,
    QueryError,
    SizeError,
    SSBMError,
    ValidationError,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .oracle import OracleResult, exact_best, local_search_1opt, naive_best
from .problems import (
    ProblemInstance,
    gen_circulant,
    gen_complete,
    j_upper_bound,
    load_instance,
    save_instance,
)
