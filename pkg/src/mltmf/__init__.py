"""Logic-based information, learning, safety and generalization checks."""

from .errors import MltmfError
from .logic import Signature, format_formula, parse_formula, validate_wff
from .semantics import (
    DEFAULT_BUDGET,
    Interpretation,
    QuantifierBudget,
    check_consistency,
    entails,
    evaluate,
    ground,
    minimal_core,
    satisfiable,
)
from .info import (
    EnablingMapping,
    InformationSextuple,
    NoiseSpec,
    StateSet,
    check_enabling_map,
    check_interpretability,
    check_noisy_symmetry,
    compose_noisy,
    make_state,
    recoverable_reduction,
)
from .automaton import FiniteAutomaton, encode_automaton, simulate, verify_trace
from .learning import apply_learn, apply_process, check_inheritance
from .ethics import (
    EthicalConstraint,
    build_violation_hypergraph,
    check_ethical_safety,
    inject_safeguard,
    max_safe_subset,
)
from .genbound import (
    FiniteDistribution,
    build_model_distribution,
    generalization_bound,
    kl_divergence,
    overlap_stats,
    tvd_oracle,
)

__version__ = "0.1.0"
