"""Reach-avoid controller synthesis for linear plants under budgeted adversaries."""

from .geometry import (
    Ball,
    CoverTooLarge,
    Ellipsoid,
    LinAtom,
    PolytopicSet,
    adv_leverage,
    cover_box,
    epsilon_cover,
    init_factor,
    negate_polytope,
    polytopic_contains,
    strengthen,
    worst_case_adversary,
)
from .lra import (
    And,
    Atom,
    Or,
    SolveResult,
    SolverStuck,
    SolveStats,
    evaluate,
    lp_feasible,
    solve,
    to_smtlib,
)
from .model import (
    AdversarySequence,
    ControlSequence,
    LTVSystem,
    Trajectory,
    adversary_to_state_map,
    control_to_state_map,
    simulate,
    simulate_batch,
    transition_matrix,
)
from .synthesis import (
    ArasProblem,
    AttackOutcome,
    AttackTable,
    BudgetCapExceeded,
    GeneralizedProblem,
    LookupTable,
    SynthesisOutcome,
    TableResult,
    ValidationReport,
    build_synthesis_formula,
    cover_polytope,
    max_feasible_budget,
    synthesize,
    synthesize_attack,
    synthesize_attack_table,
    synthesize_generalized,
    table_synthesize,
    validate_attack,
    validate_control,
)

__version__ = "0.1.0"

__all__ = [
    "AdversarySequence",
    "And",
    "ArasProblem",
    "Atom",
    "AttackOutcome",
    "AttackTable",
    "Ball",
    "BudgetCapExceeded",
    "ControlSequence",
    "CoverTooLarge",
    "Ellipsoid",
    "GeneralizedProblem",
    "LTVSystem",
    "LinAtom",
    "LookupTable",
    "Or",
    "PolytopicSet",
    "SolveResult",
    "SolveStats",
    "SolverStuck",
    "SynthesisOutcome",
    "TableResult",
    "Trajectory",
    "ValidationReport",
    "adv_leverage",
    "adversary_to_state_map",
    "build_synthesis_formula",
    "control_to_state_map",
    "cover_box",
    "cover_polytope",
    "epsilon_cover",
    "evaluate",
    "init_factor",
    "lp_feasible",
    "max_feasible_budget",
    "negate_polytope",
    "polytopic_contains",
    "simulate",
    "simulate_batch",
    "solve",
    "strengthen",
    "synthesize",
    "synthesize_attack",
    "synthesize_attack_table",
    "synthesize_generalized",
    "table_synthesize",
    "to_smtlib",
    "transition_matrix",
    "validate_attack",
    "validate_control",
    "worst_case_adversary",
]
