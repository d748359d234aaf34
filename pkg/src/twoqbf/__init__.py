"""Toolkit for 2QBF formulas of the form forall X exists Y. phi.

Core pieces: QDIMACS parsing and clause-level reduction (formula), a small
CDCL solver with model enumeration, counting and group-MUS extraction (sat),
a counterexample guided abstraction refinement loop with pluggable ranking
(cegar), learned and handcrafted ranking heuristics (ranking, gnn), dataset
generation and labeling (datagen), and an evaluation harness (harness, cli).
"""

from .cegar import (
    CegarResult,
    ConstraintStore,
    Ranker,
    derive_constraint,
    solve_basic,
    solve_ranked,
    verify_witness,
)
from .formula import (
    Assignment,
    Block,
    Clause,
    CnfFormula,
    QbfFormula,
    parse_qdimacs,
    reduce_by_universal,
    satisfied_clause_count,
    write_qdimacs,
)
from .sat import (
    ClauseGroup,
    SatResult,
    count_models,
    enumerate_models,
    extract_core,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "Block",
    "CegarResult",
    "Clause",
    "ClauseGroup",
    "CnfFormula",
    "ConstraintStore",
    "QbfFormula",
    "Ranker",
    "SatResult",
    "count_models",
    "derive_constraint",
    "enumerate_models",
    "extract_core",
    "parse_qdimacs",
    "reduce_by_universal",
    "satisfied_clause_count",
    "solve",
    "solve_basic",
    "solve_ranked",
    "verify_witness",
    "write_qdimacs",
    "__version__",
]
