"""Ranking heuristics that steer candidate and counterexample selection.

Four handcrafted score functions map cheap formula statistics (model counts,
satisfied-clause counts, core membership) onto a small score scale, and three
ranker classes adapt them, plus the learned scoring heads, to the batch
interface the refinement loop consumes.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .cegar import CANDIDATE, COUNTEREXAMPLE
from .formula import Assignment, QbfFormula, reduce_by_universal, satisfied_clause_count
from .gnn import (
    SCORE_EXISTS,
    SCORE_FORALL,
    WeightBundle,
    encode_graph,
    head_score_exists,
    head_score_forall,
    run_embedding,
)
from .sat import count_models

__all__ = [
    "score_hardness",
    "score_candidates_maxsat",
    "score_counterexamples_core",
    "score_counterexamples_maxsat",
    "MaxSatRanker",
    "HardnessRanker",
    "GnnRanker",
    "maxsat_ranker",
    "hardness_ranker",
    "gnn_ranker",
]


def score_hardness(n_models: int) -> float:
    """Step score for a candidate by how constrained its reduction is.

    Fewer remaining models means a harder subproblem and a higher score.
    """
    if n_models <= 3:
        return 10.0 - n_models
    if n_models <= 5:
        return 6.0
    if n_models <= 8:
        return 5.0
    if n_models <= 12:
        return 4.0
    if n_models <= 16:
        return 3.0
    if n_models <= 21:
        return 2.0
    return 1.0


def score_candidates_maxsat(n_clauses_list: Sequence[int]) -> list:
    """Score candidates by satisfied-clause count, fewest first.

    With m the batch minimum, each entry n scores max(1, 10 - n + m).
    """
    if not n_clauses_list:
        raise ValueError("empty batch")
    m = min(n_clauses_list)
    return [max(1, 10 - n + m) for n in n_clauses_list]


def score_counterexamples_core(core_indices: Iterable[int],
                               n_clauses_list: Sequence[int]) -> list:
    """Score counterexamples, pinning core members to the top score.

    Base scores grow with satisfied-clause count toward the batch maximum M
    as max(1, 8 - M + n); entries named in core_indices are overwritten
    with 10.
    """
    if not n_clauses_list:
        raise ValueError("empty batch")
    core = set(core_indices)
    for i in core:
        if not 0 <= i < len(n_clauses_list):
            raise ValueError(f"core index {i} out of range")
    best = max(n_clauses_list)
    scores = [max(1, 8 - best + n) for n in n_clauses_list]
    for i in core:
        scores[i] = 10
    return scores


def score_counterexamples_maxsat(n_clauses_list: Sequence[int]) -> list:
    """Score counterexamples by satisfied-clause count, most first.

    With M the batch maximum, each entry n scores max(1, 10 - M + n).
    """
    if not n_clauses_list:
        raise ValueError("empty batch")
    best = max(n_clauses_list)
    return [max(1, 10 - best + n) for n in n_clauses_list]


def _check_side(expected: str, got: str) -> None:
    if got != expected:
        raise ValueError(f"ranker built for {expected} side, asked to score {got}")


class MaxSatRanker:
    """Ranks a batch by how many matrix clauses each assignment satisfies.

    Candidates prefer fewest satisfied clauses (a candidate that satisfies
    little leaves a tight subproblem); counterexamples prefer most.
    """

    def __init__(self, side: str):
        if side not in (CANDIDATE, COUNTEREXAMPLE):
            raise ValueError(f"unknown side {side!r}")
        self.side = side

    def score_batch(self, f: QbfFormula, batch: Sequence[Assignment],
                    side: str) -> list[float]:
        _check_side(self.side, side)
        counts = [satisfied_clause_count(f, a) for a in batch]
        if side == CANDIDATE:
            return [float(s) for s in score_candidates_maxsat(counts)]
        return [float(s) for s in score_counterexamples_maxsat(counts)]


class HardnessRanker:
    """Ranks candidates by the exact model count of their reduced matrix."""

    def score_batch(self, f: QbfFormula, batch: Sequence[Assignment],
                    side: str) -> list[float]:
        _check_side(CANDIDATE, side)
        out = []
        for a in batch:
            reduced = reduce_by_universal(f, a)
            n = 0 if reduced is None else count_models(reduced, f.existentials)
            out.append(score_hardness(n))
        return out


class GnnRanker:
    """Ranks a batch with a learned scoring head.

    The embedding pass is cached per formula object, so repeated batches
    inside one refinement run cost only the head evaluation.
    """

    def __init__(self, bundle: WeightBundle, side: str, iterations: int = 16):
        if side not in (CANDIDATE, COUNTEREXAMPLE):
            raise ValueError(f"unknown side {side!r}")
        head = SCORE_FORALL if side == CANDIDATE else SCORE_EXISTS
        if not bundle.has_head(head):
            raise ValueError(f"bundle has no {head} head")
        self.bundle = bundle
        self.side = side
        self.iterations = iterations
        self._cached_formula: QbfFormula | None = None
        self._cached_state = None

    def _embedding(self, f: QbfFormula):
        if self._cached_formula is not f:
            self._cached_state = run_embedding(
                encode_graph(f), self.bundle, self.iterations
            )
            self._cached_formula = f
        return self._cached_state

    def score_batch(self, f: QbfFormula, batch: Sequence[Assignment],
                    side: str) -> list[float]:
        _check_side(self.side, side)
        state = self._embedding(f)
        order = f.universals if side == CANDIDATE else f.existentials
        bits = np.array(
            [[1.0 if a.values[v] else 0.0 for v in order] for a in batch],
            dtype=np.float32,
        ).reshape(len(batch), len(order))
        if side == CANDIDATE:
            scores = head_score_forall(state, self.bundle, bits)
        else:
            scores = head_score_exists(state, self.bundle, bits)
        return [float(s) for s in scores]


def maxsat_ranker(side: str) -> MaxSatRanker:
    return MaxSatRanker(side)


def hardness_ranker() -> HardnessRanker:
    return HardnessRanker()


def gnn_ranker(bundle: WeightBundle, side: str, iterations: int = 16) -> GnnRanker:
    return GnnRanker(bundle, side, iterations)
