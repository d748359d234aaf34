"""Independent reference implementations used to check the package.

Everything here is deliberately written without importing solver internals:
truth tables are evaluated bit-parallel over all assignments, the two-level
quantifier check sweeps every universal assignment, and the scoring references
follow the published step-function definitions directly.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

from twoqbf.formula import Assignment, Block, CnfFormula, QbfFormula


@lru_cache(maxsize=256)
def _lit_masks(order: tuple[int, ...]) -> dict[int, int]:
    """mask[lit] has bit m set iff assignment m makes lit true; assignment m
    sets variable order[i] true iff bit i of m is set."""
    n = len(order)
    full = (1 << (1 << n)) - 1
    masks: dict[int, int] = {}
    for i, v in enumerate(order):
        m = 0
        for a in range(1 << n):
            if (a >> i) & 1:
                m |= 1 << a
        masks[v] = m
        masks[-v] = full ^ m
    return masks


def truth_table_sat(f: CnfFormula) -> bool:
    """Satisfiability by exhaustive truth-table evaluation (<= 20 vars)."""
    used = sorted({abs(l) for cl in f.clauses for l in cl})
    if len(used) > 20:
        raise ValueError("truth table too large")
    masks = _lit_masks(tuple(used))
    acc = (1 << (1 << len(used))) - 1
    for cl in f.clauses:
        m = 0
        for lit in cl:
            m |= masks[lit]
        acc &= m
    return acc != 0


def truth_table_count(f: CnfFormula, projection: Iterable[int]) -> int:
    """Projected model count by sweeping every projected assignment."""
    proj = sorted(set(projection))
    used = sorted({abs(l) for cl in f.clauses for l in cl})
    extra = [v for v in used if v not in set(proj)]
    n = 0
    for pm in range(1 << len(proj)):
        pvals = {v: bool((pm >> i) & 1) for i, v in enumerate(proj)}
        ok = False
        for em in range(1 << len(extra)):
            vals = dict(pvals)
            vals.update({v: bool((em >> i) & 1) for i, v in enumerate(extra)})
            if all(any(vals[abs(l)] == (l > 0) for l in cl) for cl in f.clauses):
                ok = True
                break
        if ok:
            n += 1
    return n


def check_model(f: CnfFormula, model: dict[int, bool]) -> bool:
    return all(any(model[abs(l)] == (l > 0) for l in cl) for cl in f.clauses)


def brute_force_2qbf(f: QbfFormula) -> tuple[bool, Assignment | None]:
    """Decide ForAll X Exists Y . matrix by sweeping all universal assignments.

    Returns (True, None) when every universal assignment has an existential
    answer, else (False, witness) with the first failing assignment in
    lexicographic sweep order.
    """
    X, Y = list(f.universals), list(f.existentials)
    ymasks = _lit_masks(tuple(Y))
    full = (1 << (1 << len(Y))) - 1
    xset = set(X)
    pre = []
    for cl in f.clauses:
        xlits = [l for l in cl if abs(l) in xset]
        ym = 0
        for lit in cl:
            if abs(lit) not in xset:
                ym |= ymasks[lit]
        pre.append((xlits, ym))
    for xm in range(1 << len(X)):
        vals = {v: bool((xm >> i) & 1) for i, v in enumerate(X)}
        acc = full
        for xlits, ym in pre:
            if any(vals[abs(l)] == (l > 0) for l in xlits):
                continue
            acc &= ym
            if not acc:
                break
        if not acc:
            return False, Assignment(Block.FORALL, vals)
    return True, None


def naive_group_mus(
    groups: dict[int, list[tuple[int, ...]]],
    background: list[tuple[int, ...]] = (),
) -> set[int]:
    """One-at-a-time deletion sweep, highest group id first, truth tables only."""

    def unsat(ids: Iterable[int]) -> bool:
        cls = [c for i in ids for c in groups[i]] + list(background)
        used = sorted({abs(l) for c in cls for l in c})
        if len(used) > 20:
            raise ValueError("naive sweep too large")
        masks = _lit_masks(tuple(used))
        acc = (1 << (1 << len(used))) - 1
        for c in cls:
            m = 0
            for lit in c:
                m |= masks[lit]
            acc &= m
        return acc == 0

    kept = set(groups)
    for gid in sorted(groups, reverse=True):
        if unsat(kept - {gid}):
            kept.discard(gid)
    return kept


# -- published scoring definitions, reproduced verbatim ----------------------


def ref_hardness_score(n_models):
    if n_models <= 3: return 10.0 - n_models
    if n_models <= 5: return 6.0
    if n_models <= 8: return 5.0
    if n_models <= 12: return 4.0
    if n_models <= 16: return 3.0
    if n_models <= 21: return 2.0
    else: return 1.0


def ref_candidates_maxsat(n_clauses_list):
    n_clauses_min = min(n_clauses_list)
    return [max(1, 10 - n_clauses + n_clauses_min)
            for n_clauses in n_clauses_list]


def ref_counterexamples_core(core_index, n_clauses_list):
    n_clauses_max = max(n_clauses_list)
    scores = [max(1, 8 - n_clauses_max + n_clauses)
              for n_clauses in n_clauses_list]
    for i in core_index:
        scores[i] = 10
    return scores


def ref_counterexamples_maxsat(n_clauses_list):
    n_clauses_max = max(n_clauses_list)
    return [max(1, 10 - n_clauses_max + n_clauses)
            for n_clauses in n_clauses_list]
