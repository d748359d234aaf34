"""Counterexample-guided abstraction refinement for ForAll-Exists formulas.

The loop keeps a propositional abstraction omega over the universal variables
(plus Tseitin auxiliaries).  Candidates are models of omega; a candidate is
refuted by solving the reduced matrix, and each counterexample is turned into
a constraint group that removes every candidate it refutes.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

from . import sat
from .formula import Assignment, Block, Clause, CnfFormula, QbfFormula, reduce_by_universal

CANDIDATE = "candidate"
COUNTEREXAMPLE = "counterexample"


class Ranker(Protocol):
    def score_batch(
        self, f: QbfFormula, batch: Sequence[Assignment], side: str
    ) -> list[float]: ...


@dataclass
class CegarResult:
    status: str  # "sat" or "unsat"
    witness: Assignment | None
    iterations: int
    trace: list[tuple[Assignment, Assignment | None]]


@dataclass
class ConstraintStore:
    """Accumulated refinement constraints plus the auxiliary-variable counter.

    Auxiliaries live strictly above the formula's own variables so projections
    onto the universal block never see them.
    """

    base_vars: int
    next_aux: int = 0
    groups: list[sat.ClauseGroup] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.next_aux == 0:
            self.next_aux = self.base_vars + 1

    def allocate_aux(self) -> int:
        v = self.next_aux
        self.next_aux += 1
        return v

    def add(self, group: sat.ClauseGroup) -> None:
        self.groups.append(group)

    def omega(self) -> CnfFormula:
        clauses = tuple(cl for g in self.groups for cl in g.clauses)
        return CnfFormula(self.next_aux - 1, clauses)


def derive_constraint(
    f: QbfFormula, counter: Assignment, store: ConstraintStore
) -> sat.ClauseGroup:
    """Turn a counterexample into a constraint group over the universals.

    Clauses whose existential part the counterexample satisfies are harmless;
    for each remaining clause the next candidate must falsify some universal
    literal, expressed as a disjunction of negated-literal conjunctions with
    one Tseitin auxiliary per conjunction of size two or more.  An empty
    remainder means the counterexample refutes every candidate; the group is
    then a contradictory auxiliary pair that makes omega unsatisfiable.
    """
    if counter.block is not Block.EXISTS:
        raise ValueError("counterexample must assign the existential block")
    vals = counter.values
    for v in f.existentials:
        if v not in vals:
            raise ValueError(f"existential variable {v} unassigned")
    conjuncts: list[tuple[int, ...]] = []
    for ul, el in f.split_clauses:
        if any(vals[abs(l)] == (l > 0) for l in el):
            continue  # satisfied irrespective of the candidate
        conjuncts.append(ul)
    gid = len(store.groups) + 1
    if not conjuncts:
        a = store.allocate_aux()
        return sat.ClauseGroup(gid, (Clause((a,)), Clause((-a,))))
    if any(not c for c in conjuncts):
        # a clause with no universal literals can never be satisfied by the
        # candidate side, so the disjunction is vacuously true
        return sat.ClauseGroup(gid, ())
    if len(conjuncts) == 1:
        return sat.ClauseGroup(gid, tuple(Clause((-l,)) for l in conjuncts[0]))
    clauses: list[Clause] = []
    top: list[int] = []
    seen: set[int] = set()
    for c in conjuncts:
        if len(c) == 1:
            lit = -c[0]
            if -lit in seen:
                return sat.ClauseGroup(gid, ())  # top clause tautological
            if lit not in seen:
                seen.add(lit)
                top.append(lit)
        else:
            a = store.allocate_aux()
            for l in c:
                clauses.append(Clause((-a, -l)))
            clauses.append(Clause((a,) + c))
            top.append(a)
    clauses.append(Clause(tuple(top)))
    return sat.ClauseGroup(gid, tuple(clauses))


def _argmax_first(scores: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def solve_ranked(
    f: QbfFormula,
    candidate_ranker: Ranker | None = None,
    counterexample_ranker: Ranker | None = None,
    n_max: int = 10,
    seed: int = 0,
) -> CegarResult:
    """Refinement loop with optional ranking of enumerated proposals.

    On each side with a ranker, up to n_max models are enumerated and the
    highest-scoring one is proposed (ties to the lowest enumeration index);
    without a ranker the side degrades to the solver's first model.  The
    returned status never depends on the rankers, only the path taken.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    X, Y = f.universals, f.existentials
    store = ConstraintStore(f.num_vars)
    trace: list[tuple[Assignment, Assignment | None]] = []
    guard = (1 << len(X)) + 2 if len(X) < 40 else 1 << 62
    for _ in range(guard):
        omega = store.omega()
        if candidate_ranker is None:
            res = sat.solve(omega, seed)
            cands = [{v: res.model[v] for v in X}] if res.satisfiable else []
        else:
            cands = sat.enumerate_models(omega, n_max, X, seed)
        if not cands:
            return CegarResult("sat", None, len(trace), trace)
        if candidate_ranker is not None and len(cands) > 1:
            batch = [Assignment(Block.FORALL, m) for m in cands]
            pick = _argmax_first(candidate_ranker.score_batch(f, batch, CANDIDATE))
        else:
            pick = 0
        cand = Assignment(Block.FORALL, cands[pick])
        reduced = reduce_by_universal(f, cand)
        counter: Assignment | None = None
        if reduced is not None:
            if counterexample_ranker is None:
                res = sat.solve(reduced, seed)
                if res.satisfiable:
                    counter = Assignment(Block.EXISTS, {v: res.model[v] for v in Y})
            else:
                models = sat.enumerate_models(reduced, n_max, Y, seed)
                if models:
                    batch = [Assignment(Block.EXISTS, m) for m in models]
                    pick = _argmax_first(
                        counterexample_ranker.score_batch(f, batch, COUNTEREXAMPLE)
                    )
                    counter = Assignment(Block.EXISTS, models[pick])
        if counter is None:
            trace.append((cand, None))
            return CegarResult("unsat", cand, len(trace), trace)
        trace.append((cand, counter))
        store.add(derive_constraint(f, counter, store))
    raise RuntimeError("refinement failed to converge; constraint encoding broken")


def solve_basic(f: QbfFormula, seed: int = 0) -> CegarResult:
    """Plain refinement loop: first candidate, first counterexample."""
    return solve_ranked(f, None, None, seed=seed)


def verify_witness(f: QbfFormula, witness: Assignment) -> bool:
    """True iff the universal assignment admits no existential answer."""
    reduced = reduce_by_universal(f, witness)
    return reduced is None or not sat.solve(reduced).satisfiable
