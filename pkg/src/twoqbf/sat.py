"""CDCL satisfiability engine with enumeration, counting, and core extraction.

The solver is intentionally self-contained: two watched literals, first-UIP
clause learning, phase saving, and a static decision order (variable index
ascending, false first) so that runs are reproducible.  A nonzero seed permutes
the decision order instead.  Every public call builds a fresh solver; there is
no incremental interface across calls.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .formula import Clause, CnfFormula

MAX_COUNT_VARS = 26  # hard guard for exhaustive model counting


@dataclass
class SatResult:
    satisfiable: bool
    model: dict[int, bool] | None = None


@dataclass(frozen=True)
class ClauseGroup:
    """A named bundle of clauses treated as one removable unit."""

    group_id: int
    clauses: tuple[Clause, ...]


class _Solver:
    """One CDCL instance over a fixed clause set.

    Clauses are lists of nonzero ints; positions 0 and 1 are the watched
    literals.  Unit clauses are queued separately and asserted at level 0.
    """

    def __init__(self, clauses: Iterable[Sequence[int]], num_vars: int, seed: int = 0):
        self.nv = num_vars
        self.values = [0] * (num_vars + 1)  # 0 unassigned, 1 true, -1 false
        self.saved = [False] * (num_vars + 1)
        self.level = [0] * (num_vars + 1)
        self.reason: list[list[int] | None] = [None] * (num_vars + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.seen = bytearray(num_vars + 1)
        # watch lists indexed by lit + nv (literal 0 unused)
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * num_vars + 1)]
        self.units: list[int] = []
        self.contradiction = False
        self.clauses: list[list[int]] = []
        for cl in clauses:
            self._add_clause(list(cl))
        order = list(range(1, num_vars + 1))
        if seed:
            random.Random(seed).shuffle(order)
        self.order = order
        self.order_pos = 0  # scan pointer; reset on backtrack
        self.rewound = False

    def _add_clause(self, lits: list[int]) -> None:
        if not lits:
            self.contradiction = True
            return
        if len(lits) == 1:
            self.units.append(lits[0])
            return
        self.clauses.append(lits)
        nv = self.nv
        self.watches[lits[0] + nv].append(lits)
        self.watches[lits[1] + nv].append(lits)

    # -- assignment plumbing ------------------------------------------------

    def _assign(self, lit: int, reason: list[int] | None) -> None:
        v = lit if lit > 0 else -lit
        self.values[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _value(self, lit: int) -> int:
        v = self.values[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def _backtrack(self, target: int) -> None:
        trail, values, saved = self.trail, self.values, self.saved
        keep = self.trail_lim[target]
        for i in range(len(trail) - 1, keep - 1, -1):
            lit = trail[i]
            v = lit if lit > 0 else -lit
            saved[v] = lit > 0
            values[v] = 0
            self.reason[v] = None
        del trail[keep:]
        del self.trail_lim[target:]
        self.qhead = len(trail)
        self.order_pos = 0
        self.rewound = True

    def _propagate(self) -> list[int] | None:
        """Exhaust unit propagation; return a falsified clause or None."""
        trail, values, watches, nv = self.trail, self.values, self.watches, self.nv
        while self.qhead < len(trail):
            lit = trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            wl = watches[false_lit + nv]
            i = kept = 0
            n = len(wl)
            while i < n:
                cl = wl[i]
                i += 1
                # make sure the other watch sits at position 0
                if cl[0] == false_lit:
                    cl[0], cl[1] = cl[1], false_lit
                first = cl[0]
                v0 = values[first if first > 0 else -first]
                if (v0 if first > 0 else -v0) == 1:
                    wl[kept] = cl
                    kept += 1
                    continue
                moved = False
                for k in range(2, len(cl)):
                    other = cl[k]
                    vo = values[other if other > 0 else -other]
                    if (vo if other > 0 else -vo) != -1:
                        cl[1], cl[k] = other, false_lit
                        watches[other + nv].append(cl)
                        moved = True
                        break
                if moved:
                    continue
                wl[kept] = cl
                kept += 1
                if (v0 if first > 0 else -v0) == -1:
                    # conflict: keep remaining watchers, restore list, report
                    while i < n:
                        wl[kept] = wl[i]
                        kept += 1
                        i += 1
                    del wl[kept:]
                    self.qhead = len(trail)
                    return cl
                self._assign(first, cl)
            del wl[kept:]
        return None

    # -- conflict analysis --------------------------------------------------

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        """First-UIP learning; returns (learnt clause, backjump level)."""
        learnt = [0]
        seen, level, trail = self.seen, self.level, self.trail
        cur = len(self.trail_lim)
        counter = 0
        idx = len(trail) - 1
        start = 0  # whole clause for the conflict, [1:] for reasons
        marked = []
        while True:
            for j in range(start, len(confl)):
                q = confl[j]
                v = q if q > 0 else -q
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    marked.append(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                p = trail[idx]
                pv = p if p > 0 else -p
                idx -= 1
                if seen[pv]:
                    break
            counter -= 1
            if counter == 0:
                learnt[0] = -p
                break
            confl = self.reason[pv]  # type: ignore[assignment]
            start = 1
        for v in marked:
            seen[v] = 0
        if len(learnt) == 1:
            return learnt, 0
        # place the highest-level non-UIP literal second for watching
        best = 1
        for j in range(2, len(learnt)):
            lv = learnt[j]
            if level[lv if lv > 0 else -lv] > level[learnt[best] if learnt[best] > 0 else -learnt[best]]:
                best = j
        learnt[1], learnt[best] = learnt[best], learnt[1]
        b = learnt[1]
        return learnt, level[b if b > 0 else -b]

    # -- main search --------------------------------------------------------

    def solve(self, assumptions: Sequence[int] = ()) -> list[int] | None:
        """Return a total model as +/-var literals, or None if unsatisfiable."""
        if self.contradiction:
            return None
        if self.trail_lim:
            self._backtrack(0)
        for u in self.units:
            s = self._value(u)
            if s == -1:
                return None
            if s == 0:
                self._assign(u, None)
        if self._propagate() is not None:
            return None
        values, nv, order = self.values, self.nv, self.order
        ai = 0  # assumption scan pointer; rewound whenever the solver backtracks
        self.rewound = False
        while True:
            # next decision: pending assumption first, then static order
            if self.rewound:
                ai = 0
                self.rewound = False
            decision = 0
            while ai < len(assumptions):
                a = assumptions[ai]
                s = self._value(a)
                if s == -1:
                    return None
                if s == 0:
                    decision = a
                    break
                ai += 1
            if decision == 0:
                pos = self.order_pos
                while pos < nv:
                    v = order[pos]
                    if values[v] == 0:
                        decision = v if self.saved[v] else -v
                        break
                    pos += 1
                self.order_pos = pos
            if decision == 0:
                return [v if values[v] == 1 else -v for v in range(1, nv + 1)]
            self.trail_lim.append(len(self.trail))
            self._assign(decision, None)
            while True:
                confl = self._propagate()
                if confl is None:
                    break
                if not self.trail_lim:
                    return None
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    if self._value(learnt[0]) == -1:
                        return None
                    if self._value(learnt[0]) == 0:
                        self._assign(learnt[0], None)
                else:
                    self.clauses.append(learnt)
                    self.watches[learnt[0] + nv].append(learnt)
                    self.watches[learnt[1] + nv].append(learnt)
                    self._assign(learnt[0], learnt)


def _clause_lists(f: CnfFormula) -> list[list[int]]:
    return [list(cl.literals) for cl in f.clauses]


def solve(f: CnfFormula, seed: int = 0) -> SatResult:
    """Decide satisfiability; the model, when present, is total over 1..num_vars."""
    model = _Solver(_clause_lists(f), f.num_vars, seed).solve()
    if model is None:
        return SatResult(False, None)
    return SatResult(True, {abs(l): l > 0 for l in model})


def enumerate_models(
    f: CnfFormula,
    limit: int,
    projection: Iterable[int],
    seed: int = 0,
) -> list[dict[int, bool]]:
    """Up to `limit` distinct models projected onto `projection`.

    Found by re-solving with a blocking clause per model; blocking clauses
    range only over the projection set, so each projected assignment appears
    once no matter how many total models extend it.
    """
    proj = sorted(set(projection))
    if limit < 0:
        raise ValueError("limit must be >= 0")
    out: list[dict[int, bool]] = []
    blocking: list[list[int]] = []
    base = _clause_lists(f)
    while len(out) < limit:
        model = _Solver(base + blocking, f.num_vars, seed).solve()
        if model is None:
            break
        vals = {abs(l): l > 0 for l in model}
        out.append({v: vals[v] for v in proj})
        block = [-v if vals[v] else v for v in proj]
        if not block:
            break  # empty projection: a single projected assignment exists
        blocking.append(block)
    return out


@lru_cache(maxsize=64)
def _literal_masks(order: tuple[int, ...]) -> dict[int, int]:
    """Bit masks over all 2^len(order) assignments; bit m covers the
    assignment where variable order[i] is true iff bit i of m is set."""
    p = len(order)
    total = 1 << (1 << p)
    masks: dict[int, int] = {}
    for i, v in enumerate(order):
        unit = ((1 << (1 << i)) - 1) << (1 << i)
        width = 1 << (i + 1)
        while width < (1 << p):
            unit |= unit << width
            width <<= 1
        masks[v] = unit
        masks[-v] = (total - 1) ^ unit
    return masks


def count_models(f: CnfFormula, projection: Iterable[int]) -> int:
    """Exact number of projected satisfying assignments.

    Exhaustive over the projection set (guarded at 26 variables).  When the
    formula mentions only projected variables the count is taken bit-parallel
    over all assignments at once; otherwise a pruned enumeration decides each
    projected assignment, calling the solver for leftover variables.
    """
    proj = sorted(set(projection))
    p = len(proj)
    if p > MAX_COUNT_VARS:
        raise ValueError(f"projection of {p} variables exceeds guard {MAX_COUNT_VARS}")
    fvars: set[int] = set()
    for cl in f.clauses:
        fvars.update(abs(l) for l in cl)
    if fvars <= set(proj) and p <= 20:
        masks = _literal_masks(tuple(proj))
        acc = (1 << (1 << p)) - 1
        for cl in f.clauses:
            m = 0
            for lit in cl:
                m |= masks[lit]
            acc &= m
            if not acc:
                return 0
        return acc.bit_count()
    return _count_dfs(f, proj)


def _count_dfs(f: CnfFormula, proj: list[int]) -> int:
    def rec(i: int, clauses: list[tuple[int, ...]]) -> int:
        if i == len(proj):
            if not clauses:
                return 1
            sub = CnfFormula(f.num_vars, tuple(Clause(c) for c in clauses))
            return 1 if solve(sub).satisfiable else 0
        v = proj[i]
        total = 0
        for val in (False, True):
            lit = v if val else -v
            nxt: list[tuple[int, ...]] = []
            dead = False
            for c in clauses:
                if lit in c:
                    continue
                if -lit in c:
                    c = tuple(x for x in c if x != -lit)
                    if not c:
                        dead = True  # clause falsified on this branch
                        break
                nxt.append(c)
            if not dead:
                total += rec(i + 1, nxt)
        return total

    return rec(0, [cl.literals for cl in f.clauses])


def extract_core(
    groups: Sequence[ClauseGroup],
    background: CnfFormula | None = None,
) -> set[int]:
    """Deletion-minimal unsatisfiable subset at clause-group granularity.

    Background clauses always stay in.  Groups are dropped from the candidate
    set one id at a time, highest id first, whenever the rest stays
    unsatisfiable; removals are batched in halves for speed, which provably
    leaves the outcome of the one-at-a-time sweep unchanged.  The survivors
    are the core (low ids preferentially kept).
    """
    ids = [g.group_id for g in groups]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate group ids")
    by_id = {g.group_id: g for g in groups}
    top = 0
    for g in groups:
        for cl in g.clauses:
            for lit in cl:
                top = max(top, abs(lit))
    bg_clauses: list[list[int]] = []
    if background is not None:
        top = max(top, background.num_vars)
        bg_clauses = _clause_lists(background)
    sel = {gid: top + i + 1 for i, gid in enumerate(sorted(ids))}
    nv = top + len(ids)
    aug: list[list[int]] = list(bg_clauses)
    for gid, g in by_id.items():
        s = sel[gid]
        for cl in g.clauses:
            aug.append(list(cl.literals) + [-s])
    solver = _Solver(aug, nv)
    all_ids = sorted(ids)
    kept = set(ids)

    def unsat_without(removed: set[int]) -> bool:
        assumptions = [
            sel[g] if (g in kept and g not in removed) else -sel[g] for g in all_ids
        ]
        return solver.solve(assumptions) is None

    if not unsat_without(set()):
        raise ValueError("groups plus background are satisfiable; no core exists")

    def shrink(chunk: list[int]) -> None:
        # chunk is descending by id and currently a subset of `kept`
        if unsat_without(set(chunk)):
            kept.difference_update(chunk)
            return
        if len(chunk) == 1:
            return
        mid = len(chunk) // 2
        shrink(chunk[:mid])
        rest = [g for g in chunk[mid:] if g in kept]
        if rest:
            shrink(rest)

    desc = sorted(ids, reverse=True)
    if desc:
        shrink(desc)
    return kept
