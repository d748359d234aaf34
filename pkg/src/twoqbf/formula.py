"""Core formula types and QDIMACS text exchange.

Literals follow the DIMACS convention: a literal is a signed integer whose
absolute value is the variable index (>= 1) and whose sign is the polarity.
Negation is unary minus, so double negation is the identity by construction.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

Literal = int
VarId = int


class Block(enum.Enum):
    """Quantifier block of a prenex ForAll-Exists formula."""

    FORALL = "a"
    EXISTS = "e"


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals.

    Clauses are non-empty, duplicate-free, and non-tautological; the literal
    order given at construction is preserved.
    """

    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        if not self.literals:
            raise ValueError("empty clause")
        seen: set[int] = set()
        for lit in self.literals:
            if lit == 0 or not isinstance(lit, int):
                raise ValueError(f"bad literal {lit!r}")
            if lit in seen:
                raise ValueError(f"duplicate literal {lit} in clause")
            if -lit in seen:
                raise ValueError(f"tautological clause: {lit} and {-lit}")
            seen.add(lit)

    def variables(self) -> set[VarId]:
        return {abs(l) for l in self.literals}

    def __iter__(self):
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)


@dataclass(frozen=True)
class CnfFormula:
    """Plain CNF over variables 1..num_vars (not all need occur)."""

    num_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        for cl in self.clauses:
            for lit in cl:
                if abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")


@dataclass(frozen=True)
class QbfFormula:
    """Prenex 2QBF ForAll X Exists Y . matrix, with X and Y disjoint."""

    universals: tuple[VarId, ...]
    existentials: tuple[VarId, ...]
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        for v in self.universals + self.existentials:
            if v < 1:
                raise ValueError(f"variable index {v} must be positive")
        xs, ys = set(self.universals), set(self.existentials)
        if len(xs) != len(self.universals) or len(ys) != len(self.existentials):
            raise ValueError("repeated variable in quantifier block")
        if xs & ys:
            raise ValueError(f"blocks overlap on {sorted(xs & ys)}")
        bound = xs | ys
        for cl in self.clauses:
            for lit in cl:
                if abs(lit) not in bound:
                    raise ValueError(f"literal {lit} not bound by any quantifier")

    @property
    def num_vars(self) -> int:
        return len(self.universals) + len(self.existentials)

    @cached_property
    def _block_of(self) -> dict[VarId, Block]:
        table = {v: Block.FORALL for v in self.universals}
        table.update({v: Block.EXISTS for v in self.existentials})
        return table

    def block_of(self, var: VarId) -> Block:
        return self._block_of[var]

    @cached_property
    def split_clauses(self) -> tuple[tuple[tuple[Literal, ...], tuple[Literal, ...]], ...]:
        """Per clause, its (universal literals, existential literals), order kept."""
        xs = set(self.universals)
        out = []
        for cl in self.clauses:
            ul = tuple(l for l in cl if abs(l) in xs)
            el = tuple(l for l in cl if abs(l) not in xs)
            out.append((ul, el))
        return tuple(out)

    def assert_uniform(self, n_forall: int, n_exists: int) -> None:
        """Check every clause has exactly the given per-block literal counts."""
        for i, (ul, el) in enumerate(self.split_clauses):
            if len(ul) != n_forall or len(el) != n_exists:
                raise ValueError(
                    f"clause {i} has {len(ul)} universal / {len(el)} existential "
                    f"literals, expected {n_forall}/{n_exists}"
                )


@dataclass
class Assignment:
    """Total assignment to the variables of one quantifier block."""

    block: Block
    values: dict[VarId, bool] = field(default_factory=dict)

    def satisfies(self, lit: Literal) -> bool:
        """True iff the literal's variable is assigned and the literal holds."""
        v = self.values.get(abs(lit))
        return v is not None and v == (lit > 0)

    def bits(self, order: Sequence[VarId]) -> str:
        return "".join("1" if self.values[v] else "0" for v in order)

    @classmethod
    def from_bits(cls, block: Block, order: Sequence[VarId], bits: str) -> "Assignment":
        if len(bits) != len(order):
            raise ValueError(f"{len(bits)} bits for {len(order)} variables")
        return cls(block, {v: b == "1" for v, b in zip(order, bits)})


def parse_qdimacs(text: str) -> QbfFormula:
    """Parse QDIMACS text into a QbfFormula.

    Requires a `p cnf` header, one `a` line followed by one `e` line, and one
    clause per line.  Declared variable and clause counts must match the body;
    the quantifier blocks must partition 1..num_vars.
    """
    num_vars = num_clauses = None
    blocks: dict[str, list[int]] = {}
    block_order: list[str] = []
    clauses: list[Clause] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise ValueError(f"line {lineno}: repeated problem line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed problem line {line!r}")
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed problem line {line!r}") from None
            if num_vars < 0 or num_clauses < 0:
                raise ValueError(f"line {lineno}: negative counts in problem line")
            continue
        if num_vars is None:
            raise ValueError(f"line {lineno}: content before problem line")
        if line[0] in "ae":
            kind, *rest = line.split()
            if kind not in ("a", "e"):
                raise ValueError(f"line {lineno}: bad quantifier line {line!r}")
            if clauses:
                raise ValueError(f"line {lineno}: quantifier line after clauses")
            if kind in blocks:
                raise ValueError(f"line {lineno}: repeated {kind!r} block")
            ints = [int(t) for t in rest]
            if not ints or ints[-1] != 0 or any(v == 0 for v in ints[:-1]):
                raise ValueError(f"line {lineno}: quantifier line must end with 0")
            vs = ints[:-1]
            if any(v < 0 for v in vs):
                raise ValueError(f"line {lineno}: negative variable in quantifier line")
            blocks[kind] = vs
            block_order.append(kind)
            continue
        # clause line
        try:
            ints = [int(t) for t in line.split()]
        except ValueError:
            raise ValueError(f"line {lineno}: unparsable clause line {line!r}") from None
        if not ints or ints[-1] != 0:
            raise ValueError(f"line {lineno}: clause line must end with 0")
        if any(v == 0 for v in ints[:-1]):
            raise ValueError(f"line {lineno}: literal 0 inside clause")
        try:
            clauses.append(Clause(tuple(ints[:-1])))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None

    if num_vars is None:
        raise ValueError("missing problem line")
    if block_order != ["a", "e"]:
        raise ValueError(f"expected quantifier prefix 'a' then 'e', got {block_order}")
    universals, existentials = blocks["a"], blocks["e"]
    for v in universals + existentials:
        if v > num_vars:
            raise ValueError(f"quantified variable {v} out of range 1..{num_vars}")
    if len(clauses) != num_clauses:
        raise ValueError(f"declared {num_clauses} clauses, found {len(clauses)}")
    f = QbfFormula(tuple(universals), tuple(existentials), tuple(clauses))
    if f.num_vars != num_vars:
        raise ValueError(
            f"declared {num_vars} variables, quantifier blocks cover {f.num_vars}"
        )
    return f


def write_qdimacs(f: QbfFormula) -> str:
    """Render a QbfFormula as QDIMACS text (inverse of parse_qdimacs)."""
    lines = [f"p cnf {f.num_vars} {len(f.clauses)}"]
    lines.append("a " + " ".join(str(v) for v in f.universals) + " 0")
    lines.append("e " + " ".join(str(v) for v in f.existentials) + " 0")
    for cl in f.clauses:
        lines.append(" ".join(str(l) for l in cl.literals) + " 0")
    return "\n".join(lines) + "\n"


def reduce_by_universal(f: QbfFormula, a: Assignment) -> CnfFormula | None:
    """Substitute a total universal assignment into the matrix.

    Clauses with a satisfied universal literal are dropped; falsified universal
    literals are deleted from the rest.  Returns None when some clause loses
    all its literals, i.e. the reduced matrix is unsatisfiable outright.
    """
    if a.block is not Block.FORALL:
        raise ValueError("reduction needs a universal-block assignment")
    vals = a.values
    for v in f.universals:
        if v not in vals:
            raise ValueError(f"universal variable {v} unassigned")
    out: list[Clause] = []
    for cl, (ul, el) in zip(f.clauses, f.split_clauses):
        satisfied = False
        for lit in ul:
            if vals[abs(lit)] == (lit > 0):
                satisfied = True
                break
        if satisfied:
            continue
        if not el:
            return None  # all literals deleted: no existential escape
        out.append(Clause(el))
    return CnfFormula(f.num_vars, tuple(out))


def satisfied_clause_count(f: QbfFormula, a: Assignment) -> int:
    """Number of matrix clauses with at least one true literal from a's block."""
    vals = a.values
    idx = 0 if a.block is Block.FORALL else 1
    for v in (f.universals if a.block is Block.FORALL else f.existentials):
        if v not in vals:
            raise ValueError(f"variable {v} of block {a.block.value!r} unassigned")
    n = 0
    for parts in f.split_clauses:
        for lit in parts[idx]:
            if vals[abs(lit)] == (lit > 0):
                n += 1
                break
    return n
