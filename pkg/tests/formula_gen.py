"""Random formula builders shared by the test modules."""
from __future__ import annotations

import random

from hypothesis import strategies as st

from twoqbf.formula import Clause, CnfFormula, QbfFormula


def random_cnf(rng: random.Random, num_vars: int, num_clauses: int,
               max_width: int = 4) -> CnfFormula:
    clauses = []
    for _ in range(num_clauses):
        width = rng.randint(1, min(max_width, num_vars))
        vs = rng.sample(range(1, num_vars + 1), width)
        clauses.append(Clause(tuple(v if rng.random() < 0.5 else -v for v in vs)))
    return CnfFormula(num_vars, tuple(clauses))


def random_qbf(rng: random.Random, nx: int, ny: int, num_clauses: int,
               max_width: int = 4) -> QbfFormula:
    """Mixed-width 2QBF; every clause draws from X union Y without replacement."""
    X = list(range(1, nx + 1))
    Y = list(range(nx + 1, nx + ny + 1))
    clauses = []
    for _ in range(num_clauses):
        width = rng.randint(1, min(max_width, nx + ny))
        vs = rng.sample(X + Y, width)
        clauses.append(Clause(tuple(v if rng.random() < 0.5 else -v for v in vs)))
    return QbfFormula(tuple(X), tuple(Y), tuple(clauses))


@st.composite
def cnf_formulas(draw, max_vars: int = 8, max_clauses: int = 12):
    nv = draw(st.integers(1, max_vars))
    ncl = draw(st.integers(0, max_clauses))
    clauses = []
    for _ in range(ncl):
        width = draw(st.integers(1, min(4, nv)))
        vs = draw(
            st.lists(st.integers(1, nv), min_size=width, max_size=width, unique=True)
        )
        signs = draw(st.lists(st.booleans(), min_size=width, max_size=width))
        clauses.append(Clause(tuple(v if s else -v for v, s in zip(vs, signs))))
    return CnfFormula(nv, tuple(clauses))


@st.composite
def qbf_formulas(draw, max_x: int = 4, max_y: int = 4, max_clauses: int = 10):
    nx = draw(st.integers(1, max_x))
    ny = draw(st.integers(1, max_y))
    ncl = draw(st.integers(0, max_clauses))
    seed = draw(st.integers(0, 2**31))
    return random_qbf(random.Random(seed), nx, ny, ncl)
