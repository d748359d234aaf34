"""Bipartite graph encoding of a ForAll-Exists CNF formula.

Literals of each block form one node group per polarity-expanded variable:
columns are ordered [v1..vn, -v1..-vn] within a block, so the negation of
column i is column i+n.  Incidence matrices are 0/1 float32, one row per
clause.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..formula import QbfFormula


@dataclass(frozen=True)
class GraphEncoding:
    universals: tuple[int, ...]
    existentials: tuple[int, ...]
    forall_inc: np.ndarray  # |C| x 2|X|
    exists_inc: np.ndarray  # |C| x 2|Y|

    @property
    def num_clauses(self) -> int:
        return self.forall_inc.shape[0]


def encode_graph(f: QbfFormula) -> GraphEncoding:
    nx, ny = len(f.universals), len(f.existentials)
    xcol = {v: i for i, v in enumerate(f.universals)}
    ycol = {v: i for i, v in enumerate(f.existentials)}
    ef = np.zeros((len(f.clauses), 2 * nx), dtype=np.float32)
    ee = np.zeros((len(f.clauses), 2 * ny), dtype=np.float32)
    for r, cl in enumerate(f.clauses):
        for lit in cl:
            v = abs(lit)
            if v in xcol:
                ef[r, xcol[v] + (0 if lit > 0 else nx)] = 1.0
            else:
                ee[r, ycol[v] + (0 if lit > 0 else ny)] = 1.0
    return GraphEncoding(f.universals, f.existentials, ef, ee)


def negate_rows(emb: np.ndarray) -> np.ndarray:
    """Embedding of each literal's negation: swap the polarity halves."""
    n = emb.shape[0] // 2
    return np.concatenate([emb[n:], emb[:n]], axis=0)
