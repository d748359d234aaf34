"""Forward-only message passing over the clause/literal graph.

Seven exchangeable embedding architectures share a common shell: literal
embeddings feed messages into clause updates, clause messages feed back into
literal updates, and every update runs through a LSTM cell so state
accumulates across iterations.  The architectures differ only in how the
clause side combines the two variable blocks (joint sum, sequential,
concatenation, or split into two clause streams).

All arithmetic is float32.  Weight layout is defined by
:mod:`twoqbf.gnn.bundle`; this module never touches files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import SCORE_EXISTS, SCORE_FORALL, VOTE, WITNESS, WeightBundle
from .graph import GraphEncoding, negate_rows

__all__ = [
    "EmbeddingState",
    "run_embedding",
    "head_vote",
    "head_witness",
    "head_score_forall",
    "head_score_exists",
]


@dataclass
class EmbeddingState:
    """Embeddings after a fixed number of message passing iterations.

    clause_embs carries one entry per clause stream ("clause" for the
    single-stream architectures, "clause_to_forall"/"clause_to_exists" for
    the dual-stream ones).  cells holds the LSTM cell state keyed by the
    owning LSTM's tensor name.
    """

    forall_emb: np.ndarray
    exists_emb: np.ndarray
    clause_embs: dict[str, np.ndarray]
    cells: dict[str, np.ndarray]
    iterations: int


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return np.float32(1.0) / (np.float32(1.0) + np.exp(-x))


def _mlp(params, x: np.ndarray) -> np.ndarray:
    w0, b0, w1, b1, w2, b2 = params
    h = np.maximum(x @ w0 + b0, np.float32(0.0))
    h = np.maximum(h @ w1 + b1, np.float32(0.0))
    return h @ w2 + b2


def _lstm(params, x: np.ndarray, h: np.ndarray, c: np.ndarray):
    wx, wh, b = params
    d = h.shape[1]
    gates = x @ wx + h @ wh + b
    i = _sigmoid(gates[:, :d])
    f = _sigmoid(gates[:, d : 2 * d])
    g = np.tanh(gates[:, 2 * d : 3 * d])
    o = _sigmoid(gates[:, 3 * d :])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def _tile(vec: np.ndarray, rows: int) -> np.ndarray:
    return np.tile(vec[None, :], (rows, 1)).astype(np.float32)


class _Net:
    """Binds a bundle to an encoding and exposes the shared update steps."""

    def __init__(self, enc: GraphEncoding, bundle: WeightBundle):
        self.enc = enc
        self.b = bundle

    def mlp(self, name, x):
        return _mlp(self.b.mlp(name), x)

    def lit_messages(self, st: EmbeddingState):
        return self.mlp("msg_forall", st.forall_emb), self.mlp("msg_exists", st.exists_emb)

    def clause_update(self, st, lstm_name, stream, x):
        h, c = _lstm(self.b.lstm(lstm_name), x, st.clause_embs[stream], st.cells[lstm_name])
        st.clause_embs[stream] = h
        st.cells[lstm_name] = c
        return h

    def lit_update(self, st, lstm_name, inc, msg, side):
        emb = st.forall_emb if side == "forall" else st.exists_emb
        x = np.concatenate([inc.T @ msg, negate_rows(emb)], axis=1)
        h, c = _lstm(self.b.lstm(lstm_name), x, emb, st.cells[lstm_name])
        if side == "forall":
            st.forall_emb = h
        else:
            st.exists_emb = h
        st.cells[lstm_name] = c


def _step_arch1(net: _Net, st: EmbeddingState) -> None:
    msg_fa, msg_ex = net.lit_messages(st)
    x = net.enc.forall_inc @ msg_fa + net.enc.exists_inc @ msg_ex
    emb_c = net.clause_update(st, "upd_clause", "clause", x)
    msg_cl = net.mlp("msg_clause", emb_c)
    net.lit_update(st, "upd_forall", net.enc.forall_inc, msg_cl, "forall")
    net.lit_update(st, "upd_exists", net.enc.exists_inc, msg_cl, "exists")


def _step_arch23(net: _Net, st: EmbeddingState, forall_first: bool) -> None:
    msg_fa, msg_ex = net.lit_messages(st)
    first = ("upd_clause_from_forall", net.enc.forall_inc @ msg_fa)
    second = ("upd_clause_from_exists", net.enc.exists_inc @ msg_ex)
    if not forall_first:
        first, second = second, first
    net.clause_update(st, first[0], "clause", first[1])
    emb_c = net.clause_update(st, second[0], "clause", second[1])
    msg_cl = net.mlp("msg_clause", emb_c)
    net.lit_update(st, "upd_forall", net.enc.forall_inc, msg_cl, "forall")
    net.lit_update(st, "upd_exists", net.enc.exists_inc, msg_cl, "exists")


def _step_arch45(net: _Net, st: EmbeddingState, split_messages: bool) -> None:
    msg_fa, msg_ex = net.lit_messages(st)
    x = np.concatenate([net.enc.forall_inc @ msg_fa, net.enc.exists_inc @ msg_ex], axis=1)
    emb_c = net.clause_update(st, "upd_clause", "clause", x)
    if split_messages:
        msg_cf = net.mlp("msg_clause_to_forall", emb_c)
        msg_ce = net.mlp("msg_clause_to_exists", emb_c)
    else:
        msg_cf = msg_ce = net.mlp("msg_clause", emb_c)
    net.lit_update(st, "upd_forall", net.enc.forall_inc, msg_cf, "forall")
    net.lit_update(st, "upd_exists", net.enc.exists_inc, msg_ce, "exists")


def _step_arch6(net: _Net, st: EmbeddingState) -> None:
    msg_fa, msg_ex = net.lit_messages(st)
    x = np.concatenate([net.enc.forall_inc @ msg_fa, net.enc.exists_inc @ msg_ex], axis=1)
    emb_cf = net.clause_update(st, "upd_clause_for_forall", "clause_to_forall", x)
    emb_ce = net.clause_update(st, "upd_clause_for_exists", "clause_to_exists", x)
    msg_cf = net.mlp("msg_clause_to_forall", emb_cf)
    msg_ce = net.mlp("msg_clause_to_exists", emb_ce)
    net.lit_update(st, "upd_forall", net.enc.forall_inc, msg_cf, "forall")
    net.lit_update(st, "upd_exists", net.enc.exists_inc, msg_ce, "exists")


def _step_arch7(net: _Net, st: EmbeddingState) -> None:
    msg_fa = net.mlp("msg_forall", st.forall_emb)
    emb_ce = net.clause_update(
        st, "upd_clause_for_exists", "clause_to_exists", net.enc.forall_inc @ msg_fa
    )
    msg_ce = net.mlp("msg_clause_to_exists", emb_ce)
    net.lit_update(st, "upd_exists", net.enc.exists_inc, msg_ce, "exists")
    msg_ex = net.mlp("msg_exists", st.exists_emb)
    emb_cf = net.clause_update(
        st, "upd_clause_for_forall", "clause_to_forall", net.enc.exists_inc @ msg_ex
    )
    msg_cf = net.mlp("msg_clause_to_forall", emb_cf)
    net.lit_update(st, "upd_forall", net.enc.forall_inc, msg_cf, "forall")


def run_embedding(enc: GraphEncoding, bundle: WeightBundle, iterations: int) -> EmbeddingState:
    """Run `iterations` rounds of message passing and return the final state.

    iterations=0 yields the tiled initial embeddings unchanged.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    arch = bundle.architecture
    n_cl = enc.num_clauses
    clause_streams = (
        ["clause_to_forall", "clause_to_exists"] if arch in (6, 7) else ["clause"]
    )
    st = EmbeddingState(
        forall_emb=_tile(bundle.tensors["init_forall_h"], 2 * len(enc.universals)),
        exists_emb=_tile(bundle.tensors["init_exists_h"], 2 * len(enc.existentials)),
        clause_embs={s: _tile(bundle.tensors["init_clause_h"], n_cl) for s in clause_streams},
        cells={},
        iterations=iterations,
    )
    for name in bundle.lstm_names():
        rows = 2 * len(enc.universals) if name == "upd_forall" else None
        if name == "upd_exists":
            rows = 2 * len(enc.existentials)
        if rows is None:
            rows = n_cl
        init = "init_clause_c"
        if name == "upd_forall":
            init = "init_forall_c"
        elif name == "upd_exists":
            init = "init_exists_c"
        st.cells[name] = _tile(bundle.tensors[init], rows)

    net = _Net(enc, bundle)
    step = {
        1: lambda: _step_arch1(net, st),
        2: lambda: _step_arch23(net, st, forall_first=True),
        3: lambda: _step_arch23(net, st, forall_first=False),
        4: lambda: _step_arch45(net, st, split_messages=False),
        5: lambda: _step_arch45(net, st, split_messages=True),
        6: lambda: _step_arch6(net, st),
        7: lambda: _step_arch7(net, st),
    }[arch]
    for _ in range(iterations):
        step()
    return st


def _variable_pairs(emb: np.ndarray) -> np.ndarray:
    """|V| x 2d matrix: each row concatenates a variable's two literal rows."""
    n = emb.shape[0] // 2
    return np.concatenate([emb[:n], emb[n:]], axis=1)


def _require_head(bundle: WeightBundle, head: str) -> None:
    if not bundle.has_head(head):
        raise ValueError(f"bundle has no {head} head")


def head_vote(state: EmbeddingState, bundle: WeightBundle) -> float:
    """Scalar truth logit: per-variable votes over the universal block, averaged."""
    _require_head(bundle, VOTE)
    votes = _mlp(bundle.mlp(VOTE), _variable_pairs(state.forall_emb))
    return float(np.mean(votes))


def head_witness(state: EmbeddingState, bundle: WeightBundle) -> np.ndarray:
    """Per-universal-variable polarity distribution, shape |X| x 2."""
    _require_head(bundle, WITNESS)
    logits = _mlp(bundle.mlp(WITNESS), _variable_pairs(state.forall_emb))
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return (e / e.sum(axis=1, keepdims=True)).astype(np.float32)


def _head_score(state: EmbeddingState, bundle: WeightBundle, head: str, bits: np.ndarray,
                emb: np.ndarray) -> np.ndarray:
    _require_head(bundle, head)
    pairs = _variable_pairs(emb)
    sm = _mlp(bundle.mlp(head), pairs)
    bits = np.asarray(bits, dtype=np.float32)
    if bits.ndim != 2 or bits.shape[1] != pairs.shape[0]:
        raise ValueError(
            f"assignment matrix must be B x {pairs.shape[0]}, got {bits.shape}"
        )
    hidden = np.maximum(bits @ sm, np.float32(0.0))
    return hidden @ bundle.tensors[f"{head}.out"]


def head_score_forall(state: EmbeddingState, bundle: WeightBundle,
                      bits: np.ndarray) -> np.ndarray:
    """Score a batch of universal assignments; bits is B x |X| in block order."""
    return _head_score(state, bundle, SCORE_FORALL, bits, state.forall_emb)


def head_score_exists(state: EmbeddingState, bundle: WeightBundle,
                      bits: np.ndarray) -> np.ndarray:
    """Score a batch of existential assignments; bits is B x |Y| in block order."""
    return _head_score(state, bundle, SCORE_EXISTS, bits, state.exists_emb)
