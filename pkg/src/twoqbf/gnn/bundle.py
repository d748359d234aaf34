"""Binary weight-bundle container for the message-passing architectures.

File layout, all integers little-endian uint32, floats little-endian float32:

    magic "QGNN" | format version | architecture id | d | tensor count
    per tensor (sorted by name): name length, name bytes (utf-8), rank,
        one dim per rank, payload row-major
    crc32 of every byte before it

MLP modules store w0/b0/w1/b1/w2/b2 (three layers, rectifier between, linear
output); LSTM modules store wx/wh/b with gate order input, forget, cell,
output.  Initial embeddings are one hidden and one cell vector per node class.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"QGNN"
FORMAT_VERSION = 1
ARCHITECTURES = (1, 2, 3, 4, 5, 6, 7)

VOTE = "vote"
WITNESS = "witness"
SCORE_FORALL = "score_forall"
SCORE_EXISTS = "score_exists"
HEADS = (VOTE, WITNESS, SCORE_FORALL, SCORE_EXISTS)


def _mlp_shapes(name: str, in_dim: int, hidden: int, out_dim: int) -> dict[str, tuple[int, ...]]:
    return {
        f"{name}.w0": (in_dim, hidden),
        f"{name}.b0": (hidden,),
        f"{name}.w1": (hidden, hidden),
        f"{name}.b1": (hidden,),
        f"{name}.w2": (hidden, out_dim),
        f"{name}.b2": (out_dim,),
    }


def _lstm_shapes(name: str, in_dim: int, d: int) -> dict[str, tuple[int, ...]]:
    return {
        f"{name}.wx": (in_dim, 4 * d),
        f"{name}.wh": (d, 4 * d),
        f"{name}.b": (4 * d,),
    }


def embedding_shapes(architecture: int, d: int) -> dict[str, tuple[int, ...]]:
    """Required tensor shapes for the message-passing core of one architecture."""
    if architecture not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {architecture}")
    s: dict[str, tuple[int, ...]] = {}
    for cls in ("forall", "exists", "clause"):
        s[f"init_{cls}_h"] = (d,)
        s[f"init_{cls}_c"] = (d,)
    s.update(_mlp_shapes("msg_forall", d, d, d))
    s.update(_mlp_shapes("msg_exists", d, d, d))
    if architecture in (1, 2, 3, 4):
        s.update(_mlp_shapes("msg_clause", d, d, d))
    else:
        s.update(_mlp_shapes("msg_clause_to_forall", d, d, d))
        s.update(_mlp_shapes("msg_clause_to_exists", d, d, d))
    if architecture == 1:
        s.update(_lstm_shapes("upd_clause", d, d))
    elif architecture in (2, 3):
        s.update(_lstm_shapes("upd_clause_from_forall", d, d))
        s.update(_lstm_shapes("upd_clause_from_exists", d, d))
    elif architecture in (4, 5):
        s.update(_lstm_shapes("upd_clause", 2 * d, d))
    elif architecture == 6:
        s.update(_lstm_shapes("upd_clause_for_forall", 2 * d, d))
        s.update(_lstm_shapes("upd_clause_for_exists", 2 * d, d))
    else:  # 7: each clause stream sees one block's messages only
        s.update(_lstm_shapes("upd_clause_for_forall", d, d))
        s.update(_lstm_shapes("upd_clause_for_exists", d, d))
    s.update(_lstm_shapes("upd_forall", 2 * d, d))
    s.update(_lstm_shapes("upd_exists", 2 * d, d))
    return s


def head_shapes(head: str, d: int, k: int) -> dict[str, tuple[int, ...]]:
    """Per-head tensors; head inputs are the concatenated (positive, negative)
    literal embeddings of one variable."""
    if head == VOTE:
        return _mlp_shapes(VOTE, 2 * d, d, 1)
    if head == WITNESS:
        return _mlp_shapes(WITNESS, 2 * d, d, 2)
    if head == SCORE_FORALL:
        return {**_mlp_shapes(SCORE_FORALL, 2 * d, d, k), f"{SCORE_FORALL}.out": (k,)}
    if head == SCORE_EXISTS:
        return {**_mlp_shapes(SCORE_EXISTS, 2 * d, d, k), f"{SCORE_EXISTS}.out": (k,)}
    raise ValueError(f"unknown head {head}")


@dataclass
class WeightBundle:
    architecture: int
    d: int
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture}")
        if self.d < 1:
            raise ValueError("d must be positive")
        for name, t in self.tensors.items():
            if t.dtype != np.float32:
                raise ValueError(f"tensor {name} must be float32, got {t.dtype}")
        expect = embedding_shapes(self.architecture, self.d)
        for name, shape in expect.items():
            if name not in self.tensors:
                raise ValueError(f"missing tensor {name}")
            if self.tensors[name].shape != shape:
                raise ValueError(
                    f"tensor {name}: shape {self.tensors[name].shape}, want {shape}"
                )
        known = set(expect)
        for head in HEADS:
            names = [n for n in self.tensors if n.split(".")[0] == head]
            if not names:
                continue
            if head in (SCORE_FORALL, SCORE_EXISTS):
                w2 = self.tensors.get(f"{head}.w2")
                if w2 is None:
                    raise ValueError(f"incomplete head {head}: missing {head}.w2")
                k = w2.shape[1]
            else:
                k = 0
            hshape = head_shapes(head, self.d, k)
            for name, shape in hshape.items():
                if name not in self.tensors:
                    raise ValueError(f"incomplete head {head}: missing {name}")
                if self.tensors[name].shape != shape:
                    raise ValueError(
                        f"tensor {name}: shape {self.tensors[name].shape}, want {shape}"
                    )
            known |= set(hshape)
        extra = set(self.tensors) - known
        if extra:
            raise ValueError(f"unexpected tensors: {sorted(extra)}")

    def has_head(self, head: str) -> bool:
        return f"{head}.w0" in self.tensors

    def score_dim(self, head: str) -> int:
        w2 = self.tensors.get(f"{head}.w2")
        if w2 is None:
            raise ValueError(f"bundle has no {head} head")
        return w2.shape[1]

    def mlp(self, name: str):
        t = self.tensors
        return (t[f"{name}.w0"], t[f"{name}.b0"], t[f"{name}.w1"],
                t[f"{name}.b1"], t[f"{name}.w2"], t[f"{name}.b2"])

    def lstm(self, name: str):
        t = self.tensors
        return (t[f"{name}.wx"], t[f"{name}.wh"], t[f"{name}.b"])

    def lstm_names(self) -> list[str]:
        return sorted(n[: -len(".wx")] for n in self.tensors if n.endswith(".wx"))


def to_bytes(bundle: WeightBundle) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<IIII", FORMAT_VERSION, bundle.architecture, bundle.d,
                       len(bundle.tensors))
    for name in sorted(bundle.tensors):
        t = np.ascontiguousarray(bundle.tensors[name], dtype=np.float32)
        nb = name.encode("utf-8")
        out += struct.pack("<I", len(nb))
        out += nb
        out += struct.pack("<I", t.ndim)
        out += struct.pack(f"<{t.ndim}I", *t.shape)
        out += t.tobytes(order="C")
    out += struct.pack("<I", zlib.crc32(bytes(out)) & 0xFFFFFFFF)
    return bytes(out)


def from_bytes(data: bytes) -> WeightBundle:
    if len(data) < 24:
        raise ValueError("truncated bundle")
    if data[:4] != MAGIC:
        raise ValueError("bad magic; not a weight bundle")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise ValueError("checksum mismatch; bundle corrupted")
    version, arch, d, count = struct.unpack("<IIII", data[4:20])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version}")
    pos = 20
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<I", data, pos)
        pos += 4
        name = data[pos:pos + nlen].decode("utf-8")
        pos += nlen
        (rank,) = struct.unpack_from("<I", data, pos)
        pos += 4
        dims = struct.unpack_from(f"<{rank}I", data, pos)
        pos += 4 * rank
        n = int(np.prod(dims)) if rank else 1
        t = np.frombuffer(data, dtype="<f4", count=n, offset=pos).reshape(dims)
        pos += 4 * n
        tensors[name] = t.astype(np.float32)
    if pos != len(data) - 4:
        raise ValueError("trailing bytes in bundle")
    return WeightBundle(arch, d, tensors)


def save_bundle(bundle: WeightBundle, path: str | Path) -> None:
    Path(path).write_bytes(to_bytes(bundle))


def load_bundle(path: str | Path) -> WeightBundle:
    return from_bytes(Path(path).read_bytes())


def random_bundle(
    architecture: int,
    d: int,
    seed: int = 0,
    k: int | None = None,
    heads: tuple[str, ...] = HEADS,
) -> WeightBundle:
    """Gaussian-initialised bundle (scale 1/sqrt(fan-in), biases zero)."""
    k = d if k is None else k
    rng = np.random.default_rng(seed)
    shapes = dict(embedding_shapes(architecture, d))
    for head in heads:
        shapes.update(head_shapes(head, d, k))
    tensors = {}
    for name in sorted(shapes):
        shape = shapes[name]
        if name.endswith((".b", ".b0", ".b1", ".b2")):
            tensors[name] = np.zeros(shape, dtype=np.float32)
        elif name.startswith("init_"):
            tensors[name] = rng.standard_normal(shape).astype(np.float32)
        else:
            scale = 1.0 / np.sqrt(shape[0])
            tensors[name] = (rng.standard_normal(shape) * scale).astype(np.float32)
    return WeightBundle(architecture, d, tensors)
