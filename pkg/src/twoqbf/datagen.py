"""Random formula generation and exhaustive ranking labels.

Formulas grow clause by clause until they tip from satisfiable to
unsatisfiable; a satisfiable twin is made by flipping one existential literal
occurrence.  Labels enumerate every assignment of one block and attach the
handcrafted ranking scores, which makes them expensive (a group MUS per
formula) but exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .cegar import ConstraintStore, derive_constraint, solve_basic
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
from .ranking import (
    score_candidates_maxsat,
    score_counterexamples_core,
    score_counterexamples_maxsat,
    score_hardness,
)
from .sat import count_models, extract_core, solve

__all__ = [
    "GenSpec",
    "SPLITS",
    "generate_unsat",
    "make_sat_twin",
    "label_candidates",
    "label_counterexamples",
    "label_instance",
    "emit_dataset",
    "label_dataset",
    "load_manifest",
    "read_instance",
    "read_labels",
]

SPLITS = ("TrainU", "TrainS", "TestU", "TestS")
# twin splits and the unsatisfiable split each one mirrors
TWIN_OF = {"TrainS": "TrainU", "TestS": "TestU"}

CLAUSE_GUARD = 10_000
TWIN_RESAMPLE_GUARD = 50
MAX_LABEL_BLOCK = 12


@dataclass(frozen=True)
class GenSpec:
    """Shape of one random formula family.

    Defaults give clauses with 2 universal and 3 existential literals over
    8 universal and 10 existential variables.
    """

    n_forall: int = 8
    n_exists: int = 10
    forall_per_clause: int = 2
    exists_per_clause: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.forall_per_clause <= self.n_forall:
            raise ValueError("forall_per_clause out of range")
        if not 0 < self.exists_per_clause <= self.n_exists:
            raise ValueError("exists_per_clause out of range")

    def blocks(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        xs = tuple(range(1, self.n_forall + 1))
        ys = tuple(range(self.n_forall + 1, self.n_forall + self.n_exists + 1))
        return xs, ys


def _random_clause(rng: np.random.Generator, spec: GenSpec) -> Clause:
    xs = np.sort(rng.choice(spec.n_forall, size=spec.forall_per_clause,
                            replace=False)) + 1
    ys = np.sort(rng.choice(spec.n_exists, size=spec.exists_per_clause,
                            replace=False)) + 1 + spec.n_forall
    lits = []
    for v in list(xs) + list(ys):
        sign = 1 if rng.integers(0, 2) else -1
        lits.append(sign * int(v))
    return Clause(tuple(lits))


def generate_unsat(spec: GenSpec) -> QbfFormula:
    """Sample clauses until the formula first turns unsatisfiable.

    Appends one fresh clause at a time (duplicates are resampled) and
    re-solves after each append; the returned formula is unsatisfiable and
    satisfiable again once its last clause is removed.
    """
    rng = np.random.default_rng(spec.seed)
    xs, ys = spec.blocks()
    clauses: list[Clause] = []
    seen: set[tuple[int, ...]] = set()
    for _ in range(CLAUSE_GUARD):
        cl = _random_clause(rng, spec)
        while cl.literals in seen:
            cl = _random_clause(rng, spec)
        seen.add(cl.literals)
        clauses.append(cl)
        f = QbfFormula(xs, ys, tuple(clauses))
        if solve_basic(f).status == "unsat":
            return f
    raise RuntimeError(f"no unsatisfiable formula within {CLAUSE_GUARD} clauses")


def make_sat_twin(f: QbfFormula, seed: int) -> QbfFormula:
    """Flip one existential literal occurrence to make the formula satisfiable.

    Tries (clause, literal) positions in uniformly random order and keeps the
    first flip that works; flips creating a duplicate clause are skipped.
    Raises ValueError when no single flip yields a satisfiable formula.
    """
    rng = np.random.default_rng(seed)
    evars = set(f.existentials)
    positions = [
        (ci, li)
        for ci, cl in enumerate(f.clauses)
        for li, lit in enumerate(cl.literals)
        if abs(lit) in evars
    ]
    for pi in rng.permutation(len(positions)):
        ci, li = positions[pi]
        lits = list(f.clauses[ci].literals)
        lits[li] = -lits[li]
        flipped = Clause(tuple(lits))
        others = {cl.literals for j, cl in enumerate(f.clauses) if j != ci}
        if flipped.literals in others:
            continue
        clauses = f.clauses[:ci] + (flipped,) + f.clauses[ci + 1 :]
        g = QbfFormula(f.universals, f.existentials, clauses)
        if solve_basic(g).status == "sat":
            return g
    raise ValueError("no single existential flip yields a satisfiable formula")


def _block_assignments(block: Block, order: tuple[int, ...]):
    n = len(order)
    for i in range(1 << n):
        bits = format(i, f"0{n}b")
        yield bits, Assignment.from_bits(block, order, bits)


def label_candidates(f: QbfFormula) -> list[tuple[str, float, int]]:
    """Score every universal assignment: (bits, hardness, maxsat) rows.

    Hardness comes from the exact model count of the reduced matrix, maxsat
    from the satisfied-clause counts of the full 2^|X| batch.
    """
    if len(f.universals) > MAX_LABEL_BLOCK:
        raise ValueError(f"universal block too large to enumerate: {len(f.universals)}")
    rows = []
    counts = []
    for bits, a in _block_assignments(Block.FORALL, f.universals):
        reduced = reduce_by_universal(f, a)
        n = 0 if reduced is None else count_models(reduced, f.existentials)
        rows.append((bits, score_hardness(n)))
        counts.append(satisfied_clause_count(f, a))
    maxsat = score_candidates_maxsat(counts)
    return [(bits, h, m) for (bits, h), m in zip(rows, maxsat)]


def label_counterexamples(f: QbfFormula, label: str) -> list[tuple[str, int, int]]:
    """Score every existential assignment: (bits, core, maxsat) rows.

    Each assignment contributes one constraint group; the group MUS of their
    conjunction marks the core.  For satisfiable formulas the conjunction is
    already unsatisfiable.  For unsatisfiable ones it is satisfiable, so
    surviving witnesses are blocked one by one (as background clauses) until
    it tips, and the core is extracted over the counterexample groups only.
    """
    if len(f.existentials) > MAX_LABEL_BLOCK:
        raise ValueError(
            f"existential block too large to enumerate: {len(f.existentials)}"
        )
    if label not in ("sat", "unsat"):
        raise ValueError(f"unknown label {label!r}")
    store = ConstraintStore(f.num_vars)
    groups = []
    counts = []
    all_bits = []
    for bits, a in _block_assignments(Block.EXISTS, f.existentials):
        g = derive_constraint(f, a, store)
        store.add(g)
        groups.append(g)
        counts.append(satisfied_clause_count(f, a))
        all_bits.append(bits)
    background = None
    if label == "unsat":
        blocking: list[Clause] = []
        conj = [cl for g in groups for cl in g.clauses]
        while True:
            cnf = CnfFormula(store.next_aux - 1,
                             tuple(conj) + tuple(blocking))
            res = solve(cnf)
            if not res.satisfiable:
                break
            blocking.append(
                Clause(tuple(-v if res.model[v] else v for v in f.universals))
            )
        background = CnfFormula(store.next_aux - 1, tuple(blocking))
    core_ids = extract_core(groups, background=background)
    core_idx = {gid - 1 for gid in core_ids}
    core_scores = score_counterexamples_core(core_idx, counts)
    maxsat = score_counterexamples_maxsat(counts)
    return list(zip(all_bits, core_scores, maxsat))


def label_instance(f: QbfFormula) -> dict:
    """Full label record for one formula, as stored in its labels file."""
    label = solve_basic(f).status
    return {
        "label": label,
        "candidates": [list(r) for r in label_candidates(f)],
        "counters": [list(r) for r in label_counterexamples(f, label)],
    }


def _derive_seed(root: int, *path: int) -> int:
    ss = np.random.SeedSequence((root,) + path)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _instance_id(k: int) -> str:
    return f"{k:04d}"


def emit_dataset(
    out_dir: str | Path,
    counts: Mapping[str, int],
    spec: GenSpec,
    with_labels: bool = False,
) -> dict:
    """Generate a dataset directory and return its manifest.

    counts maps split names (TrainU, TrainS, TestU, TestS) to instance
    counts; each satisfiable split holds twins of the same-index instances
    of its unsatisfiable partner, so its count must not exceed the
    partner's.  Writes NNNN.qdimacs per instance plus manifest.json; label
    files are written too when with_labels is set (slow at full size).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in counts:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}")
    for twin, base in TWIN_OF.items():
        if counts.get(twin, 0) > counts.get(base, 0):
            raise ValueError(f"{twin} count exceeds {base} count")

    # unsat formulas first, resampling any whose twin cannot be made
    formulas: dict[str, list[QbfFormula]] = {s: [] for s in SPLITS}
    meta: dict[str, list[dict]] = {s: [] for s in SPLITS}
    for code, usplit in ((0, "TrainU"), (1, "TestU")):
        tsplit = {v: k for k, v in TWIN_OF.items()}[usplit]
        for j in range(counts.get(usplit, 0)):
            need_twin = j < counts.get(tsplit, 0)
            for retry in range(TWIN_RESAMPLE_GUARD):
                gen_seed = _derive_seed(spec.seed, code, j, retry, 0)
                f = generate_unsat(replace(spec, seed=gen_seed))
                if not need_twin:
                    formulas[usplit].append(f)
                    meta[usplit].append({"seed": gen_seed, "retry": retry})
                    break
                twin_seed = _derive_seed(spec.seed, code, j, retry, 1)
                try:
                    twin = make_sat_twin(f, twin_seed)
                except ValueError:
                    continue
                formulas[usplit].append(f)
                meta[usplit].append({"seed": gen_seed, "retry": retry})
                formulas[tsplit].append(twin)
                meta[tsplit].append({"seed": twin_seed, "retry": retry})
                break
            else:
                raise RuntimeError(
                    f"could not generate a twinnable formula for {usplit}[{j}]"
                )

    manifest: dict = {
        "format": 1,
        "spec": {
            "n_forall": spec.n_forall,
            "n_exists": spec.n_exists,
            "forall_per_clause": spec.forall_per_clause,
            "exists_per_clause": spec.exists_per_clause,
            "seed": spec.seed,
        },
        "splits": {},
        "instances": {},
    }
    k = 1
    for split in SPLITS:
        ids = []
        for j, f in enumerate(formulas[split]):
            iid = _instance_id(k)
            k += 1
            ids.append(iid)
            (out / f"{iid}.qdimacs").write_text(write_qdimacs(f))
            info = {
                "split": split,
                "label": "sat" if split in TWIN_OF else "unsat",
                "seed": meta[split][j]["seed"],
                "retry": meta[split][j]["retry"],
            }
            if split in TWIN_OF:
                info["twin_of"] = manifest["splits"][TWIN_OF[split]][j]
            manifest["instances"][iid] = info
        manifest["splits"][split] = ids
    _write_json(out / "manifest.json", manifest)
    if with_labels:
        label_dataset(out)
    return manifest


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def load_manifest(dataset_dir: str | Path) -> dict:
    path = Path(dataset_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"no manifest.json in {dataset_dir}")
    return json.loads(path.read_text())


def read_instance(dataset_dir: str | Path, iid: str) -> QbfFormula:
    return parse_qdimacs((Path(dataset_dir) / f"{iid}.qdimacs").read_text())


def read_labels(dataset_dir: str | Path, iid: str) -> dict:
    return json.loads((Path(dataset_dir) / f"{iid}.labels.json").read_text())


def label_dataset(dataset_dir: str | Path, ids: list[str] | None = None) -> list[str]:
    """Write NNNN.labels.json for the given instances (default: all).

    Returns the ids labeled.  The recomputed truth label must agree with the
    manifest; a mismatch means the dataset directory is corrupt.
    """
    out = Path(dataset_dir)
    manifest = load_manifest(out)
    if ids is None:
        ids = sorted(manifest["instances"])
    for iid in ids:
        f = read_instance(out, iid)
        rec = label_instance(f)
        want = manifest["instances"][iid]["label"]
        if rec["label"] != want:
            raise ValueError(
                f"instance {iid}: solved label {rec['label']} != manifest {want}"
            )
        _write_json(out / f"{iid}.labels.json", rec)
    return ids
