"""End-to-end acceptance criteria, one test per criterion.

The heavy fixtures (a 400-instance dataset at full size and the solve matrix
over it) are built once per session and shared by criteria 1, 4, and 5.
Criteria 6 uses randomly initialized weight bundles: the properties it checks
(equivariance, round trip, determinism) hold for any weights.
"""

import hashlib
import itertools
import random
import subprocess
import sys

import numpy as np
import pytest

from formula_gen import random_qbf
from oracles import (
    brute_force_2qbf,
    ref_candidates_maxsat,
    ref_counterexamples_core,
    ref_counterexamples_maxsat,
    ref_hardness_score,
)
from test_gnn import permute_formula
from twoqbf import (
    Assignment,
    Block,
    CnfFormula,
    Clause,
    parse_qdimacs,
    reduce_by_universal,
    solve,
    solve_ranked,
    verify_witness,
)
from twoqbf.cegar import CANDIDATE, COUNTEREXAMPLE, ConstraintStore, derive_constraint
from twoqbf.datagen import GenSpec, emit_dataset, read_instance
from twoqbf.gnn import (
    ARCHITECTURES,
    encode_graph,
    from_bytes,
    head_score_forall,
    head_vote,
    head_witness,
    random_bundle,
    run_embedding,
    to_bytes,
)
from twoqbf.ranking import (
    gnn_ranker,
    hardness_ranker,
    maxsat_ranker,
    score_candidates_maxsat,
    score_counterexamples_core,
    score_counterexamples_maxsat,
    score_hardness,
)

FULL_SPEC = GenSpec(seed=20260821)
N_PAIRS = 200
TOL = 1e-5


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("accept")
    manifest = emit_dataset(d, {"TestU": N_PAIRS, "TestS": N_PAIRS}, FULL_SPEC)
    return d, manifest


@pytest.fixture(scope="module")
def solve_matrix(dataset):
    """status/iterations/witness-validity per instance and heuristic config."""
    d, manifest = dataset
    bundle = random_bundle(5, d=16, seed=0)
    configs = {
        "none/none": (None, None),
        "maxsat/none": (maxsat_ranker(CANDIDATE), None),
        "none/maxsat": (None, maxsat_ranker(COUNTEREXAMPLE)),
        "maxsat/maxsat": (
            maxsat_ranker(CANDIDATE), maxsat_ranker(COUNTEREXAMPLE)),
        "hardness/none": (hardness_ranker(), None),
        "gnn/gnn": (
            gnn_ranker(bundle, CANDIDATE, 8),
            gnn_ranker(bundle, COUNTEREXAMPLE, 8)),
    }
    matrix = {}
    for split in ("TestU", "TestS"):
        rows = []
        for iid in manifest["splits"][split]:
            f = read_instance(d, iid)
            truth, _ = brute_force_2qbf(f)
            rec = {"id": iid, "oracle": "sat" if truth else "unsat"}
            for name, (cand, counter) in configs.items():
                res = solve_ranked(f, cand, counter)
                witness_ok = res.status != "unsat" or verify_witness(
                    f, res.witness)
                rec[name] = (res.status, res.iterations, witness_ok)
            rows.append(rec)
        matrix[split] = rows
    return matrix


CONFIG_NAMES = ("none/none", "maxsat/none", "none/maxsat", "maxsat/maxsat",
                "hardness/none", "gnn/gnn")


def mean_iters(rows, name):
    return sum(r[name][1] for r in rows) / len(rows)


def test_criterion_1_oracle_agreement(solve_matrix):
    """400 full-size instances: every config matches the brute-force oracle,
    and every unsat witness verifies."""
    mismatches = []
    bad_witnesses = []
    n = 0
    for split, rows in solve_matrix.items():
        for rec in rows:
            n += 1
            for name in CONFIG_NAMES:
                status, _iters, witness_ok = rec[name]
                if status != rec["oracle"]:
                    mismatches.append((split, rec["id"], name, status))
                if not witness_ok:
                    bad_witnesses.append((split, rec["id"], name))
    assert n == 2 * N_PAIRS
    assert mismatches == [], f"status mismatches: {mismatches[:10]}"
    assert bad_witnesses == [], f"unverified witnesses: {bad_witnesses[:10]}"


def test_criterion_2_refinement_soundness():
    """10^3 random (formula, candidate, counterexample) triples: a candidate
    allowed by the derived constraint is never refuted by that
    counterexample (checked by exhaustive candidate sweep)."""
    rng = random.Random(424242)
    violations = 0
    for _ in range(1000):
        nx = rng.randint(1, 4)
        ny = rng.randint(1, 4)
        f = random_qbf(rng, nx, ny, rng.randint(1, 10))
        counter = Assignment(
            Block.EXISTS,
            {v: bool(rng.getrandbits(1)) for v in f.existentials},
        )
        store = ConstraintStore(f.num_vars)
        group = derive_constraint(f, counter, store)
        for i in range(1 << nx):
            cand = Assignment.from_bits(
                Block.FORALL, f.universals, format(i, f"0{nx}b"))
            units = tuple(
                Clause((v if cand.values[v] else -v,)) for v in f.universals
            )
            allowed = solve(
                CnfFormula(store.next_aux - 1, group.clauses + units)
            ).satisfiable
            if not allowed:
                continue
            reduced = reduce_by_universal(f, cand)
            refuted = reduced is not None and all(
                any(counter.satisfies(l) for l in cl) for cl in reduced.clauses
            )
            if refuted:
                violations += 1
    assert violations == 0


def test_criterion_3_score_functions_bit_exact():
    """Exhaustive agreement with the transcribed scoring listings:
    n_models in [0,64]; every list of length <= 4 with entries in [0,16];
    every core subset."""
    for n in range(65):
        assert score_hardness(n) == ref_hardness_score(n)
    for length in range(1, 5):
        for tup in itertools.product(range(17), repeat=length):
            lst = list(tup)
            assert score_candidates_maxsat(lst) == ref_candidates_maxsat(lst)
            assert score_counterexamples_maxsat(lst) == (
                ref_counterexamples_maxsat(lst))
            for r in range(length + 1):
                for core in itertools.combinations(range(length), r):
                    cs = set(core)
                    assert score_counterexamples_core(cs, lst) == (
                        ref_counterexamples_core(cs, lst))


def test_criterion_4_candidate_ranking_reduction(solve_matrix):
    """Unsat split: maxsat candidate ranking cuts mean iterations by >= 25%,
    hardness ranking by >= 20%."""
    rows = solve_matrix["TestU"]
    base = mean_iters(rows, "none/none")
    maxsat = mean_iters(rows, "maxsat/none")
    hardness = mean_iters(rows, "hardness/none")
    assert maxsat <= 0.75 * base, (
        f"maxsat candidate ranking: {maxsat:.3f} vs base {base:.3f} "
        f"({1 - maxsat / base:.1%} reduction, need >= 25%)")
    assert hardness <= 0.80 * base, (
        f"hardness ranking: {hardness:.3f} vs base {base:.3f} "
        f"({1 - hardness / base:.1%} reduction, need >= 20%)")


def test_criterion_5_combined_ranking_dominates(solve_matrix):
    """Both test splits: combined maxsat ranking strictly below either
    single-sided config."""
    for split in ("TestU", "TestS"):
        rows = solve_matrix[split]
        combined = mean_iters(rows, "maxsat/maxsat")
        cand_only = mean_iters(rows, "maxsat/none")
        counter_only = mean_iters(rows, "none/maxsat")
        assert combined < cand_only, (
            f"{split}: combined {combined:.3f} !< candidate-only {cand_only:.3f}")
        assert combined < counter_only, (
            f"{split}: combined {combined:.3f} !< counter-only {counter_only:.3f}")


def test_criterion_6_gnn_inference_properties():
    """All architectures: permutation invariance/equivariance within 1e-5;
    bundle round trip bit-identical; Model-5 forward deterministic across
    processes on the two-clause example."""
    f = parse_qdimacs(
        "p cnf 7 4\na 1 2 3 0\ne 4 5 6 7 0\n"
        "1 -2 4 0\n-1 3 -5 6 0\n2 -4 7 0\n-3 5 -6 -7 0\n"
    )
    for arch in ARCHITECTURES:
        rng = np.random.default_rng(1000 + arch)
        g, xperm, yperm = permute_formula(f, rng)
        b = random_bundle(arch, d=16, seed=arch)
        s1 = run_embedding(encode_graph(f), b, iterations=8)
        s2 = run_embedding(encode_graph(g), b, iterations=8)
        assert abs(head_vote(s1, b) - head_vote(s2, b)) <= TOL, f"arch {arch}"
        np.testing.assert_allclose(
            head_witness(s2, b), head_witness(s1, b)[xperm], atol=TOL,
            err_msg=f"arch {arch} witness")
        rows = xperm + [3 + i for i in xperm]
        np.testing.assert_allclose(
            s2.forall_emb, s1.forall_emb[rows], atol=TOL,
            err_msg=f"arch {arch} forall embeddings")
        rows = yperm + [4 + i for i in yperm]
        np.testing.assert_allclose(
            s2.exists_emb, s1.exists_emb[rows], atol=TOL,
            err_msg=f"arch {arch} exists embeddings")
        bits = np.eye(3, dtype=np.float32)
        np.testing.assert_allclose(
            head_score_forall(s2, b, bits[:, xperm]),
            head_score_forall(s1, b, bits), atol=TOL,
            err_msg=f"arch {arch} scores")

        blob = to_bytes(b)
        back = from_bytes(blob)
        assert to_bytes(back) == blob, f"arch {arch} round trip"
        for k in b.tensors:
            np.testing.assert_array_equal(b.tensors[k], back.tensors[k])

    # determinism: same forward in this process and in a fresh interpreter
    script = (
        "import hashlib, numpy as np\n"
        "from twoqbf import parse_qdimacs\n"
        "from twoqbf.gnn import encode_graph, random_bundle, run_embedding, head_vote\n"
        "f = parse_qdimacs('p cnf 2 2\\na 1 0\\ne 2 0\\n1 -2 0\\n-1 2 0\\n')\n"
        "b = random_bundle(5, d=16, seed=123)\n"
        "st = run_embedding(encode_graph(f), b, 16)\n"
        "h = hashlib.sha256(st.forall_emb.tobytes() + st.exists_emb.tobytes()\n"
        "                   + repr(head_vote(st, b)).encode())\n"
        "print(h.hexdigest())\n"
    )
    def forward_hash():
        out = subprocess.run([sys.executable, "-c", script],
                             capture_output=True, text=True, check=True)
        return out.stdout.strip()

    f5 = parse_qdimacs("p cnf 2 2\na 1 0\ne 2 0\n1 -2 0\n-1 2 0\n")
    b5 = random_bundle(5, d=16, seed=123)
    states = [run_embedding(encode_graph(f5), b5, 16) for _ in range(2)]
    np.testing.assert_array_equal(states[0].forall_emb, states[1].forall_emb)
    np.testing.assert_array_equal(states[0].exists_emb, states[1].exists_emb)
    local = hashlib.sha256(
        states[0].forall_emb.tobytes() + states[0].exists_emb.tobytes()
        + repr(head_vote(states[0], b5)).encode()
    ).hexdigest()
    assert forward_hash() == local
    assert forward_hash() == local


def test_criterion_7_dataset_reproducibility(tmp_path):
    """Fixed seed regenerates byte-identical QDIMACS and label files."""
    spec_small = GenSpec(n_forall=4, n_exists=5, seed=99)
    counts = {"TrainU": 3, "TrainS": 2}
    a, b = tmp_path / "a", tmp_path / "b"
    emit_dataset(a, counts, spec_small, with_labels=True)
    emit_dataset(b, counts, spec_small, with_labels=True)
    files_a = sorted(p.name for p in a.iterdir())
    files_b = sorted(p.name for p in b.iterdir())
    assert files_a == files_b
    for name in files_a:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name

    # the CLI front end at full size, formulas only
    c, d = tmp_path / "c", tmp_path / "d"
    for out in (c, d):
        p = subprocess.run(
            [sys.executable, "-m", "twoqbf.cli", "gen", "--out", str(out),
             "--seed", "41", "--unsat", "1", "--sat", "1"],
            capture_output=True, text=True)
        assert p.returncode == 0, p.stderr
    for name in sorted(p.name for p in c.iterdir()):
        assert (c / name).read_bytes() == (d / name).read_bytes(), name
