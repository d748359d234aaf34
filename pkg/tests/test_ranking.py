"""Score functions and the rankers built on them."""

import itertools

import numpy as np
import pytest

from oracles import (
    ref_candidates_maxsat,
    ref_counterexamples_core,
    ref_counterexamples_maxsat,
    ref_hardness_score,
)
from twoqbf import parse_qdimacs, solve_basic, solve_ranked
from twoqbf.cegar import CANDIDATE, COUNTEREXAMPLE
from twoqbf.formula import Assignment, Block
from twoqbf.gnn import SCORE_FORALL, encode_graph, head_score_forall, random_bundle, run_embedding
from twoqbf.ranking import (
    GnnRanker,
    HardnessRanker,
    MaxSatRanker,
    gnn_ranker,
    hardness_ranker,
    maxsat_ranker,
    score_candidates_maxsat,
    score_counterexamples_core,
    score_counterexamples_maxsat,
    score_hardness,
)


class TestScoreFunctions:
    def test_hardness_steps(self):
        expect = {0: 10.0, 1: 9.0, 2: 8.0, 3: 7.0, 4: 6.0, 5: 6.0, 8: 5.0,
                  12: 4.0, 16: 3.0, 21: 2.0, 22: 1.0, 1000: 1.0}
        for n, s in expect.items():
            assert score_hardness(n) == s

    def test_candidates_maxsat_examples(self):
        assert score_candidates_maxsat([5, 7, 20]) == [10, 8, 1]
        assert score_candidates_maxsat([4, 4, 4]) == [10, 10, 10]
        assert score_candidates_maxsat([0, 9]) == [10, 1]

    def test_counterexamples_core_examples(self):
        assert score_counterexamples_core({1}, [10, 12, 12]) == [6, 10, 8]
        assert score_counterexamples_core({0, 1, 2}, [10, 12, 12]) == [10, 10, 10]
        assert score_counterexamples_core({0}, [3, 11]) == [10, 8]
        assert score_counterexamples_core(set(), [5, 5]) == [8, 8]

    def test_counterexamples_maxsat_examples(self):
        assert score_counterexamples_maxsat([10, 12]) == [8, 10]
        assert score_counterexamples_maxsat([7, 7]) == [10, 10]
        assert score_counterexamples_maxsat([1, 12]) == [1, 10]

    @pytest.mark.parametrize("fn", [score_candidates_maxsat,
                                    score_counterexamples_maxsat])
    def test_empty_list_rejected(self, fn):
        with pytest.raises(ValueError):
            fn([])

    def test_core_empty_list_rejected(self):
        with pytest.raises(ValueError):
            score_counterexamples_core(set(), [])

    def test_core_index_out_of_range(self):
        with pytest.raises(ValueError, match="range"):
            score_counterexamples_core({3}, [1, 2])
        with pytest.raises(ValueError, match="range"):
            score_counterexamples_core({-1}, [1, 2])

    def test_hardness_matches_reference_exhaustively(self):
        for n in range(0, 65):
            assert score_hardness(n) == ref_hardness_score(n)

    def test_list_scores_match_reference_short_lists(self):
        values = range(17)
        for length in (1, 2):
            for lst in itertools.product(values, repeat=length):
                lst = list(lst)
                assert score_candidates_maxsat(lst) == ref_candidates_maxsat(lst)
                assert score_counterexamples_maxsat(lst) == (
                    ref_counterexamples_maxsat(lst))
                for r in range(length + 1):
                    for core in itertools.combinations(range(length), r):
                        assert score_counterexamples_core(set(core), lst) == (
                            ref_counterexamples_core(set(core), lst))

    def test_list_scores_match_reference_sampled(self):
        rng = np.random.default_rng(5)
        for _ in range(2000):
            length = int(rng.integers(3, 5))
            lst = [int(v) for v in rng.integers(0, 17, size=length)]
            core = {int(i) for i in np.flatnonzero(rng.integers(0, 2, length))}
            assert score_candidates_maxsat(lst) == ref_candidates_maxsat(lst)
            assert score_counterexamples_maxsat(lst) == (
                ref_counterexamples_maxsat(lst))
            assert score_counterexamples_core(core, lst) == (
                ref_counterexamples_core(core, lst))


def formula_two_sided():
    return parse_qdimacs(
        "p cnf 5 4\na 1 2 0\ne 3 4 5 0\n"
        "1 3 0\n1 -3 4 0\n-2 -4 0\n2 -5 0\n"
    )


def cand(formula, bits):
    return Assignment.from_bits(Block.FORALL, formula.universals, bits)


def counter(formula, bits):
    return Assignment.from_bits(Block.EXISTS, formula.existentials, bits)


class TestMaxSatRanker:
    def test_candidate_prefers_fewest_satisfied(self):
        f = formula_two_sided()
        r = maxsat_ranker(CANDIDATE)
        batch = [cand(f, "11"), cand(f, "00"), cand(f, "10")]
        # x=00 satisfies the most (-2 true in two clauses); x=11 satisfies 1,2
        scores = r.score_batch(f, batch, CANDIDATE)
        counts = [2, 2, 2]
        del counts
        best = max(range(len(scores)), key=lambda i: (scores[i], -i))
        fewest = min(
            range(len(batch)),
            key=lambda i: sum(
                1 for c in f.clauses if any(batch[i].satisfies(l) for l in c)
            ),
        )
        assert best == fewest

    def test_counterexample_prefers_most_satisfied(self):
        f = formula_two_sided()
        r = maxsat_ranker(COUNTEREXAMPLE)
        batch = [counter(f, "000"), counter(f, "110"), counter(f, "011")]
        scores = r.score_batch(f, batch, COUNTEREXAMPLE)
        most = max(
            range(len(batch)),
            key=lambda i: sum(
                1 for c in f.clauses if any(batch[i].satisfies(l) for l in c)
            ),
        )
        assert scores.index(max(scores)) == most

    def test_singleton_batch(self):
        f = formula_two_sided()
        scores = maxsat_ranker(CANDIDATE).score_batch(f, [cand(f, "01")], CANDIDATE)
        assert scores == [10.0]

    def test_side_mismatch_rejected(self):
        f = formula_two_sided()
        with pytest.raises(ValueError, match="side"):
            maxsat_ranker(CANDIDATE).score_batch(f, [], COUNTEREXAMPLE)
        with pytest.raises(ValueError):
            MaxSatRanker("noside")


class TestHardnessRanker:
    def test_unsat_reduction_scores_ten(self):
        f = parse_qdimacs("p cnf 3 2\na 1 0\ne 2 3 0\n1 0\n2 3 0\n")
        r = hardness_ranker()
        scores = r.score_batch(f, [cand(f, "0"), cand(f, "1")], CANDIDATE)
        # x=0 empties the first clause: 0 models; x=1 leaves (y2 or y3): 3 models
        assert scores == [10.0, 7.0]

    def test_model_count_steps(self):
        f = parse_qdimacs(
            "p cnf 6 5\na 1 0\ne 2 3 4 5 6 0\n"
            "1 2 0\n1 3 0\n1 4 0\n1 5 0\n-1 2 3 4 5 6 0\n"
        )
        r = hardness_ranker()
        scores = r.score_batch(f, [cand(f, "1"), cand(f, "0")], CANDIDATE)
        # x=1: one wide clause, 31 models; x=0: four units, y6 free, 2 models
        assert scores == [1.0, 8.0]

    def test_counterexample_side_rejected(self):
        f = formula_two_sided()
        with pytest.raises(ValueError, match="side"):
            hardness_ranker().score_batch(f, [], COUNTEREXAMPLE)


class TestGnnRanker:
    def test_matches_direct_head_computation(self):
        f = formula_two_sided()
        b = random_bundle(5, d=16, seed=3)
        r = gnn_ranker(b, CANDIDATE, iterations=4)
        batch = [cand(f, "00"), cand(f, "10"), cand(f, "11")]
        got = r.score_batch(f, batch, CANDIDATE)
        st = run_embedding(encode_graph(f), b, 4)
        bits = np.array([[0, 0], [1, 0], [1, 1]], dtype=np.float32)
        np.testing.assert_allclose(got, head_score_forall(st, b, bits), rtol=1e-6)

    def test_batch_permutation_permutes_scores(self):
        f = formula_two_sided()
        r = gnn_ranker(random_bundle(3, d=8, seed=1), COUNTEREXAMPLE)
        batch = [counter(f, "000"), counter(f, "101"), counter(f, "110")]
        s = r.score_batch(f, batch, COUNTEREXAMPLE)
        s_rev = r.score_batch(f, batch[::-1], COUNTEREXAMPLE)
        np.testing.assert_allclose(s_rev, s[::-1], rtol=1e-6, atol=1e-7)

    def test_missing_head_rejected_at_construction(self):
        b = random_bundle(5, d=8, heads=("vote",))
        with pytest.raises(ValueError, match="head"):
            gnn_ranker(b, CANDIDATE)

    def test_embedding_cached_per_formula(self, monkeypatch):
        import twoqbf.ranking as ranking

        calls = []
        real = ranking.run_embedding

        def counting(enc, bundle, iterations):
            calls.append(1)
            return real(enc, bundle, iterations)

        monkeypatch.setattr(ranking, "run_embedding", counting)
        f = formula_two_sided()
        r = gnn_ranker(random_bundle(5, d=8, seed=2), CANDIDATE, iterations=2)
        for _ in range(3):
            r.score_batch(f, [cand(f, "00")], CANDIDATE)
        assert len(calls) == 1
        g = formula_two_sided()
        r.score_batch(g, [cand(g, "00")], CANDIDATE)
        assert len(calls) == 2

    def test_zero_output_weights_give_zero_scores(self):
        b = random_bundle(5, d=8, seed=4)
        t = dict(b.tensors)
        t[f"{SCORE_FORALL}.out"] = np.zeros_like(t[f"{SCORE_FORALL}.out"])
        from twoqbf.gnn import WeightBundle

        b0 = WeightBundle(5, 8, t)
        f = formula_two_sided()
        r = gnn_ranker(b0, CANDIDATE)
        s = r.score_batch(f, [cand(f, "00"), cand(f, "11")], CANDIDATE)
        assert s == [0.0, 0.0]


class TestRankersInsideSolver:
    def test_all_rankers_preserve_status(self):
        texts = [
            "p cnf 4 3\na 1 2 0\ne 3 4 0\n1 3 0\n-1 4 0\n-3 -4 0\n",
            "p cnf 4 4\na 1 2 0\ne 3 4 0\n1 3 0\n-1 3 0\n2 -3 4 0\n-2 -3 -4 0\n",
            "p cnf 3 2\na 1 0\ne 2 3 0\n1 2 0\n-1 -2 3 0\n",
        ]
        bundle = random_bundle(5, d=8, seed=9)
        for text in texts:
            f = parse_qdimacs(text)
            base = solve_basic(f)
            configs = [
                (maxsat_ranker(CANDIDATE), None),
                (None, maxsat_ranker(COUNTEREXAMPLE)),
                (maxsat_ranker(CANDIDATE), maxsat_ranker(COUNTEREXAMPLE)),
                (hardness_ranker(), None),
                (gnn_ranker(bundle, CANDIDATE, 2),
                 gnn_ranker(bundle, COUNTEREXAMPLE, 2)),
            ]
            for c_rank, x_rank in configs:
                got = solve_ranked(f, c_rank, x_rank)
                assert got.status == base.status
                if got.status == "unsat":
                    from twoqbf import verify_witness

                    assert verify_witness(f, got.witness)
