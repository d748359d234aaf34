import random

import pytest
from hypothesis import given, settings

from twoqbf.formula import Clause, CnfFormula
from twoqbf.sat import (
    ClauseGroup,
    count_models,
    enumerate_models,
    extract_core,
    solve,
)

from formula_gen import cnf_formulas, random_cnf
from oracles import check_model, naive_group_mus, truth_table_count, truth_table_sat


def cnf(num_vars, *clauses) -> CnfFormula:
    return CnfFormula(num_vars, tuple(Clause(tuple(c)) for c in clauses))


class TestSolve:
    def test_empty_formula_is_sat(self):
        res = solve(cnf(3))
        assert res.satisfiable and res.model == {1: False, 2: False, 3: False}

    def test_unit_conflict_is_unsat(self):
        res = solve(cnf(1, (1,), (-1,)))
        assert not res.satisfiable and res.model is None

    def test_model_is_total(self):
        res = solve(cnf(5, (1, 2), (-4,)))
        assert res.satisfiable
        assert set(res.model) == {1, 2, 3, 4, 5}
        assert check_model(cnf(5, (1, 2), (-4,)), res.model)

    def test_deterministic_for_fixed_seed(self):
        f = cnf(6, (1, 2, 3), (-1, 4), (2, -5), (-3, -6), (5, 6))
        assert solve(f).model == solve(f).model
        assert solve(f, seed=7).model == solve(f, seed=7).model

    def test_default_model_prefers_false(self):
        # with no constraints forcing otherwise, decisions pick the low branch
        res = solve(cnf(2, (1, 2)))
        assert res.model == {1: False, 2: True} or res.model == {1: True, 2: False}

    @given(cnf_formulas(max_vars=8, max_clauses=14))
    @settings(max_examples=200, deadline=None)
    def test_agrees_with_truth_table(self, f):
        res = solve(f)
        assert res.satisfiable == truth_table_sat(f)
        if res.satisfiable:
            assert check_model(f, res.model)

    def test_agrees_with_truth_table_bulk(self):
        rng = random.Random(987654)
        disagreements = 0
        for i in range(1100):
            nv = rng.randint(1, 16)
            f = random_cnf(rng, nv, rng.randint(0, 3 * nv), max_width=4)
            res = solve(f, seed=rng.choice([0, 0, i]))
            if res.satisfiable != truth_table_sat(f):
                disagreements += 1
            if res.satisfiable:
                assert check_model(f, res.model)
        assert disagreements == 0


class TestEnumerate:
    def test_three_projected_models(self):
        models = enumerate_models(cnf(2, (1, 2)), 10, {1, 2})
        assert len(models) == 3
        assert len({tuple(sorted(m.items())) for m in models}) == 3
        for m in models:
            assert m[1] or m[2]

    def test_limit_respected(self):
        assert len(enumerate_models(cnf(2, (1, 2)), 2, {1, 2})) == 2
        assert enumerate_models(cnf(2, (1, 2)), 0, {1, 2}) == []

    def test_projection_collapses_extensions(self):
        # variable 3 is free, but blocking ranges over {1,2} only
        models = enumerate_models(cnf(3, (1, 2)), 10, {1, 2})
        assert len(models) == 3
        assert all(set(m) == {1, 2} for m in models)

    def test_unsat_enumerates_nothing(self):
        assert enumerate_models(cnf(1, (1,), (-1,)), 5, {1}) == []

    def test_deterministic_order(self):
        f = cnf(4, (1, 2), (3, 4))
        assert enumerate_models(f, 8, {1, 2, 3, 4}) == enumerate_models(f, 8, {1, 2, 3, 4})

    @given(cnf_formulas(max_vars=6, max_clauses=10))
    @settings(max_examples=100, deadline=None)
    def test_counts_match_truth_table(self, f):
        proj = set(range(1, f.num_vars + 1))
        models = enumerate_models(f, 1 << f.num_vars, proj)
        assert len(models) == truth_table_count(f, proj)
        assert len({tuple(sorted(m.items())) for m in models}) == len(models)
        for m in models:
            assert check_model(f, {**{v: False for v in proj}, **m}) or truth_table_sat(
                CnfFormula(
                    f.num_vars,
                    f.clauses + tuple(Clause(((v if b else -v),)) for v, b in m.items()),
                )
            )


class TestCountModels:
    def test_two_models(self):
        assert count_models(cnf(2, (1, 2), (-1, 2)), {1, 2}) == 2

    def test_empty_formula_counts_all(self):
        assert count_models(cnf(3), {1, 2, 3}) == 8

    def test_projection_guard(self):
        with pytest.raises(ValueError, match="guard"):
            count_models(cnf(27), set(range(1, 28)))

    def test_projected_with_leftover_variables(self):
        # clauses touch var 3 which is outside the projection
        f = cnf(3, (1, 3), (2, -3))
        assert count_models(f, {1, 2}) == truth_table_count(f, {1, 2})

    @given(cnf_formulas(max_vars=7, max_clauses=12))
    @settings(max_examples=120, deadline=None)
    def test_agrees_with_truth_table(self, f):
        proj = set(range(1, f.num_vars + 1))
        assert count_models(f, proj) == truth_table_count(f, proj)

    def test_agrees_with_truth_table_bulk_projected(self):
        rng = random.Random(555)
        for _ in range(60):
            nv = rng.randint(2, 7)
            f = random_cnf(rng, nv, rng.randint(1, 10), max_width=3)
            proj = set(rng.sample(range(1, nv + 1), rng.randint(1, nv)))
            assert count_models(f, proj) == truth_table_count(f, proj)


def group(gid, *clauses) -> ClauseGroup:
    return ClauseGroup(gid, tuple(Clause(tuple(c)) for c in clauses))


class TestExtractCore:
    def test_keeps_lowest_id_pair(self):
        core = extract_core([group(1, (1,)), group(2, (-1,)), group(3, (1, 2))])
        assert core == {1, 2}

    def test_two_disjoint_cores_prefer_low_ids(self):
        core = extract_core(
            [group(1, (1,)), group(2, (-1,)), group(3, (2,)), group(4, (-2,))]
        )
        assert core == {1, 2}

    def test_background_participates_but_never_returned(self):
        core = extract_core([group(5, (1,))], background=cnf(1, (-1,)))
        assert core == {5}

    def test_error_when_satisfiable(self):
        with pytest.raises(ValueError, match="satisfiable"):
            extract_core([group(1, (1,)), group(2, (1, 2))])

    def test_error_on_duplicate_ids(self):
        with pytest.raises(ValueError, match="duplicate"):
            extract_core([group(1, (1,)), group(1, (-1,))])

    def test_matches_naive_sweep_bulk(self):
        rng = random.Random(3131)
        done = 0
        while done < 40:
            nv = rng.randint(2, 5)
            groups = {}
            for gid in range(1, rng.randint(2, 7)):
                cls = []
                for _ in range(rng.randint(1, 2)):
                    w = rng.randint(1, min(3, nv))
                    vs = rng.sample(range(1, nv + 1), w)
                    cls.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
                groups[gid] = cls
            flat = [c for cs in groups.values() for c in cs]
            used = sorted({abs(l) for c in flat for l in c})
            if not flat or truth_table_sat(
                CnfFormula(nv, tuple(Clause(c) for c in flat))
            ):
                continue
            done += 1
            expected = naive_group_mus(groups)
            got = extract_core(
                [group(g, *cs) for g, cs in sorted(groups.items())]
            )
            assert got == expected, (groups, got, expected)
            # deletion-minimality: dropping any core member restores SAT
            for g in got:
                rest = [c for h, cs in groups.items() if h in got and h != g for c in cs]
                assert truth_table_sat(CnfFormula(nv, tuple(Clause(c) for c in rest)))
