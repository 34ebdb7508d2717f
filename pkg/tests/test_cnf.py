from __future__ import annotations

import itertools
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from puzznic import cnf
from puzznic.cnf import FALSE, TRUE, ClauseBuilder, VarMap, neg, parse_solver_output
from puzznic.satsolver import CdclSolver, SolverBudgetExceeded, _luby, solve_clauses


def brute_sat(clauses, n) -> bool:
    for bits in itertools.product([False, True], repeat=n):
        if all(
            any((bits[abs(l) - 1] if l > 0 else not bits[abs(l) - 1]) for l in cl)
            for cl in clauses
        ):
            return True
    return False


class TestCdclSolver:
    def test_trivial(self):
        assert solve_clauses([[1]], 1) == [False, True]
        assert solve_clauses([[1], [-1]], 1) is None
        assert solve_clauses([[]], 1) is None

    def test_luby_sequence(self):
        assert [_luby(i) for i in range(1, 16)] == [
            1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8,
        ]

    def test_assumptions_reusable(self):
        s = CdclSolver()
        s.ensure_vars(3)
        s.add_clause([1, 2])
        s.add_clause([-1, 3])
        assert s.solve(assumptions=(-2,)) is not None
        assert s.solve(assumptions=(-2, -3)) is None
        model = s.solve()
        assert model is not None

    def test_deadline(self):
        # pigeonhole instances are exponentially hard for resolution
        clauses = []
        p, h = 10, 9
        var = lambda i, j: i * h + j + 1  # noqa: E731
        for i in range(p):
            clauses.append([var(i, j) for j in range(h)])
        for j in range(h):
            for i1 in range(p):
                for i2 in range(i1 + 1, p):
                    clauses.append([-var(i1, j), -var(i2, j)])
        with pytest.raises(SolverBudgetExceeded):
            solve_clauses(clauses, p * h, deadline=time.monotonic() + 0.3)

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_agrees_with_truth_table(self, data):
        n = data.draw(st.integers(min_value=1, max_value=6))
        clauses = data.draw(
            st.lists(
                st.lists(
                    st.integers(min_value=1, max_value=n).flatmap(
                        lambda v: st.sampled_from([v, -v])
                    ),
                    min_size=1,
                    max_size=3,
                ),
                min_size=1,
                max_size=25,
            )
        )
        model = solve_clauses(clauses, n)
        assert (model is not None) == brute_sat(clauses, n)
        if model is not None:
            for cl in clauses:
                assert any((model[abs(l)] if l > 0 else not model[abs(l)]) for l in cl)


class TestClauseBuilder:
    def test_constant_folding(self):
        b = ClauseBuilder()
        b.clause(1, TRUE, -2)  # satisfied clauses vanish
        b.clause(1, FALSE, -2)  # false literals drop out
        assert b.clauses == [(1, -2)]

    def test_neg(self):
        assert neg(TRUE) is FALSE
        assert neg(FALSE) is TRUE
        assert neg(5) == -5

    def test_at_most_one(self):
        b = ClauseBuilder()
        b.at_most_one([1, 2, 3])
        assert len(b.clauses) == 3
        b2 = ClauseBuilder()
        b2.at_most_one([1, TRUE, 2])  # a true member forces the others off
        assert sorted(b2.clauses) == [(-2,), (-1,)]

    def test_totalizer_counts(self):
        # force exactly k of 5 inputs true; the k-th output must be
        # derivable and capping below k must be unsatisfiable
        for k in range(0, 6):
            vm = VarMap([("cell", 0, 2, 2, v) for v in range(5)])
            inputs = [vm.var("cell", 0, 2, 2, v) for v in range(5)]
            b = ClauseBuilder()
            outs = b.totalizer(vm, list(inputs), "cnt")
            clauses = list(b.clauses)
            for i, lit in enumerate(inputs):
                clauses.append([lit] if i < k else [-lit])
            model = solve_clauses(clauses, len(vm))
            assert model is not None
            assert all(model[outs[j]] for j in range(k))  # at least k implied
            if k > 0:
                assert (
                    solve_clauses(clauses + [[-outs[k - 1]]], len(vm)) is None
                )
            if k < 5:
                assert solve_clauses(clauses + [[-outs[k]]], len(vm)) is not None


class TestVarMap:
    def test_lexicographic_numbering(self):
        vm = VarMap([("movesel", 1, 2, 2, 1), ("cell", 0, 2, 2, 0), ("matching", 1)])
        assert vm.meaning(1) == ("cell", 0, 2, 2, 0)
        assert vm.meaning(2) == ("matching", 1)
        assert vm.meaning(3) == ("movesel", 1, 2, 2, 1)

    def test_aux_appended_after(self):
        vm = VarMap([("matching", 1)])
        a = vm.aux("extra")
        assert a == 2
        assert vm.describe(a) is None

    def test_describe(self):
        vm = VarMap(
            [
                ("cell", 0, 2, 3, -1),
                ("cell", 0, 2, 3, 2),
                ("movesel", 1, 2, 2, -1),
                ("mapsto", 0, 2, 2, 0),
            ]
        )
        descs = {vm.describe(v) for v, _ in vm.iter_meanings()}
        assert "cell[0,2,3]=wall" in descs
        assert "cell[0,2,3]=p2" in descs
        assert "move[1,2,2,L]" in descs
        assert "mapsto[0,2,2]=0" in descs


class TestSolverOutputParsing:
    def test_parse_sat(self):
        status, lits = parse_solver_output("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n")
        assert status == "SATISFIABLE"
        assert lits == [1, -2, 3]

    def test_parse_unsat(self):
        status, lits = parse_solver_output("s UNSATISFIABLE\n")
        assert status == "UNSATISFIABLE"
        assert lits == []
