import itertools

import pytest

from taylor_edges.algebra import FiniteAlgebra, OperationTable, induced_subalgebra
from taylor_edges.edges import compute_edges
from taylor_edges.errors import ArityMismatch, PreconditionViolated
from taylor_edges.terms import (
    TermOperation,
    Var,
    condition_checks,
    cyclic_operations,
    evaluate_tree_on,
    evaluate_tree_table,
    free_algebra,
    full_composition,
    local_structure,
    majority_table,
    projection_table,
    taylor_report,
    universal_meet,
)

from helpers import terms_by_depth


def projections_only_algebra():
    """Two elements, single basic operation = first projection (not Taylor)."""
    table = tuple(x for x, _, _ in itertools.product(range(2), repeat=3))
    return FiniteAlgebra("proj2", 2, (OperationTable("f", 3, table),))


class TestFreeAlgebra:
    def test_z2_binary(self, z2):
        free = free_algebra(z2, 2)
        assert free.complete
        assert {t.table for t in free.elements} == {
            projection_table(2, 2, 0), projection_table(2, 2, 1)
        }

    def test_semilattice_binary(self, semilattice):
        free = free_algebra(semilattice, 2)
        meet = tuple(min(x, y) for x, y in itertools.product(range(2), repeat=2))
        assert {t.table for t in free.elements} == {
            projection_table(2, 2, 0), projection_table(2, 2, 1), meet
        }

    def test_semilattice_ternary_is_meets_of_subsets(self, semilattice):
        free = free_algebra(semilattice, 3)
        assert len(free.elements) == 7  # meets of the 7 nonempty variable subsets

    def test_unary_free_algebra_is_identity(self, full_catalog):
        for alg in full_catalog:
            free = free_algebra(alg, 1)
            assert len(free.elements) == 1
            assert free.elements[0].table == projection_table(alg.size, 1, 0)

    def test_idempotent_elements(self, full_catalog):
        for alg in full_catalog:
            for k in (2, 3):
                for t in free_algebra(alg, k).elements:
                    assert t.is_idempotent()

    def test_matches_syntactic_enumeration(self, full_catalog):
        for alg in full_catalog:
            free = free_algebra(alg, 2)
            assert {t.table for t in free.elements} == terms_by_depth(alg, 2, depth=6)

    def test_elements_sorted_by_table(self, alg_a1):
        tables = [t.table for t in free_algebra(alg_a1, 3).elements]
        assert tables == sorted(tables)

    def test_provenance_trees_reproduce_tables(self, alg_a1):
        free = free_algebra(alg_a1, 3)
        for t in free.elements:
            assert evaluate_tree_table(t.tree, alg_a1, 3) == t.table


class TestCyclicOperations:
    def test_semilattice_ternary(self, semilattice):
        ops, complete = cyclic_operations(semilattice, 3)
        assert complete
        triple_meet = tuple(
            min(args) for args in itertools.product(range(2), repeat=3)
        )
        assert [t.table for t in ops] == [triple_meet]

    def test_z2_ternary(self, z2):
        ops, complete = cyclic_operations(z2, 3)
        assert complete
        assert [t.table for t in ops] == [
            tuple(sum(a) % 2 for a in itertools.product(range(2), repeat=3))
        ]

    def test_majority_ternary(self, majority):
        ops, complete = cyclic_operations(majority, 3)
        assert complete
        assert [t.table for t in ops] == [majority_table(2)]

    def test_cyclic_identities_hold_verbatim(self, full_catalog):
        for alg in full_catalog:
            ops, _ = cyclic_operations(alg, 3)
            for c in ops:
                for args in itertools.product(range(alg.size), repeat=3):
                    rotated = args[1:] + args[:1]
                    assert c.apply(*args) == c.apply(*rotated)
                for a in range(alg.size):
                    assert c.apply(a, a, a) == a


class TestTaylorReport:
    def test_a1(self, alg_a1):
        rep = taylor_report(alg_a1)
        assert rep.has_taylor is True
        assert rep.witness_arity == 3
        assert rep.witness.table == alg_a1.ops[0].table
        assert rep.minimal_taylor_bounded is True

    def test_catalog_members_all_taylor_and_minimal(self, full_catalog):
        for alg in full_catalog:
            rep = taylor_report(alg)
            assert rep.has_taylor is True
            assert rep.minimal_taylor_bounded is True

    def test_projections_only_definitive_no(self):
        rep = taylor_report(projections_only_algebra())
        assert rep.has_taylor is False
        assert rep.arities_searched == (2, 3)


class TestTermApplication:
    def test_tree_evaluation(self, semilattice):
        meet = ("meet", Var(0), Var(1))
        assert evaluate_tree_on(meet, semilattice, (1, 0)) == 0
        assert evaluate_tree_table(meet, semilattice, 2) == (0, 0, 0, 1)

    def test_identity_tree(self, alg_a1):
        for args in itertools.product(range(4), repeat=2):
            assert evaluate_tree_on(Var(0), alg_a1, args) == args[0]

    def test_arity_mismatch(self, semilattice):
        with pytest.raises(ArityMismatch):
            evaluate_tree_table(("meet", Var(0), Var(3)), semilattice, 2)

    def test_meet_full_composition(self, semilattice):
        meet = free_algebra(semilattice, 2).find((0, 0, 0, 1))
        four = full_composition(meet, meet)
        assert four.arity == 4
        for args in itertools.product(range(2), repeat=4):
            assert four.apply(*args) == min(args)

    def test_minority_full_composition_is_nine_ary_sum(self, z2):
        c = cyclic_operations(z2, 3)[0][0]
        nine = full_composition(c, c)
        assert nine.arity == 9
        for args in itertools.product(range(2), repeat=9):
            assert nine.apply(*args) == sum(args) % 2

    def test_z2_base_axiom_one_computation(self, z2):
        # over Z2 the coefficient is already idempotent: c(a,..,a,b) = b
        c = cyclic_operations(z2, 3)[0][0]
        for a in range(2):
            for b in range(2):
                assert c.apply(a, a, b) == b


class TestUniversalMeet:
    def test_semilattice_gives_meet(self, semilattice):
        um = universal_meet(semilattice)
        assert um.f.table == (0, 0, 0, 1)
        assert um.f.apply(1, 0) == 0 and um.f.apply(0, 1) == 0

    def test_z2_gives_first_projection(self, z2):
        um = universal_meet(z2)
        assert um.f.table == projection_table(2, 2, 0)

    def test_idempotent_on_catalog(self, full_catalog):
        for alg in full_catalog:
            f = universal_meet(alg).f
            for a in range(alg.size):
                assert f.apply(a, a) == a

    def test_defining_identities_tablewise(self, full_catalog):
        for alg in full_catalog:
            f = universal_meet(alg).f
            for x in range(alg.size):
                for y in range(alg.size):
                    v = f.apply(x, y)
                    assert f.apply(x, v) == v
                    assert f.apply(v, x) == v

    def test_s_edge_absorption(self, full_catalog):
        for alg in full_catalog:
            f = universal_meet(alg).f
            graph = compute_edges(alg)
            for a, b in graph.proper("s"):
                assert f.apply(a, b) == b
                assert f.apply(b, a) == b

    def test_value_is_fixed_or_s_edge(self, full_catalog):
        for alg in full_catalog:
            f = universal_meet(alg).f
            s = compute_edges(alg).proper("s")
            for a in range(alg.size):
                for b in range(alg.size):
                    v = f.apply(a, b)
                    assert v == a or (a, v) in s

    def test_tree_reevaluates_to_table(self, alg_a1):
        um = universal_meet(alg_a1)
        assert evaluate_tree_table(um.f.tree, alg_a1, 2) == um.f.table


class TestConditionChecks:
    def test_majority_on_majority_algebra(self, majority):
        maj = TermOperation(3, majority_table(2))
        rep = condition_checks(majority, maj)
        assert rep.majority_condition

    def test_minority_on_z2(self, z2):
        mino = TermOperation(3, z2.ops[0].table)
        rep = condition_checks(z2, mino)
        assert rep.minority_condition

    def test_projection_fails_minority_condition_on_z2(self, z2):
        proj = TermOperation(3, projection_table(2, 3, 0))
        rep = condition_checks(z2, proj)
        assert not rep.minority_condition
        assert rep.minority_witness[0] == "quotient"

    def test_rejects_wrong_arity(self, z2):
        with pytest.raises(PreconditionViolated):
            condition_checks(z2, TermOperation(2, (0, 0, 1, 1)))


class TestLocalStructure:
    def test_majority_algebra_has_majority_term(self, majority):
        ls = local_structure(majority, frozenset({0, 1}))
        assert ls.has_majority_term is True
        assert ls.semilattice_pairs == ()

    def test_a1_zero_pairs(self, alg_a1):
        for x in (1, 2, 3):
            ls = local_structure(alg_a1, frozenset({0, x}))
            assert ls.semilattice_pairs == ((x, 0),)
            assert ls.has_majority_term is False

    def test_z2_has_nothing(self, z2):
        ls = local_structure(z2, frozenset({0, 1}))
        assert ls.has_majority_term is False
        assert ls.semilattice_pairs == ()
