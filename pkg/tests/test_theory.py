"""Empirical validation of the structural theory beyond the acceptance gate.

These checks pin down the points the build intentionally leaves configurable:
whether the edge sets depend on the cyclic arity used, the two-generated link
dichotomy, and the s-path reformulation of binary absorption.
"""

import itertools

import numpy as np
import pytest

from taylor_edges.absorption import is_2_absorbing
from taylor_edges.algebra import (
    BinaryRelation,
    generate_subproduct,
    link_structure,
    sg_closure,
)
from taylor_edges.edges import compute_edges, is_x_closed
from taylor_edges.terms import free_algebra


class TestArityRobustness:
    def test_edge_sets_invariant_across_cyclic_arities(self, full_catalog):
        # the edge definition quantifies over all cyclic arities; the default
        # uses the least prime above |Sg(a,b)|.  Comparing arities 3, 5, and
        # their union on the whole catalog shows no discrepancy.
        for alg in full_catalog:
            base = compute_edges(alg, arities=(3,))
            for arities in ((5,), (3, 5)):
                other = compute_edges(alg, arities=arities)
                assert other.unknown == frozenset()
                assert other.as_edges == base.as_edges, (alg.name, arities)
                assert other.sm_edges == base.sm_edges, (alg.name, arities)


class TestConnectedLinked:
    def test_two_generated_dichotomy(self, full_catalog):
        # when the left side is generated by two elements, the link tolerance
        # is full exactly when some right element sees the whole left side
        rng = np.random.default_rng(31)
        for alg in full_catalog:
            n = alg.size
            if n < 2:
                continue
            for a1, a2 in itertools.combinations(range(n), 2):
                gen = sg_closure(alg, {a1, a2})
                if len(gen) != n:
                    continue
                for _ in range(8):
                    extra = {(int(rng.integers(n)), int(rng.integers(n)))}
                    seeds = sorted({(a1, a2), (a2, a1)} | extra | {(a, a) for a in range(n)})
                    rows = generate_subproduct([alg, alg], seeds)
                    rel = BinaryRelation.from_pairs(n, n, rows)
                    ls = link_structure(rel, 1)
                    full_tol = len(ls.tolerance.pairs) == n * n
                    assert full_tol == ls.has_full_fiber


class TestAbsorptionPathCriterion:
    def _path_condition(self, alg, graph, subset):
        """s-closed, and from every outside point an s-path into the subset
        that stays inside the subalgebra generated with a subset point."""
        if not is_x_closed(graph, "s", subset):
            return False
        s_edges = graph.proper("s")
        outside = [a for a in range(alg.size) if a not in subset]
        for a in outside:
            for b in sorted(subset):
                context = sg_closure(alg, {a, b})
                seen, work = {a}, [a]
                hit = a in subset
                while work:
                    v = work.pop()
                    if v in subset:
                        hit = True
                        break
                    for x, y in s_edges:
                        if x == v and y in context and y not in seen:
                            seen.add(y)
                            work.append(y)
                if not hit:
                    return False
        return True

    def test_path_condition_equals_binary_absorption(self, full_catalog):
        for alg in full_catalog:
            graph = compute_edges(alg)
            for bits in range(1, (1 << alg.size) - 1):
                subset = frozenset(i for i in range(alg.size) if bits >> i & 1)
                expected = is_2_absorbing(alg, subset, graph=graph).absorbing
                assert self._path_condition(alg, graph, subset) == expected


def z2_with_absorbing_top():
    """Three elements: minority on {0,1}, 2 absorbing.  Subdirectly
    irreducible with s-edges, but the monolith is not centralized."""
    def f(x, y, z):
        if 2 in (x, y, z):
            return 2
        return (x + y + z) % 2

    table = tuple(f(*a) for a in itertools.product(range(3), repeat=3))
    from taylor_edges.algebra import FiniteAlgebra, OperationTable

    return FiniteAlgebra("z2top", 3, (OperationTable("f", 3, table),))


class TestBeyondCatalog:
    def test_z2top_structure(self):
        from taylor_edges.algebra import Partition
        from taylor_edges.congruences import centralizer_condition, congruences

        alg = z2_with_absorbing_top()
        rep = congruences(alg)
        assert rep.is_subdirectly_irreducible
        assert rep.monolith == Partition((0, 0, 1))
        g = compute_edges(alg)
        assert g.proper("s") == {(0, 2), (1, 2)}
        # SI with s-edges, yet NOT a large centralizer domain: exactly the
        # combination the retraction theorem needs never materializes here
        assert not centralizer_condition(alg, Partition.one(3), rep.monolith)

    def test_z2top_satisfies_axioms_and_theorems(self):
        from taylor_edges.axioms import verify_edge_axioms, verify_edge_theorems

        alg = z2_with_absorbing_top()
        assert verify_edge_axioms([alg]).passed
        assert verify_edge_theorems(alg).passed

    def test_z2top_sedge_injection_rejects_centralizer(self):
        from taylor_edges.algebra import Partition
        from taylor_edges.csp import sedge_injection_check
        from taylor_edges.errors import HypothesisUnmet

        alg = z2_with_absorbing_top()
        with pytest.raises(HypothesisUnmet) as err:
            sedge_injection_check(
                alg, Partition((0, 0, 1)), Partition.one(3),
                frozenset({0, 1}), frozenset({2}),
            )
        assert err.value.hypothesis in ("centralizer", "s-edge")


class TestTaylorClosedSubsets:
    def test_taylor_closed_subsets_are_subuniverses(self, full_catalog):
        # on a minimal Taylor algebra, a subset closed under a single term
        # that makes it a Taylor algebra is already closed under everything
        from taylor_edges.algebra import FiniteAlgebra, OperationTable, is_subuniverse
        from taylor_edges.terms import taylor_report

        for alg in full_catalog:
            terms = list(free_algebra(alg, 2).elements) + list(free_algebra(alg, 3).elements)
            for bits in range(1, 1 << alg.size):
                subset = sorted(i for i in range(alg.size) if bits >> i & 1)
                if len(subset) < 2:
                    continue
                renum = {e: i for i, e in enumerate(subset)}
                for t in terms:
                    images = [
                        t.apply(*args)
                        for args in itertools.product(subset, repeat=t.arity)
                    ]
                    if any(v not in renum for v in images):
                        continue  # subset not closed under this term
                    reduct = FiniteAlgebra(
                        "reduct", len(subset),
                        (OperationTable("t", t.arity, tuple(renum[v] for v in images)),),
                    )
                    if taylor_report(reduct).has_taylor:
                        assert is_subuniverse(alg, subset), (alg.name, subset)


class TestCloneGrowth:
    def test_two_element_arity_five_clones(self, z2, semilattice, majority):
        # fixed reference sizes: parity terms with odd support, nonempty meets,
        # and monotone self-dual functions
        assert len(free_algebra(z2, 5).elements) == 16       # C(5,1)+C(5,3)+C(5,5)
        assert len(free_algebra(semilattice, 5).elements) == 31  # 2^5 - 1
        assert len(free_algebra(majority, 5).elements) == 81

    def test_parity_structure_of_minority_clone(self, z2):
        for t in free_algebra(z2, 5).elements:
            support = [
                i for i in range(5)
                if any(
                    t.apply(*args) != t.apply(*(args[:i] + (1 - args[i],) + args[i + 1:]))
                    for args in itertools.product(range(2), repeat=5)
                )
            ]
            assert len(support) % 2 == 1
            for args in itertools.product(range(2), repeat=5):
                assert t.apply(*args) == sum(args[i] for i in support) % 2
