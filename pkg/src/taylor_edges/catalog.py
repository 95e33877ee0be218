"""Built-in algebras used throughout the test suite and the CLI.

The three ternary members share the operation symbol `f` so that they live in
one signature and homomorphisms between them are meaningful; the two-element
semilattice keeps its natural binary `meet` and forms its own signature group.
"""

from __future__ import annotations

import itertools

from .algebra import FiniteAlgebra, OperationTable


def _table(arity: int, n: int, fn) -> tuple[int, ...]:
    return tuple(fn(*args) for args in itertools.product(range(n), repeat=arity))


def two_element_semilattice() -> FiniteAlgebra:
    """({0,1}; meet) with 0 absorbing: meet(x, y) = min(x, y)."""
    op = OperationTable("meet", 2, _table(2, 2, min))
    return FiniteAlgebra("semilattice2", 2, (op,))


def z2_minority() -> FiniteAlgebra:
    """({0,1}; f) with f(x, y, z) = x + y + z mod 2 (the minority operation)."""
    op = OperationTable("f", 3, _table(3, 2, lambda x, y, z: (x + y + z) % 2))
    return FiniteAlgebra("z2minority", 2, (op,))


def two_element_majority() -> FiniteAlgebra:
    """({0,1}; f) with f the majority operation."""
    op = OperationTable("f", 3, _table(3, 2, lambda x, y, z: 1 if x + y + z >= 2 else 0))
    return FiniteAlgebra("majority2", 2, (op,))


def _a1_value(x: int, y: int, z: int) -> int:
    if 0 in (x, y, z):
        return 0
    distinct = {x, y, z}
    if len(distinct) == 3:
        return 0
    if len(distinct) == 1:
        return x
    # two values from {1,2,3}: the minority (the one occurring once)
    for v in distinct:
        if (x, y, z).count(v) == 1:
            return v
    raise AssertionError("unreachable")


def a1() -> FiniteAlgebra:
    """The four-element algebra ({0,1,2,3}; f) with a single ternary cyclic f.

    f is 0 whenever an argument is 0 or all three arguments are distinct
    nonzero; on every two-element subset of {1,2,3} it acts as the minority
    operation.
    """
    op = OperationTable("f", 3, _table(3, 4, _a1_value))
    return FiniteAlgebra("a1", 4, (op,))


def builtin_algebras() -> dict[str, FiniteAlgebra]:
    algs = [two_element_semilattice(), z2_minority(), two_element_majority(), a1()]
    return {alg.name: alg for alg in algs}
