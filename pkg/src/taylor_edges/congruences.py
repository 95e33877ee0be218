"""Congruences, unary polynomials, the centralizer condition, homomorphisms.

Principal congruences are computed by the standard translation closure:
close {(a,b)} under single-coordinate images by basic operations and
union-find the results.  The congruence set is the join-closure of the
principal congruences, which is the whole congruence lattice.

The centralizer condition C(alpha, beta; 0) is decided by the matrix
method: close the set of 2x2 matrices (as elements of alg^4, flattened
row-major) generated by alpha-rows and beta-columns, and check that equal
top rows force equal bottom rows.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .algebra import (
    FiniteAlgebra,
    Partition,
    generate_subproduct,
    induced_subalgebra,
    quotient_algebra,
)
from .errors import CapExceeded, NotACongruence, SignatureMismatch


def is_congruence(alg: FiniteAlgebra, p: Partition) -> bool:
    """Compatibility via single-coordinate substitutions (enough by transitivity)."""
    if p.size != alg.size:
        return False
    n = alg.size
    same_pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if p.same(a, b)]
    for op in alg.ops:
        k = op.arity
        for a, b in same_pairs:
            for pos in range(k):
                for rest in itertools.product(range(n), repeat=k - 1):
                    args_a = rest[:pos] + (a,) + rest[pos:]
                    args_b = rest[:pos] + (b,) + rest[pos:]
                    if not p.same(op.apply(*args_a), op.apply(*args_b)):
                        return False
    return True


@functools.lru_cache(maxsize=None)
def principal_congruence(alg: FiniteAlgebra, a: int, b: int) -> Partition:
    """Cg(a, b): close the pair under basic-operation translations."""
    n = alg.size
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y) -> bool:
        rx, ry = find(x), find(y)
        if rx == ry:
            return False
        parent[max(rx, ry)] = min(rx, ry)
        return True

    work = [(a, b)]
    union(a, b)
    while work:
        u, v = work.pop()
        for op in alg.ops:
            k = op.arity
            for pos in range(k):
                for rest in itertools.product(range(n), repeat=k - 1):
                    args_u = rest[:pos] + (u,) + rest[pos:]
                    args_v = rest[:pos] + (v,) + rest[pos:]
                    x, y = op.apply(*args_u), op.apply(*args_v)
                    if union(x, y):
                        work.append((x, y))
    return Partition.normalize([find(x) for x in range(n)])


@dataclass(frozen=True)
class CongruenceReport:
    principals: tuple[Partition, ...]       # distinct nontrivial Cg(a,b), deterministic order
    all_congruences: tuple[Partition, ...]  # full lattice incl. bounds
    monolith: Partition | None              # unique minimal nonzero congruence
    is_subdirectly_irreducible: bool


@functools.lru_cache(maxsize=None)
def congruences(alg: FiniteAlgebra, cap: int = 10) -> CongruenceReport:
    """Principal congruences, their join-closure, monolith, and SI flag."""
    n = alg.size
    if n > cap:
        raise CapExceeded(f"congruence computation capped at size {cap}, got {n}")
    zero = Partition.zero(n)
    principals = []
    seen = {zero}
    for a in range(n):
        for b in range(a + 1, n):
            cg = principal_congruence(alg, a, b)
            if cg not in seen:
                seen.add(cg)
                principals.append(cg)

    lattice = {zero} | set(principals)
    frontier = list(principals)
    while frontier:
        nxt = []
        for p in frontier:
            for q in list(lattice):
                j = p.join(q)
                if j not in lattice:
                    lattice.add(j)
                    nxt.append(j)
        frontier = nxt

    ordered = sorted(lattice, key=lambda p: (p.size - p.block_count(), p.blocks_of))
    nonzero = [p for p in ordered if not p.is_zero()]
    monolith = None
    if nonzero:
        candidate = nonzero[0]
        if all(candidate.refines(p) for p in nonzero):
            monolith = candidate
    return CongruenceReport(
        tuple(principals), tuple(ordered), monolith, monolith is not None and n > 1
    )


# ---------------------------------------------------------------------------
# Unary polynomials


@functools.lru_cache(maxsize=None)
def unary_polynomials(alg: FiniteAlgebra) -> tuple[tuple[int, ...], ...]:
    """All unary polynomials of `alg` as value vectors.

    Computed as the subuniverse of the transformation algebra alg^A generated
    by the identity map and all constant maps, closed under pointwise basic
    operations.  Sorted for determinism.
    """
    n = alg.size
    seeds = [tuple(range(n))] + [(c,) * n for c in range(n)]
    rows = generate_subproduct([alg] * n, seeds)
    return tuple(sorted(rows))


def is_unary_polynomial(alg: FiniteAlgebra, mapping: tuple[int, ...]) -> bool:
    return tuple(mapping) in set(unary_polynomials(alg))


# ---------------------------------------------------------------------------
# Centralizer condition and abelian / affine tests


@functools.lru_cache(maxsize=None)
def centralizer_condition(alg: FiniteAlgebra, alpha: Partition, beta: Partition) -> bool:
    """Decide C(alpha, beta; 0) by the matrix method.

    A matrix (x1,x2,x3,x4) in alg^4 is read as rows (x1,x2) / (x3,x4).
    Generators: (a,a,b,b) for (a,b) in alpha and (c,d,c,d) for (c,d) in beta.
    The condition holds iff every generated matrix with equal top row has an
    equal bottom row.
    """
    if not is_congruence(alg, alpha):
        raise NotACongruence("alpha is not a congruence")
    if not is_congruence(alg, beta):
        raise NotACongruence("beta is not a congruence")
    n = alg.size
    seeds = []
    for a in range(n):
        for b in range(n):
            if alpha.same(a, b):
                seeds.append((a, a, b, b))
            if beta.same(a, b):
                seeds.append((a, b, a, b))
    rows = generate_subproduct([alg] * 4, seeds)
    return all(x3 == x4 for x1, x2, x3, x4 in rows if x1 == x2)


def is_abelian(alg: FiniteAlgebra) -> bool:
    n = alg.size
    return centralizer_condition(alg, Partition.one(n), Partition.one(n))


@dataclass(frozen=True)
class AffineReport:
    is_abelian: bool
    is_affine: bool | None        # None when the Taylor status is unknown
    r3_criterion: bool | None     # None when no ternary relation was supplied
    r3_witness: tuple | None      # first failing (a, coordinate) if criterion fails


def affine_checks(alg: FiniteAlgebra, r3: frozenset | None = None) -> AffineReport:
    """Abelianness (matrix method), affineness (abelian and Taylor), and the
    bijection-sections criterion for an optional compatible ternary relation."""
    from .errors import NotCompatible
    from .terms import taylor_report

    abelian = is_abelian(alg)
    taylor = taylor_report(alg)
    if taylor.has_taylor is None:
        affine = None
    else:
        affine = abelian and taylor.has_taylor

    criterion = None
    witness = None
    if r3 is not None:
        triples = frozenset(tuple(t) for t in r3)
        closed = generate_subproduct([alg] * 3, sorted(triples))
        if len(closed) != len(triples):
            raise NotCompatible("the ternary relation is not closed under the operations")
        criterion, witness = _r3_sections_bijective(alg.size, triples)
    return AffineReport(abelian, affine, criterion, witness)


def _r3_sections_bijective(n: int, triples: frozenset) -> tuple[bool, tuple | None]:
    for coord in (1, 2, 3):
        for a in range(n):
            if coord == 1:
                section = [(y, z) for (x, y, z) in triples if x == a]
            elif coord == 2:
                section = [(x, z) for (x, y, z) in triples if y == a]
            else:
                section = [(x, y) for (x, y, z) in triples if z == a]
            firsts = [p[0] for p in section]
            seconds = [p[1] for p in section]
            if (
                len(section) != n
                or len(set(firsts)) != n
                or len(set(seconds)) != n
            ):
                return False, (a, coord)
    return True, None


# ---------------------------------------------------------------------------
# Homomorphisms


@dataclass(frozen=True)
class Homomorphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    mapping: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def is_surjective(self) -> bool:
        return len(set(self.mapping)) == self.target.size

    def kernel(self) -> Partition:
        return Partition.normalize(self.mapping)


def is_homomorphism(src: FiniteAlgebra, dst: FiniteAlgebra, mapping: tuple[int, ...]) -> bool:
    if src.signature != dst.signature:
        return False
    for op_s, op_d in zip(src.ops, dst.ops):
        for args in itertools.product(range(src.size), repeat=op_s.arity):
            if mapping[op_s.apply(*args)] != op_d.apply(*(mapping[a] for a in args)):
                return False
    return True


@functools.lru_cache(maxsize=None)
def homomorphisms_between(
    src: FiniteAlgebra, dst: FiniteAlgebra, cap: int = 10**6
) -> tuple[Homomorphism, ...]:
    """All homomorphisms src -> dst by backtracking with forward propagation.

    Assigning a value to an unassigned element triggers propagation: every
    operation application whose arguments are all assigned forces the value
    of its result, and conflicts prune the branch.
    """
    if src.signature != dst.signature:
        raise SignatureMismatch(
            f"{src.name} and {dst.name} have different signatures"
        )
    n = src.size
    found: list[Homomorphism] = []
    nodes = 0

    def propagate(mapping: dict[int, int]) -> dict[int, int] | None:
        mapping = dict(mapping)
        changed = True
        while changed:
            changed = False
            for op_s, op_d in zip(src.ops, dst.ops):
                for args in itertools.product(sorted(mapping), repeat=op_s.arity):
                    res = op_s.apply(*args)
                    val = op_d.apply(*(mapping[a] for a in args))
                    if res in mapping:
                        if mapping[res] != val:
                            return None
                    else:
                        mapping[res] = val
                        changed = True
        return mapping

    def extend(mapping: dict[int, int]):
        nonlocal nodes
        nodes += 1
        if nodes > cap:
            raise CapExceeded(f"homomorphism search exceeded {cap} nodes")
        free = [x for x in range(n) if x not in mapping]
        if not free:
            found.append(Homomorphism(src, dst, tuple(mapping[x] for x in range(n))))
            return
        x = free[0]
        for v in range(dst.size):
            trial = propagate({**mapping, x: v})
            if trial is not None:
                extend(trial)

    extend({})
    uniq = sorted({h.mapping for h in found})
    return tuple(Homomorphism(src, dst, m) for m in uniq)


def quotient_map(alg: FiniteAlgebra, theta: Partition) -> Homomorphism:
    """The natural surjection onto the quotient by a congruence."""
    q = quotient_algebra(alg, theta)
    return Homomorphism(alg, q, tuple(theta.blocks_of))


def subalgebra_embedding(alg: FiniteAlgebra, subset: frozenset) -> Homomorphism:
    """The inclusion of an induced subalgebra, as a map with renumbered source."""
    sub = induced_subalgebra(alg, subset)
    return Homomorphism(sub, alg, tuple(sorted(subset)))
