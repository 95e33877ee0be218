"""Term operations, free algebras, cyclic witnesses, and special terms.

A term operation is a value table over one algebra; where useful it carries a
provenance tree over the basic operation symbols, so the same term can be
re-interpreted in any similar algebra (this is what makes per-instance
constructions in the CSP engine coherent across different domain algebras).

Free algebras are computed as closures of the projection tables under
pointwise application of the basic operations, deduplicated by table, and
canonically ordered (ascending table lexicographic).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from .algebra import FiniteAlgebra, generate_subproduct, induced_subalgebra, sg_closure
from .errors import ArityMismatch, CapExceeded, NoCyclicWitness, PreconditionViolated

# ---------------------------------------------------------------------------
# Term trees: Var(i) leaves and (symbol, children...) tuples, shared as a DAG.


@dataclass(frozen=True)
class Var:
    index: int


TermTree = Var | tuple  # (symbol, child, ..., child)


def tree_arity_ok(tree: TermTree, signature: dict[str, int]) -> bool:
    if isinstance(tree, Var):
        return tree.index >= 0
    symbol, *children = tree
    if symbol not in signature or signature[symbol] != len(children):
        return False
    return all(tree_arity_ok(c, signature) for c in children)


def substitute(tree: TermTree, replacements: dict[int, TermTree]) -> TermTree:
    """Replace variables by subtrees, preserving sharing."""
    memo: dict[int, TermTree] = {}

    def walk(node: TermTree) -> TermTree:
        if isinstance(node, Var):
            return replacements.get(node.index, node)
        key = id(node)
        if key in memo:
            return memo[key]
        out = (node[0],) + tuple(walk(c) for c in node[1:])
        memo[key] = out
        return out

    return walk(tree)


def evaluate_tree_table(tree: TermTree, alg: FiniteAlgebra, arity: int) -> tuple[int, ...]:
    """Interpret a term tree in `alg` as a table of the given arity.

    Evaluates the tree as a DAG: each distinct node is computed once, as a
    numpy vector over all n^arity argument tuples.
    """
    n = alg.size
    m = n**arity
    sig = {op.symbol: op.arity for op in alg.ops}
    if not tree_arity_ok(tree, sig):
        raise ArityMismatch("term tree does not fit the algebra's signature")
    tables = {op.symbol: np.asarray(op.table, dtype=np.int64) for op in alg.ops}
    proj_cache: dict[int, np.ndarray] = {}

    def projection(i: int) -> np.ndarray:
        if i not in proj_cache:
            if i >= arity:
                raise ArityMismatch(f"variable x{i + 1} exceeds arity {arity}")
            tup = np.arange(m, dtype=np.int64)
            proj_cache[i] = (tup // n ** (arity - 1 - i)) % n
        return proj_cache[i]

    memo: dict[int, np.ndarray] = {}

    def walk(node: TermTree) -> np.ndarray:
        if isinstance(node, Var):
            return projection(node.index)
        key = id(node)
        if key in memo:
            return memo[key]
        children = [walk(c) for c in node[1:]]
        idx = children[0].copy()
        for c in children[1:]:
            idx *= n
            idx += c
        out = tables[node[0]][idx]
        memo[key] = out
        return out

    return tuple(int(v) for v in walk(tree))


def evaluate_tree_on(tree: TermTree, alg: FiniteAlgebra, args: tuple[int, ...]) -> int:
    memo: dict[int, int] = {}

    def walk(node: TermTree) -> int:
        if isinstance(node, Var):
            if node.index >= len(args):
                raise ArityMismatch(f"variable x{node.index + 1} has no argument")
            return args[node.index]
        key = id(node)
        if key in memo:
            return memo[key]
        vals = [walk(c) for c in node[1:]]
        out = alg.op(node[0]).apply(*vals)
        memo[key] = out
        return out

    return walk(tree)


# ---------------------------------------------------------------------------
# Term operations and free algebras


@dataclass(frozen=True)
class TermOperation:
    """A k-ary operation table over one algebra, with optional provenance tree."""

    arity: int
    table: tuple[int, ...]
    tree: TermTree | None = field(default=None, compare=False, hash=False, repr=False)

    def size(self) -> int:
        n = round(len(self.table) ** (1.0 / self.arity))
        for cand in (n - 1, n, n + 1):
            if cand >= 1 and cand**self.arity == len(self.table):
                return cand
        raise ValueError("table length is not a perfect power")

    def apply(self, *args: int) -> int:
        if len(args) != self.arity:
            raise ArityMismatch(f"expected {self.arity} arguments, got {len(args)}")
        n = self.size()
        idx = 0
        for a in args:
            idx = idx * n + a
        return self.table[idx]

    def is_idempotent(self) -> bool:
        n = self.size()
        return all(self.apply(*(a,) * self.arity) == a for a in range(n))

    def is_cyclic(self) -> bool:
        n = self.size()
        nd = np.asarray(self.table, dtype=np.int64).reshape((n,) * self.arity)
        rotated = np.transpose(nd, axes=tuple(range(1, self.arity)) + (0,))
        return bool(np.array_equal(nd, rotated))

    def essential_coordinates(self) -> tuple[int, ...]:
        n = self.size()
        nd = np.asarray(self.table, dtype=np.int64).reshape((n,) * self.arity)
        out = []
        for i in range(self.arity):
            moved = np.moveaxis(nd, i, 0)
            if any(not np.array_equal(moved[0], moved[v]) for v in range(1, n)):
                out.append(i)
        return tuple(out)


def projection_table(n: int, arity: int, i: int) -> tuple[int, ...]:
    return tuple(args[i] for args in itertools.product(range(n), repeat=arity))


@dataclass(frozen=True)
class FreeAlgebra:
    """The k-generated free algebra over one algebra: its clone's k-ary part."""

    algebra: FiniteAlgebra
    generators: int
    elements: tuple[TermOperation, ...]  # ascending table lexicographic
    complete: bool

    def tables(self) -> frozenset[tuple[int, ...]]:
        return frozenset(t.table for t in self.elements)

    def __contains__(self, table) -> bool:
        if isinstance(table, TermOperation):
            table = table.table
        return tuple(table) in self.tables()

    def find(self, table: tuple[int, ...]) -> TermOperation | None:
        table = tuple(table)
        for t in self.elements:
            if t.table == table:
                return t
        return None


@functools.lru_cache(maxsize=None)
def free_algebra(
    alg: FiniteAlgebra, k: int, cap: int = 4096, work_cap: int = 50_000_000
) -> FreeAlgebra:
    """Close the k projections under pointwise basic operations.

    On cap overflow the partial element set is returned with the completeness
    flag cleared rather than raising; callers that need exactness must check
    the flag.
    """
    if k < 1:
        raise ValueError("generator count must be >= 1")
    n = alg.size
    m = n**k
    seeds = [projection_table(n, k, i) for i in range(k)]
    effective_cap = cap
    if work_cap is not None:
        # each closure round costs |F|^arity * m table lookups; bound |F| so the
        # total stays near work_cap even for the largest basic arity
        max_ar = max(op.arity for op in alg.ops)
        bound = max(8, int((work_cap / m) ** (1.0 / max_ar)))
        effective_cap = min(cap, bound) if cap is not None else bound
    complete = True
    try:
        rows, derivs = generate_subproduct(
            [alg] * m, seeds, cap=effective_cap, want_derivations=True
        )
    except CapExceeded as exc:
        rows = exc.partial
        derivs = None
        complete = False

    trees: list[TermTree | None]
    if derivs is not None:
        trees = []
        for row, d in zip(rows, derivs):
            if d is None:
                trees.append(Var(seeds.index(tuple(row))))
            else:
                oi, arg_indices = d
                trees.append((alg.ops[oi].symbol,) + tuple(trees[i] for i in arg_indices))
    else:
        trees = [None] * len(rows)

    elems = [TermOperation(k, tuple(r), tree) for r, tree in zip(rows, trees)]
    elems.sort(key=lambda t: t.table)
    return FreeAlgebra(alg, k, tuple(elems), complete)


@functools.lru_cache(maxsize=None)
def cyclic_operations(
    alg: FiniteAlgebra, arity: int, cap: int = 4096, first_only: bool = False
) -> tuple[tuple[TermOperation, ...], bool]:
    """Cyclic term operations of the given arity, plus a completeness flag.

    With `first_only`, stops at the first cyclic element (a witness found in a
    partial closure is still a genuine term operation).
    """
    if arity < 2:
        raise ValueError("cyclic operations need arity >= 2")
    free = free_algebra(alg, arity, cap=cap)
    if first_only:
        for t in free.elements:
            if t.is_cyclic():
                return (t,), free.complete
        return (), free.complete
    found = tuple(t for t in free.elements if t.is_cyclic())
    return found, free.complete


def least_prime_above(n: int) -> int:
    p = n + 1
    while True:
        if p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1)):
            return p
        p += 1


@dataclass(frozen=True)
class TaylorReport:
    has_taylor: bool | None           # None = unknown (caps prevented a verdict)
    witness: TermOperation | None     # a cyclic term operation, lowest arity found
    witness_arity: int | None
    arities_searched: tuple[int, ...]
    minimal_taylor_bounded: bool | None  # every found cyclic op regenerates the basics


@functools.lru_cache(maxsize=None)
def taylor_report(alg: FiniteAlgebra, cap: int = 4096) -> TaylorReport:
    """Search for cyclic witnesses at ascending arities up to the least prime > |A|.

    Any cyclic witness proves a Taylor term exists; a definitive "no" needs the
    complete free algebra at the prime arity.  Minimality evidence is bounded:
    each found cyclic operation must regenerate all basic operation tables.
    """
    if alg.size == 1:
        op = TermOperation(2, (0,), Var(0))
        return TaylorReport(True, op, 2, (2,), True)
    p = least_prime_above(alg.size)
    searched = []
    witnesses: tuple[TermOperation, ...] = ()
    witness_arity = None
    definitive_no = False
    for arity in range(2, p + 1):
        searched.append(arity)
        ops, complete = cyclic_operations(alg, arity, cap=cap)
        if ops:
            witnesses = ops
            witness_arity = arity
            break
        if arity == p and complete:
            definitive_no = True
        if arity == p and not complete:
            return TaylorReport(None, None, None, tuple(searched), None)

    if witness_arity is None:
        if definitive_no:
            return TaylorReport(False, None, None, tuple(searched), None)
        return TaylorReport(None, None, None, tuple(searched), None)

    minimal: bool | None = True
    for c in witnesses:
        reduct = FiniteAlgebra(
            f"{alg.name}~cyc{witness_arity}", alg.size, (_op_from_term(c),)
        )
        for op in alg.ops:
            sub = free_algebra(reduct, op.arity, cap=cap)
            if op.table not in sub.tables():
                minimal = False if sub.complete else None
                break
        if minimal is not True:
            break
    return TaylorReport(True, witnesses[0], witness_arity, tuple(searched), minimal)


def _op_from_term(t: TermOperation):
    from .algebra import OperationTable

    return OperationTable("c", t.arity, t.table)


# ---------------------------------------------------------------------------
# Applying terms: trees and full composition


def term_apply(tree: TermTree, alg: FiniteAlgebra, args=None, arity: int | None = None):
    """Evaluate a term tree on concrete arguments, or (with `arity` given and
    no arguments) build its full table as a TermOperation."""
    if args is not None:
        return evaluate_tree_on(tree, alg, tuple(args))
    if arity is None:
        raise ArityMismatch("term_apply needs either arguments or an arity")
    return TermOperation(arity, evaluate_tree_table(tree, alg, arity), tree)


def full_composition(s: TermOperation, t: TermOperation) -> TermOperation:
    """The (m*n)-ary term s(t(x1..xn), t(x_{n+1}..x_{2n}), ..., t(..x_{mn}))."""
    if s.size() != t.size():
        raise ArityMismatch("full composition requires terms over the same algebra")
    n_alg = s.size()
    m_ar, n_ar = s.arity, t.arity
    arity = m_ar * n_ar
    t_nd = np.asarray(t.table, dtype=np.int64)
    total = n_alg**arity
    # evaluate blockwise: argument index decomposes into m_ar blocks of n_ar digits
    idx = np.arange(total, dtype=np.int64)
    block_vals = []
    block_size = n_alg**n_ar
    for b in range(m_ar):
        shift = n_alg ** (n_ar * (m_ar - 1 - b))
        block_vals.append(t_nd[(idx // shift) % block_size])
    s_nd = np.asarray(s.table, dtype=np.int64)
    acc = block_vals[0].copy()
    for v in block_vals[1:]:
        acc *= n_alg
        acc += v
    table = tuple(int(x) for x in s_nd[acc])

    tree = None
    if s.tree is not None and t.tree is not None:
        blocks = []
        for b in range(m_ar):
            repl = {i: Var(b * n_ar + i) for i in range(n_ar)}
            blocks.append(substitute(t.tree, repl))
        tree = substitute(s.tree, {i: blocks[i] for i in range(m_ar)})
    return TermOperation(arity, table, tree)


# ---------------------------------------------------------------------------
# The universal meet term


@dataclass(frozen=True)
class UniversalMeet:
    """The binary term f with f(x,y) = f(x,f(x,y)) = f(f(x,y),x), built from a
    cyclic witness by iterating to least idempotent powers in the first slot."""

    f: TermOperation
    witness_arity: int
    t_exponent: int
    q_exponent: int

    def apply(self, a: int, b: int) -> int:
        return self.f.apply(a, b)


def _iterate_first_slot(table: np.ndarray, n: int) -> tuple[np.ndarray, int]:
    """Least k with T_k(x, T_k(x, y)) = T_k(x, y), where T_{i+1}(x,y)=T(x,T_i(x,y))."""
    rows = np.arange(n)[:, None]
    t_i = table.copy()
    k = 1
    while True:
        if np.array_equal(t_i[rows, t_i], t_i):
            return t_i, k
        t_i = table[rows, t_i]
        k += 1
        if k > 1 << 20:  # unreachable for finite tables; guards a logic bug
            raise AssertionError("first-slot iteration failed to stabilize")


def universal_meet(alg: FiniteAlgebra, cap: int = 4096) -> UniversalMeet:
    """Construct the binary term f from a cyclic witness.

    Steps: t(x,y) := c(x,y,..,y); iterate in the first variable to the least
    idempotent power t_k; q(x,y) := t_k(x, t_k(y,x)); iterate q likewise to
    q_j =: f.  Both defining identities are then verified on the full table.
    """
    report = taylor_report(alg, cap=cap)
    if not report.has_taylor:
        raise NoCyclicWitness(f"{alg.name} has no cyclic witness within caps")
    c = report.witness
    n = alg.size
    p = c.arity

    t_table = np.empty((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(n):
            t_table[x, y] = c.apply(*((x,) + (y,) * (p - 1)))
    t_tree = None
    if c.tree is not None:
        t_tree = substitute(c.tree, {i: Var(1) for i in range(1, p)})

    t_k, k_exp = _iterate_first_slot(t_table, n)

    def iter_tree(base: TermTree | None, exponent: int) -> TermTree | None:
        if base is None:
            return None
        out = base
        for _ in range(exponent - 1):
            out = substitute(base, {1: out})
        return out

    t_k_tree = iter_tree(t_tree, k_exp)

    q_table = np.empty((n, n), dtype=np.int64)
    for x in range(n):
        for y in range(n):
            q_table[x, y] = t_k[x, t_k[y, x]]
    q_tree = None
    if t_k_tree is not None:
        inner = substitute(t_k_tree, {0: Var(1), 1: Var(0)})
        q_tree = substitute(t_k_tree, {1: inner})

    f_table, j_exp = _iterate_first_slot(q_table, n)
    f_tree = iter_tree(q_tree, j_exp)

    rows = np.arange(n)[:, None]
    if not np.array_equal(f_table[rows, f_table], f_table):
        raise AssertionError("universal meet lost f(x,f(x,y)) = f(x,y)")
    if not np.array_equal(f_table[f_table, rows], f_table):
        raise AssertionError("universal meet lost f(f(x,y),x) = f(x,y)")

    f = TermOperation(2, tuple(int(v) for v in f_table.ravel()), f_tree)
    return UniversalMeet(f, p, k_exp, j_exp)


# ---------------------------------------------------------------------------
# Majority / minority conditions and local structure


def majority_table(n: int) -> tuple[int, ...]:
    """The table m(x,x,y)=m(x,y,x)=m(y,x,x)=x; ties broken to the first argument."""
    table = []
    for x, y, z in itertools.product(range(n), repeat=3):
        table.append(y if y == z else x)
    return tuple(table)


def is_majority_op(t: TermOperation) -> bool:
    n = t.size()
    return all(
        t.apply(x, x, y) == x and t.apply(x, y, x) == x and t.apply(y, x, x) == x
        for x in range(n)
        for y in range(n)
    )


def is_maltsev_op(t: TermOperation) -> bool:
    n = t.size()
    return all(
        t.apply(x, y, y) == x and t.apply(y, y, x) == x for x in range(n) for y in range(n)
    )


def has_majority_term(alg: FiniteAlgebra, cap: int = 4096) -> bool | None:
    """Does the clone contain a majority operation?  None when F(3) is capped."""
    free = free_algebra(alg, 3, cap=cap)
    if any(is_majority_op(t) for t in free.elements):
        return True
    return False if free.complete else None


def is_two_element_majority_algebra(alg: FiniteAlgebra, cap: int = 4096) -> bool:
    """Term-equivalent to the two-element majority algebra: F(3) is exactly
    the three projections plus the majority operation."""
    if alg.size != 2:
        return False
    free = free_algebra(alg, 3, cap=cap)
    if not free.complete:
        return False
    expected = {projection_table(2, 3, i) for i in range(3)}
    expected.add(majority_table(2))
    return free.tables() == frozenset(expected)


def is_affine_algebra(alg: FiniteAlgebra, cap: int = 4096) -> bool | None:
    """Abelian and Taylor; exact for idempotent algebras (None if Taylor unknown)."""
    from .congruences import is_abelian

    if alg.size == 1:
        return True
    if not is_abelian(alg):
        return False
    rep = taylor_report(alg, cap=cap)
    if rep.has_taylor is None:
        return None
    return rep.has_taylor


@dataclass(frozen=True)
class ConditionReport:
    majority_condition: bool
    minority_condition: bool
    majority_witness: tuple | None  # (kind, detail) of the first failure
    minority_witness: tuple | None


def condition_checks(alg: FiniteAlgebra, t: TermOperation, cap: int = 10) -> ConditionReport:
    """Bulatov-style majority/minority conditions for a ternary term operation.

    Identity (b) of each condition is a full table scan; condition (a)
    enumerates, per pair (a, b), the congruences of Sg(a, b) whose quotient is
    a two-element majority algebra (resp. an affine algebra) and evaluates the
    action of t there.
    """
    from .algebra import quotient_algebra
    from .congruences import congruences as congruence_report

    if t.arity != 3 or t.size() != alg.size:
        raise PreconditionViolated("condition checks need a ternary term over alg")
    n = alg.size

    maj_ok, maj_wit = True, None
    min_ok, min_wit = True, None

    # identity (b) for both conditions
    for x in range(n):
        for y in range(n):
            w = t.apply(x, y, y)
            if t.apply(x, w, w) != w and maj_ok:
                maj_ok, maj_wit = False, ("identity", (x, y))
            if t.apply(w, y, y) != w and min_ok:
                min_ok, min_wit = False, ("identity", (x, y))

    for a in range(n):
        for b in range(a + 1, n):
            sub_set = sg_closure(alg, {a, b})
            sub = induced_subalgebra(alg, sub_set)
            elems = sorted(sub_set)
            renum = {e: i for i, e in enumerate(elems)}
            # t restricted to the subuniverse (term operations respect closure)
            try:
                t_sub = TermOperation(
                    3,
                    tuple(
                        renum[t.apply(*args)]
                        for args in itertools.product(elems, repeat=3)
                    ),
                )
            except KeyError:
                raise PreconditionViolated(
                    "t does not preserve a generated subuniverse; not a term operation"
                )
            rep = congruence_report(sub, cap=max(cap, sub.size))
            for theta in rep.all_congruences:
                if theta.is_one() or theta.block_count() == 1:
                    continue
                if theta.is_zero():
                    quot = sub
                    t_quot = t_sub
                else:
                    quot = quotient_algebra(sub, theta)
                    t_quot = _push_term_to_quotient(t_sub, theta)
                    if t_quot is None:
                        raise PreconditionViolated(
                            "t does not respect a congruence; not a term operation"
                        )
                if quot.size < 2:
                    continue
                if maj_ok and quot.size == 2 and is_two_element_majority_algebra(quot):
                    if not is_majority_op(t_quot):
                        maj_ok, maj_wit = False, ("quotient", (a, b, theta.blocks_of))
                if min_ok and is_affine_algebra(quot):
                    if not is_maltsev_op(t_quot):
                        min_ok, min_wit = False, ("quotient", (a, b, theta.blocks_of))
    return ConditionReport(maj_ok, min_ok, maj_wit, min_wit)


def _push_term_to_quotient(t: TermOperation, theta) -> TermOperation | None:
    n = t.size()
    reps = theta.block_representatives()
    k = len(reps)
    table = []
    for blocks in itertools.product(range(k), repeat=3):
        val = theta.blocks_of[t.apply(*(reps[b] for b in blocks))]
        table.append(val)
    # well-definedness: every representative choice must agree
    for args in itertools.product(range(n), repeat=3):
        blocks = tuple(theta.blocks_of[a] for a in args)
        idx = (blocks[0] * k + blocks[1]) * k + blocks[2]
        if theta.blocks_of[t.apply(*args)] != table[idx]:
            return None
    return TermOperation(3, tuple(table))


@dataclass(frozen=True)
class LocalStructure:
    has_majority_term: bool | None
    semilattice_pairs: tuple[tuple[int, int], ...]  # (a, b) with absorbing b


def local_structure(alg: FiniteAlgebra, subset: frozenset, cap: int = 4096) -> LocalStructure:
    """Majority-term and semilattice-pair structure inside a subuniverse."""
    sub = induced_subalgebra(alg, frozenset(subset))
    elems = sorted(subset)
    maj = has_majority_term(sub, cap=cap)
    pairs = []
    for a in elems:
        for b in elems:
            if a == b:
                continue
            if semilattice_witness(alg, a, b, cap=cap) is not None:
                pairs.append((a, b))
    return LocalStructure(maj, tuple(pairs))


def semilattice_witness(
    alg: FiniteAlgebra, a: int, b: int, cap: int = 4096
) -> TermOperation | None:
    """A binary term of the induced algebra on {a, b} acting as the semilattice
    with absorbing element b; requires {a, b} to be a subuniverse."""
    if a == b:
        return None
    pair = frozenset({a, b})
    if sg_closure(alg, pair) != pair:
        return None
    sub = induced_subalgebra(alg, pair)
    ia, ib = sorted(pair).index(a), sorted(pair).index(b)
    free = free_algebra(sub, 2, cap=cap)
    for t in free.elements:
        if t.apply(ia, ib) == ib and t.apply(ib, ia) == ib:
            return t
    return None
