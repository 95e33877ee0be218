"""Finite idempotent algebras as flat operation tables, plus closure machinery.

Elements are 0-based integers.  A k-ary operation is stored as a flat value
vector of length n^k, indexed row-major with the leftmost argument most
significant, so tables are bit-stable across runs and platforms.

The closure engine `generate_subproduct` is the workhorse for everything
else: subuniverse generation, subpowers, free algebras (via `terms`), and
the matrix method (via `commutator`) all reduce to closing a set of vectors
under coordinatewise application of the basic operations.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, NotClosed, SignatureMismatch

# Element budget per vectorized closure chunk; keeps peak memory flat.
_CHUNK_BUDGET = 1 << 22


@dataclass(frozen=True)
class OperationTable:
    """A k-ary operation on {0..n-1} given by its flat value table."""

    symbol: str
    arity: int
    table: tuple[int, ...]

    def size(self) -> int:
        n = round(len(self.table) ** (1.0 / self.arity))
        # guard against float rounding for the tiny sizes we use
        for cand in (n - 1, n, n + 1):
            if cand >= 1 and cand**self.arity == len(self.table):
                return cand
        raise ValueError(f"table length {len(self.table)} is not a {self.arity}-th power")

    def apply(self, *args: int) -> int:
        n = self.size()
        idx = 0
        for a in args:
            idx = idx * n + a
        return self.table[idx]


@dataclass(frozen=True)
class FiniteAlgebra:
    """A finite idempotent algebra over elements 0..size-1."""

    name: str
    size: int
    ops: tuple[OperationTable, ...]

    def __post_init__(self):
        seen = set()
        for op in self.ops:
            if op.symbol in seen:
                raise ValueError(f"duplicate operation symbol {op.symbol!r}")
            seen.add(op.symbol)

    @property
    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((op.symbol, op.arity) for op in self.ops)

    def op(self, symbol: str) -> OperationTable:
        for op in self.ops:
            if op.symbol == symbol:
                return op
        raise KeyError(symbol)

    def universe(self) -> range:
        return range(self.size)

    def rename(self, name: str) -> "FiniteAlgebra":
        return FiniteAlgebra(name, self.size, self.ops)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_algebra; carries failures instead of raising."""

    table_length_errors: tuple[str, ...]
    range_errors: tuple[str, ...]
    idempotency_failures: tuple[tuple[str, int], ...]  # (symbol, witness element)

    @property
    def ok(self) -> bool:
        return not (self.table_length_errors or self.range_errors or self.idempotency_failures)


def validate_algebra(alg: FiniteAlgebra) -> ValidationReport:
    """Check table lengths, entry ranges, and idempotency of every operation."""
    length_errors = []
    range_errors = []
    idem_failures = []
    n = alg.size
    for op in alg.ops:
        expected = n**op.arity
        if len(op.table) != expected:
            length_errors.append(
                f"{op.symbol}: table has {len(op.table)} entries, expected {expected}"
            )
            continue
        if any(not (0 <= v < n) for v in op.table):
            range_errors.append(f"{op.symbol}: entry out of range 0..{n - 1}")
            continue
        stride = (expected - 1) // (n - 1) if n > 1 else 1
        for a in range(n):
            # the constant tuple (a,..,a) sits at flat index a * (n^k-1)/(n-1)
            if op.table[a * stride] != a:
                idem_failures.append((op.symbol, a))
                break
    return ValidationReport(tuple(length_errors), tuple(range_errors), tuple(idem_failures))


# ---------------------------------------------------------------------------
# Vectorized closure engine


def _np_tables(alg: FiniteAlgebra) -> list[np.ndarray]:
    return [np.asarray(op.table, dtype=np.int64) for op in alg.ops]


def _check_similar(coords: Sequence[FiniteAlgebra]) -> None:
    sig = coords[0].signature
    for c in coords[1:]:
        if c.signature != sig:
            raise SignatureMismatch(
                f"coordinate algebras differ in signature: {sig} vs {c.signature}"
            )


def generate_subproduct(
    coords: Sequence[FiniteAlgebra],
    seeds: Iterable[tuple[int, ...]],
    cap: int | None = None,
    want_derivations: bool = False,
):
    """Close a set of vectors under coordinatewise application of the basic ops.

    `coords` lists the algebra acting on each coordinate (all similar); the
    result is the least superset of `seeds` closed under every operation,
    i.e. the subuniverse of the product generated by the seeds.  Returned in
    discovery order (seeds first), deterministic.

    With `want_derivations`, also returns per-element provenance:
    None for seeds, else (op_index, arg_element_indices).

    Raises CapExceeded (partial result attached) when more than `cap`
    elements appear.
    """
    m = len(coords)
    _check_similar(coords)
    sizes = [c.size for c in coords]
    if any(s > 255 for s in sizes):
        raise ValueError("coordinate algebras larger than 255 elements are unsupported")
    op_tables = []  # per op: list of per-coordinate numpy tables
    arities = []
    for oi, op in enumerate(coords[0].ops):
        arities.append(op.arity)
        op_tables.append([np.asarray(c.ops[oi].table, dtype=np.uint8) for c in coords])

    index: dict[bytes, int] = {}
    rows: list[tuple[int, ...]] = []
    derivs: list[None | tuple[int, tuple[int, ...]]] = []
    for s in seeds:
        r = tuple(int(v) for v in s)
        if len(r) != m:
            raise ValueError(f"seed {r} has length {len(r)}, expected {m}")
        key = bytes(r)
        if key not in index:
            index[key] = len(rows)
            rows.append(r)
            derivs.append(None)

    arr = np.asarray(rows, dtype=np.uint8).reshape(len(rows), m)
    old = 0  # rows < old were fully processed in earlier rounds
    chunk_rows = max(1024, _CHUNK_BUDGET // max(1, m))
    void_t = np.dtype((np.void, m))
    # rows pack into a single int64 when the coordinate value space is small
    # enough; sorting scalars is much faster than sorting void records
    packable = 1
    for s in sizes:
        packable *= s
        if packable > 1 << 62:
            break
    use_packed = packable <= 1 << 62
    if use_packed:
        strides = np.empty(m, dtype=np.int64)
        acc = 1
        for j in range(m - 1, -1, -1):
            strides[j] = acc
            acc *= sizes[j]

    while old < len(rows):
        cur = len(rows)
        new_rows: list[tuple[int, ...]] = []
        new_derivs: list[tuple[int, tuple[int, ...]]] = []
        for oi, arity in enumerate(arities):
            tables = op_tables[oi]
            # every arity-tuple of indices < cur containing at least one >= old,
            # enumerated once: position p holds the first "new" index
            for p in range(arity):
                ranges = []
                for q in range(arity):
                    if q < p:
                        ranges.append((0, old))
                    elif q == p:
                        ranges.append((old, cur))
                    else:
                        ranges.append((0, cur))
                total = 1
                for lo, hi in ranges:
                    total *= hi - lo
                if total == 0:
                    continue
                for start in range(0, total, chunk_rows):
                    stop = min(start + chunk_rows, total)
                    arg_idx = []
                    rem = np.arange(start, stop, dtype=np.int64)
                    for lo, hi in reversed(ranges):
                        span = hi - lo
                        arg_idx.append(rem % span + lo)
                        rem = rem // span
                    arg_idx.reverse()
                    out = np.empty((stop - start, m), dtype=np.uint8)
                    args = [arr[ai] for ai in arg_idx]
                    for j in range(m):
                        idx = args[0][:, j].astype(np.int64)
                        for a in args[1:]:
                            idx = idx * sizes[j] + a[:, j]
                        out[:, j] = tables[j][idx]
                    # collapse the chunk to its distinct rows before touching
                    # the (python-level) global index
                    if use_packed:
                        packed = out.astype(np.int64) @ strides
                        _, first = np.unique(packed, return_index=True)
                    else:
                        uniq, first = np.unique(
                            np.ascontiguousarray(out).view(void_t).ravel(),
                            return_index=True,
                        )
                    for rr in first:
                        key = out[rr].tobytes()
                        if key not in index:
                            index[key] = cur + len(new_rows)
                            new_rows.append(tuple(int(v) for v in out[rr]))
                            new_derivs.append(
                                (oi, tuple(int(ai[rr]) for ai in arg_idx))
                            )
                    if cap is not None and cur + len(new_rows) > cap:
                        raise CapExceeded(
                            f"closure exceeded cap of {cap} elements "
                            f"({cur + len(new_rows)} found, still growing)",
                            partial=list(rows) + list(new_rows),
                        )
        old = cur
        if new_rows:
            arr = np.concatenate(
                [arr, np.asarray(new_rows, dtype=np.uint8).reshape(len(new_rows), m)]
            )
            rows.extend(new_rows)
            derivs.extend(new_derivs)

    if want_derivations:
        return rows, derivs
    return rows


# ---------------------------------------------------------------------------
# Subuniverse generation and enumeration


def _closure_mask(alg: FiniteAlgebra, seed: frozenset[int]) -> frozenset[int]:
    if not seed:
        return frozenset()
    rows = generate_subproduct([alg], [(a,) for a in sorted(seed)])
    return frozenset(r[0] for r in rows)


@functools.lru_cache(maxsize=None)
def _sg_closure_cached(alg: FiniteAlgebra, seed: frozenset) -> frozenset:
    return _closure_mask(alg, seed)


def sg_closure(alg: FiniteAlgebra, seed: Iterable[int]) -> frozenset[int]:
    """Least superset of `seed` closed under all operations of `alg`."""
    fseed = frozenset(seed)
    if not fseed:
        raise ValueError("sg_closure requires a nonempty seed")
    if any(not (0 <= a < alg.size) for a in fseed):
        raise ValueError("seed element out of range")
    return _sg_closure_cached(alg, fseed)


def is_subuniverse(alg: FiniteAlgebra, subset: Iterable[int]) -> bool:
    fs = frozenset(subset)
    if not fs:
        return True  # no nullary operations, so the empty set is closed
    return sg_closure(alg, fs) == fs


@dataclass(frozen=True)
class SubuniverseEnumeration:
    subuniverses: tuple[frozenset[int], ...]  # lectic order, nonempty
    proper_hypergraph_connected: bool


@functools.lru_cache(maxsize=None)
def enumerate_subuniverses(
    alg: FiniteAlgebra, proper_only: bool = False, cap: int = 8
) -> SubuniverseEnumeration:
    """All nonempty subuniverses by NextClosure over the generation operator.

    The connectivity flag states whether any two elements of the algebra are
    linked by a chain of pairwise-intersecting proper subuniverses (the
    hypergraph of proper subuniverses, with shared elements as adjacency).
    """
    n = alg.size
    if n > cap:
        raise CapExceeded(f"subuniverse enumeration capped at size {cap}, got {n}")

    def close(s: frozenset[int]) -> frozenset[int]:
        return _sg_closure_cached(alg, s) if s else frozenset()

    closed: list[frozenset[int]] = []
    current = close(frozenset())
    while True:
        if current:
            closed.append(current)
        nxt = None
        for i in range(n - 1, -1, -1):
            if i in current:
                continue
            candidate = close(frozenset(x for x in current if x < i) | {i})
            if all(x in current for x in candidate if x < i):
                nxt = candidate
                break
        if nxt is None:
            break
        current = nxt

    proper = [s for s in closed if len(s) < n]
    connected = _hypergraph_connected(n, proper)
    subs = tuple(proper) if proper_only else tuple(closed)
    return SubuniverseEnumeration(subs, connected)


def _hypergraph_connected(n: int, edges: list[frozenset[int]]) -> bool:
    """Are all n vertices joined by chains of pairwise-intersecting edges?"""
    if n <= 1:
        return True
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    covered = set()
    for e in edges:
        elems = sorted(e)
        covered.update(elems)
        for a in elems[1:]:
            ra, rb = find(elems[0]), find(a)
            if ra != rb:
                parent[rb] = ra
    if covered != set(range(n)):
        return False
    return len({find(x) for x in range(n)}) == 1


# ---------------------------------------------------------------------------
# Derived algebras (canonical renumbering fixed for bit-stable output)


@functools.lru_cache(maxsize=None)
def induced_subalgebra(alg: FiniteAlgebra, subset: frozenset) -> FiniteAlgebra:
    """Restrict `alg` to a closed subset; elements renamed by ascending index."""
    elems = sorted(subset)
    if not is_subuniverse(alg, elems):
        raise NotClosed(f"{sorted(subset)} is not a subuniverse of {alg.name}")
    old_to_new = {e: i for i, e in enumerate(elems)}
    k = len(elems)
    ops = []
    for op in alg.ops:
        table = []
        for args in itertools.product(elems, repeat=op.arity):
            table.append(old_to_new[op.apply(*args)])
        ops.append(OperationTable(op.symbol, op.arity, tuple(table)))
    name = f"{alg.name}|{{{','.join(map(str, elems))}}}"
    return FiniteAlgebra(name, k, tuple(ops))


def quotient_algebra(alg: FiniteAlgebra, partition: "Partition") -> FiniteAlgebra:
    """Quotient by a congruence; blocks renamed by ascending least representative."""
    from .congruences import is_congruence  # local import to avoid a cycle

    if not is_congruence(alg, partition):
        from .errors import NotACongruence

        raise NotACongruence(f"partition {partition.blocks_of} is not a congruence of {alg.name}")
    reps = partition.block_representatives()
    k = len(reps)
    ops = []
    for op in alg.ops:
        table = []
        for blocks in itertools.product(range(k), repeat=op.arity):
            args = [reps[b] for b in blocks]
            table.append(partition.blocks_of[op.apply(*args)])
        ops.append(OperationTable(op.symbol, op.arity, tuple(table)))
    return FiniteAlgebra(f"{alg.name}/theta{partition.block_count()}", k, tuple(ops))


def product_algebra(a: FiniteAlgebra, b: FiniteAlgebra) -> FiniteAlgebra:
    """Direct product; element (x, y) is numbered x*|B| + y (lexicographic)."""
    if a.signature != b.signature:
        raise SignatureMismatch(f"{a.name} and {b.name} have different signatures")
    n = a.size * b.size
    ops = []
    for oa, ob in zip(a.ops, b.ops):
        table = []
        for args in itertools.product(range(n), repeat=oa.arity):
            xa = [arg // b.size for arg in args]
            xb = [arg % b.size for arg in args]
            table.append(oa.apply(*xa) * b.size + ob.apply(*xb))
        ops.append(OperationTable(oa.symbol, oa.arity, tuple(table)))
    return FiniteAlgebra(f"{a.name}x{b.name}", n, tuple(ops))


def power_algebra(alg: FiniteAlgebra, k: int) -> FiniteAlgebra:
    """Direct power alg^k with lexicographic tuple numbering."""
    if k < 1:
        raise ValueError("power exponent must be >= 1")
    result = alg
    for _ in range(k - 1):
        result = product_algebra(result, alg)
    return result.rename(f"{alg.name}^{k}")


def derive_algebra(alg: FiniteAlgebra, kind: str, argument) -> FiniteAlgebra:
    """Dispatch to the four derivations: subalgebra, quotient, product, power."""
    if kind == "subalgebra":
        return induced_subalgebra(alg, frozenset(argument))
    if kind == "quotient":
        return quotient_algebra(alg, argument)
    if kind == "product":
        return product_algebra(alg, argument)
    if kind == "power":
        return power_algebra(alg, int(argument))
    raise ValueError(f"unknown derivation kind {kind!r}")


def tuple_to_index(t: Sequence[int], sizes: Sequence[int]) -> int:
    idx = 0
    for v, s in zip(t, sizes):
        idx = idx * s + v
    return idx


def index_to_tuple(idx: int, sizes: Sequence[int]) -> tuple[int, ...]:
    out = []
    for s in reversed(sizes):
        out.append(idx % s)
        idx //= s
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# Partitions and binary relations


@dataclass(frozen=True)
class Partition:
    """A partition of 0..n-1, normalized so block ids appear in first-use order."""

    blocks_of: tuple[int, ...]

    @staticmethod
    def normalize(raw: Sequence[int]) -> "Partition":
        remap: dict[int, int] = {}
        out = []
        for b in raw:
            if b not in remap:
                remap[b] = len(remap)
            out.append(remap[b])
        return Partition(tuple(out))

    @staticmethod
    def zero(n: int) -> "Partition":
        return Partition(tuple(range(n)))

    @staticmethod
    def one(n: int) -> "Partition":
        return Partition((0,) * n)

    @staticmethod
    def from_pairs(n: int, pairs: Iterable[tuple[int, int]]) -> "Partition":
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in pairs:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        return Partition.normalize([find(x) for x in range(n)])

    @property
    def size(self) -> int:
        return len(self.blocks_of)

    def block_count(self) -> int:
        return max(self.blocks_of) + 1 if self.blocks_of else 0

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.block_count())]
        for e, b in enumerate(self.blocks_of):
            out[b].append(e)
        return out

    def block_representatives(self) -> list[int]:
        reps = {}
        for e, b in enumerate(self.blocks_of):
            reps.setdefault(b, e)
        return [reps[b] for b in range(self.block_count())]

    def same(self, a: int, b: int) -> bool:
        return self.blocks_of[a] == self.blocks_of[b]

    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (a, b)
            for a in range(self.size)
            for b in range(self.size)
            if self.blocks_of[a] == self.blocks_of[b]
        )

    def is_zero(self) -> bool:
        return self.block_count() == self.size

    def is_one(self) -> bool:
        return self.block_count() <= 1

    def join(self, other: "Partition") -> "Partition":
        if self.size != other.size:
            raise ValueError("partition size mismatch")
        pairs = [(a, b) for a in range(self.size) for b in range(self.size)
                 if self.same(a, b) or other.same(a, b)]
        return Partition.from_pairs(self.size, pairs)

    def meet(self, other: "Partition") -> "Partition":
        if self.size != other.size:
            raise ValueError("partition size mismatch")
        return Partition.normalize(
            [self.blocks_of[x] * (other.block_count() + 1) + other.blocks_of[x]
             for x in range(self.size)]
        )

    def refines(self, other: "Partition") -> bool:
        """Every block of self lies inside a block of other (self <= other)."""
        return all(
            other.same(a, b)
            for a in range(self.size)
            for b in range(self.size)
            if self.same(a, b)
        )


@dataclass(frozen=True)
class BinaryRelation:
    """A relation between two carriers 0..n_left-1 and 0..n_right-1."""

    n_left: int
    n_right: int
    pairs: frozenset[tuple[int, int]]

    @staticmethod
    def from_pairs(n_left: int, n_right: int, pairs: Iterable[tuple[int, int]]) -> "BinaryRelation":
        ps = frozenset((int(a), int(b)) for a, b in pairs)
        for a, b in ps:
            if not (0 <= a < n_left and 0 <= b < n_right):
                raise ValueError(f"pair ({a},{b}) out of range")
        return BinaryRelation(n_left, n_right, ps)

    @staticmethod
    def full(n_left: int, n_right: int) -> "BinaryRelation":
        return BinaryRelation(
            n_left, n_right,
            frozenset((a, b) for a in range(n_left) for b in range(n_right)),
        )

    def contains(self, a: int, b: int) -> bool:
        return (a, b) in self.pairs

    def right_neighbors(self, a: int) -> frozenset[int]:
        return frozenset(y for x, y in self.pairs if x == a)

    def left_neighbors(self, b: int) -> frozenset[int]:
        return frozenset(x for x, y in self.pairs if y == b)

    def is_subdirect(self) -> bool:
        return (
            {a for a, _ in self.pairs} == set(range(self.n_left))
            and {b for _, b in self.pairs} == set(range(self.n_right))
        )

    def converse(self) -> "BinaryRelation":
        return BinaryRelation(self.n_right, self.n_left,
                              frozenset((b, a) for a, b in self.pairs))

    def is_reflexive(self) -> bool:
        if self.n_left != self.n_right:
            return False
        return all((a, a) in self.pairs for a in range(self.n_left))

    def is_symmetric(self) -> bool:
        return all((b, a) in self.pairs for a, b in self.pairs)

    def is_compatible(self, alg_left: FiniteAlgebra, alg_right: FiniteAlgebra | None = None) -> bool:
        """Closed under coordinatewise operations (a subuniverse of the product)."""
        alg_right = alg_right or alg_left
        if alg_left.signature != alg_right.signature:
            raise SignatureMismatch("relation sides have different signatures")
        if not self.pairs:
            return True
        closed = generate_subproduct([alg_left, alg_right], sorted(self.pairs))
        return len(closed) == len(self.pairs)

    def is_tolerance(self, alg: FiniteAlgebra) -> bool:
        return self.is_reflexive() and self.is_symmetric() and self.is_compatible(alg)


@dataclass(frozen=True)
class LinkStructure:
    tolerance: BinaryRelation          # tol_i, on the chosen side
    link_congruence: Partition         # lk_i, its transitive closure
    tol_connected: bool                # lk_i is the full relation
    has_full_fiber: bool               # some element of the other side sees everything


def link_structure(rel: BinaryRelation, coordinate: int) -> LinkStructure:
    """Link tolerance and link congruence of a subdirect binary relation.

    tol_i relates two elements of side i when they share a neighbor on the
    other side; lk_i is its transitive closure.  `has_full_fiber` reports
    whether some element of the opposite side is related to the whole side i.
    """
    from .errors import NotSubdirect

    if coordinate not in (1, 2):
        raise ValueError("coordinate must be 1 or 2")
    if not rel.is_subdirect():
        raise NotSubdirect("link structure requires a subdirect relation")
    r = rel if coordinate == 1 else rel.converse()
    n = r.n_left
    pairs = set()
    for b in range(r.n_right):
        fiber = sorted(r.left_neighbors(b))
        for x in fiber:
            for y in fiber:
                pairs.add((x, y))
    tol = BinaryRelation(n, n, frozenset(pairs))
    lk = Partition.from_pairs(n, pairs)
    full_fiber = any(len(r.left_neighbors(b)) == n for b in range(r.n_right))
    return LinkStructure(tol, lk, lk.is_one(), full_fiber)
