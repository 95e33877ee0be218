"""The colored edge digraphs: as- and sm-edges, components, and chain shifting.

Edges of a pair (a, b) are computed inside the generated subalgebra
Sg(a, b) (edges are local to subalgebras, which is also what makes this
cheap), quantifying over the cyclic operations of that subalgebra at a
configurable arity set -- by default the least prime above |Sg(a, b)|.

    a ->as b  iff  for every cyclic c:  b in Sg(a, c(a,..,a,b))
    a ->sm b  iff  for every binary term t, every cyclic c, every 0 < k <= p/2:
                   b in Sg(a, t(b, c(a^k b^(p-k))))

s-edges (as and sm together) are cross-checked against the independent
two-element absorption characterization: {a,b} is a subuniverse whose induced
binary clone contains a semilattice operation absorbing b.  A disagreement is
a hard error, not a warning: it cannot happen over a minimal Taylor algebra.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .algebra import FiniteAlgebra, BinaryRelation, induced_subalgebra, sg_closure
from .errors import CapExceeded, NoCyclicWitness, PreconditionViolated, SEdgeMismatch
from .terms import (
    UniversalMeet,
    cyclic_operations,
    free_algebra,
    least_prime_above,
    semilattice_witness,
)

Edge = tuple[int, int]


@dataclass(frozen=True)
class EdgeGraph:
    """The pair of digraphs as(A), sm(A) with derived s and asm views.

    Loops are present by definition and excluded from component semantics.
    Pairs whose status could not be decided within caps are in `unknown`.
    """

    algebra: FiniteAlgebra
    as_edges: frozenset[Edge]
    sm_edges: frozenset[Edge]
    unknown: frozenset[Edge]
    arities_by_pair: tuple[tuple[Edge, tuple[int, ...]], ...]

    @property
    def s_edges(self) -> frozenset[Edge]:
        return self.as_edges & self.sm_edges

    @property
    def asm_edges(self) -> frozenset[Edge]:
        return self.as_edges | self.sm_edges

    def edges(self, flavor: str) -> frozenset[Edge]:
        return {
            "as": self.as_edges,
            "sm": self.sm_edges,
            "s": self.s_edges,
            "asm": self.asm_edges,
        }[flavor]

    def proper(self, flavor: str) -> frozenset[Edge]:
        return frozenset((a, b) for a, b in self.edges(flavor) if a != b)

    def replace(self, as_edges=None, sm_edges=None) -> "EdgeGraph":
        return EdgeGraph(
            self.algebra,
            frozenset(as_edges) if as_edges is not None else self.as_edges,
            frozenset(sm_edges) if sm_edges is not None else self.sm_edges,
            self.unknown,
            self.arities_by_pair,
        )


def _edge_pair_in_subalgebra(
    sub: FiniteAlgebra, a: int, b: int, arities: tuple[int, ...], cap: int
) -> tuple[bool, bool]:
    """Decide (a ->as b, a ->sm b) inside the subalgebra generated by {a, b}."""
    as_ok = True
    sm_ok = True
    binary, b_complete = _binary_terms(sub, cap)
    if not b_complete:
        raise CapExceeded(f"binary clone of {sub.name} incomplete at cap {cap}")
    for p in arities:
        cyclics, complete = cyclic_operations(sub, p, cap=cap)
        if not complete:
            raise CapExceeded(f"cyclic search of {sub.name} at arity {p} incomplete")
        if not cyclics:
            raise NoCyclicWitness(
                f"{sub.name} has no cyclic operation at arity {p}; not Taylor?"
            )
        for c in cyclics:
            if as_ok:
                v = c.apply(*((a,) * (p - 1) + (b,)))
                if b not in sg_closure(sub, {a, v}):
                    as_ok = False
            if sm_ok:
                for k in range(1, p // 2 + 1):
                    w = c.apply(*((a,) * k + (b,) * (p - k)))
                    for t in binary:
                        if b not in sg_closure(sub, {a, t.apply(b, w)}):
                            sm_ok = False
                            break
                    if not sm_ok:
                        break
            if not as_ok and not sm_ok:
                return False, False
    return as_ok, sm_ok


@functools.lru_cache(maxsize=None)
def _binary_terms(sub: FiniteAlgebra, cap: int):
    free = free_algebra(sub, 2, cap=cap)
    return free.elements, free.complete


@functools.lru_cache(maxsize=None)
def compute_edges(
    alg: FiniteAlgebra, arities: tuple[int, ...] | None = None, cap: int = 4096
) -> EdgeGraph:
    """Compute as(A) and sm(A) pairwise inside generated subalgebras.

    `arities` overrides the per-pair default {least prime > |Sg(a,b)|}.
    Pairs that exceed caps become `unknown` rather than silently absent.
    """
    n = alg.size
    as_edges: set[Edge] = set()
    sm_edges: set[Edge] = set()
    unknown: set[Edge] = set()
    provenance: list[tuple[Edge, tuple[int, ...]]] = []

    for a in range(n):
        as_edges.add((a, a))
        sm_edges.add((a, a))
    for a, b in itertools.permutations(range(n), 2):
        sub_set = sg_closure(alg, {a, b})
        sub = induced_subalgebra(alg, sub_set)
        elems = sorted(sub_set)
        ia, ib = elems.index(a), elems.index(b)
        pair_arities = arities if arities is not None else (least_prime_above(len(elems)),)
        provenance.append(((a, b), pair_arities))
        try:
            as_ok, sm_ok = _edge_pair_in_subalgebra(sub, ia, ib, pair_arities, cap)
        except CapExceeded:
            unknown.add((a, b))
            continue
        if as_ok:
            as_edges.add((a, b))
        if sm_ok:
            sm_edges.add((a, b))
        # independent s-edge characterization: {a,b} subuniverse and the
        # induced binary clone has a semilattice operation absorbing b
        s_direct = semilattice_witness(alg, a, b, cap=cap) is not None
        if s_direct != (as_ok and sm_ok):
            raise SEdgeMismatch(
                f"{alg.name}: pair ({a},{b}) is s-edge={as_ok and sm_ok} by the "
                f"edge definition but {s_direct} by two-element absorption"
            )

    return EdgeGraph(
        alg,
        frozenset(as_edges),
        frozenset(sm_edges),
        frozenset(unknown),
        tuple(provenance),
    )


# ---------------------------------------------------------------------------
# Strong components, condensation, sinks


@dataclass(frozen=True)
class ComponentDecomposition:
    flavor: str
    components: tuple[tuple[int, ...], ...]      # each sorted; ordered by least element
    condensation: frozenset[tuple[int, int]]     # edges between component indices
    sinks: frozenset[int]                        # component indices without out-edges
    sources: frozenset[int]                      # component indices without in-edges
    x_min: frozenset[int]                        # union of sink components
    weak_components: tuple[tuple[int, ...], ...]

    def component_of(self, element: int) -> int:
        for i, comp in enumerate(self.components):
            if element in comp:
                return i
        raise ValueError(f"element {element} out of range")

    def is_weakly_connected(self) -> bool:
        return len(self.weak_components) <= 1


def strongly_connected_components(n: int, edges: frozenset[Edge]) -> list[list[int]]:
    """Iterative Tarjan; components returned sorted by least element."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in sorted(edges):
        if a != b:
            adj[a].append(b)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for i in range(pi, len(adj[v])):
                w = adj[v][i]
                if index[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def component_analysis(graph: EdgeGraph, flavor: str) -> ComponentDecomposition:
    """Strong components, condensation, sinks/sources, x-min, weak components.

    Loops are ignored; component numbering is by least contained element.
    """
    n = graph.algebra.size
    edges = graph.proper(flavor)
    comps = strongly_connected_components(n, edges)
    comp_of = {}
    for i, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = i
    cond = frozenset(
        (comp_of[a], comp_of[b]) for a, b in edges if comp_of[a] != comp_of[b]
    )
    sinks = frozenset(i for i in range(len(comps)) if not any(x == i for x, _ in cond))
    sources = frozenset(i for i in range(len(comps)) if not any(y == i for _, y in cond))
    x_min = frozenset(v for i in sinks for v in comps[i])

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    weak: dict[int, list[int]] = {}
    for v in range(n):
        weak.setdefault(find(v), []).append(v)
    weak_comps = tuple(tuple(sorted(c)) for c in sorted(weak.values(), key=lambda c: c[0]))

    return ComponentDecomposition(
        flavor,
        tuple(tuple(c) for c in comps),
        cond,
        sinks,
        sources,
        x_min,
        weak_comps,
    )


def is_x_closed(graph: EdgeGraph, flavor: str, subset: frozenset[int]) -> bool:
    """No flavor-edge leaves the subset."""
    return not any(
        a in subset and b not in subset for a, b in graph.proper(flavor)
    )


def reachable(edges: frozenset[Edge], start: int) -> frozenset[int]:
    seen = {start}
    work = [start]
    while work:
        v = work.pop()
        for a, b in edges:
            if a == v and b not in seen and a != b:
                seen.add(b)
                work.append(b)
    return frozenset(seen)


def s_path_between(graph: EdgeGraph, start: int, goal: int) -> list[int] | None:
    """Some directed s-path from start to goal (BFS, deterministic), or None."""
    if start == goal:
        return [start]
    edges = sorted(graph.proper("s"))
    prev: dict[int, int | None] = {start: None}
    queue = [start]
    while queue:
        v = queue.pop(0)
        for a, b in edges:
            if a == v and b not in prev:
                prev[b] = v
                if b == goal:
                    path = [goal]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return list(reversed(path))
                queue.append(b)
    return None


# ---------------------------------------------------------------------------
# Shifting a tolerance chain along an s-path


@dataclass(frozen=True)
class ShiftedChain:
    chain: tuple[int, ...]
    s_reachable_certified: bool
    tolerance_certified: bool


def shift_tolerance_chain(
    alg: FiniteAlgebra,
    tolerance: BinaryRelation,
    chain: tuple[int, ...],
    i: int,
    s_path: tuple[int, ...],
    meet: UniversalMeet,
    graph: EdgeGraph | None = None,
) -> ShiftedChain:
    """Shift every chain entry along the s-path at position i.

    Given a tolerance S, a chain c_0..c_k with consecutive pairs in S, and a
    directed s-path c_i = e_0 ->s e_1 ->s .. ->s e_m = d_i, produces d_0..d_k
    via the iteration e_{j,l+1} = f(e_{j,l}, e_{i,l+1}), certifying
    c_j ->s* d_j and (d_j, d_{j+1}) in S.
    """
    if not tolerance.is_tolerance(alg):
        raise PreconditionViolated("S is not a tolerance")
    k = len(chain) - 1
    if k < 0 or not (0 <= i <= k):
        raise PreconditionViolated("chain empty or index out of range")
    for j in range(k):
        if not tolerance.contains(chain[j], chain[j + 1]):
            raise PreconditionViolated(f"chain pair ({chain[j]},{chain[j + 1]}) not in S")
    if graph is None:
        graph = compute_edges(alg)
    if s_path[0] != chain[i]:
        raise PreconditionViolated("s-path must start at the chain entry")
    s = graph.edges("s")
    for u, v in zip(s_path, s_path[1:]):
        if u != v and (u, v) not in s:
            raise PreconditionViolated(f"({u},{v}) is not an s-edge")

    f = meet.f
    current = list(chain)
    for step in range(1, len(s_path)):
        target = s_path[step]
        current = [f.apply(current[j], target) if j != i else target for j in range(k + 1)]

    s_cert = all(
        chain[j] in _s_ancestors(graph, current[j]) for j in range(k + 1)
    )
    tol_cert = all(tolerance.contains(current[j], current[j + 1]) for j in range(k))
    return ShiftedChain(tuple(current), s_cert, tol_cert)


def _s_ancestors(graph: EdgeGraph, target: int) -> frozenset[int]:
    rev = frozenset((b, a) for a, b in graph.proper("s"))
    return reachable(rev, target)
