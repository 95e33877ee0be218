"""Verifies the Edge Axioms and the downstream structural theorems.

Relational-axiom instances are monotone in the relation: the conclusion
tuple lies in every admissible R iff it lies in the subproduct generated by
the hypothesis tuples.  We still enumerate all subuniverses of small products
(complete lectic enumeration up to a configurable size bound) because the
catalog lives there and the exhaustive run doubles as a stress test of the
enumerator; beyond the bound the generated subproduct decides exactly.

Cross-algebra axioms (homomorphism and relational) only make sense between
similar algebras, so the verifier partitions its catalog by signature and
runs those checks within each group.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .absorption import is_2_absorbing
from .algebra import (
    FiniteAlgebra,
    enumerate_subuniverses,
    generate_subproduct,
    induced_subalgebra,
    product_algebra,
    sg_closure,
)
from .congruences import homomorphisms_between
from .edges import EdgeGraph, component_analysis, compute_edges, is_x_closed, reachable
from .errors import CapExceeded, SEdgeMismatch
from .terms import free_algebra, has_majority_term, is_affine_algebra

PASS, FAIL, SKIP = "pass", "fail", "skipped"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: str = ""
    counterexample: tuple | None = None


@dataclass(frozen=True)
class AxiomReport:
    checks: tuple[CheckResult, ...]
    coverage: tuple[tuple[str, int], ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.status == PASS for c in self.checks)

    @property
    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if c.status == FAIL)

    @property
    def skipped(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if c.status == SKIP)

    def counterexamples(self) -> tuple[tuple, ...]:
        return tuple(c.counterexample for c in self.failures if c.counterexample)


class _Recorder:
    def __init__(self, fail_fast: bool):
        self.fail_fast = fail_fast
        self.checks: list[CheckResult] = []
        self.coverage: dict[str, int] = {}

    def bump(self, key: str, by: int = 1):
        self.coverage[key] = self.coverage.get(key, 0) + by

    def record(self, result: CheckResult) -> bool:
        """Returns True when verification should stop (fail-fast hit)."""
        self.checks.append(result)
        return self.fail_fast and result.status == FAIL

    def mark(self) -> int:
        return len(self.checks)

    def clean_since(self, mark: int) -> bool:
        return all(c.status != FAIL for c in self.checks[mark:])

    def report(self) -> AxiomReport:
        return AxiomReport(tuple(self.checks), tuple(sorted(self.coverage.items())))


def _semilattice_term_witness(alg: FiniteAlgebra, a: int, b: int, cap: int) -> bool:
    """Is there a binary term of alg acting on {a, b} as a semilattice with
    absorbing element b?  (Idempotence supplies the other two entries.)"""
    free = free_algebra(alg, 2, cap=cap)
    if not free.complete:
        raise CapExceeded(f"binary clone of {alg.name} incomplete")
    return any(t.apply(a, b) == b and t.apply(b, a) == b for t in free.elements)


def _structures(alg: FiniteAlgebra, subset_cap: int, cap: int):
    """(affine subuniverses, majority subuniverses, unknown-status subuniverses)."""
    affine, majority, unknown = [], [], []
    enum = enumerate_subuniverses(alg, cap=max(subset_cap, alg.size))
    for sub_set in enum.subuniverses:
        if len(sub_set) < 2:
            continue
        sub = induced_subalgebra(alg, sub_set)
        aff = is_affine_algebra(sub, cap=cap)
        maj = has_majority_term(sub, cap=cap)
        if aff is None or maj is None:
            unknown.append(sub_set)
            continue
        if aff:
            affine.append(sub_set)
        if maj:
            majority.append(sub_set)
    return affine, majority, unknown


def verify_edge_axioms(
    catalog: list[FiniteAlgebra],
    graphs: dict[FiniteAlgebra, EdgeGraph] | None = None,
    subset_cap: int = 8,
    cap: int = 4096,
    enumeration_bound: int = 16,
    fail_fast: bool = False,
) -> AxiomReport:
    """Check Base Axioms 1-3 (and their stronger variants), Homomorphism
    Axioms 1-2, and Relational Axioms 1-3 over a catalog of algebras.

    `graphs` may inject externally supplied (e.g. deliberately corrupted)
    edge graphs; missing entries are computed.  Every failure carries a fully
    concrete counterexample.
    """
    rec = _Recorder(fail_fast)
    graphs = dict(graphs or {})
    usable: list[FiniteAlgebra] = []
    for alg in catalog:
        if alg not in graphs:
            try:
                graphs[alg] = compute_edges(alg, cap=cap)
            except (CapExceeded, SEdgeMismatch) as exc:
                rec.record(CheckResult("edges", SKIP, f"{alg.name}: {exc}"))
                continue
        usable.append(alg)

    for alg in usable:
        if _base_axioms(alg, graphs[alg], rec, subset_cap, cap):
            return rec.report()

    groups: dict[tuple, list[FiniteAlgebra]] = {}
    for alg in usable:
        groups.setdefault(alg.signature, []).append(alg)
    for group in groups.values():
        for src, dst in itertools.product(group, repeat=2):
            if _homomorphism_axioms(src, dst, graphs, rec, cap):
                return rec.report()
        for left, right in itertools.product(group, repeat=2):
            if _relational_axioms_12(left, right, graphs, rec, enumeration_bound, subset_cap):
                return rec.report()
        for triple in itertools.product(group, repeat=3):
            if _relational_axiom_3(triple, graphs, rec):
                return rec.report()
    return rec.report()


def _base_axioms(alg, graph, rec, subset_cap, cap) -> bool:
    name = alg.name
    if graph.unknown:
        return rec.record(
            CheckResult("base-axioms", SKIP, f"{name}: {len(graph.unknown)} unknown edges")
        )
    try:
        affine, majority, unknown = _structures(alg, subset_cap, cap)
    except CapExceeded as exc:
        return rec.record(CheckResult("base-axioms", SKIP, f"{name}: {exc}"))
    for sub_set in unknown:
        rec.record(
            CheckResult(
                "base-axioms", SKIP, f"{name}: structure of {sorted(sub_set)} unknown"
            )
        )

    asm, as_, sm, s = (graph.edges(x) for x in ("asm", "as", "sm", "s"))
    rec.bump("affine-subuniverses", len(affine))
    rec.bump("majority-subuniverses", len(majority))

    mark = rec.mark()
    for sub_set in affine:
        for a, b in itertools.permutations(sorted(sub_set), 2):
            if (a, b) not in as_:
                if rec.record(CheckResult(
                    "base-axiom-1", FAIL,
                    f"{name}: affine subuniverse {sorted(sub_set)} misses as-edge ({a},{b})",
                    (name, "as", a, b),
                )):
                    return True
            if (a, b) in sm:
                if rec.record(CheckResult(
                    "stronger-base-axiom-1", FAIL,
                    f"{name}: sm-edge ({a},{b}) inside affine subuniverse {sorted(sub_set)}",
                    (name, "sm", a, b),
                )):
                    return True
    if rec.clean_since(mark):
        rec.record(CheckResult("base-axiom-1", PASS, f"{name}: {len(affine)} affine subuniverses"))

    mark = rec.mark()
    for sub_set in majority:
        for a, b in itertools.permutations(sorted(sub_set), 2):
            if (a, b) not in sm:
                if rec.record(CheckResult(
                    "base-axiom-2", FAIL,
                    f"{name}: majority subuniverse {sorted(sub_set)} misses sm-edge ({a},{b})",
                    (name, "sm", a, b),
                )):
                    return True
            if (a, b) in as_:
                if rec.record(CheckResult(
                    "stronger-base-axiom-2", FAIL,
                    f"{name}: as-edge ({a},{b}) inside majority subuniverse {sorted(sub_set)}",
                    (name, "as", a, b),
                )):
                    return True
    if rec.clean_since(mark):
        rec.record(CheckResult("base-axiom-2", PASS, f"{name}: {len(majority)} majority subuniverses"))

    mark = rec.mark()
    for a, b in itertools.permutations(range(alg.size), 2):
        try:
            witness = _semilattice_term_witness(alg, a, b, cap)
        except CapExceeded as exc:
            if rec.record(CheckResult("base-axiom-3", SKIP, f"{name}: {exc}")):
                return True
            continue
        rec.bump("semilattice-pairs-tested")
        if witness and (a, b) not in s:
            if rec.record(CheckResult(
                "base-axiom-3", FAIL,
                f"{name}: semilattice term on ({a},{b}) but no s-edge",
                (name, "s", a, b),
            )):
                return True
        if not witness and (a, b) in s:
            if rec.record(CheckResult(
                "stronger-base-axiom-3", FAIL,
                f"{name}: s-edge ({a},{b}) without a semilattice term witness",
                (name, "s", a, b),
            )):
                return True
        if (a, b) in s and (b, a) in asm:
            if rec.record(CheckResult(
                "stronger-base-axiom-3", FAIL,
                f"{name}: s-edge ({a},{b}) coexists with reverse asm-edge ({b},{a})",
                (name, "asm", b, a),
            )):
                return True
    if rec.clean_since(mark):
        rec.record(CheckResult("base-axiom-3", PASS, f"{name}: all ordered pairs checked"))
    return False


def _homomorphism_axioms(src, dst, graphs, rec, cap) -> bool:
    try:
        homs = homomorphisms_between(src, dst)
    except CapExceeded as exc:
        return rec.record(CheckResult("homomorphism-axioms", SKIP, f"{src.name}->{dst.name}: {exc}"))
    g_src, g_dst = graphs[src], graphs[dst]
    rec.bump("homomorphisms", len(homs))
    mark = rec.mark()
    for h in homs:
        for flavor in ("as", "sm"):
            for a, b in g_src.proper(flavor):
                if (h(a), h(b)) not in g_dst.edges(flavor):
                    if rec.record(CheckResult(
                        "homomorphism-axiom-1", FAIL,
                        f"{src.name}->{dst.name} via {h.mapping}: {flavor}-edge ({a},{b}) "
                        f"maps to missing ({h(a)},{h(b)})",
                        (src.name, dst.name, h.mapping, flavor, a, b),
                    )):
                        return True
        image = set(h.mapping)
        for flavor in ("as", "sm", "s"):
            for a in range(src.size):
                for d in sorted(image):
                    if d == h(a) or (h(a), d) not in g_dst.edges(flavor):
                        continue
                    candidates = [c for c in range(src.size) if h(c) == d]
                    sgs = {c: sg_closure(src, {a, c}) for c in candidates}
                    minimal = [
                        c for c in candidates
                        if not any(sgs[c2] < sgs[c] for c2 in candidates)
                    ]
                    for b_prime in minimal:
                        if (a, b_prime) not in g_src.edges(flavor):
                            if rec.record(CheckResult(
                                "homomorphism-axiom-2", FAIL,
                                f"{src.name}->{dst.name} via {h.mapping}: "
                                f"{flavor}-edge ({h(a)},{d}) does not lift to ({a},{b_prime})",
                                (src.name, dst.name, h.mapping, flavor, a, b_prime),
                            )):
                                return True
    if rec.clean_since(mark):
        rec.record(CheckResult(
            "homomorphism-axioms", PASS, f"{src.name}->{dst.name}: {len(homs)} homomorphisms"
        ))
    return False


def _product_subuniverses(left, right, bound, subset_cap):
    """All subuniverses of left x right as pair sets, or None above the bound."""
    if left.size * right.size > bound:
        return None
    prod = product_algebra(left, right)
    enum = enumerate_subuniverses(prod, cap=max(prod.size, subset_cap, 16))
    out = []
    for s in enum.subuniverses:
        out.append(frozenset((x // right.size, x % right.size) for x in s))
    return out


def _relational_axioms_12(left, right, graphs, rec, bound, subset_cap) -> bool:
    gl, gr = graphs[left], graphs[right]
    as_l = sorted(gl.proper("as"))
    as_r = sorted(gr.proper("as"))
    sm_r = sorted(gr.proper("sm"))
    subs = _product_subuniverses(left, right, bound, subset_cap)
    mode = "enumerated" if subs is not None else "generated"
    rec.bump(f"relational-products-{mode}")
    mark = rec.mark()

    def holds_1(a1, a2, b1, b2):
        if subs is not None:
            for r in subs:
                if (a1, b2) in r and (a2, b1) in r and (a2, b2) not in r:
                    return False, r
            return True, None
        rows = generate_subproduct([left, right], [(a1, b2), (a2, b1)])
        return ((a2, b2) in {tuple(r) for r in rows}), frozenset({(a1, b2), (a2, b1)})

    def holds_2(a1, a2, b1, b2):
        if subs is not None:
            for r in subs:
                if {(a1, b1), (a1, b2), (a2, b1)} <= r and (a2, b2) not in r:
                    return False, r
            return True, None
        rows = generate_subproduct([left, right], [(a1, b1), (a1, b2), (a2, b1)])
        return ((a2, b2) in {tuple(r) for r in rows}), frozenset({(a1, b1), (a1, b2), (a2, b1)})

    for (a1, a2), (b1, b2) in itertools.product(as_l, sm_r):
        rec.bump("relational-axiom-1-instances")
        ok, witness = holds_1(a1, a2, b1, b2)
        if not ok:
            if rec.record(CheckResult(
                "relational-axiom-1", FAIL,
                f"{left.name}x{right.name}: as({a1},{a2}), sm({b1},{b2}): "
                f"({a2},{b2}) missing from R={sorted(witness)}",
                (left.name, right.name, (a1, a2), (b1, b2), tuple(sorted(witness))),
            )):
                return True
    for (a1, a2), (b1, b2) in itertools.product(as_l, as_r):
        rec.bump("relational-axiom-2-instances")
        ok, witness = holds_2(a1, a2, b1, b2)
        if not ok:
            if rec.record(CheckResult(
                "relational-axiom-2", FAIL,
                f"{left.name}x{right.name}: as({a1},{a2}), as({b1},{b2}): "
                f"({a2},{b2}) missing from R={sorted(witness)}",
                (left.name, right.name, (a1, a2), (b1, b2), tuple(sorted(witness))),
            )):
                return True
    if rec.clean_since(mark):
        rec.record(CheckResult(
            "relational-axioms-1-2", PASS, f"{left.name}x{right.name} ({mode})"
        ))
    return False


def _relational_axiom_3(triple, graphs, rec) -> bool:
    a_alg, b_alg, c_alg = triple
    sms = [sorted(graphs[x].proper("sm")) for x in triple]
    mark = rec.mark()
    for (a1, a2), (b1, b2), (c1, c2) in itertools.product(*sms):
        rec.bump("relational-axiom-3-instances")
        seeds = [(a1, b2, c2), (a2, b1, c2), (a2, b2, c1)]
        rows = generate_subproduct([a_alg, b_alg, c_alg], seeds)
        if (a2, b2, c2) not in {tuple(r) for r in rows}:
            if rec.record(CheckResult(
                "relational-axiom-3", FAIL,
                f"{a_alg.name}x{b_alg.name}x{c_alg.name}: sm-edges "
                f"({a1},{a2}),({b1},{b2}),({c1},{c2}): ({a2},{b2},{c2}) missing "
                f"from the generated subproduct",
                (a_alg.name, b_alg.name, c_alg.name, (a1, a2), (b1, b2), (c1, c2)),
            )):
                return True
    if rec.clean_since(mark):
        rec.record(CheckResult(
            "relational-axiom-3", PASS, f"{a_alg.name}x{b_alg.name}x{c_alg.name}"
        ))
    return False


# ---------------------------------------------------------------------------
# Structural theorems for a single algebra


def verify_edge_theorems(
    alg: FiniteAlgebra,
    graph: EdgeGraph | None = None,
    subset_cap: int = 6,
    cap: int = 4096,
) -> AxiomReport:
    """Check the weak-connectivity, sink-component, antisymmetry, witness-term,
    and absorption-characterization consequences on one algebra."""
    rec = _Recorder(fail_fast=False)
    if graph is None:
        graph = compute_edges(alg, cap=cap)
    if graph.unknown:
        rec.record(CheckResult("edge-theorems", SKIP,
                               f"{alg.name}: {len(graph.unknown)} unknown edges"))
        return rec.report()

    asm_comp = component_analysis(graph, "asm")
    s_comp = component_analysis(graph, "s")
    asm_edges = graph.proper("asm")

    if asm_comp.is_weakly_connected():
        rec.record(CheckResult("weak-connectivity", PASS, alg.name))
    else:
        rec.record(CheckResult(
            "weak-connectivity", FAIL,
            f"{alg.name}: asm weak components {asm_comp.weak_components}",
            (alg.name, asm_comp.weak_components),
        ))

    s_min = sorted(s_comp.x_min)
    reach = {a: reachable(asm_edges, a) for a in s_min}
    bad = [
        (a, b) for a in s_min for b in s_min
        if b not in reach[a] or a not in reach[b]
    ]
    if bad:
        rec.record(CheckResult(
            "smin-mutually-asm-reachable", FAIL,
            f"{alg.name}: s-min pair {bad[0]} not mutually asm-reachable",
            (alg.name, bad[0]),
        ))
    else:
        rec.record(CheckResult("smin-mutually-asm-reachable", PASS,
                               f"{alg.name}: |s-min|={len(s_min)}"))

    asm_min = asm_comp.x_min
    single = len(asm_comp.sinks) == 1
    contains = set(s_min) <= set(asm_min)
    if single and contains:
        rec.record(CheckResult("asmmin-single-component", PASS, alg.name))
    else:
        rec.record(CheckResult(
            "asmmin-single-component", FAIL,
            f"{alg.name}: sinks={sorted(asm_comp.sinks)}, "
            f"s-min={s_min}, asm-min={sorted(asm_min)}",
            (alg.name, tuple(sorted(asm_min)), tuple(s_min)),
        ))

    viol = [
        (a, b) for a, b in graph.proper("s") if (b, a) in asm_edges
    ]
    if viol:
        rec.record(CheckResult(
            "noedge-antisymmetry", FAIL,
            f"{alg.name}: s-edge {viol[0]} has a reverse asm-edge",
            (alg.name, viol[0]),
        ))
    else:
        rec.record(CheckResult("noedge-antisymmetry", PASS, alg.name))

    free3 = free_algebra(alg, 3, cap=cap)
    missing = None
    for a, b in sorted(asm_edges):
        hit = False
        for t in free3.elements:
            ess = t.essential_coordinates()
            if 0 in ess and 2 in ess and any(
                t.apply(a, c, b) == b for c in range(alg.size)
            ):
                hit = True
                break
        if not hit:
            missing = (a, b)
            break
    if missing is not None and not free3.complete:
        rec.record(CheckResult("existsaterm-witness", SKIP,
                               f"{alg.name}: F(3) incomplete, edge {missing} unresolved"))
    elif missing is not None:
        rec.record(CheckResult(
            "existsaterm-witness", FAIL,
            f"{alg.name}: no ternary witness with essential outer variables "
            f"for asm-edge {missing}",
            (alg.name, missing),
        ))
    else:
        rec.record(CheckResult("existsaterm-witness", PASS,
                               f"{alg.name}: {len(asm_edges)} asm-edges witnessed"))

    if alg.size > subset_cap:
        rec.record(CheckResult("two-absorption-characterization", SKIP,
                               f"{alg.name}: size above subset cap {subset_cap}"))
    else:
        bad_subset = None
        for bits in range(1, 1 << alg.size):
            subset = frozenset(i for i in range(alg.size) if bits >> i & 1)
            try:
                decision = is_2_absorbing(alg, subset, graph=graph, cap=cap)
            except SEdgeMismatch as exc:
                bad_subset = (subset, str(exc))
                break
            if decision.absorbing != is_x_closed(graph, "asm", subset):
                bad_subset = (subset, "decision/closedness mismatch")
                break
        if bad_subset is None:
            rec.record(CheckResult("two-absorption-characterization", PASS, alg.name))
        else:
            rec.record(CheckResult(
                "two-absorption-characterization", FAIL,
                f"{alg.name}: subset {sorted(bad_subset[0])}: {bad_subset[1]}",
                (alg.name, tuple(sorted(bad_subset[0]))),
            ))
    return rec.report()
