"""Line-oriented file formats for algebras and CSP instances, plus DOT output.

Formats are UTF-8 with `#` comments.  Operation tables are emitted row-major
(leftmost argument most significant) with a fixed wrapping, so parse(emit(x))
is the identity byte-for-byte on re-emission.
"""

from __future__ import annotations

from .algebra import FiniteAlgebra, OperationTable
from .catalog import builtin_algebras
from .csp import Instance
from .edges import EdgeGraph
from .errors import ParseError


def _tokens(text: str):
    """Yield (line_number, tokens) for nonempty, non-comment lines."""
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield ln, line.split()


def parse_algebras(text: str) -> list[FiniteAlgebra]:
    """Parse one or more `algebra` blocks."""
    out: list[FiniteAlgebra] = []
    lines = list(_tokens(text))
    i = 0
    while i < len(lines):
        ln, toks = lines[i]
        if toks[0] != "algebra" or len(toks) != 2:
            raise ParseError(f"expected 'algebra <name>', got {' '.join(toks)!r}", ln)
        name = toks[1]
        i += 1
        if i >= len(lines) or lines[i][1][0] != "size" or len(lines[i][1]) != 2:
            raise ParseError("expected 'size <n>'", lines[i][0] if i < len(lines) else ln)
        try:
            size = int(lines[i][1][1])
        except ValueError:
            raise ParseError("size must be an integer", lines[i][0])
        if size < 1:
            raise ParseError("size must be >= 1", lines[i][0])
        i += 1
        ops: list[OperationTable] = []
        while i < len(lines) and lines[i][1][0] == "op":
            ln_op, toks_op = lines[i]
            if len(toks_op) != 3:
                raise ParseError("expected 'op <symbol> <arity>'", ln_op)
            symbol = toks_op[1]
            try:
                arity = int(toks_op[2])
            except ValueError:
                raise ParseError("arity must be an integer", ln_op)
            if arity < 1:
                raise ParseError("arity must be >= 1", ln_op)
            needed = size**arity
            values: list[int] = []
            i += 1
            while i < len(lines) and len(values) < needed:
                ln_v, toks_v = lines[i]
                if toks_v[0] in ("op", "end", "algebra"):
                    break
                for t in toks_v:
                    try:
                        values.append(int(t))
                    except ValueError:
                        raise ParseError(f"expected integer, got {t!r}", ln_v)
                i += 1
            if len(values) != needed:
                raise ParseError(
                    f"operation {symbol}: expected {needed} entries, got {len(values)}",
                    ln_op,
                )
            bad = [v for v in values if not 0 <= v < size]
            if bad:
                raise ParseError(f"operation {symbol}: entry {bad[0]} out of range", ln_op)
            ops.append(OperationTable(symbol, arity, tuple(values)))
        if not ops:
            raise ParseError(f"algebra {name}: needs at least one operation", ln)
        if i >= len(lines) or lines[i][1] != ["end"]:
            raise ParseError(
                f"algebra {name}: expected 'end'", lines[i][0] if i < len(lines) else ln
            )
        i += 1
        try:
            out.append(FiniteAlgebra(name, size, tuple(ops)))
        except ValueError as exc:
            raise ParseError(f"algebra {name}: {exc}", ln)
    if not out:
        raise ParseError("no algebra blocks found", 1)
    return out


def emit_algebra(alg: FiniteAlgebra) -> str:
    lines = [f"algebra {alg.name}", f"size {alg.size}"]
    for op in alg.ops:
        lines.append(f"op {op.symbol} {op.arity}")
        row = max(alg.size, 1)
        for start in range(0, len(op.table), row):
            lines.append(" ".join(str(v) for v in op.table[start : start + row]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def emit_algebras(algs: list[FiniteAlgebra]) -> str:
    return "\n".join(emit_algebra(a).rstrip("\n") for a in algs) + "\n"


def parse_instance(text: str, algebras: dict[str, FiniteAlgebra]) -> Instance:
    """Parse an `instance` block; domain names resolve against `algebras`."""
    lines = list(_tokens(text))
    if not lines or lines[0][1][0] != "instance" or len(lines[0][1]) != 2:
        raise ParseError("expected 'instance <name>'", lines[0][0] if lines else 1)
    name = lines[0][1][1]
    i = 1
    domains: list[tuple[str, FiniteAlgebra]] = []
    constraints: list[tuple[tuple[str, ...], set]] = []
    seen_vars: set[str] = set()
    while i < len(lines):
        ln, toks = lines[i]
        if toks[0] == "var":
            if len(toks) != 3:
                raise ParseError("expected 'var <name> <algebra>'", ln)
            vname, aname = toks[1], toks[2]
            if vname in seen_vars:
                raise ParseError(f"duplicate variable {vname!r}", ln)
            if aname not in algebras:
                raise ParseError(f"unknown algebra {aname!r}", ln)
            seen_vars.add(vname)
            domains.append((vname, algebras[aname]))
            i += 1
        elif toks[0] == "constraint":
            scope = tuple(toks[1:])
            if not scope:
                raise ParseError("constraint needs a scope", ln)
            for v in scope:
                if v not in seen_vars:
                    raise ParseError(f"unknown variable {v!r} in scope", ln)
            tuples = set()
            i += 1
            while i < len(lines) and lines[i][1] != ["end"]:
                ln_t, toks_t = lines[i]
                if len(toks_t) != len(scope):
                    raise ParseError(
                        f"tuple has {len(toks_t)} entries, scope has {len(scope)}", ln_t
                    )
                try:
                    tuples.add(tuple(int(t) for t in toks_t))
                except ValueError:
                    raise ParseError("tuples must be integers", ln_t)
                i += 1
            if i >= len(lines):
                raise ParseError("constraint not terminated by 'end'", ln)
            i += 1  # consume the constraint's end
            constraints.append((scope, tuples))
        elif toks == ["end"]:
            i += 1
            try:
                return Instance.make(name, domains, constraints)
            except ParseError:
                raise
            except Exception as exc:  # normalization errors surface as parse errors
                raise ParseError(str(exc), ln)
        else:
            raise ParseError(f"unexpected {' '.join(toks)!r}", ln)
    raise ParseError("instance not terminated by 'end'", lines[-1][0])


def emit_instance(instance: Instance) -> str:
    lines = [f"instance {instance.name}"]
    for v, alg in instance.domain_list:
        lines.append(f"var {v} {alg.name}")
    for c in instance.constraints:
        lines.append("constraint " + " ".join(c.scope))
        for t in sorted(c.tuples):
            lines.append(" ".join(str(x) for x in t))
        lines.append("end")
    lines.append("end")
    return "\n".join(lines) + "\n"


def resolve_algebras(files_text: list[str]) -> dict[str, FiniteAlgebra]:
    """File-defined algebras (later files win) layered over the built-ins."""
    resolved = dict(builtin_algebras())
    for text in files_text:
        for alg in parse_algebras(text):
            resolved[alg.name] = alg
    return resolved


def emit_dot(graph: EdgeGraph) -> str:
    """DOT view: s solid, as-only dashed, sm-only dotted; unknowns omitted and
    listed in a comment header so diffs stay meaningful."""
    lines = []
    unknown = sorted(graph.unknown)
    if unknown:
        lines.append("// unknown edges omitted: " + " ".join(f"({a},{b})" for a, b in unknown))
    lines.append(f'digraph "{graph.algebra.name}" {{')
    lines.append("  // legend: s=solid, as-only=dashed, sm-only=dotted")
    for v in range(graph.algebra.size):
        lines.append(f'  {v} [label="{v}"];')
    s = graph.proper("s")
    as_only = graph.proper("as") - s
    sm_only = graph.proper("sm") - s
    for a, b in sorted(s):
        lines.append(f"  {a} -> {b} [style=solid];")
    for a, b in sorted(as_only):
        lines.append(f"  {a} -> {b} [style=dashed];")
    for a, b in sorted(sm_only):
        lines.append(f"  {a} -> {b} [style=dotted];")
    lines.append("}")
    return "\n".join(lines) + "\n"
