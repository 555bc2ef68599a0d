"""AIGER 1.9 reader and writer, combinational subset.

Both the ASCII (``aag``) and binary (``aig``) encodings are supported.
Latches are rejected: the optimization engine works on combinational
netlists only.  Parsing does not apply structural hashing, so redundant
nodes present in a file survive the round trip and the reported original
size matches the source.  The comment section is kept on the parsed graph
and dropped when writing.
"""

from __future__ import annotations

from .aig import Aig, AigError, lit_node, make_lit

__all__ = ["AigerError", "parse_aiger", "parse_aiger_file",
           "write_aiger", "write_aiger_file"]


class AigerError(AigError):
    """Malformed or unsupported AIGER input."""


def _parse_header(line: bytes) -> tuple[str, list[int]]:
    parts = line.split()
    if len(parts) < 6 or parts[0] not in (b"aag", b"aig"):
        raise AigerError(f"malformed header: {line!r}")
    try:
        fields = [int(p) for p in parts[1:]]
    except ValueError as exc:
        raise AigerError(f"malformed header: {line!r}") from exc
    if len(fields) > 9 or any(f < 0 for f in fields):
        raise AigerError(f"malformed header: {line!r}")
    m, i, l, o, a = fields[:5]
    if l != 0:
        raise AigerError(f"{l} latches present; only combinational AIGs are supported")
    if any(fields[5:]):
        raise AigerError("B/C/J/F header extensions are not supported")
    if m != i + a:
        raise AigerError(f"header M={m} does not equal I+A={i + a}")
    return parts[0].decode(), fields[:5]


def parse_aiger(data: bytes | str) -> Aig:
    """Parse AIGER bytes (format auto-detected from the header keyword)."""
    if isinstance(data, str):
        data = data.encode()
    newline = data.find(b"\n")
    if newline < 0:
        raise AigerError("truncated input: no header line")
    fmt, (m, n_i, _l, n_o, n_a) = _parse_header(data[:newline])
    body = data[newline + 1:]
    if fmt == "aag":
        return _parse_ascii(body, n_i, n_o, n_a)
    return _parse_binary(body, n_i, n_o, n_a)


def parse_aiger_file(path) -> Aig:
    with open(path, "rb") as fh:
        return parse_aiger(fh.read())


def _take_lines(body: bytes, count: int, what: str) -> tuple[list[bytes], bytes]:
    lines = []
    rest = body
    for _ in range(count):
        nl = rest.find(b"\n")
        if nl < 0:
            raise AigerError(f"truncated body while reading {what}")
        lines.append(rest[:nl])
        rest = rest[nl + 1:]
    return lines, rest


def _finish(g: Aig, rest: bytes, po_lits: list[int]) -> Aig:
    for lit in po_lits:
        if lit_node(lit) >= g.num_nodes:
            raise AigerError(f"output literal {lit} out of range")
        g.add_po(lit)
    # symbol table lines are skipped; the comment section is preserved
    comment_lines = []
    in_comment = False
    while rest:
        nl = rest.find(b"\n")
        line = rest if nl < 0 else rest[:nl]
        rest = b"" if nl < 0 else rest[nl + 1:]
        if in_comment:
            comment_lines.append(line.decode(errors="replace"))
        elif line == b"c":
            in_comment = True
        elif line[:1] in (b"i", b"o", b"l") or line == b"":
            continue
        else:
            raise AigerError(f"unexpected trailer line: {line!r}")
    if in_comment:
        g.comment = "\n".join(comment_lines)
    return g


def _parse_ascii(body: bytes, n_i: int, n_o: int, n_a: int) -> Aig:
    g = Aig()
    pi_lines, body = _take_lines(body, n_i, "inputs")
    for k, line in enumerate(pi_lines):
        lit = g.add_pi()
        try:
            declared = int(line)
        except ValueError as exc:
            raise AigerError(f"bad input line: {line!r}") from exc
        if declared != lit:
            raise AigerError(f"input {k} declared as literal {declared}, expected {lit}")
    po_lines, body = _take_lines(body, n_o, "outputs")
    try:
        po_lits = [int(line) for line in po_lines]
    except ValueError as exc:
        raise AigerError("bad output literal") from exc
    and_lines, body = _take_lines(body, n_a, "and gates")
    for k, line in enumerate(and_lines):
        parts = line.split()
        if len(parts) != 3:
            raise AigerError(f"bad and line: {line!r}")
        lhs, rhs0, rhs1 = (int(p) for p in parts)
        expect = make_lit(1 + n_i + k)
        if lhs != expect:
            raise AigerError(f"and gate {k} has lhs {lhs}, expected {expect}")
        node = lit_node(lhs)
        for rhs in (rhs0, rhs1):
            if lit_node(rhs) >= node:
                raise AigerError(f"fanin {rhs} of node {node} not topologically ordered")
        g.add_and_raw(rhs0, rhs1)
    return _finish(g, body, po_lits)


def _parse_binary(body: bytes, n_i: int, n_o: int, n_a: int) -> Aig:
    g = Aig()
    for _ in range(n_i):
        g.add_pi()
    po_lines, body = _take_lines(body, n_o, "outputs")
    try:
        po_lits = [int(line) for line in po_lines]
    except ValueError as exc:
        raise AigerError("bad output literal") from exc
    pos = 0

    def decode_varint() -> int:
        nonlocal pos
        value = 0
        shift = 0
        while True:
            if pos >= len(body):
                raise AigerError("truncated body while reading and gates")
            byte = body[pos]
            pos += 1
            value |= (byte & 0x7F) << shift
            if not byte & 0x80:
                return value
            shift += 7

    for k in range(n_a):
        lhs = make_lit(1 + n_i + k)
        delta0 = decode_varint()
        delta1 = decode_varint()
        rhs0 = lhs - delta0
        rhs1 = rhs0 - delta1
        if rhs0 < 0 or rhs1 < 0 or lit_node(rhs0) >= lit_node(lhs):
            raise AigerError(f"bad delta encoding at and gate {k}")
        g.add_and_raw(rhs0, rhs1)
    return _finish(g, body[pos:], po_lits)


def write_aiger(g: Aig, fmt: str = "aag") -> bytes:
    """Serialize the alive part of the graph, compactly re-indexed.

    ``fmt`` is ``"aag"`` (ASCII) or ``"aig"`` (binary).  Dead nodes are
    dropped and the remaining AND nodes are renumbered in topological order,
    so ``parse(write(g))`` is functionally equivalent to ``g``.
    """
    if fmt not in ("aag", "aig"):
        raise AigerError(f"unknown format {fmt!r}")
    order = [n for n in g.topological_order() if g.is_and(n)]
    index = {0: 0}
    for k, pi in enumerate(g.pis):
        index[pi] = 1 + k
    for k, n in enumerate(order):
        index[n] = 1 + g.n_pis + k

    def out_lit(lit: int) -> int:
        return make_lit(index[lit_node(lit)], bool(lit & 1))

    n_i, n_a, n_o = g.n_pis, len(order), g.n_pos
    lines = [f"{fmt} {n_i + n_a} {n_i} 0 {n_o} {n_a}".encode()]
    if fmt == "aag":
        for k in range(n_i):
            lines.append(str(2 * (1 + k)).encode())
    for po in g.pos:
        lines.append(str(out_lit(po)).encode())
    text = b"\n".join(lines) + b"\n"
    if fmt == "aag":
        gate_lines = []
        for n in order:
            f0, f1 = g.fanins(n)
            a, b = sorted((out_lit(f0), out_lit(f1)))
            gate_lines.append(f"{make_lit(index[n])} {a} {b}".encode())
        if gate_lines:
            text += b"\n".join(gate_lines) + b"\n"
        return text
    chunks = [text]
    for n in order:
        f0, f1 = g.fanins(n)
        rhs0, rhs1 = sorted((out_lit(f0), out_lit(f1)), reverse=True)
        lhs = make_lit(index[n])
        chunks.append(_encode_varint(lhs - rhs0))
        chunks.append(_encode_varint(rhs0 - rhs1))
    return b"".join(chunks)


def _encode_varint(value: int) -> bytes:
    out = bytearray()
    while value & ~0x7F:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)
    return bytes(out)


def write_aiger_file(g: Aig, path, fmt: str | None = None) -> None:
    if fmt is None:
        fmt = "aig" if str(path).endswith(".aig") else "aag"
    with open(path, "wb") as fh:
        fh.write(write_aiger(g, fmt))
