"""Primitive geometric moves on graphs and replayable move scripts.

Partitions are multiplicity vectors indexed by the vertex order of the graph
the move acts on; an entry at the split vertex itself counts loops.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .core import Graph, GraphError, _freeze, to_db, validate_graph
from .extnat import INF, ExtArithmeticError, add, dump, mul, parse, sub, total


class MoveError(ValueError):
    """A move's precondition does not hold."""


def _vec(v, n, what):
    v = tuple(v)
    if len(v) != n:
        raise MoveError(f"{what} has length {len(v)}, expected {n}")
    for x in v:
        if x is not INF and (not isinstance(x, int) or isinstance(x, bool) or x < 0):
            raise MoveError(f"{what} entry {x!r} is not a multiplicity")
    return v


def _has_inf(v) -> bool:
    return any(x is INF for x in v)


def _place(others: list, placed: Sequence[tuple]) -> list:
    out = list(others)
    for idx, item in sorted(placed, key=lambda t: t[0]):
        if not 0 <= idx <= len(out):
            raise MoveError(f"position {idx} out of range")
        out.insert(idx, item)
    return out


# ---------------------------------------------------------------------------
# (O) and its inverse


def outsplit(g: Graph, w, parts, names=None, at=None) -> Graph:
    """Split ``w`` by distributing its out-edges over ``parts``.

    Every copy receives a full copy of the edges into ``w``.  Copies are
    placed consecutively where ``w`` was, or at the explicit result indices
    ``at``.
    """
    i = g.index(w)
    n = g.n
    if g.is_sink(i):
        raise MoveError(f"(O) needs a non-sink; {g.vertices[i]!r} is a sink")
    parts = [_vec(p, n, "part") for p in parts]
    if not parts:
        raise MoveError("(O) needs at least one part")
    for p in parts:
        if all(x == 0 for x in p):
            raise MoveError("(O) parts must be nonempty")
    if sum(1 for p in parts if _has_inf(p)) > 1:
        raise MoveError("(O) allows at most one infinite part")
    for v in range(n):
        if total(p[v] for p in parts) != g.adjacency[i][v]:
            raise MoveError(f"parts do not sum to the out-row of {g.vertices[i]!r} at column {v}")
    k = len(parts)
    wname = g.vertices[i]
    if names is None:
        names = [f"{wname}^{j + 1}" for j in range(k)]
    names = list(names)
    others = [g.vertices[v] for v in range(n) if v != i]
    if len(names) != k or len(set(names)) != k or set(names) & set(others):
        raise MoveError("copy names must be fresh and one per part")
    if at is None:
        at = [i + j for j in range(k)]
    order = _place(others, list(zip(at, names)))
    m = len(order)
    a = [[0] * m for _ in range(m)]
    old_index = {g.vertices[v]: v for v in range(n)}
    copies = {name: j for j, name in enumerate(names)}
    for r, rname in enumerate(order):
        for c, cname in enumerate(order):
            if rname in copies:
                src_part = parts[copies[rname]]
                col = i if cname in copies else old_index[cname]
                a[r][c] = src_part[col]
            else:
                u = old_index[rname]
                col = i if cname in copies else old_index[cname]
                a[r][c] = g.adjacency[u][col]
    return Graph(tuple(order), _freeze(a))


def outsplit_inverse(g: Graph, group, name=None, at=None) -> Graph:
    """Amalgamate ``group`` (identical in-columns) into one vertex; out-rows add."""
    idx = [g.index(v) for v in group]
    if len(set(idx)) != len(idx) or not idx:
        raise MoveError("group must list distinct vertices")
    base = g.col(idx[0])
    for j in idx[1:]:
        if g.col(j) != base:
            raise MoveError("group members must have identical incoming columns")
    for j in idx:
        if g.is_sink(j):
            raise MoveError(f"{g.vertices[j]!r} is a sink; it cannot come from (O)")
    if sum(1 for j in idx if g.is_infinite_emitter(j)) > 1:
        raise MoveError("more than one infinite part")
    gset = set(idx)
    name = g.vertices[idx[0]] if name is None else name
    keep = [v for v in range(g.n) if v not in gset]
    if name in {g.vertices[v] for v in keep}:
        raise MoveError(f"name {name!r} already used")
    if at is None:
        at = sum(1 for v in keep if v < idx[0])
    order_idx = list(keep)
    order_idx.insert(at, None)
    m = len(order_idx)
    a = [[0] * m for _ in range(m)]
    for r, u in enumerate(order_idx):
        for c, v in enumerate(order_idx):
            if u is None and v is None:
                a[r][c] = total(g.adjacency[j][idx[0]] for j in idx)
            elif u is None:
                a[r][c] = total(g.adjacency[j][v] for j in idx)
            elif v is None:
                a[r][c] = g.adjacency[u][idx[0]]
            else:
                a[r][c] = g.adjacency[u][v]
    names = tuple(name if u is None else g.vertices[u] for u in order_idx)
    return Graph(names, _freeze(a))


# ---------------------------------------------------------------------------
# (I-) and (I+)


def insplit(g: Graph, w, parts, names=None) -> Graph:
    """Plain in-split at a regular vertex.  Not a legal script move."""
    i = g.index(w)
    n = g.n
    if not g.is_regular(i):
        raise MoveError(f"(I-) needs a regular vertex; {g.vertices[i]!r} is singular")
    parts = [_vec(p, n, "part") for p in parts]
    if not parts:
        raise MoveError("(I-) needs at least one part")
    for u in range(n):
        if total(p[u] for p in parts) != g.adjacency[u][i]:
            raise MoveError(f"parts do not sum to the in-column of {g.vertices[i]!r} at row {u}")
    k = len(parts)
    wname = g.vertices[i]
    names = [f"{wname}^{j + 1}" for j in range(k)] if names is None else list(names)
    others = [g.vertices[v] for v in range(n) if v != i]
    if len(names) != k or len(set(names)) != k or set(names) & set(others):
        raise MoveError("copy names must be fresh and one per part")
    order = others[:i] + names + others[i:]
    old_index = {g.vertices[v]: v for v in range(n)}
    copies = {name: j for j, name in enumerate(names)}
    m = len(order)
    a = [[0] * m for _ in range(m)]
    for r, rname in enumerate(order):
        u = i if rname in copies else old_index[rname]
        for c, cname in enumerate(order):
            if cname in copies:
                a[r][c] = parts[copies[cname]][u]
            else:
                a[r][c] = g.adjacency[u][old_index[cname]]
    return Graph(tuple(order), _freeze(a))


def iplus_witness(g: Graph, group) -> Graph:
    """The common graph both sides of an (I+) move are in-splits of.

    The group is amalgamated into a single vertex named after its first member.
    """
    idx = [g.index(v) for v in group]
    if not idx or len(set(idx)) != len(idx):
        raise MoveError("group must list distinct vertices")
    row = g.row(idx[0])
    for j in idx[1:]:
        if g.row(j) != row:
            raise MoveError("group members must have identical out-rows")
    out = total(row)
    if out is INF or out == 0:
        raise MoveError("amalgamated vertex would be singular")
    gset = set(idx)
    keep = [v for v in range(g.n) if v not in gset]
    order = keep[:]
    pos = sum(1 for v in keep if v < idx[0])
    order.insert(pos, None)
    m = len(order)
    a = [[0] * m for _ in range(m)]
    for r, u in enumerate(order):
        for c, v in enumerate(order):
            if u is None and v is None:
                a[r][c] = total(row[j] for j in idx)
            elif u is None:
                a[r][c] = row[v]
            elif v is None:
                a[r][c] = total(g.adjacency[u][j] for j in idx)
            else:
                a[r][c] = g.adjacency[u][v]
    names = tuple(g.vertices[idx[0]] if u is None else g.vertices[u] for u in order)
    return Graph(names, _freeze(a))


def iplus_redistribute(g: Graph, group, new_in_columns) -> Graph:
    """Replace the in-columns of ``group``, keeping the common future fixed.

    ``new_in_columns[u][k]`` is the new number of edges from vertex ``u`` to
    ``group[k]``.
    """
    idx = [g.index(v) for v in group]
    iplus_witness(g, group)
    n, k = g.n, len(idx)
    cols = [tuple(r) for r in new_in_columns]
    if len(cols) != n or any(len(r) != k for r in cols):
        raise MoveError(f"new columns must be a {n}x{k} matrix")
    for r in cols:
        _vec(r, k, "column row")
    old = [[g.adjacency[u][j] for j in idx] for u in range(n)]
    for t in range(k):
        for label, mat in (("old", old), ("new", cols)):
            vals = {mat[u][t] for u in idx}
            if len(vals) > 1:
                raise MoveError(f"{label} column {t} is not constant on the group rows")
    for u in range(n):
        if total(cols[u]) != total(old[u]):
            raise MoveError(f"edge total from {g.vertices[u]!r} into the group changed")
    a = [list(r) for r in g.adjacency]
    for u in range(n):
        for t, j in enumerate(idx):
            a[u][j] = cols[u][t]
    return Graph(g.vertices, _freeze(a))


# ---------------------------------------------------------------------------
# (R+) and its inverse


def rplus(g: Graph, w, name=None, at: int = 0) -> Graph:
    """Remove a regular loopless vertex, shortcutting two-step paths through it.

    Its out-edges survive as edges from a new source placed at index ``at``.
    """
    i = g.index(w)
    if not g.is_regular(i):
        raise MoveError(f"(R+) needs a regular vertex; {g.vertices[i]!r} is singular")
    if g.adjacency[i][i] != 0:
        raise MoveError(f"(R+) vertex {g.vertices[i]!r} supports a loop")
    keep = [v for v in range(g.n) if v != i]
    name = f"{g.vertices[i]}~" if name is None else name
    if name in {g.vertices[v] for v in keep}:
        raise MoveError(f"name {name!r} already used")
    rows = []
    for u in keep:
        au = g.adjacency[u]
        rows.append([add(au[v], mul(au[i], g.adjacency[i][v])) for v in keep])
    new_row = [g.adjacency[i][v] for v in keep]
    order = [g.vertices[v] for v in keep]
    if not 0 <= at <= len(keep):
        raise MoveError("source position out of range")
    for r in rows:
        r.insert(at, 0)
    new_row.insert(at, 0)
    rows.insert(at, new_row)
    order.insert(at, name)
    return Graph(tuple(order), _freeze(rows))


def rplus_inverse(g: Graph, spec: dict) -> Graph:
    """Insert a loopless regular vertex, consuming the source ``spec['source']``.

    ``spec['in']`` and ``spec['out']`` are indexed by the result's vertex
    order, in which the new vertex ``spec['vertex']`` sits at
    ``spec['position']``.
    """
    t = g.index(spec["source"])
    w = spec["vertex"]
    if not g.is_regular_source(t):
        raise MoveError(f"{g.vertices[t]!r} is not a regular source")
    keep = [v for v in range(g.n) if v != t]
    order = [g.vertices[v] for v in keep]
    if w in order:
        raise MoveError(f"name {w!r} already used")
    pos = spec.get("position", len(order))
    if not 0 <= pos <= len(order):
        raise MoveError("position out of range")
    order.insert(pos, w)
    m = len(order)
    vin = _vec(spec["in"], m, "in-column")
    vout = _vec(spec["out"], m, "out-row")
    if vin[pos] != 0 or vout[pos] != 0:
        raise MoveError("(R+) in reverse cannot create a loop")
    old = {name: v for v, name in enumerate(g.vertices)}
    for c, cname in enumerate(order):
        if cname != w and vout[c] != g.adjacency[t][old[cname]]:
            raise MoveError("out-row differs from the consumed source's edges")
    a = [[0] * m for _ in range(m)]
    for r, rname in enumerate(order):
        for c, cname in enumerate(order):
            if rname == w:
                a[r][c] = vout[c]
            elif cname == w:
                a[r][c] = vin[r]
            else:
                try:
                    x = sub(g.adjacency[old[rname]][old[cname]], mul(vin[r], vout[c]), inf_minus_inf=True)
                except ExtArithmeticError as exc:
                    raise MoveError(f"(R+) in reverse leaves a negative entry: {exc}") from None
                if x is not INF and x < 0:
                    raise MoveError("(R+) in reverse leaves a negative entry")
                a[r][c] = x
    h = Graph(tuple(order), _freeze(a))
    back = rplus(h, w, name=g.vertices[t], at=t)
    if back != g:
        raise MoveError("round-trip check failed: (R+) does not reproduce the graph")
    return h


# ---------------------------------------------------------------------------
# scripts


MOVE_KINDS = ("O", "Oinv", "Iplus", "Rplus", "Rplusinv")


@dataclass(frozen=True)
class Move:
    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in MOVE_KINDS:
            raise MoveError(f"unknown or forbidden move kind {self.kind!r}")

    def to_json(self) -> dict:
        out = {"move": self.kind}
        for key, val in self.params.items():
            out[key] = _dump_any(val)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Move":
        obj = dict(obj)
        kind = obj.pop("move", None)
        if kind not in MOVE_KINDS:
            raise MoveError(f"unknown or forbidden move kind {kind!r}")
        allowed = {
            "O": {"vertex", "parts", "names", "at"},
            "Oinv": {"group", "name", "at"},
            "Iplus": {"group", "columns"},
            "Rplus": {"vertex", "name", "at"},
            "Rplusinv": {"spec"},
        }[kind]
        extra = set(obj) - allowed
        if extra:
            raise MoveError(f"unexpected keys for {kind}: {sorted(extra)}")
        params = {}
        for key, val in obj.items():
            if key in ("parts", "columns"):
                params[key] = [[parse(x) for x in r] for r in val]
            elif key == "spec":
                spec = dict(val)
                for vk in ("in", "out"):
                    spec[vk] = [parse(x) for x in spec[vk]]
                params[key] = spec
            else:
                params[key] = val
        return cls(kind, params)


def _dump_any(val):
    if isinstance(val, dict):
        return {k: _dump_any(v) for k, v in val.items()}
    if isinstance(val, (list, tuple)):
        return [_dump_any(v) for v in val]
    if val is INF:
        return dump(val)
    return val


@dataclass
class MoveScript:
    steps: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)

    def __getitem__(self, k):
        return self.steps[k]

    def append(self, mv: Move):
        self.steps.append(mv)

    def extend(self, other):
        self.steps.extend(other.steps if isinstance(other, MoveScript) else other)

    def kinds(self) -> set:
        return {m.kind for m in self.steps}

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(m.to_json(), sort_keys=True, separators=(",", ":")) + "\n" for m in self.steps
        )

    @classmethod
    def from_jsonl(cls, text: str) -> "MoveScript":
        steps = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                steps.append(Move.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise MoveError(f"line {lineno}: {exc}") from None
        return cls(steps)


class ScriptError(ValueError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"step {index}: {reason}")
        self.index = index
        self.reason = reason


def apply_move(g: Graph, mv: Move) -> Graph:
    p = mv.params
    if mv.kind == "O":
        out = outsplit(g, p["vertex"], p["parts"], p.get("names"), p.get("at"))
    elif mv.kind == "Oinv":
        out = outsplit_inverse(g, p["group"], p.get("name"), p.get("at"))
    elif mv.kind == "Iplus":
        out = iplus_redistribute(g, p["group"], p["columns"])
    elif mv.kind == "Rplus":
        out = rplus(g, p["vertex"], p.get("name"), p.get("at", 0))
    else:
        out = rplus_inverse(g, p["spec"])
    problems = validate_graph(out)
    if problems:
        raise MoveError("; ".join(problems))
    return out


@dataclass(frozen=True)
class StepRecord:
    index: int
    move: Move
    graph: Graph
    witness: Graph | None = None

    @property
    def pair(self):
        return to_db(self.graph)


def apply_script(g: Graph, script, log: bool = False):
    """Replay ``script`` on ``g``.  Returns ``(graph, records)``."""
    records = []
    for k, mv in enumerate(script):
        try:
            witness = iplus_witness(g, mv.params["group"]) if (log and mv.kind == "Iplus") else None
            g = apply_move(g, mv)
        except (MoveError, GraphError, KeyError, IndexError, ExtArithmeticError, OverflowError) as exc:
            raise ScriptError(k, str(exc)) from None
        if log:
            records.append(StepRecord(k, mv, g, witness))
    return g, records


def invert_move(before: Graph, mv: Move, after: Graph | None = None) -> Move:
    """The move undoing ``mv`` when it is applied to ``before``."""
    p = mv.params
    if after is None:
        after = apply_move(before, mv)
    if mv.kind == "O":
        w = before.vertices[before.index(p["vertex"])]
        names = list(p["names"]) if p.get("names") else [f"{w}^{j + 1}" for j in range(len(p["parts"]))]
        return Move("Oinv", {"group": names, "name": w, "at": before.index(w)})
    if mv.kind == "Oinv":
        group = [before.vertices[before.index(v)] for v in p["group"]]
        name = after.vertices[after.index(p.get("name") or group[0])]
        gidx = [before.index(v) for v in group]
        parts = []
        for j in gidx:
            part = []
            for v in after.vertices:
                part.append(before.adjacency[j][gidx[0]] if v == name else before.adjacency[j][before.index(v)])
            parts.append(part)
        return Move("O", {"vertex": name, "parts": parts, "names": group, "at": gidx})
    if mv.kind == "Iplus":
        idx = [before.index(v) for v in p["group"]]
        old = [[before.adjacency[u][j] for j in idx] for u in range(before.n)]
        return Move("Iplus", {"group": list(p["group"]), "columns": old})
    if mv.kind == "Rplus":
        i = before.index(p["vertex"])
        w = before.vertices[i]
        name = p.get("name") or f"{w}~"
        spec = {
            "source": name,
            "vertex": w,
            "position": i,
            "in": list(before.col(i)),
            "out": list(before.row(i)),
        }
        return Move("Rplusinv", {"spec": spec})
    spec = p["spec"]
    return Move("Rplus", {"vertex": spec["vertex"], "name": spec["source"], "at": before.index(spec["source"])})


def invert_script(g: Graph, script) -> MoveScript:
    """Script taking the end graph of ``script`` (replayed from ``g``) back to ``g``."""
    inv = []
    for mv in script:
        after = apply_move(g, mv)
        inv.append(invert_move(g, mv, after))
        g = after
    return MoveScript(list(reversed(inv)))
