"""Graphs over extended naturals, the (D, B) encoding, and component structure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .extnat import INF, INT64_MAX, Ext, add, check, sub


class GraphError(ValueError):
    """An object violates the invariants of its type."""


def _freeze(rows) -> tuple:
    return tuple(tuple(r) for r in rows)


def fresh_name(base: str, taken) -> str:
    if base not in taken:
        return base
    k = 1
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


@dataclass(frozen=True)
class Graph:
    """Finitely many vertices; entry ``adjacency[i][j]`` counts edges i -> j."""

    vertices: tuple
    adjacency: tuple

    @classmethod
    def make(cls, vertices: Sequence, adjacency) -> "Graph":
        g = cls(tuple(vertices), _freeze(adjacency))
        problems = validate_graph(g)
        if problems:
            raise GraphError("; ".join(problems))
        return g

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, v) -> int:
        if isinstance(v, int) and not isinstance(v, bool):
            if not 0 <= v < self.n:
                raise IndexError(f"vertex index {v} out of range")
            return v
        try:
            return self.vertices.index(v)
        except ValueError:
            raise KeyError(f"no vertex named {v!r}") from None

    def row(self, i: int) -> tuple:
        return self.adjacency[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.adjacency)

    def out_degree(self, i: int) -> Ext:
        s: Ext = 0
        for x in self.adjacency[i]:
            s = add(s, x)
        return s

    def is_sink(self, i: int) -> bool:
        return all(x == 0 for x in self.adjacency[i])

    def is_infinite_emitter(self, i: int) -> bool:
        return any(x is INF for x in self.adjacency[i])

    def is_regular(self, i: int) -> bool:
        return not self.is_sink(i) and not self.is_infinite_emitter(i)

    def receives(self, j: int) -> bool:
        return any(r[j] != 0 for r in self.adjacency)

    def is_regular_source(self, i: int) -> bool:
        return self.is_regular(i) and not self.receives(i)

    def regular_sources(self) -> list[int]:
        return [i for i in range(self.n) if self.is_regular_source(i)]

    def __str__(self):
        width = max(len(str(x)) for r in self.adjacency for x in r)
        lines = []
        for name, r in zip(self.vertices, self.adjacency):
            lines.append(f"{name}: [" + " ".join(str(x).rjust(width) for x in r) + "]")
        return "\n".join(lines)


def validate_graph(g: Graph) -> list[str]:
    problems = []
    names = list(g.vertices)
    n = len(names)
    if n < 1:
        problems.append("no vertices")
    if len(set(names)) != n:
        problems.append("duplicate vertex names")
    adj = g.adjacency
    if len(adj) != n or any(len(r) != n for r in adj):
        problems.append("not square")
        return problems
    for i, r in enumerate(adj):
        for j, x in enumerate(r):
            if x is INF or (type(x) is int and 0 <= x <= INT64_MAX):
                continue
            if not isinstance(x, int) or isinstance(x, bool):
                problems.append(f"entry ({i},{j}) is not an integer or inf")
            elif x < 0:
                problems.append(f"negative multiplicity at ({i},{j})")
            else:
                try:
                    check(x)
                except OverflowError:
                    problems.append(f"entry ({i},{j}) exceeds 64-bit range")
    return problems


REGULAR = "regular"
REGULAR_SOURCE = "regular-source"
SINK = "sink"
INFINITE_EMITTER = "infinite-emitter"


def vertex_class(g: Graph, v) -> str:
    i = g.index(v)
    if g.is_sink(i):
        return SINK
    if g.is_infinite_emitter(i):
        return INFINITE_EMITTER
    if not g.receives(i):
        return REGULAR_SOURCE
    return REGULAR


# ---------------------------------------------------------------------------
# (D, B) encoding


@dataclass(frozen=True)
class DBPair:
    """``b[i][j] = a[j][i] - delta_ij`` and ``d[i] = c[i] + 1``.

    The regular source never has an index; its edges live in ``d``.
    ``source_name`` and ``source_pos`` only say where ``from_db`` puts it.
    """

    b: tuple
    d: tuple
    names: tuple = None
    source_name: str = field(default="s", compare=False)
    source_pos: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "b", _freeze(self.b))
        object.__setattr__(self, "d", tuple(self.d))
        if self.names is None:
            object.__setattr__(self, "names", tuple(f"v{i + 1}" for i in range(len(self.d))))
        else:
            object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def make(cls, b, d, names=None, **kw) -> "DBPair":
        p = cls(b, d, names, **kw)
        problems = validate_pair(p)
        if problems:
            raise GraphError("; ".join(problems))
        return p

    @property
    def n(self) -> int:
        return len(self.d)

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.b)

    def is_sink(self, j: int) -> bool:
        return all(self.b[i][j] == (-1 if i == j else 0) for i in range(self.n))

    def is_infinite_emitter(self, j: int) -> bool:
        return any(self.b[i][j] is INF for i in range(self.n))

    def is_regular(self, j: int) -> bool:
        return not self.is_sink(j) and not self.is_infinite_emitter(j)

    def regular_indices(self) -> list[int]:
        return [j for j in range(self.n) if self.is_regular(j)]

    def singular_indices(self) -> list[int]:
        return [j for j in range(self.n) if not self.is_regular(j)]

    def has_loop(self, i: int) -> bool:
        return self.b[i][i] is INF or self.b[i][i] >= 0

    def column_sum(self, j: int) -> Ext:
        s: Ext = 0
        for i in range(self.n):
            s = add(s, self.b[i][j])
        return s

    def a_matrix(self) -> tuple:
        n = self.n
        return tuple(
            tuple(add(self.b[j][i], 1 if i == j else 0) for j in range(n)) for i in range(n)
        )

    def with_(self, b=None, d=None) -> "DBPair":
        return DBPair(
            self.b if b is None else b,
            self.d if d is None else d,
            self.names,
            source_name=self.source_name,
            source_pos=self.source_pos,
        )

    def permuted(self, order: Sequence[int]) -> "DBPair":
        """Reindex so that new index k is old index ``order[k]``."""
        return DBPair(
            [[self.b[i][j] for j in order] for i in order],
            [self.d[i] for i in order],
            [self.names[i] for i in order],
            source_name=self.source_name,
            source_pos=self.source_pos,
        )

    def reindexed(self, names: Sequence) -> "DBPair":
        if sorted(map(str, names)) != sorted(map(str, self.names)):
            raise GraphError("name sets differ")
        return self.permuted([self.names.index(v) for v in names])

    def __str__(self):
        cells = [[str(x) for x in r] for r in self.b]
        width = max((len(c) for r in cells for c in r), default=1)
        dw = max(len(str(x)) for x in self.d)
        return "\n".join(
            f"({str(self.d[i]).rjust(dw)}) ("
            + " ".join(c.rjust(width) for c in cells[i])
            + ")"
            for i in range(self.n)
        )


def validate_pair(p: DBPair) -> list[str]:
    problems = []
    n = len(p.d)
    if n < 1:
        return ["no non-source vertices"]
    if len(p.b) != n or any(len(r) != n for r in p.b):
        return ["B is not square or does not match D"]
    if len(p.names) != n or len(set(p.names)) != n:
        problems.append("vertex names missing or repeated")
    if p.source_name in p.names:
        problems.append("source name collides with a vertex name")
    for i in range(n):
        di = p.d[i]
        if di is INF or not isinstance(di, int) or di < 1:
            problems.append(f"d[{i}] must be a finite integer >= 1")
        for j in range(n):
            x = p.b[i][j]
            if x is INF:
                continue
            if not isinstance(x, int) or isinstance(x, bool):
                problems.append(f"b[{i}][{j}] is not an integer or inf")
            elif i != j and x < 0:
                problems.append(f"b[{i}][{j}] negative off the diagonal")
            elif i == j and x < -1:
                problems.append(f"b[{i}][{i}] below -1")
    if problems:
        return problems
    for i in range(n):
        # an index whose vertex receives nothing would be a regular source
        if (
            p.is_regular(i)
            and p.d[i] == 1
            and all(p.b[i][j] == (-1 if i == j else 0) for j in range(n))
        ):
            problems.append(f"index {i} is a regular source; its edges belong in D")
    return problems


def collect_sources(g: Graph):
    """Merge all regular sources into one by reverse outsplitting.

    Returns ``(graph, script)``; the script holds one ``Oinv`` move, or is
    empty when there is at most one regular source.
    """
    from .moves import Move, MoveScript, apply_move

    srcs = g.regular_sources()
    if len(srcs) <= 1:
        return g, MoveScript()
    group = [g.vertices[i] for i in srcs]
    mv = Move("Oinv", {"group": group, "name": group[0]})
    return apply_move(g, mv), MoveScript([mv])


def to_db(g: Graph) -> DBPair:
    problems = validate_graph(g)
    if problems:
        raise GraphError("; ".join(problems))
    srcs = set(g.regular_sources())
    keep = [i for i in range(g.n) if i not in srcs]
    if not keep:
        raise GraphError("graph has no non-source vertices")
    c = [0] * len(keep)
    for s in sorted(srcs):
        for k, j in enumerate(keep):
            c[k] = check(c[k] + g.adjacency[s][j])
    n = len(keep)
    b = [
        [sub(g.adjacency[keep[j]][keep[i]], 1) if i == j else g.adjacency[keep[j]][keep[i]] for j in range(n)]
        for i in range(n)
    ]
    names = tuple(g.vertices[i] for i in keep)
    if srcs:
        first = min(srcs)
        src_name = g.vertices[first]
        src_pos = sum(1 for i in keep if i < first)
    else:
        src_name, src_pos = fresh_name("s", set(names)), 0
    return DBPair(b, [x + 1 for x in c], names, source_name=src_name, source_pos=src_pos)


def from_db(p: DBPair) -> Graph:
    problems = validate_pair(p)
    if problems:
        raise GraphError("; ".join(problems))
    a = [list(r) for r in p.a_matrix()]
    names = list(p.names)
    if any(x != 1 for x in p.d):
        pos = min(max(p.source_pos, 0), p.n)
        for r in a:
            r.insert(pos, 0)
        a.insert(pos, [x - 1 for x in p.d])
        a[pos].insert(pos, 0)
        names.insert(pos, p.source_name)
    return Graph(tuple(names), _freeze(a))


# ---------------------------------------------------------------------------
# components


@dataclass(frozen=True)
class ComponentStructure:
    """Components in block order.

    ``leq`` holds pairs ``(c, e)`` with ``c <= e``: some vertex of ``e`` has
    a path to some vertex of ``c`` (or ``c == e``).  Blocks are listed with
    larger (upstream) components first and singular vertices last inside
    each block, so ``order`` is a linear extension of the reversed preorder.
    """

    blocks: tuple
    comp_of: tuple
    leq: frozenset
    regular_count: tuple
    singular_count: tuple
    cyclic: tuple

    @property
    def order(self) -> tuple:
        return tuple(i for blk in self.blocks for i in blk)

    def __len__(self):
        return len(self.blocks)

    def sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    def le(self, c: int, e: int) -> bool:
        return (c, e) in self.leq


def reachability(adj) -> list[list[bool]]:
    """reach[i][j]: a path of length >= 1 from i to j."""
    n = len(adj)
    reach = [[adj[i][j] != 0 for j in range(n)] for i in range(n)]
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return reach


def _structure(adj, regular: Sequence[bool]) -> ComponentStructure:
    n = len(adj)
    reach = reachability(adj)
    comp_id = [-1] * n
    members: list[list[int]] = []
    for i in range(n):
        if comp_id[i] >= 0:
            continue
        grp = [j for j in range(n) if j == i or (reach[i][j] and reach[j][i])]
        for j in grp:
            comp_id[j] = len(members)
        members.append(grp)
    m = len(members)
    above = [set() for _ in range(m)]  # above[c]: components e != c with e -> c
    for i in range(n):
        for j in range(n):
            if reach[j][i] and comp_id[i] != comp_id[j]:
                above[comp_id[i]].add(comp_id[j])
    # Kahn: emit components none of whose strict upstream is pending
    placed: list[int] = []
    pending = set(range(m))
    while pending:
        ready = [c for c in pending if not (above[c] & pending)]
        c = min(ready, key=lambda c: min(members[c]))
        placed.append(c)
        pending.remove(c)
    renum = {old: new for new, old in enumerate(placed)}
    blocks = []
    for old in placed:
        grp = members[old]
        blocks.append(tuple([i for i in grp if regular[i]] + [i for i in grp if not regular[i]]))
    comp_of = [0] * n
    for c, blk in enumerate(blocks):
        for i in blk:
            comp_of[i] = c
    leq = {(c, c) for c in range(m)}
    for c_old in range(m):
        for e_old in above[c_old]:
            leq.add((renum[c_old], renum[e_old]))
    cyclic = tuple(any(reach[i][i] for i in blk) for blk in blocks)
    return ComponentStructure(
        blocks=tuple(blocks),
        comp_of=tuple(comp_of),
        leq=frozenset(leq),
        regular_count=tuple(sum(1 for i in blk if regular[i]) for blk in blocks),
        singular_count=tuple(sum(1 for i in blk if not regular[i]) for blk in blocks),
        cyclic=cyclic,
    )


def components(obj) -> ComponentStructure:
    """Component structure of a :class:`Graph` or of the vertices of a :class:`DBPair`."""
    if isinstance(obj, DBPair):
        return _structure(obj.a_matrix(), [obj.is_regular(j) for j in range(obj.n)])
    return _structure(obj.adjacency, [obj.is_regular(i) for i in range(obj.n)])


def in_block_pattern(x, struct: ComponentStructure, indices: Sequence[int] | None = None) -> bool:
    """Membership in MG: block (c, e) may be nonzero only when c <= e.

    ``indices`` restricts rows and columns to a subset of vertex indices
    (the regular ones, for the column-side matrix of a certificate).
    """
    idx = list(range(len(struct.comp_of))) if indices is None else list(indices)
    for r, i in enumerate(idx):
        for s, j in enumerate(idx):
            if x[r][s] != 0 and not struct.le(struct.comp_of[i], struct.comp_of[j]):
                return False
    return True


def block_ordered(p: DBPair) -> DBPair:
    """``p`` reindexed into its canonical block order."""
    return p.permuted(components(p).order)
