"""Matrix operations on (D, B) pairs compiled into move scripts.

Every public operation returns the formula-computed pair together with a
script; before returning, the script is replayed and the end graph compared
with ``from_db`` of the claimed pair, so a returned script is always sound.

Working graphs keep the collected regular source at index 0.  Several
operations run "from both ends": the same forward steps are executed from
the claimed result, the two end graphs are required to coincide, and the
second half of the script is the inverted replay.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .core import DBPair, Graph, from_db, fresh_name, to_db, validate_pair
from .extnat import INF, ExtArithmeticError, add, sub
from .moves import Move, MoveScript, apply_move, invert_script


class OpError(ValueError):
    """An operation's precondition fails."""


class CompileError(RuntimeError):
    """A compiled script did not reproduce its formula (a defect, never user error)."""


OP_KINDS = ("rowAdd", "rowSub", "colAdd", "antennaAdd", "antennaSub")


def _idx(p: DBPair, v) -> int:
    if isinstance(v, int) and not isinstance(v, bool):
        if not 0 <= v < p.n:
            raise OpError(f"index {v} out of range")
        return v
    if v in p.names:
        return p.names.index(v)
    raise OpError(f"unknown vertex {v!r}")


def _pos(x) -> bool:
    return x is INF or x > 0


class _Tape:
    """A working graph together with the moves applied to it so far."""

    def __init__(self, g: Graph, sname: str, reserved=()):
        self.start = g
        self.g = g
        self.sname = sname
        self.script = MoveScript()
        self.reserved = set(map(str, reserved)) | {sname} | set(map(str, g.vertices))
        self.steps = 0

    @classmethod
    def of(cls, p: DBPair, reserved=()) -> "_Tape":
        return cls(_normal_graph(p), p.source_name, set(reserved) | set(map(str, p.names)))

    def move(self, kind: str, **params):
        mv = Move(kind, params)
        self.g = apply_move(self.g, mv)
        self.script.append(mv)

    def extend(self, script):
        for mv in script:
            self.g = apply_move(self.g, mv)
            self.script.append(mv)

    def fresh(self, base) -> str:
        name = fresh_name(f"{base}'", self.reserved | set(map(str, self.g.vertices)))
        self.reserved.add(name)
        return name

    @property
    def pair(self) -> DBPair:
        return to_db(self.g)

    def source(self) -> str:
        if self.g.n and self.g.vertices[0] == self.sname and self.g.is_regular_source(0):
            return self.sname
        raise OpError("no antennae available")

    def collect(self):
        srcs = self.g.regular_sources()
        if len(srcs) > 1:
            group = [self.g.vertices[i] for i in srcs]
            if self.sname in group:
                group.remove(self.sname)
                group.insert(0, self.sname)
            self.move("Oinv", group=group, name=self.sname, at=0)
        elif len(srcs) == 1:
            (i,) = srcs
            if i != 0 or self.g.vertices[i] != self.sname:
                self.move("O", vertex=self.g.vertices[i], parts=[list(self.g.row(i))], names=[self.sname], at=[0])

    def meet(self, target: DBPair, forward: Callable[["_Tape"], None]):
        """Finish at ``target`` by running ``forward`` from it and inverting."""
        other = _Tape(_normal_graph(target, self.sname), self.sname, self.reserved)
        forward(other)
        if other.g != self.g:
            raise CompileError("two-sided compilation did not meet")
        self.extend(invert_script(other.start, other.script))
        self.steps += other.steps


def _normal_graph(p: DBPair, sname: str | None = None) -> Graph:
    q = DBPair(p.b, p.d, p.names, source_name=sname or p.source_name, source_pos=0)
    return from_db(q)


def _run(p: DBPair, expected: DBPair, body: Callable[[_Tape], None]) -> tuple[DBPair, MoveScript]:
    """Execute ``body`` on the graph of ``p`` and certify the result is ``expected``."""
    problems = validate_pair(expected)
    if problems:
        raise OpError("result is not a valid pair: " + "; ".join(problems))
    start = from_db(p)
    tape = _Tape(start, p.source_name, p.names)
    if start.regular_sources() and start.vertices[0] != p.source_name:
        tape.collect()
    body(tape)
    end = from_db(expected)
    if end.regular_sources() and tape.g != end:
        i = end.regular_sources()[0]
        cur = tape.g
        if end.vertices[i] in cur.vertices:
            k = cur.index(end.vertices[i])
            tape.move("O", vertex=cur.vertices[k], parts=[list(cur.row(k))], names=[end.vertices[i]], at=[i])
    if tape.g != end:
        raise CompileError("compiled script does not reproduce the formula result")
    return expected, tape.script


# ---------------------------------------------------------------------------
# formulas


def _row_added(p: DBPair, i: int, j: int) -> DBPair:
    """Row ``j`` += row ``i``; ``d_j += d_i``."""
    b = [list(r) for r in p.b]
    b[j] = [add(x, y) for x, y in zip(p.b[j], p.b[i])]
    d = list(p.d)
    d[j] = add(d[j], d[i])
    return p.with_(b=b, d=d)


def _col_added(p: DBPair, i: int, j: int) -> DBPair:
    b = [list(r) for r in p.b]
    for r in range(p.n):
        b[r][j] = add(b[r][j], b[r][i])
    return p.with_(b=b)


def _antenna_added(p: DBPair, i: int, times: int = 1) -> DBPair:
    d = [x + times * p.b[r][i] for r, x in enumerate(p.d)]
    return p.with_(d=d)


# ---------------------------------------------------------------------------
# tape-level compilers; all vertex arguments are names


def _check_row_add_basic(p: DBPair, i: int, j: int):
    if i == j:
        raise OpError("source and target rows coincide")
    if not _pos(p.b[j][i]):
        raise OpError(f"b[{p.names[j]},{p.names[i]}] must be positive")
    if not _pos(p.column_sum(i)):
        raise OpError(f"column {p.names[i]} must have positive sum")


def _row_add_basic(t: _Tape, src, dst):
    p = t.pair
    _check_row_add_basic(p, _idx(p, src), _idx(p, dst))
    g = t.g
    row = list(g.row(g.index(src)))
    one = [0] * g.n
    k = g.index(dst)
    one[k] = 1
    rest = list(row)
    rest[k] = sub(row[k], 1)
    tmp = t.fresh(src)
    t.move("O", vertex=src, parts=[rest, one], names=[src, tmp])
    t.move("Rplus", vertex=tmp, name=t.fresh(t.sname), at=0)
    t.collect()
    t.steps += 1


def _check_col_add_basic(p: DBPair, i: int, j: int, extra: int = 2):
    if i == j:
        raise OpError("source and target columns coincide")
    if not p.is_regular(i):
        raise OpError(f"{p.names[i]} is singular")
    if not _pos(p.b[i][j]):
        raise OpError(f"b[{p.names[i]},{p.names[j]}] must be positive")
    for r in range(p.n):
        need = p.b[r][i] + (extra if r == i else 1)
        if p.d[r] < need:
            raise OpError(f"d[{p.names[r]}] = {p.d[r]} is below the required {need}")


def _split_source(t: _Tape, want: list) -> str:
    """Split the source so that one part emits exactly ``want``; return that part."""
    s = t.source()
    g = t.g
    row = list(g.row(0))
    rest = [sub(x, y) for x, y in zip(row, want)]
    if any(x is not INF and x < 0 for x in rest):
        raise OpError("not enough antennae")
    if all(x == 0 for x in rest):
        return s
    name = t.fresh(t.sname)
    t.move("O", vertex=s, parts=[want, rest], names=[name, s], at=[0, 1])
    return name


def _col_add_via_source(t: _Tape, src, dst, antenna: bool):
    g = t.g
    si = g.index(src)
    want = [0 if v == t.sname else g.adjacency[si][k] for k, v in enumerate(g.vertices)]
    tname = _split_source(t, want)
    g = t.g
    cols = [[g.adjacency[u][g.index(tname)], g.adjacency[u][g.index(src)]] for u in range(g.n)]
    di = g.index(dst)
    cols[di][0] += 1
    cols[di][1] = sub(cols[di][1], 1)
    if antenna:
        ri = g.index(t.sname)
        cols[ri][0] += 1
        cols[ri][1] = sub(cols[ri][1], 1)
    t.move("Iplus", group=[tname, src], columns=cols)
    t.move("Rplus", vertex=tname, name=t.fresh(t.sname), at=0)
    t.collect()


def _col_add_basic(t: _Tape, src, dst):
    p = t.pair
    _check_col_add_basic(p, _idx(p, src), _idx(p, dst))
    _col_add_via_source(t, src, dst, antenna=False)
    t.steps += 1


def _antenna_add_basic(t: _Tape, src):
    p = t.pair
    i = _idx(p, src)
    if not p.is_regular(i):
        raise OpError(f"{src} is singular")
    j = next((k for k in range(p.n) if k != i and _pos(p.b[i][k])), None)
    if j is None:
        raise OpError(f"no vertex other than {src} emits to it")
    _check_col_add_basic(p, i, j, extra=3)
    dst = p.names[j]
    _col_add_via_source(t, src, dst, antenna=True)
    # now (D + col, B with col dst += col src); undo the column change
    mid = _antenna_added(p, i)
    t.meet(mid, lambda o: _col_add_via_source(o, src, dst, antenna=False))
    t.steps += 1


def _shortest_path(p: DBPair, i: int, j: int) -> list[int] | None:
    prev = {i: None}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        for v in range(p.n):
            if v != u and v not in prev and _pos(p.b[v][u]):
                prev[v] = u
                if v == j:
                    path = [j]
                    while prev[path[-1]] is not None:
                        path.append(prev[path[-1]])
                    return path[::-1]
                queue.append(v)
    return None


def _chain_step(t: _Tape, v, dst):
    p = t.pair
    if _pos(p.column_sum(_idx(p, v))):
        _row_add_basic(t, v, dst)
    else:
        # a single edge, necessarily into dst: removing v folds its row into dst
        t.move("Rplus", vertex=v, name=t.fresh(t.sname), at=0)
        t.collect()
        t.steps += 1


def _row_add_improved(t: _Tape, src, dst):
    p = t.pair
    i, j = _idx(p, src), _idx(p, dst)
    if i == j:
        raise OpError("source and target rows coincide")
    if not _pos(p.column_sum(i)):
        raise OpError(f"{src} must emit at least two edges")
    path = _shortest_path(p, i, j)
    if path is None:
        raise OpError(f"no path from {src} to {dst}")
    names = [p.names[k] for k in path]
    for v in reversed(names[:-1]):
        _chain_step(t, v, dst)

    def again(o: _Tape):
        for v in reversed(names[1:-1]):
            _chain_step(o, v, dst)

    t.meet(_row_added(p, i, j), again)


def _row_add_any(t: _Tape, src, dst):
    p = t.pair
    try:
        _check_row_add_basic(p, _idx(p, src), _idx(p, dst))
    except OpError:
        _row_add_improved(t, src, dst)
    else:
        _row_add_basic(t, src, dst)


def _row_subtracted(p: DBPair, i: int, j: int, z) -> DBPair:
    if i == j:
        raise OpError("source and target rows coincide")
    if len(z) != p.n:
        raise OpError("z has the wrong length")
    if any(x != 0 and not p.is_regular(r) for r, x in enumerate(z)):
        raise OpError("z must vanish at singular indices")
    if any(x < 0 for x in z) or sum(1 for x in z if x) > 1:
        raise OpError("z must be a nonnegative multiple of a basis vector")
    regular = set(p.regular_indices())
    d = [p.d[r] + sum(p.b[r][c] * z[c] for c in regular if z[c]) for r in range(p.n)]
    d[j] = d[j] - d[i]
    b = [list(r) for r in p.b]
    try:
        b[j] = [sub(p.b[j][c], p.b[i][c], inf_minus_inf=c not in regular) for c in range(p.n)]
    except ExtArithmeticError as exc:
        raise OpError(f"subtraction undefined: {exc}") from None
    return p.with_(b=b, d=d)


def _row_sub(t: _Tape, src, dst, z):
    p = t.pair
    i, j = _idx(p, src), _idx(p, dst)
    target = _row_subtracted(p, i, j, z)
    problems = validate_pair(target)
    if problems:
        raise OpError("result violates pair invariants: " + "; ".join(problems))
    for c, k in enumerate(z):
        for _ in range(k):
            _antenna_add_canonical(t, p.names[c])
    t.meet(target, lambda o: _row_add_any(o, src, dst))


def _antenna_add_canonical(t: _Tape, src):
    p = t.pair
    i = _idx(p, src)
    if not p.is_regular(i):
        raise OpError(f"{src} is singular")
    col = p.column(i)
    if all(x == 0 for x in col):
        return
    if all(x == 0 for x in p.b[i]):
        _case_lone_receiver(t, src)
    elif p.b[i][i] == 0:
        _case_zero_diagonal(t, p, i)
    elif _pos(p.b[i][i]):
        _case_positive_diagonal(t, p, i)
    else:
        raise OpError(f"{src} supports no loop")


def _case_lone_receiver(t: _Tape, src):
    """Row ``src`` vanishes: one loop, in-edges only from the source."""
    p = t.pair
    c1 = p.d[_idx(p, src)] - 1
    g = t.g
    w = g.index(src)
    row = list(g.row(w))
    if c1 == 0:
        loop = [0] * g.n
        loop[w] = row[w]
        exits = [x - y for x, y in zip(row, loop)]
        tmp = t.fresh(src)
        t.move("O", vertex=src, parts=[exits, loop], names=[tmp, src])
        t.move("Rplus", vertex=tmp, name=t.fresh(t.sname), at=0)
        t.collect()
        return
    tmp = t.fresh(src)
    t.move("O", vertex=src, parts=[row], names=[tmp])
    # lengthen the loop at tmp, one antenna per inserted vertex
    chain = []
    prev = tmp
    for k in range(c1):
        g = t.g
        want = [1 if v == tmp else 0 for v in g.vertices]
        tsrc = _split_source(t, want)
        g = t.g
        order = [v for v in g.vertices if v != tsrc]
        last = k == c1 - 1
        name = src if last else t.fresh(src)
        pos = order.index(tmp) if last else len(order)
        order.insert(pos, name)
        vin = [1 if v == prev else 0 for v in order]
        vout = [1 if v == tmp else 0 for v in order]
        spec = {"source": tsrc, "vertex": name, "position": pos, "in": vin, "out": vout}
        t.move("Rplusinv", spec=spec)
        chain.append(name)
        prev = name
    g = t.g
    r = list(g.row(g.index(tmp)))
    into = [0] * g.n
    into[g.index(chain[0])] = 1
    exits = [x - y for x, y in zip(r, into)]
    x1, x2 = t.fresh(src), t.fresh(src)
    t.move("O", vertex=tmp, parts=[exits, into], names=[x1, x2])
    t.move("Rplus", vertex=x1, name=t.fresh(t.sname), at=0)
    for v in [x2] + chain[:-1]:
        t.move("Rplus", vertex=v, name=t.fresh(t.sname), at=0)
    t.collect()


def _case_zero_diagonal(t: _Tape, p: DBPair, i: int):
    k = next(c for c in range(p.n) if c != i and _pos(p.b[i][c]))
    s, ks = p.names[i], p.names[k]
    base = p.d[i] + 2 * p.d[k]
    mults = {}
    for j in range(p.n):
        if j != i and p.b[j][i] > 0:
            need = p.b[j][i] + 1 - p.d[j]
            mults[p.names[j]] = max(0, -(-need // base))

    def prepare(o: _Tape):
        _row_add_basic(o, ks, s)
        _row_add_basic(o, ks, s)
        for name, m in mults.items():
            for _ in range(m):
                _row_add_basic(o, s, name)

    prepare(t)
    _antenna_add_basic(t, s)
    t.meet(_antenna_added(p, i), prepare)


def _claim(t: _Tape, w1, w2, n: int):
    """Add ``n`` antennae to ``w2`` in a freshly split loop pair."""
    if n <= 0:
        return
    start = t.pair

    def lift(o: _Tape):
        _row_add_basic(o, w1, w2)
        _row_add_basic(o, w1, w2)
        _row_add_basic(o, w2, w1)

    lift(t)
    for _ in range(n):
        _antenna_add_basic(t, w1)
    j = _idx(start, w2)
    d = list(start.d)
    d[j] += n
    t.meet(start.with_(d=d), lift)


def _case_positive_diagonal(t: _Tape, p: DBPair, i: int):
    src = p.names[i]
    g = t.g
    w = g.index(src)
    row = list(g.row(w))
    one = [0] * g.n
    one[w] = 1
    rest = [sub(x, y) for x, y in zip(row, one)]
    w1, w2 = t.fresh(src), t.fresh(src)
    t.move("O", vertex=src, parts=[one, rest], names=[w1, w2])
    split = t.pair
    b11, d1 = p.b[i][i], p.d[i]
    others = [j for j in range(p.n) if j != i and p.b[j][i] > 0]
    n = max(1, 2 * b11 - 2 * d1, b11 + 2 - d1)
    for j in others:
        n = max(n, p.b[j][i] + b11 - p.d[j] - d1)
    targets = [w1] + [p.names[j] for j in others]
    _claim(t, w1, w2, n)

    def spread(o: _Tape):
        for name in targets:
            _row_add_basic(o, w2, name)

    spread(t)
    _antenna_add_basic(t, w2)
    j2 = _idx(split, w2)
    added = _antenna_added(split, j2)
    d = list(added.d)
    d[j2] += n
    t.meet(added.with_(d=d), spread)
    d[j2] -= n - 1
    t.meet(added.with_(d=d), lambda o: _claim(o, w1, w2, n - 1))
    t.move("Oinv", group=[w1, w2], name=src)


# ---------------------------------------------------------------------------
# public operations


def _require_canonical(p: DBPair):
    from .canonical import check_canonical

    rep = check_canonical(p)
    if not rep.ok:
        raise OpError("pair is not in augmented canonical form: " + rep.summary())


def normalize(g: Graph) -> tuple[Graph, MoveScript]:
    """Moves from ``g`` to ``from_db(to_db(g))``: regular sources merged and placed."""
    target = from_db(to_db(g))
    if g == target:
        return g, MoveScript()
    p = to_db(g)
    t = _Tape(g, p.source_name, p.names)
    t.collect()
    k = t.g.index(p.source_name)
    if k != p.source_pos:
        t.move("O", vertex=p.source_name, parts=[list(t.g.row(k))], names=[p.source_name], at=[p.source_pos])
    if t.g != target:
        raise CompileError("source normalization failed")
    return t.g, t.script


def row_add_basic(p: DBPair, src, dst) -> tuple[DBPair, MoveScript]:
    """Row ``dst`` += row ``src`` using only (O) and (R+)."""
    i, j = _idx(p, src), _idx(p, dst)
    _check_row_add_basic(p, i, j)
    return _run(p, _row_added(p, i, j), lambda t: _row_add_basic(t, p.names[i], p.names[j]))


def col_add_basic(p: DBPair, src, dst) -> tuple[DBPair, MoveScript]:
    """Column ``dst`` += column ``src``; ``D`` unchanged."""
    i, j = _idx(p, src), _idx(p, dst)
    _check_col_add_basic(p, i, j)
    return _run(p, _col_added(p, i, j), lambda t: _col_add_basic(t, p.names[i], p.names[j]))


def antenna_add_basic(p: DBPair, src) -> tuple[DBPair, MoveScript]:
    """``D`` += column ``src``, under the generous antenna hypotheses."""
    i = _idx(p, src)
    return _run(p, _antenna_added(p, i), lambda t: _antenna_add_basic(t, p.names[i]))


def row_add_improved(p: DBPair, src, dst) -> tuple[DBPair, MoveScript]:
    """Row ``dst`` += row ``src`` when ``src`` has a loop and a path to ``dst``."""
    i, j = _idx(p, src), _idx(p, dst)
    if i == j:
        raise OpError("source and target rows coincide")
    if not p.has_loop(i):
        raise OpError(f"{p.names[i]} supports no loop")
    if _shortest_path(p, i, j) is None:
        raise OpError(f"no path from {p.names[i]} to {p.names[j]}")
    return _run(p, _row_added(p, i, j), lambda t: _row_add_improved(t, p.names[i], p.names[j]))


def row_sub(p: DBPair, src, dst, z=None) -> tuple[DBPair, MoveScript]:
    """Row ``dst`` -= row ``src`` after adding ``B z`` to ``D``.

    A nonzero ``z`` needs augmented canonical form.
    """
    i, j = _idx(p, src), _idx(p, dst)
    z = [0] * p.n if z is None else list(z)
    target = _row_subtracted(p, i, j, z)
    problems = validate_pair(target)
    if problems:
        raise OpError("result violates pair invariants: " + "; ".join(problems))
    if any(z):
        _require_canonical(p)
    return _run(p, target, lambda t: _row_sub(t, p.names[i], p.names[j], z))


def antenna_add_canonical(p: DBPair, src) -> tuple[DBPair, MoveScript]:
    i = _idx(p, src)
    _require_canonical(p)
    if not p.is_regular(i):
        raise OpError(f"{p.names[i]} is singular")
    return _run(p, _antenna_added(p, i), lambda t: _antenna_add_canonical(t, p.names[i]))


def antenna_sub_canonical(p: DBPair, src) -> tuple[DBPair, MoveScript]:
    i = _idx(p, src)
    _require_canonical(p)
    if not p.is_regular(i):
        raise OpError(f"{p.names[i]} is singular")
    target = _antenna_added(p, i, -1)
    bad = [p.names[r] for r in range(p.n) if target.d[r] < 1]
    if bad:
        raise OpError(f"antenna count would drop below 1 at {', '.join(map(str, bad))}")
    name = p.names[i]
    return _run(p, target, lambda t: t.meet(target, lambda o: _antenna_add_canonical(o, name)))


def _col_add_improved(t: _Tape, src, dst):
    for v in (src, src, dst, dst):
        _antenna_add_canonical(t, v)
    _col_add_basic(t, src, dst)
    for _ in range(2):
        p = t.pair
        target = _antenna_added(p, _idx(p, dst), -1)
        t.meet(target, lambda o: _antenna_add_canonical(o, dst))


def col_add_improved(p: DBPair, src, dst) -> tuple[DBPair, MoveScript]:
    """Column ``dst`` += column ``src`` for regular ``src``, ``dst`` with ``b[src,dst] > 0``."""
    i, j = _idx(p, src), _idx(p, dst)
    if i == j:
        raise OpError("source and target columns coincide")
    _require_canonical(p)
    for k in (i, j):
        if not p.is_regular(k):
            raise OpError(f"{p.names[k]} is singular")
    if not _pos(p.b[i][j]):
        raise OpError(f"b[{p.names[i]},{p.names[j]}] must be positive")
    return _run(p, _col_added(p, i, j), lambda t: _col_add_improved(t, p.names[i], p.names[j]))


# ---------------------------------------------------------------------------
# operation records and composite certificates


@dataclass(frozen=True)
class OpRecord:
    kind: str
    src: int
    dst: int
    z: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in OP_KINDS:
            raise OpError(f"unknown operation {self.kind!r}")

    def to_json(self) -> dict:
        return {"op": self.kind, "src": self.src, "dst": self.dst, "z": list(self.z)}

    @classmethod
    def from_json(cls, obj: dict) -> "OpRecord":
        extra = set(obj) - {"op", "src", "dst", "z"}
        if extra:
            raise OpError(f"unexpected keys {sorted(extra)}")
        return cls(obj["op"], obj["src"], obj.get("dst", obj["src"]), tuple(obj.get("z") or ()))


def apply_op(p: DBPair, rec: OpRecord, *, improved: bool = True) -> tuple[DBPair, MoveScript]:
    """Run one recorded operation, preferring the general (canonical-form) versions."""
    if rec.kind == "rowAdd":
        try:
            return row_add_basic(p, rec.src, rec.dst)
        except OpError:
            if not improved:
                raise
            return row_add_improved(p, rec.src, rec.dst)
    if rec.kind == "rowSub":
        return row_sub(p, rec.src, rec.dst, rec.z or None)
    if rec.kind == "colAdd":
        try:
            return col_add_basic(p, rec.src, rec.dst)
        except OpError:
            if not improved:
                raise
            return col_add_improved(p, rec.src, rec.dst)
    if rec.kind == "antennaAdd":
        try:
            return antenna_add_basic(p, rec.src)
        except OpError:
            if not improved:
                raise
            return antenna_add_canonical(p, rec.src)
    return antenna_sub_canonical(p, rec.src)


def _eye(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def composite_certificate(p: DBPair, records) -> tuple[list, list]:
    """``(U, V)`` with ``U B•_start = B•_end V`` for a sequence of operations.

    Row operations contribute left elementaries; a column addition ``B -> B F``
    contributes ``F^-1`` on the right.  Antenna operations contribute nothing.
    """
    n = p.n
    reg = p.regular_indices()
    pos = {c: k for k, c in enumerate(reg)}
    u = _eye(n)
    v = _eye(len(reg))
    for rec in records:
        i, j = _idx(p, rec.src), _idx(p, rec.dst)
        if rec.kind in ("rowAdd", "rowSub"):
            c = 1 if rec.kind == "rowAdd" else -1
            u[j] = [x + c * y for x, y in zip(u[j], u[i])]
        elif rec.kind == "colAdd":
            # V <- F^-1 V, F^-1 = I - e_src e_dst^T
            a, b = pos[i], pos[j]
            v[a] = [x - y for x, y in zip(v[a], v[b])]
    return u, v
