"""Augmented canonical form: checking, establishing, and certificates."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import DBPair, components, from_db, reachability
from .extnat import INF
from .ktheory import det, matmul, mr, solve_in_image
from .matops import CompileError, _row_add_basic, _row_add_improved, _Tape
from .moves import MoveScript

LARGE = "large-positive"
LONE_LOOP = "(0)"
LONE_SINGULAR = "(-1)"
IRREGULAR = "none"

CONDITIONS = ("I", "II", "III", "IV")


def _pos(x) -> bool:
    return x is INF or x > 0


@dataclass
class CanonicalReport:
    failures: dict = field(default_factory=lambda: {c: [] for c in CONDITIONS})
    trichotomy: tuple = ()

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def passed(self, cond: str) -> bool:
        return not self.failures[cond]

    def summary(self) -> str:
        bad = [f"({c}) fails at {', '.join(self.failures[c][:3])}" for c in CONDITIONS if self.failures[c]]
        return "; ".join(bad) if bad else "canonical"

    def to_json(self) -> dict:
        return {
            "canonical": self.ok,
            "conditions": {c: {"pass": not w, "witnesses": list(w)} for c, w in self.failures.items()},
            "trichotomy": list(self.trichotomy),
        }


def _return_paths(a, i: int, members) -> int:
    """Number of first-return paths at ``i``, capped at 2."""
    loop = a[i][i]
    if loop is INF or loop >= 2:
        return 2
    inner = [v for v in members if v != i]
    # any cycle avoiding i inside the component yields unboundedly many returns
    sub = [[a[u][v] if u in inner and v in inner else 0 for v in range(len(a))] for u in range(len(a))]
    reach = reachability(sub)
    if any(reach[v][v] for v in inner):
        return 2 if len(inner) else loop
    memo: dict[int, int] = {}

    def paths_to_i(u: int) -> int:  # paths u -> ... -> i through inner vertices
        if u in memo:
            return memo[u]
        total = a[u][i]
        total = 2 if total is INF else total
        for v in inner:
            if a[u][v]:
                m = 2 if a[u][v] is INF else a[u][v]
                total += m * paths_to_i(v)
            if total >= 2:
                break
        memo[u] = min(total, 2)
        return memo[u]

    count = loop
    for v in inner:
        if a[i][v]:
            m = 2 if a[i][v] is INF else a[i][v]
            count += m * paths_to_i(v)
        if count >= 2:
            return 2
    return count


def check_canonical(p: DBPair) -> CanonicalReport:
    """Evaluate conditions (I)-(IV) on the vertices of ``p`` (the source is exempt)."""
    rep = CanonicalReport()
    a = p.a_matrix()
    n = p.n
    reach = reachability(a)
    names = p.names
    struct = components(p)
    for i in range(n):
        if p.is_regular(i) and not p.has_loop(i):
            rep.failures["I"].append(str(names[i]))
        for j in range(n):
            if not reach[i][j]:
                continue
            if a[i][j] == 0:
                rep.failures["II"].append(f"{names[i]}->{names[j]}")
            if p.is_infinite_emitter(i) and a[i][j] is not INF:
                rep.failures["III"].append(f"{names[i]}->{names[j]}")
    bounds = {}
    for i in range(n):
        c = struct.comp_of[i]
        if _return_paths(a, i, struct.blocks[c]) < 2:
            continue
        if not (a[i][i] is INF or a[i][i] >= 2):
            rep.failures["IV"].append(f"{names[i]} (loops)")
        if c not in bounds:
            bounds[c] = max(3, mr(p, c, struct) + 2)
        if struct.regular_count[c] < bounds[c]:
            rep.failures["IV"].append(f"{names[i]} (|component| {struct.regular_count[c]} < {bounds[c]})")
    rep.trichotomy = tuple(_flavor(p, blk) for blk in struct.blocks)
    return rep


def _flavor(p: DBPair, blk) -> str:
    if len(blk) == 1:
        x = p.b[blk[0]][blk[0]]
        if x == 0:
            return LONE_LOOP
        if x == -1:
            return LONE_SINGULAR
    if all(_pos(p.b[i][j]) for i in blk for j in blk):
        return LARGE
    return IRREGULAR


# ---------------------------------------------------------------------------
# canonicalize


class BudgetExceeded(RuntimeError):
    """The step budget ran out; this indicates a defect, not bad input."""


def _edge_total(g) -> int:
    # an infinite entry counts once
    return sum(1 if x is INF else x for r in g.adjacency for x in r)


def canonicalize(p: DBPair, budget: int | None = None) -> tuple[DBPair, MoveScript]:
    """Bring ``p`` into augmented canonical form.

    The script replays on ``from_db(p)``.  ``budget`` caps the number of
    top-level operations, defaulting to ``10 (n + e)^2``.
    """
    if check_canonical(p).ok:
        return p, MoveScript()
    g0 = from_db(p)
    budget = 10 * (g0.n + _edge_total(g0)) ** 2 if budget is None else budget
    t = _Tape(g0, p.source_name, p.names)
    if g0.regular_sources() and g0.vertices[0] != p.source_name:
        t.collect()
    used = [0]

    def tick(label: str):
        used[0] += 1
        if used[0] > budget:
            raise BudgetExceeded(f"step budget {budget} exhausted during {label}")

    _step1(t, tick)
    _step2(t, tick)
    _step3(t, tick)
    while True:
        _step4(t, tick)
        if not _step5(t, tick):
            break
    _step6(t, tick)
    while True:
        _step7(t, tick)
        if not _step8(t, tick):
            break
    out = t.pair
    out = DBPair(out.b, out.d, out.names, source_name=p.source_name, source_pos=0)
    rep = check_canonical(out)
    if not rep.ok:
        raise CompileError("canonicalize finished without canonical form: " + rep.summary())
    return out, t.script


def _step1(t: _Tape, tick):
    for v in list(t.g.vertices):
        g = t.g
        i = g.index(v)
        if not g.is_infinite_emitter(i):
            continue
        row = g.row(i)
        infs = [x if x is INF else 0 for x in row]
        fin = [0 if x is INF else x for x in row]
        if any(fin):
            tick("step 1")
            t.move("O", vertex=v, parts=[infs, fin], names=[v, t.fresh(v)])


def _step2(t: _Tape, tick):
    while True:
        g = t.g
        cand = next(
            (i for i in range(g.n) if g.is_regular(i) and g.adjacency[i][i] == 0 and g.receives(i)),
            None,
        )
        if cand is None:
            return
        tick("step 2")
        t.move("Rplus", vertex=g.vertices[cand], name=t.fresh(t.sname), at=0)
        t.collect()


def _split_one_loop(t: _Tape, v):
    g = t.g
    i = g.index(v)
    one = [0] * g.n
    one[i] = 1
    rest = [x if k != i else (INF if x is INF else x - 1) for k, x in enumerate(g.row(i))]
    t.move("O", vertex=v, parts=[one, rest], names=[t.fresh(v), v])


def _step3(t: _Tape, tick):
    p = t.pair
    struct = components(p)
    for blk in struct.blocks:
        if len(blk) == 1:
            i = blk[0]
            x = p.b[i][i]
            if x is INF or x >= 1:
                tick("step 3")
                _split_one_loop(t, p.names[i])


def _step4(t: _Tape, tick):
    p = t.pair
    struct = components(p)
    for blk in struct.blocks:
        if len(blk) < 2:
            continue
        names = [t.pair.names[i] for i in sorted(blk)]
        q = t.pair
        idx = [q.names.index(v) for v in names]
        if all(_pos(q.b[i][j]) for i in idx for j in idx):
            continue
        _give_loops(t, tick, names)
        last = names[-1]
        for v in names[:-1]:
            tick("step 4")
            _row_add_improved(t, v, last)
        for v in names[:-1]:
            tick("step 4")
            _row_add_improved(t, last, v)
        q = t.pair
        idx = [q.names.index(v) for v in names]
        if not all(_pos(q.b[i][j]) for i in idx for j in idx):
            raise CompileError("step 4 left a non-positive entry")


def _cycle_through(p: DBPair, v: int, members: set) -> list[int]:
    """Vertices ``w0..wk`` of a shortest cycle ``v -> w0 -> ... -> wk -> v`` inside ``members``."""
    prev = {}
    queue = [u for u in members if u != v and _pos(p.b[u][v])]
    for u in queue:
        prev[u] = None
    k = 0
    while k < len(queue):
        x = queue[k]
        k += 1
        if _pos(p.b[v][x]):
            path = [x]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for y in members:
            if y != v and y not in prev and _pos(p.b[y][x]):
                prev[y] = x
                queue.append(y)
    raise CompileError("component is not strongly connected")


def _give_loops(t: _Tape, tick, names):
    # A loopless vertex (only infinite emitters survive step 2 without a
    # loop) cannot donate its row.  Pull rows backwards along a cycle until
    # the first edge of the cycle returns to it as a loop.
    for v in names:
        p = t.pair
        iv = p.names.index(v)
        if p.b[iv][iv] != -1:
            continue
        members = {p.names.index(x) for x in names}
        cycle = _cycle_through(p, iv, members)
        for w in reversed([p.names[k] for k in cycle]):
            tick("step 4")
            _row_add_improved(t, w, v)


def _step5(t: _Tape, tick) -> bool:
    p = t.pair
    struct = components(p)
    for c, blk in enumerate(struct.blocks):
        if len(blk) < 2:
            continue
        if struct.regular_count[c] >= max(3, mr(p, c, struct) + 2):
            continue
        reg = [i for i in sorted(blk) if p.is_regular(i)]
        v = p.names[(reg or sorted(blk))[0]]
        tick("step 5")
        _split_one_loop(t, v)
        return True
    return False


def _step6(t: _Tape, tick):
    while True:
        p = t.pair
        s = components(p)
        hit = next(
            (
                (i, j)
                for i in range(p.n)
                for j in range(p.n)
                if s.comp_of[i] != s.comp_of[j]
                and s.le(s.comp_of[i], s.comp_of[j])
                and len(s.blocks[s.comp_of[j]]) > 1
                and p.b[i][j] == 0
            ),
            None,
        )
        if hit is None:
            return
        tick("step 6")
        i, j = hit
        _row_add_improved(t, p.names[j], p.names[i])


def _step7(t: _Tape, tick):
    while True:
        p = t.pair
        s = components(p)
        hit = None
        for i in range(p.n):
            for j in range(p.n):
                ci, cj = s.comp_of[i], s.comp_of[j]
                if ci == cj or not s.le(ci, cj) or p.b[i][j] != 0:
                    continue
                donor = next((k for k in s.blocks[ci] if _pos(p.b[k][j])), None)
                if donor is not None:
                    hit = (donor, i)
                    break
            if hit:
                break
        if hit is None:
            return
        tick("step 7")
        _row_add_improved(t, p.names[hit[0]], p.names[hit[1]])


def _step8(t: _Tape, tick) -> bool:
    p = t.pair
    a = p.a_matrix()
    n = p.n
    for i in range(n):
        for j in range(n):
            if i == j or not a[i][j]:
                continue
            for k in range(n):
                if k in (i, j) or not a[j][k] or a[i][k]:
                    continue
                tick("step 8")
                _row_add_basic(t, p.names[j], p.names[k])
                return True
    return False


# ---------------------------------------------------------------------------
# component matching and certificates


def match_components(p1: DBPair, p2: DBPair) -> dict | None:
    """A preorder isomorphism of components preserving regular and singular counts."""
    s1, s2 = components(p1), components(p2)
    m = len(s1)
    if m != len(s2):
        return None

    def sig(s, c):
        return (
            s.regular_count[c],
            s.singular_count[c],
            sum(1 for e in range(len(s)) if s.le(c, e)),
            sum(1 for e in range(len(s)) if s.le(e, c)),
        )

    cands = {c: [e for e in range(m) if sig(s1, c) == sig(s2, e)] for c in range(m)}
    psi: dict[int, int] = {}
    used: set[int] = set()

    def extend(c: int) -> bool:
        if c == m:
            return True
        for e in cands[c]:
            if e in used:
                continue
            if all(s1.le(c, x) == s2.le(e, psi[x]) and s1.le(x, c) == s2.le(psi[x], e) for x in psi):
                psi[c] = e
                used.add(e)
                if extend(c + 1):
                    return True
                del psi[c]
                used.discard(e)
        return False

    return dict(psi) if extend(0) else None


LEVELS = ("SL+", "SL", "GL+", "GL")


@dataclass(frozen=True)
class Certificate:
    U: tuple
    V: tuple
    level: str = "GL"

    def __post_init__(self):
        object.__setattr__(self, "U", tuple(tuple(r) for r in self.U))
        object.__setattr__(self, "V", tuple(tuple(r) for r in self.V))
        if self.level not in LEVELS:
            raise ValueError(f"unknown level {self.level!r}")

    def to_json(self) -> dict:
        return {"U": [list(r) for r in self.U], "V": [list(r) for r in self.V], "level": self.level}

    @classmethod
    def from_json(cls, obj: dict) -> "Certificate":
        extra = set(obj) - {"U", "V", "level"}
        if extra:
            raise ValueError(f"unexpected keys {sorted(extra)}")
        return cls(obj["U"], obj["V"], obj.get("level", "GL"))


@dataclass
class Verdict:
    checks: dict
    level: str | None
    claimed: str
    notes: list = field(default_factory=list)

    @property
    def claim_holds(self) -> bool:
        if self.level is None:
            return False
        order = {"GL": {"GL"}, "GL+": {"GL", "GL+"}, "SL": {"GL", "SL"}, "SL+": set(LEVELS)}
        return self.claimed in order[self.level]

    def to_json(self) -> dict:
        return {
            "checks": self.checks,
            "level": self.level,
            "claimed": self.claimed,
            "claim_holds": self.claim_holds,
            "notes": self.notes,
        }


class CertificateError(ValueError):
    pass


def _square(m, k, what):
    if len(m) != k or any(len(r) != k for r in m):
        raise CertificateError(f"{what} must be {k}x{k}")


def verify_certificate(pE: DBPair, pF: DBPair, cert: Certificate) -> Verdict:
    """Check ``U B•_E = B•_F V`` and the SL and "+" refinements."""
    n = pE.n
    if pF.n != n:
        raise CertificateError("pairs have different sizes")
    reg = pE.regular_indices()
    if pF.regular_indices() != reg:
        raise CertificateError("regular index sets differ")
    _square(cert.U, n, "U")
    _square(cert.V, len(reg), "V")
    sE, sF = components(pE), components(pF)
    psi = match_components(pE, pF)
    if psi is None or any(psi[sE.comp_of[i]] != sF.comp_of[i] for i in range(n)):
        raise CertificateError("component structures are not aligned index by index")
    U = [list(r) for r in cert.U]
    V = [list(r) for r in cert.V]

    def in_pattern(x, idx):
        return all(
            x[r][c] == 0 or sE.le(sE.comp_of[i], sE.comp_of[j])
            for r, i in enumerate(idx)
            for c, j in enumerate(idx)
        )

    checks = {}
    checks["pattern"] = in_pattern(U, range(n)) and in_pattern(V, reg)
    checks["invertible"] = abs(det(U)) == 1 and abs(det(V)) == 1
    bE = [[pE.b[i][j] for j in reg] for i in range(n)]
    bF = [[pF.b[i][j] for j in reg] for i in range(n)]
    sing = pE.singular_indices()
    same_singular = all(pE.b[i][j] == pF.b[i][j] for i in range(n) for j in sing)
    checks["intertwining"] = same_singular and matmul(U, bE) == matmul(bF, V) if reg else same_singular
    dets = []
    for blk in sE.blocks:
        rows = sorted(blk)
        dets.append(det([[U[i][j] for j in rows] for i in rows]))
        vr = [reg.index(i) for i in rows if i in reg]
        dets.append(det([[V[a][b] for b in vr] for a in vr]))
    checks["sl"] = all(x == 1 for x in dets)
    diff = [sum(U[i][k] * pE.d[k] for k in range(n)) - pF.d[i] for i in range(n)]
    witness = solve_in_image(bF, diff) if reg else (None if any(diff) else [])
    checks["plus"] = witness is not None
    notes = ['"+" read as membership of U D_E - D_F in the image of B_F (regular columns)']
    base = checks["pattern"] and checks["invertible"] and checks["intertwining"]
    level = None
    if base:
        if checks["sl"]:
            level = "SL+" if checks["plus"] else "SL"
        else:
            level = "GL+" if checks["plus"] else "GL"
    return Verdict(checks, level, cert.level, notes)
