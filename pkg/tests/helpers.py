"""Random instance generators and invariant oracles shared by the tests."""

from __future__ import annotations

import random

from graphmoves.core import DBPair, Graph, GraphError, components, to_db, validate_graph
from graphmoves.extnat import INF
from graphmoves.ktheory import ISO, component_k0, pointed_iso
from graphmoves.moves import Move, MoveError, apply_move, iplus_witness


def random_graph(rng: random.Random, n_max=6, mult=3, max_singular=2, inf=False, density=0.45) -> Graph:
    while True:
        n = rng.randint(1, n_max)
        sing = rng.sample(range(n), rng.randint(0, min(max_singular, n)))
        a = [[0] * n for _ in range(n)]
        for i in range(n):
            if i in sing:
                if inf and rng.random() < 0.5:
                    for j in range(n):
                        if rng.random() < density:
                            a[i][j] = INF if rng.random() < 0.7 else rng.randint(1, mult)
                    if not any(x is INF for x in a[i]):
                        a[i][rng.randrange(n)] = INF
                continue  # sink
            for j in range(n):
                if rng.random() < density:
                    a[i][j] = rng.randint(1, mult)
            if not any(a[i]):
                a[i][rng.randrange(n)] = rng.randint(1, mult)
        g = Graph.make([f"v{i}" for i in range(n)], a)
        if validate_graph(g):
            continue
        try:
            p = to_db(g)
        except GraphError:
            continue
        if p.n:
            return g


def random_pair(rng: random.Random, **kw) -> DBPair:
    return to_db(random_graph(rng, **kw))


def essential(p: DBPair) -> list[int]:
    s = components(p)
    return [c for c in range(len(s)) if s.cyclic[c] or s.singular_count[c]]


def richness(p: DBPair, s, c: int) -> int:
    """0 acyclic, 1 a single cycle, 2 at least two first-return paths."""
    from graphmoves.canonical import _return_paths

    if not s.cyclic[c]:
        return 0
    blk = s.blocks[c]
    return _return_paths(p.a_matrix(), blk[0], blk)


def k0_preserved(p1: DBPair, p2: DBPair, *, sizes=False, bound=1000) -> tuple[bool, str]:
    """Match essential components (preorder, optionally singular counts) with iso pointed K0 each."""
    s1, s2 = components(p1), components(p2)
    e1, e2 = essential(p1), essential(p2)
    if len(e1) != len(e2):
        return False, f"essential component counts {len(e1)} != {len(e2)}"
    k1 = {c: component_k0(p1, c, s1) for c in e1}
    k2 = {c: component_k0(p2, c, s2) for c in e2}
    cands = {}
    for c in e1:
        cands[c] = []
        for e in e2:
            if sizes and s1.singular_count[c] != s2.singular_count[e]:
                continue
            if richness(p1, s1, c) != richness(p2, s2, e):
                continue
            verdict = pointed_iso(k1[c], k2[e], bound)
            if verdict == ISO:
                cands[c].append(e)
    psi: dict = {}

    def extend(k: int) -> bool:
        if k == len(e1):
            return True
        c = e1[k]
        for e in cands[c]:
            if e in psi.values():
                continue
            if all(s1.le(c, x) == s2.le(e, psi[x]) and s1.le(x, c) == s2.le(psi[x], e) for x in psi):
                psi[c] = e
                if extend(k + 1):
                    return True
                del psi[c]
        return False

    if extend(0):
        return True, "ok"
    return False, "no matching of essential components with isomorphic pointed K0"


# ---------------------------------------------------------------------------
# random legal moves


def _random_split(rng, row, k):
    """Split a multiplicity vector into k nonempty parts (at most one infinite)."""
    units = []
    for j, x in enumerate(row):
        if x is INF:
            continue
        units.extend([j] * x)
    infs = [j for j, x in enumerate(row) if x is INF]
    if len(units) + (1 if infs else 0) < k:
        return None
    rng.shuffle(units)
    parts = [[0] * len(row) for _ in range(k)]
    start = 0
    if infs:
        for j in infs:
            parts[0][j] = INF
            start = 1
    for t in range(start, k):
        parts[t][units.pop()] += 1
    for j in units:
        parts[rng.randrange(k)][j] += 1
    rng.shuffle(parts)
    return parts


def random_outsplit(rng, g: Graph) -> Move | None:
    cands = [i for i in range(g.n) if not g.is_sink(i)]
    if not cands:
        return None
    i = rng.choice(cands)
    k = rng.randint(1, 3)
    parts = _random_split(rng, list(g.row(i)), k)
    if parts is None:
        return None
    w = g.vertices[i]
    names = [f"{w}.{t}" for t in range(k)]
    return Move("O", {"vertex": w, "parts": parts, "names": names})


def random_rplus(rng, g: Graph) -> Move | None:
    cands = [i for i in range(g.n) if g.is_regular(i) and g.adjacency[i][i] == 0]
    if not cands:
        return None
    i = rng.choice(cands)
    return Move("Rplus", {"vertex": g.vertices[i], "name": f"{g.vertices[i]}~"})


def random_iplus(rng, g: Graph) -> Move | None:
    """Find vertices with identical regular out-rows and redistribute their past."""
    groups = {}
    for i in range(g.n):
        if g.is_regular(i):
            groups.setdefault(g.row(i), []).append(i)
    groups = [v for v in groups.values() if len(v) >= 2]
    if not groups:
        return None
    idx = rng.choice(groups)
    names = [g.vertices[i] for i in idx]
    k = len(idx)
    cols = [[g.adjacency[u][j] for j in idx] for u in range(g.n)]
    new = []
    # rows of group members must stay constant; redistribute the shared group-row once
    group_row = None
    for u in range(g.n):
        tot = sum(cols[u])
        if u in idx:
            if group_row is None:
                group_row = [0] * k
                for _ in range(tot):
                    group_row[rng.randrange(k)] += 1
            new.append(list(group_row))
        else:
            r = [0] * k
            for _ in range(tot):
                r[rng.randrange(k)] += 1
            new.append(r)
    return Move("Iplus", {"group": names, "columns": new})


def random_rplus_inverse(rng, g: Graph) -> Move | None:
    srcs = g.regular_sources()
    if not srcs:
        return None
    t = rng.choice(srcs)
    keep = [v for v in range(g.n) if v != t]
    order = [g.vertices[v] for v in keep]
    pos = rng.randint(0, len(order))
    name = f"{g.vertices[t]}^"
    order.insert(pos, name)
    out = [0 if v == name else g.adjacency[t][g.index(v)] for v in order]
    vin = []
    for v in order:
        if v == name:
            vin.append(0)
            continue
        u = g.index(v)
        # in[u] * out[x] must fit below a(u, x) for every x
        cap = min(
            (g.adjacency[u][g.index(x)] // out[c] if g.adjacency[u][g.index(x)] is not INF else 3)
            for c, x in enumerate(order)
            if x != name and out[c]
        )
        vin.append(rng.randint(0, min(cap, 2)))
    spec = {"source": g.vertices[t], "vertex": name, "position": pos, "in": vin, "out": out}
    return Move("Rplusinv", {"spec": spec})


MOVE_MAKERS = {
    "O": random_outsplit,
    "Rplus": random_rplus,
    "Iplus": random_iplus,
    "Rplusinv": random_rplus_inverse,
}


def try_move(g: Graph, mv: Move):
    try:
        return apply_move(g, mv)
    except MoveError:
        return None


def iplus_ok(g: Graph, mv: Move) -> bool:
    try:
        iplus_witness(g, mv.params["group"])
    except MoveError:
        return False
    return True


def with_insplit(rng, g: Graph) -> Graph | None:
    """In-split a random regular vertex into two copies so (I+) has a group to act on."""
    from graphmoves.moves import insplit

    cands = [i for i in range(g.n) if g.is_regular(i) and g.receives(i)]
    if not cands:
        return None
    i = rng.choice(cands)
    col = g.col(i)
    p1 = [rng.randint(0, x) if x is not INF else INF for x in col]
    p2 = [0 if x is INF else x - y for x, y in zip(col, p1)]
    return insplit(g, g.vertices[i], [p1, p2], [f"{g.vertices[i]}a", f"{g.vertices[i]}b"])
