"""Smith normal form, cokernels and pointed K0 groups.

Python integers never overflow, so the "promote on overflow" policy is
automatic here; nothing below narrows to fixed width.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd
from typing import Sequence

from .core import DBPair, components
from .extnat import INF

ISO = "iso"
NOT_ISO = "not-iso"
UNDECIDED = "undecided"


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a, b) -> list[list[int]]:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)] for i in range(len(a))]


def matvec(a, x) -> list[int]:
    return [sum(r[k] * x[k] for k in range(len(x))) for r in a]


def det(m) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = [list(r) for r in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _finite(m):
    for r in m:
        for x in r:
            if x is INF:
                raise ValueError("matrix has an infinite entry")
            if not isinstance(x, int) or isinstance(x, bool):
                raise TypeError(f"non-integer entry {x!r}")


@dataclass(frozen=True)
class SmithDecomposition:
    U: tuple
    S: tuple
    V: tuple

    @property
    def diagonal(self) -> tuple:
        k = min(len(self.S), len(self.S[0]) if self.S else 0)
        return tuple(self.S[i][i] for i in range(k))


def snf(m: Sequence[Sequence[int]], cols: int | None = None) -> SmithDecomposition:
    """Smith form with ``U @ M @ V == S``.

    ``cols`` gives the column count when ``m`` has no rows.
    """
    _finite(m)
    rows = len(m)
    ncols = len(m[0]) if rows else (cols or 0)
    a = [list(r) for r in m]
    u = identity(rows)
    v = identity(ncols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, c):  # row dst += c * row src
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, c):
        for r in a:
            r[dst] += c * r[src]
        for r in v:
            r[dst] += c * r[src]

    t = 0
    while t < min(rows, ncols):
        best = None
        for i in range(t, rows):
            for j in range(t, ncols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, ncols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        done = False
            if done:
                # divisibility: fold in any entry the pivot does not divide
                bad = next(
                    ((i, j) for i in range(t + 1, rows) for j in range(t + 1, ncols) if a[i][j] % a[t][t]),
                    None,
                )
                if bad is None:
                    break
                add_row(t, bad[0], 1)
                continue
            # move the smallest remainder to the pivot and repeat
            best = None
            for i in range(t, rows):
                if a[i][t] and (best is None or abs(a[i][t]) < abs(best[2])):
                    best = (i, t, a[i][t])
            for j in range(t, ncols):
                if a[t][j] and abs(a[t][j]) < abs(best[2]):
                    best = (t, j, a[t][j])
            swap_rows(t, best[0])
            swap_cols(t, best[1])
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return SmithDecomposition(
        tuple(tuple(r) for r in u), tuple(tuple(r) for r in a), tuple(tuple(r) for r in v)
    )


def solve_in_image(m, vec) -> list[int] | None:
    """Some integer ``x`` with ``M x = vec``, or ``None``."""
    rows = len(m)
    if len(vec) != rows:
        raise ValueError("dimension mismatch")
    ncols = len(m[0]) if rows else 0
    dec = snf(m)
    y = matvec(dec.U, vec)
    z = [0] * ncols
    for i in range(rows):
        s = dec.S[i][i] if i < ncols else 0
        if s == 0:
            if y[i] != 0:
                return None
        else:
            if y[i] % s:
                return None
            z[i] = y[i] // s
    x = matvec(dec.V, z) if ncols else []
    if matvec(m, x) != list(vec):
        raise AssertionError("image witness failed to verify")
    return x


@dataclass(frozen=True)
class PointedK0:
    """``(cok M, class)`` in normal form.

    ``factors`` are the invariant factors above 1; ``torsion`` holds the
    class coordinates modulo them and ``free`` the unreduced coordinates in
    the ``free_rank`` free summands.
    """

    factors: tuple
    free_rank: int
    torsion: tuple
    free: tuple

    @property
    def mr(self) -> int:
        return len(self.factors) + self.free_rank

    @property
    def order(self):
        if self.free_rank:
            return INF
        out = 1
        for s in self.factors:
            out *= s
        return out

    def __str__(self):
        parts = [f"Z/{s}" for s in self.factors] + ["Z"] * self.free_rank
        group = " + ".join(parts) if parts else "0"
        return f"({group}, {list(self.torsion) + list(self.free)})"


def cokernel(m, unit, rows: int | None = None) -> PointedK0:
    """Pointed cokernel of ``M`` (rows x cols) with distinguished element ``unit``."""
    n = len(m) if rows is None else rows
    ncols = len(m[0]) if m else 0
    dec = snf(m) if n else SmithDecomposition((), (), ())
    y = matvec(dec.U, unit) if n else []
    diag = [dec.S[i][i] if i < ncols else 0 for i in range(n)]
    factors, torsion, free = [], [], []
    for i in range(n):
        s = diag[i]
        if s == 1:
            continue
        if s == 0:
            free.append(y[i])
        else:
            factors.append(s)
            torsion.append(y[i] % s)
    return PointedK0(tuple(factors), len(free), tuple(torsion), tuple(free))


def _k0_on(p: DBPair, idx: Sequence[int]) -> PointedK0:
    reg = [j for j in idx if p.is_regular(j)]
    m = [[p.b[i][j] for j in reg] for i in idx]
    unit = [p.d[i] for i in idx]
    _finite([unit])
    return cokernel(m, unit, rows=len(idx))


def pointed_k0(p: DBPair) -> PointedK0:
    """``(cok B•, D + im B•)`` for the whole pair."""
    return _k0_on(p, range(p.n))


def upward_closure(p: DBPair, comp: int, struct=None) -> list[int]:
    """Indices of vertices with a path into component ``comp`` (including it)."""
    struct = components(p) if struct is None else struct
    return [i for i in range(p.n) if struct.le(comp, struct.comp_of[i])]


def component_k0(p: DBPair, comp: int, struct=None) -> PointedK0:
    """Pointed K0 of the unital quotient living on the vertices upstream of ``comp``.

    Unlike the bare diagonal block, this is unchanged by row additions across
    comparable components.
    """
    return _k0_on(p, upward_closure(p, comp, struct))


def component_cok(p: DBPair, comp: int, struct=None) -> PointedK0:
    """Cokernel of the diagonal block ``B•_γ`` (class taken from ``D_γ``)."""
    struct = components(p) if struct is None else struct
    return _k0_on(p, struct.blocks[comp])


def mr(p: DBPair, comp: int, struct=None) -> int:
    return component_cok(p, comp, struct).mr


# ---------------------------------------------------------------------------
# isomorphism of pointed groups


def _content(v) -> int:
    g = 0
    for x in v:
        g = gcd(g, x)
    return g


def _torsion_generators(factors):
    k = len(factors)
    gens = []
    for i, s in enumerate(factors):
        for u in range(2, s):
            if gcd(u, s) == 1:
                gens.append(("scale", i, u))
    for i in range(k):
        for j in range(k):
            if i != j:
                c = factors[i] // gcd(factors[i], factors[j])
                gens.append(("shear", i, j, c))
    return gens


def _act(gen, x, factors):
    x = list(x)
    if gen[0] == "scale":
        _, i, u = gen
        x[i] = x[i] * u % factors[i]
    else:
        _, i, j, c = gen
        x[i] = (x[i] + c * x[j]) % factors[i]
    return tuple(x)


def pointed_iso(k1: PointedK0, k2: PointedK0, torsion_bound: int = 4096) -> str:
    """Decide whether some automorphism of the group carries class 1 to class 2.

    Automorphisms of ``T + Z^l`` act on the free coordinates through
    ``GL_l(Z)`` (orbits are classified by content ``g``) and may add any
    homomorphic image of the free part to the torsion part, so the torsion
    class only matters modulo ``gT``.  The orbit of the torsion class under
    ``Aut(T)`` is explored by breadth-first search.
    """
    if k1.factors != k2.factors or k1.free_rank != k2.free_rank:
        return NOT_ISO
    g = _content(k1.free)
    if g != _content(k2.free):
        return NOT_ISO
    factors = k1.factors
    mods = [gcd(g, s) if g else s for s in factors]

    def same(x):
        return all((a - b) % m == 0 for a, b, m in zip(x, k2.torsion, mods))

    start = tuple(k1.torsion)
    if same(start):
        return ISO
    order = 1
    for s in factors:
        order *= s
    if order > torsion_bound:
        return UNDECIDED
    gens = _torsion_generators(factors)
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for gen in gens:
            y = _act(gen, x, factors)
            if y not in seen:
                if same(y):
                    return ISO
                seen.add(y)
                queue.append(y)
    return NOT_ISO
