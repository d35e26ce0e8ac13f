"""Checked arithmetic over the integers extended by a single infinity.

Edge multiplicities live in N u {inf}; entries of the B matrix additionally
take the value -1 on the diagonal.  Finite values are plain ``int`` and must
fit a signed 64-bit word; ``INF`` is a tagged singleton, never a sentinel
integer.
"""

from __future__ import annotations

from typing import Union

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)


class _Infinity:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("graphmoves.INF")

    # ordering against finite values: INF is larger than every integer
    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = _Infinity()

Ext = Union[int, _Infinity]


class ExtArithmeticError(ArithmeticError):
    """Raised for an undefined operation such as inf - inf."""


def is_inf(x: Ext) -> bool:
    return x is INF


def check(x: Ext) -> Ext:
    if type(x) is int and INT64_MIN <= x <= INT64_MAX:
        return x
    if x is INF:
        return x
    if not isinstance(x, int) or isinstance(x, bool):
        raise TypeError(f"expected int or INF, got {x!r}")
    if x > INT64_MAX or x < INT64_MIN:
        raise OverflowError(f"value {x} leaves the 64-bit range")
    return x


def add(a: Ext, b: Ext) -> Ext:
    if a is INF or b is INF:
        return INF
    return check(a + b)


def mul(a: Ext, b: Ext) -> Ext:
    """Product with 0 * inf = 0 (no paths exist when one leg is absent)."""
    if a is INF or b is INF:
        other = b if a is INF else a
        if other is INF:
            return INF
        if other == 0:
            return 0
        if other < 0:
            raise ExtArithmeticError("negative times infinity")
        return INF
    return check(a * b)


def sub(a: Ext, b: Ext, *, inf_minus_inf: bool = False) -> Ext:
    """``a - b``.  ``inf - inf`` is only defined (as inf) when explicitly allowed."""
    if b is INF:
        if a is INF and inf_minus_inf:
            return INF
        raise ExtArithmeticError(f"cannot subtract inf from {a}")
    if a is INF:
        return INF
    return check(a - b)


def total(values) -> Ext:
    s: Ext = 0
    for v in values:
        s = add(s, v)
    return s


def parse(token) -> Ext:
    """Read a JSON scalar: an integer or the string ``"inf"``."""
    if token == "inf":
        return INF
    if isinstance(token, bool) or not isinstance(token, int):
        raise ValueError(f"not an integer or 'inf': {token!r}")
    return check(token)


def dump(x: Ext):
    return "inf" if x is INF else x
