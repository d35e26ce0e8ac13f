import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphmoves.canonical import (
    LARGE,
    LONE_LOOP,
    LONE_SINGULAR,
    BudgetExceeded,
    Certificate,
    CertificateError,
    canonicalize,
    check_canonical,
    match_components,
    verify_certificate,
)
from graphmoves.core import DBPair, components, from_db, to_db
from graphmoves.extnat import INF
from graphmoves.matops import OpRecord, apply_op, composite_certificate
from graphmoves.moves import apply_script

from helpers import k0_preserved, random_graph


def P(b, d, names=None):
    return DBPair.make(b, d, names or [f"v{i}" for i in range(len(d))], source_name="s")


def test_check_canonical_examples():
    assert check_canonical(P([[0]], [1])).ok
    assert check_canonical(P([[-1]], [1])).ok
    rep = check_canonical(P([[1]], [1]))
    assert not rep.ok and not rep.passed("IV")
    assert rep.passed("I")
    assert "(IV)" in rep.summary()
    j = rep.to_json()
    assert j["canonical"] is False and j["conditions"]["IV"]["pass"] is False


def test_canonicalize_single_double_loop():
    p = P([[1]], [1])
    q, script = canonicalize(p)
    rep = check_canonical(q)
    assert rep.ok and set(rep.trichotomy) == {LARGE}
    assert q.n >= 3
    assert to_db(apply_script(from_db(p), script)[0]) == q
    ok, why = k0_preserved(p, q, sizes=True)
    assert ok, why


def test_canonical_input_is_returned_unchanged():
    p = P([[0, 0], [1, -1]], [1, 1])
    q, script = canonicalize(p)
    assert q == p and len(script) == 0


def test_lone_flavors():
    q, _ = canonicalize(P([[0]], [1]))
    assert check_canonical(q).trichotomy == (LONE_LOOP,)
    q, _ = canonicalize(P([[-1]], [1]))
    assert check_canonical(q).trichotomy == (LONE_SINGULAR,)


def test_budget_exhaustion_is_reported():
    with pytest.raises(BudgetExceeded):
        canonicalize(P([[1, 1], [1, 1]], [1, 1]), budget=1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.booleans())
def test_canonicalize_random(seed, inf):
    p = to_db(random_graph(random.Random(seed), n_max=4, inf=inf))
    q, script = canonicalize(p)
    rep = check_canonical(q)
    assert rep.ok, rep.summary()
    assert set(rep.trichotomy) <= {LARGE, LONE_LOOP, LONE_SINGULAR}
    assert to_db(apply_script(from_db(p), script)[0]) == q
    if not inf:
        ok, why = k0_preserved(p, q, sizes=True)
        assert ok, why


def test_match_components():
    a = P([[0, 0], [1, 0]], [1, 1])
    assert match_components(a, a) == {c: c for c in range(len(components(a)))}
    b = P([[0, 1], [0, 0]], [1, 1])
    assert match_components(a, b) is not None
    c = P([[0, 0], [0, 0]], [1, 1])
    assert match_components(a, c) is None


def test_certificate_json_round_trip():
    c = Certificate([[1, 0], [0, 1]], [[1]], "SL+")
    assert Certificate.from_json(json.loads(json.dumps(c.to_json()))) == c
    with pytest.raises(ValueError):
        Certificate([[1]], [[1]], "SU")
    with pytest.raises(ValueError):
        Certificate.from_json({"U": [[1]], "V": [[1]], "extra": 0})


def test_identity_certificate():
    p, _ = canonicalize(P([[1]], [1]))
    n, r = p.n, len(p.regular_indices())
    eye = lambda k: [[int(i == j) for j in range(k)] for i in range(k)]  # noqa: E731
    v = verify_certificate(p, p, Certificate(eye(n), eye(r), "SL+"))
    assert v.level == "SL+" and v.claim_holds
    assert all(v.checks.values())
    bad = [row[:] for row in eye(n)]
    bad[0][0] = 2
    v = verify_certificate(p, p, Certificate(bad, eye(r), "GL"))
    assert v.level is None and not v.claim_holds
    with pytest.raises(CertificateError):
        verify_certificate(p, p, Certificate(eye(n + 1), eye(r), "GL"))


def test_certificate_from_composite_ops():
    p, _ = canonicalize(P([[1]], [1]))
    recs = [OpRecord("colAdd", 0, 1), OpRecord("rowAdd", 1, 2), OpRecord("antennaAdd", 0, 0)]
    q = p
    for r in recs:
        q, _ = apply_op(q, r)
    u, v = composite_certificate(p, recs)
    verdict = verify_certificate(p, q, Certificate(u, v, "SL+"))
    assert verdict.level == "SL+", verdict.checks


def test_singular_columns_must_match():
    p = P([[0, 2], [0, INF]], [1, 1])
    q = P([[0, 3], [0, INF]], [1, 1])
    eye = [[1, 0], [0, 1]]
    v = verify_certificate(p, q, Certificate(eye, [[1]]))
    assert not v.checks["intertwining"] and v.level is None
    assert verify_certificate(p, p, Certificate(eye, [[1]])).level == "SL+"
