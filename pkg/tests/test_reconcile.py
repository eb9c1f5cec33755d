import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clawgate.audit import EXECUTED, AuditChain
from clawgate.reconcile import (
    KeyedMultiset,
    SaturationError,
    VerdictKind,
    canonical_target,
    check_biconditional,
    multiset_diff,
)

CAPS = ["publish", "pay", "net.egress", "fs.write"]
TARGETS = ["chA", "chB", "acct9", "x", "https://example.com/a"]


def brute_verdict(d: dict, s: dict) -> tuple[str, list, list]:
    """Expand both multisets to element lists and cancel pairwise."""
    d_elems = sorted(k for k, n in d.items() for _ in range(n))
    s_elems = sorted(k for k, n in s.items() for _ in range(n))
    d_left = list(d_elems)
    s_left = []
    for e in s_elems:
        if e in d_left:
            d_left.remove(e)
        else:
            s_left.append(e)
    if not d_left and not s_left:
        kind = "ok"
    elif d_left and not s_left:
        kind = "f1Bypass"
    elif s_left and not d_left:
        kind = "f2Forgery"
    else:
        kind = "f4WrongTarget"
    return kind, sorted(d_left), sorted(s_left)


def expand(ms: KeyedMultiset) -> list:
    return sorted(k for k, n in ms.items() for _ in range(n))


def random_multiset(rng: random.Random) -> dict:
    keys = [(c, t) for c in CAPS for t in TARGETS]
    return {k: rng.randint(1, 5) for k in rng.sample(keys, rng.randint(0, 8))}


multisets = st.dictionaries(
    st.tuples(st.sampled_from(CAPS), st.sampled_from(TARGETS)), st.integers(1, 5), max_size=8
)


def test_diff_examples():
    a = KeyedMultiset({("publish", "chA"): 2})
    assert multiset_diff(a, a) == KeyedMultiset()
    assert multiset_diff(a, KeyedMultiset({("publish", "chA"): 1})) == KeyedMultiset({("publish", "chA"): 1})


def test_verdict_examples():
    pay = KeyedMultiset({("pay", "acct9"): 1})
    assert check_biconditional(pay, KeyedMultiset({("pay", "acct9"): 1})).kind is VerdictKind.OK

    v = check_biconditional(KeyedMultiset({("publish", "chA"): 1}), KeyedMultiset())
    assert v.kind is VerdictKind.F1_BYPASS
    assert v.d_minus_s == KeyedMultiset({("publish", "chA"): 1})

    assert check_biconditional(KeyedMultiset(), KeyedMultiset({("pay", "x"): 1})).kind is VerdictKind.F2_FORGERY

    v = check_biconditional(KeyedMultiset({("publish", "chB"): 1}), KeyedMultiset({("publish", "chA"): 1}))
    assert v.kind is VerdictKind.F4_WRONG_TARGET
    assert v.d_minus_s and v.s_minus_d


def test_describe_counts_projections():
    v = check_biconditional(KeyedMultiset(), KeyedMultiset({("publish", "chA"): 1}))
    assert v.describe() == "biconditional: f2Forgery on 1 (cap, target) projection(s)"


def test_random_pairs_match_brute_force():
    rng = random.Random(7)
    for _ in range(2000):
        d, s = random_multiset(rng), random_multiset(rng)
        v = check_biconditional(KeyedMultiset(d), KeyedMultiset(s))
        kind, dl, sl = brute_verdict(d, s)
        assert (v.kind.value, expand(v.d_minus_s), expand(v.s_minus_d)) == (kind, dl, sl)


@given(multisets)
def test_reflexive_ok(m):
    assert check_biconditional(KeyedMultiset(m), KeyedMultiset(m)).ok


@given(multisets, multisets)
def test_symmetry_swaps_f1_and_f2(d, s):
    fwd = check_biconditional(KeyedMultiset(d), KeyedMultiset(s))
    rev = check_biconditional(KeyedMultiset(s), KeyedMultiset(d))
    assert (fwd.kind is VerdictKind.F1_BYPASS) == (rev.kind is VerdictKind.F2_FORGERY)
    assert fwd.d_minus_s == rev.s_minus_d and fwd.s_minus_d == rev.d_minus_s


def test_partial_failure_logged_not_ok_collapses_to_bypass():
    chain = AuditChain()
    chain.append(EXECUTED, {"cap": "fs.write", "target": "/srv/out.txt", "ok": False})
    d = KeyedMultiset({("fs.write", "/srv/out.txt"): 1})
    assert check_biconditional(d, chain.project_s()).kind is VerdictKind.F1_BYPASS


@given(st.lists(st.tuples(st.sampled_from(CAPS), st.sampled_from(TARGETS), st.booleans()), max_size=20), st.randoms())
def test_append_order_does_not_change_projection_or_verdict(recs, rnd):
    def build(order):
        chain = AuditChain()
        for cap, target, ok in order:
            chain.append(EXECUTED, {"cap": cap, "target": target, "ok": ok, "timestampMs": rnd.randint(0, 10**9)})
        return chain.project_s()

    shuffled = list(recs)
    rnd.shuffle(shuffled)
    s1, s2 = build(recs), build(shuffled)
    assert s1 == s2
    d = KeyedMultiset([(c, t) for c, t, _ in recs[: len(recs) // 2]])
    assert check_biconditional(d, s1) == check_biconditional(d, s2)


@pytest.mark.parametrize(
    "raw, canon",
    [
        ("HTTPS://Example.COM/Path", "https://example.com/Path"),
        ("https://User@Host.IO/x", "https://User@host.io/x"),
        ("/srv/a/../b/./c", "/srv/b/c"),
        ("./x//y", "x/y"),
        ("discord-mock:probe/AbC", "discord-mock:probe/AbC"),
    ],
)
def test_canonical_target(raw, canon):
    assert canonical_target(raw) == canon


def test_equivalent_targets_share_a_bucket():
    d = KeyedMultiset({("publish", "HTTPS://Example.com/a"): 1})
    s = KeyedMultiset({("publish", "https://example.com/a"): 1})
    assert check_biconditional(d, s).ok


def test_unknown_capability_rejected():
    with pytest.raises(ValueError):
        KeyedMultiset({("teleport", "x"): 1})


def test_saturation():
    ms = KeyedMultiset(max_count=3)
    ms.add("pay", "x", 3)
    with pytest.raises(SaturationError):
        ms.add("pay", "x")
