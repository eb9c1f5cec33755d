import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from statsmodels.stats.proportion import proportion_confint

from clawgate.stats import ConfusionMatrix, DomainError, confusion, fmt_metric, mcnemar, wilson


def test_wilson_anchors():
    assert wilson(0, 100).high == pytest.approx(0.036, abs=0.001)
    assert wilson(0, 10000).high == pytest.approx(3.84e-4, rel=0.01)
    w = wilson(3, 3)
    assert (w.low, w.high) == (pytest.approx(0.44, abs=0.01), 1.0)
    w = wilson(200, 200)
    assert (w.low, w.high) == (pytest.approx(0.98, abs=0.01), 1.0)


# frozen from statsmodels proportion_confint(method="wilson")
@pytest.mark.parametrize(
    "k, n, low, high",
    [
        (0, 100, 0.0, 0.036994),
        (0, 10000, 0.0, 3.8400e-4),
        (3, 3, 0.438503, 1.0),
        (200, 200, 0.981155, 1.0),
        (37, 120, 0.232727, 0.395830),
    ],
)
def test_wilson_frozen_values(k, n, low, high):
    w = wilson(k, n)
    assert w.low == pytest.approx(low, abs=1e-6)
    assert w.high == pytest.approx(high, rel=1e-4, abs=1e-9)


@given(st.integers(1, 5000).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_wilson_matches_statsmodels(kn):
    k, n = kn
    low, high = proportion_confint(k, n, alpha=0.05, method="wilson")
    w = wilson(k, n)
    assert w.low == pytest.approx(low, abs=1e-7)
    assert w.high == pytest.approx(high, abs=1e-7)


@given(st.integers(1, 2000).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_wilson_contains_point_and_stays_in_unit(kn):
    k, n = kn
    w = wilson(k, n)
    assert 0.0 <= w.low <= k / n <= w.high <= 1.0


@given(st.integers(0, 10), st.integers(1, 10), st.integers(1, 50))
def test_wilson_narrows_with_n(num, den, scale):
    if num > den:
        num, den = den, num
    a, b = wilson(num * scale, den * scale), wilson(num * scale * 2, den * scale * 2)
    assert (b.high - b.low) < (a.high - a.low)


def test_wilson_other_confidence_and_domain():
    assert wilson(5, 10, 0.99).high > wilson(5, 10).high
    for bad in [(1, 0), (-1, 5), (6, 5)]:
        with pytest.raises(DomainError):
            wilson(*bad)
    with pytest.raises(DomainError):
        wilson(1, 2, 1.0)


def test_mcnemar_values():
    assert mcnemar(0, 0) == 0
    assert mcnemar(40000, 0) == 39998.000025
    assert mcnemar(40000, 0) == (40000 - 1) ** 2 / 40000
    assert mcnemar(1, 1) == 0.5
    with pytest.raises(DomainError):
        mcnemar(-1, 0)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_mcnemar_symmetric(b, c):
    assert mcnemar(b, c) == mcnemar(c, b)


def test_confusion_examples():
    perfect = confusion([("adversarial", True)] * 100 + [("legit", False)] * 100)
    assert perfect == ConfusionMatrix(tp=100, fp=0, tn=100, fn=0)
    assert perfect.precision == perfect.recall == perfect.f1 == perfect.accuracy == 1.0

    passthrough = confusion([("adversarial", False)] * 100 + [("legit", False)] * 100)
    assert passthrough.recall == 0.0 and passthrough.precision is None
    assert fmt_metric(passthrough.precision) == "--" and passthrough.f1 is None

    block_all = confusion([("adversarial", True)] * 100 + [("legit", True)] * 100)
    assert block_all.recall == 1.0 and block_all.precision == 0.5


def test_confusion_f1_zero_when_nothing_right():
    cm = ConfusionMatrix(tp=0, fp=3, tn=0, fn=4)
    assert cm.precision == 0.0 and cm.recall == 0.0 and cm.f1 == 0.0


@given(st.lists(st.tuples(st.sampled_from(["adversarial", "legit"]), st.booleans())))
def test_confusion_counts_sum(pairs):
    cm = confusion(pairs)
    assert cm.total == len(pairs)
    if cm.total:
        assert math.isclose(cm.accuracy, sum((lab == "adversarial") == blk for lab, blk in pairs) / len(pairs))


def test_confusion_rejects_unknown_label():
    with pytest.raises(ValueError):
        confusion([("maybe", True)])
