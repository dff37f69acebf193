import itertools
import math

import pytest

from fracconf import bounds as B
from fracconf.dimension import ExponentFit
from fracconf.errors import OutOfValidity, ParamError


def test_chain_upper_u():
    assert B.chain_upper_u(2, 2, 2) == 4
    assert B.chain_upper_u(3, 4, 1) == 5.5
    for d in range(2, 7):
        assert B.chain_upper_u(1, d, (d + 1) / 2) == pytest.approx(d, abs=1e-12)
    assert B.chain_upper_bound(2, 2, 2).side == "exact"
    assert B.chain_upper_bound(2, 4, 1).side == "upper"
    for bad in [(0, 2, 1), (1, 1, 1), (1, 2, 0), (1, 2, 2.5)]:
        with pytest.raises(ParamError):
            B.chain_upper_u(*bad)


def test_alt_chain_upper():
    assert B.alt_chain_upper(1, 2, 1) == 1.5
    assert B.alt_chain_upper(2, 2, 1) == 2.5
    assert B.alt_chain_upper(1, 3, 0) == 1.0
    with pytest.raises(ParamError):
        B.alt_chain_upper(1, 2, 1.5)


def test_beta_sobolev():
    assert B.beta_sobolev(2, 2) == 1
    assert B.beta_sobolev(2, 1) == 1.5
    for d in range(2, 8):
        a = (d + 1) / 2
        assert abs((d - a + 1) - B.beta_sobolev(d, a - 1e-15)) < 1e-12


def test_tri_upper():
    assert B.tri_upper(3, 3) == 6
    assert B.tri_upper(2, 1) == 1.5
    assert B.tri_upper(2, 2) == 3
    for d in range(3, 9):
        a = 2 * d / 3 + 1
        assert B.tri_upper(d, a) == pytest.approx(2 * d, abs=1e-12)
        assert d + 1.5 * a - 1.5 == pytest.approx(2 * d, abs=1e-12)


def test_tri_trivial():
    assert B.tri_trivial(2, 1) == 3
    assert B.tri_trivial(2, 0) == 0
    assert B.tri_trivial(2, 2) == 3


def test_pinned_tree_lower():
    assert B.pinned_tree_lower(1, 1.25) == pytest.approx(1, abs=1e-12)
    assert B.pinned_tree_lower(2, 1.0 + 1e-15) == pytest.approx(4 / 3)
    assert B.pinned_tree_lower(3, 2) == 3
    with pytest.raises(ParamError):
        B.pinned_tree_lower(2, 1.0)


def test_tau0_and_exceptional_bound():
    for a in (1.01, 1.1, 1.25):
        assert B.tau0(1, a) == pytest.approx(1, abs=1e-12)
    assert B.exceptional_bound(1, 0.5, 1.5) == 0.5
    with pytest.raises(OutOfValidity):
        B.exceptional_bound(2, 5.0, 1.5)
    with pytest.raises(OutOfValidity):
        B.exceptional_bound(1, 0.0, 1.5)
    for k in range(1, 6):
        a = 1.25
        lo = 2 * k + 3 * 0.1 + (1 - 4 * k) * a
        hi = 5 - 3 * k + 3 * 0.1 - 3 * a
        assert abs(lo - hi) < 1e-12
        assert abs(lo - (1.25 - 3 * k + 0.3)) < 1e-12


def test_star_exceptional_bound():
    for tau, a in [(0.2, 1.1), (0.5, 1.5), (0.9, 1.9)]:
        assert B.star_exceptional_bound(1, tau, a) == B.distance_exceptional_bound(tau, a)
    assert B.star_exceptional_bound(3, 1e-9, 1.5) == pytest.approx(0.5)
    with pytest.raises(OutOfValidity):
        B.star_exceptional_bound(2, 2.0, 1.5)


def test_valtr_lower():
    assert B.valtr_lower(1, 2, 1.2) == pytest.approx(4 * 1.2 / 3)
    assert B.valtr_lower(0, 3, 1.7) == pytest.approx(1.7)
    assert B.valtr_lower(2, 2, 1) == pytest.approx(5 / 3)
    assert B.valtr_lower(1, 2, 2) == pytest.approx(8 / 3)
    assert B.valtr_pair_exponent(2) == pytest.approx(8 / 3)


def test_monotone_in_alpha():
    grid = [i / 200 for i in range(1, 2001)]
    for k, d in itertools.product((1, 2, 3), (2, 3, 5)):
        vals = [B.chain_upper_u(k, d, a) for a in grid if a <= d]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    for d in (3, 4, 6):
        vals = [B.tri_upper(d, a) for a in grid if a <= d]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    # d = 2 is monotone inside each branch
    for lo, hi in [(0.005, 1), (1, 1.5), (1.5, 1.75), (1.75, 2)]:
        vals = [B.tri_upper(2, a) for a in grid if lo <= a < hi]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    for k in (1, 2, 5):
        vals = [B.pinned_tree_lower(k, a) for a in grid if 1 < a <= 2]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_evaluate_and_verdict():
    assert B.evaluate("valtr_lower", 1, 2, 2.0).value == pytest.approx(8 / 3)
    assert B.evaluate("tau0", k=1, alpha=1.1).side == "exact"
    with pytest.raises(ParamError):
        B.evaluate("nope")
    fit = ExponentFit((), 8 / 3, 0.05, 1.0)
    lower = B.evaluate("valtr_lower", 1, 2, 2.0)
    assert B.verdict(fit, [lower]) == "consistent"
    assert B.verdict(fit, []) == "inconclusive"
    assert B.verdict(ExponentFit((), 4.5, 0.1, 1.0), [B.evaluate("chain_upper_u", 2, 2, 2)]) == "violates_upper"
    assert B.verdict(ExponentFit((), 2.0, 0.1, 1.0), [lower], margin=0.2) == "below_lower"
    assert B.verdict(ExponentFit((), 2.5, 0.1, 1.0), [lower], margin=0.2) == "consistent"
    assert B.verdict(ExponentFit((), 2.9, 0.0, 1.0),
                     [lower, B.evaluate("chain_upper_u", 1, 2, 2)]) == "consistent"
    assert math.isfinite(B.evaluate("exceptional_bound", 2, alpha=1.5, tau=1.0).value)
