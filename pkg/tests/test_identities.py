import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import conjecture_side_at, theorem_lhs_at, theorem_rhs_at
from qsum import identities as idm
from qsum.identities import (
    ConjectureParams, ParameterError, TheoremParams, clearing_factor, conj_side,
    enumerate_compositions, lhs_theorem, rhs_theorem, rotate_composition, rotation_map, summand_theorem,
    support_bounds, unrotate_composition, verify_conjecture, verify_theorem,
)
from qsum.qcore import ONE, Q, LaurentPoly, qf_expand, qfact

QPOINTS = [Fraction(2, 3), Fraction(-1, 2), Fraction(3, 2), Fraction(-5, 3)]


def value_at(poly: LaurentPoly, factor, q0):
    return poly.eval(q0) / qf_expand(factor).eval(q0)


# frozen values


def test_theorem_values_at_rational_points_frozen():
    # [DERIVED] direct summation of the definition at q = 2/3
    for (n, M1, M2, S), expected in [((2, 1, 1, 0), Fraction(5, 3)), ((3, 2, 1, 1), Fraction(16, 81))]:
        p = TheoremParams(n, M1, M2, S)
        assert value_at(lhs_theorem(p), clearing_factor(n, M1, M2), Fraction(2, 3)) == expected


def test_conjecture_value_frozen():
    # [DERIVED] direct summation of both sides at q = 2/3
    q0 = Fraction(2, 3)
    left = value_at(conj_side(2, 3, 2, 2, 0), clearing_factor(2, 2, 2), q0)
    right = value_at(conj_side(3, 2, 2, 2, 1), clearing_factor(3, 2, 2), q0)
    assert left == right == Fraction(6941441, 1594323)


# examples


def test_support_bounds_examples():
    assert support_bounds(TheoremParams(2, 1, 1, 0), 1) == (0, 1)
    assert support_bounds(TheoremParams(1, 3, 5, 0), 1) == (-3, 5)
    assert support_bounds(TheoremParams(2, 0, 0, 0), 2) == (0, 0)
    with pytest.raises(IndexError):
        support_bounds(TheoremParams(2, 0, 0, 0), 3)
    # with M1 + M2 >= 0 the box is never empty, whatever the shift
    for shift in range(-4, 5):
        for i in (1, 2, 3):
            lo, hi = support_bounds(TheoremParams(3, 0, 0, 0), i, shift=shift)
            assert lo == hi


def test_enumerate_examples():
    assert list(enumerate_compositions(TheoremParams(2, 1, 1, 0))) == [(0, 0), (1, -1)]
    assert list(enumerate_compositions(TheoremParams(1, 2, 3, -2))) == [(-2,)]
    assert list(enumerate_compositions(TheoremParams(2, 0, 0, 0), shift=5)) == []


def test_summand_examples():
    p = TheoremParams(2, 1, 1, 0)
    t00 = summand_theorem(p, (0, 0))
    assert qf_expand(t00) == ONE + Q + Q * Q
    assert qf_expand(summand_theorem(p, (1, -1))) == LaurentPoly.monomial(2, -1)
    assert summand_theorem(p, (-1, 1)).is_zero
    with pytest.raises(ParameterError):
        summand_theorem(p, (1, 0))


def test_lhs_rhs_examples():
    assert lhs_theorem(TheoremParams(2, 1, 1, 0)) == (ONE - Q ** 3) * (ONE + Q)
    assert lhs_theorem(TheoremParams(2, 0, 0, 0)) == qf_expand(clearing_factor(2, 0, 0))
    assert qf_expand(rhs_theorem(TheoremParams(1, 2, 1, 0))) == ONE + Q + Q * Q
    assert qf_expand(rhs_theorem(TheoremParams(2, 1, 1, 0))) == ONE + Q
    assert qf_expand(rhs_theorem(TheoremParams(3, 2, 2, 2))) == LaurentPoly.monomial(12)


@pytest.mark.parametrize("M1,M2,S", [(2, 3, 1), (0, 4, -0), (3, 0, -2), (4, 4, 4)])
def test_n1_is_termwise(M1, M2, S):
    p = TheoremParams(1, M1, M2, S)
    (k,) = list(enumerate_compositions(p))
    assert k == (S,)
    assert summand_theorem(p, k) == rhs_theorem(p)
    assert lhs_theorem(p) == qf_expand(rhs_theorem(p))


def test_params_validation():
    with pytest.raises(ParameterError):
        TheoremParams(2, 1, 1, 5)
    with pytest.raises(ParameterError):
        TheoremParams(0, 1, 1, 0)
    with pytest.raises(ParameterError):
        ConjectureParams(2, 2, 1, 1, 0, -2)


def test_verify_theorem_examples():
    assert verify_theorem(TheoremParams(2, 1, 1, 0)).passed
    assert verify_theorem(TheoremParams(1, 5, 2, -3)).passed


def test_fail_report_carries_polynomial_witness(monkeypatch):
    monkeypatch.setattr(idm, "rhs_theorem", lambda p: qfact(p.M1 + p.M2) / qfact(p.M1))
    rep = verify_theorem(TheoremParams(2, 1, 1, 0))
    assert rep.status == "fail"
    assert rep.witness.startswith("lhs=") and "lhs-rhs=" in rep.witness


def test_conjecture_examples():
    assert verify_conjecture(ConjectureParams(2, 3, 2, 2, 0, 1)).passed
    assert verify_conjecture(ConjectureParams(3, 3, 2, 1, -1, -1)).passed
    assert conj_side(2, 2, 1, 1, 0) == conj_side(2, 2, 1, 1, 0)


@pytest.mark.parametrize("M1,M2", [(0, 0), (1, 2), (3, 1), (2, 2)])
def test_dim_one_side_is_independent_of_s(M1, M2):
    expected = qf_expand(clearing_factor(1, M1, M2) * qfact(M1 + M2) / (qfact(M1) * qfact(M2)))
    for S in range(-M1, M2 + 1):
        assert conj_side(1, 3, M1, M2, S) == expected


def test_conjecture_swap_invariance():
    for p in [ConjectureParams(2, 3, 2, 1, 1, -1), ConjectureParams(1, 2, 3, 3, 0, 2)]:
        a, b = verify_conjecture(p), verify_conjecture(p.swapped())
        assert a.status == b.status == "pass"


def test_rotation_map_examples():
    assert (rotation_map(3, 5).Q, rotation_map(3, 5).R) == (1, 2)
    assert (rotation_map(2, -1).Q, rotation_map(2, -1).R) == (-1, 1)


# oracle-backed properties


params = st.tuples(st.integers(1, 3), st.integers(0, 3), st.integers(0, 3)).flatmap(
    lambda t: st.tuples(st.just(t[0]), st.just(t[1]), st.just(t[2]), st.integers(-t[1], t[2])))


@settings(max_examples=40, deadline=None)
@given(params, st.sampled_from(QPOINTS))
def test_lhs_matches_direct_summation(prm, q0):
    n, M1, M2, S = prm
    p = TheoremParams(n, M1, M2, S)
    F = clearing_factor(n, M1, M2)
    assert value_at(lhs_theorem(p), F, q0) == theorem_lhs_at(n, M1, M2, S, q0)
    assert theorem_lhs_at(n, M1, M2, S, q0) == theorem_rhs_at(n, M1, M2, S, q0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2), st.integers(0, 2), st.data())
def test_conjecture_sides_match_direct_summation(n, m, M1, M2, data):
    S = data.draw(st.integers(-M1, M2))
    q0 = data.draw(st.sampled_from(QPOINTS))
    assert value_at(conj_side(n, m, M1, M2, S), clearing_factor(n, M1, M2), q0) == \
        conjecture_side_at(n, m, M1, M2, S, q0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("M1,M2", [(0, 0), (1, 2), (3, 1), (2, 4)])
def test_support_box_is_sound(n, M1, M2):
    """Summands outside the support box vanish, so widening it changes nothing."""
    for S in range(-M1, M2 + 1):
        p = TheoremParams(n, M1, M2, S)
        inside = set(enumerate_compositions(p))
        wide = itertools.product(range(-4, 5), repeat=n - 1)
        for head in wide:
            k = head + (S - sum(head),)
            if k not in inside:
                assert summand_theorem(p, k).is_zero, k


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_clearing_factor_makes_every_summand_polynomial(n):
    for M1, M2 in itertools.product(range(4), repeat=2):
        F = clearing_factor(n, M1, M2)
        for S in range(-M1, M2 + 1):
            p = TheoremParams(n, M1, M2, S)
            for k in enumerate_compositions(p):
                qf_expand(F * summand_theorem(p, k))
            qf_expand(F * rhs_theorem(p))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("M1,M2", [(0, 0), (2, 1), (1, 3), (3, 3)])
def test_rotation_coherence(n, M1, M2):
    for S in range(-M1, M2 + 1):
        p = TheoremParams(n, M1, M2, S)
        p0 = TheoremParams(n, M1 + S, M2 - S, 0)
        rot = rotation_map(n, S)
        assert rot.Q * n + rot.R == S and 0 <= rot.R < n
        src = list(enumerate_compositions(p0))
        image = [rotate_composition(k, rot) for k in src]
        assert sorted(image) == sorted(enumerate_compositions(p))
        assert [unrotate_composition(k, rot) for k in image] == src
        shift = (n + 1) * S * (S + 1) // 2
        from qsum.qcore import QFactored
        for k, k2 in zip(src, image):
            assert summand_theorem(p, k2) == QFactored.monomial(shift) * summand_theorem(p0, k)
        assert verify_theorem(p).passed == verify_theorem(p0).passed
