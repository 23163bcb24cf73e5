from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privsum.bitfield import BitVec, xor_sum
from privsum.entropy import TOL, entropy
from privsum.secret_sharing import (
    LeakageProfileSS,
    ShareScheme,
    additive_ramp,
    additive_scheme,
    check_leakage,
    check_ramp,
    check_recoverability,
    leakage_profile,
    ramp_shape,
    share_table,
    subsets,
)


def test_additive_ramp_examples():
    shares = additive_ramp([BitVec(1, 1), BitVec(1, 0)])
    assert [s.bits for s in shares] == [1, 0, 1]
    zeros = additive_ramp([BitVec(3, 0)] * 3)
    assert all(s == BitVec(3, 0) for s in zeros)
    with pytest.raises(ValueError, match="unequal"):
        additive_ramp([BitVec(1, 0), BitVec(2, 0)])


@given(st.lists(st.integers(0, 15), min_size=1, max_size=6))
def test_additive_shares_cancel(values):
    shares = additive_ramp([BitVec(4, v) for v in values])
    assert xor_sum(shares) == BitVec(4, 0)


def test_recoverability_examples():
    scheme = additive_scheme(3, 1)
    assert check_recoverability(scheme, 2).passed
    # brute force: H(S | H_1) = 1 bit for two uniform secret bits
    v = check_recoverability(scheme, 1)
    assert not v.passed
    assert v.measured == pytest.approx(1.0, abs=TOL)

    zero = ShareScheme(3, 2, 0, (1, 1, 1), lambda s, r: [s & 0] * 3)
    assert not check_recoverability(zero, 3).passed
    with pytest.raises(ValueError):
        check_recoverability(scheme, 0)


@pytest.mark.parametrize("L, expected", [
    (2, [0, 1, 1]),
    (3, [0, Fraction(1, 2), 1, 1]),
    (4, [0, Fraction(1, 3), Fraction(2, 3), 1, 1]),
])
def test_additive_profile_is_linear_ramp(L, expected):
    prof = leakage_profile(additive_scheme(L, 1))
    assert prof.symmetric
    assert prof.C == pytest.approx([float(e) for e in expected], abs=TOL)
    assert prof.monotone
    assert check_ramp(prof, L - 1, L - 1).passed


def test_asymmetric_scheme_detected():
    # share 1 carries the whole 2-bit secret, shares 2 and 3 carry one bit each
    scheme = ShareScheme(3, 2, 0, (2, 1, 1), lambda s, r: [s, s & 1, s >> 1])
    prof = leakage_profile(scheme)
    assert not prof.symmetric
    assert prof.per_subset[(1,)] == pytest.approx(1.0)
    assert prof.per_subset[(2,)] == pytest.approx(0.5)
    assert not check_ramp(prof, 2, 2).passed


def test_check_ramp_shapes():
    assert check_ramp([0, 0.5, 1, 1], 2, 2).passed
    assert check_ramp([0, 0, 1, 1], 2, 1).passed
    assert not check_ramp([0, 0, 1, 1], 2, 2).passed
    assert not check_ramp([0, 1, 1, 1], 2, 2).passed
    assert ramp_shape(3, 2, 2) == [0, Fraction(1, 2), 1, 1]
    with pytest.raises(ValueError):
        ramp_shape(3, 2, 3)


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("m", [1, 2])
def test_small_share_sets_are_uniform(L, m):
    t = share_table(additive_scheme(L, m))
    for size in range(L):
        for T in subsets(L, size):
            assert entropy(t, [f"H_{l}" for l in T]) == pytest.approx(size * m, abs=TOL)


def test_randomized_scheme_with_leakage_bound():
    # secret bit s, randomness r: shares (r, s ^ r); one share leaks nothing
    scheme = ShareScheme(2, 1, 1, (1, 1), lambda s, r: [r, s ^ r])
    assert check_leakage(scheme, 1, 0).passed
    assert check_recoverability(scheme, 2).passed
    assert not check_recoverability(scheme, 1).passed


def test_profile_needs_nonzero_secret_entropy():
    with pytest.raises(ValueError, match="undefined"):
        leakage_profile(ShareScheme(2, 0, 1, (1, 1), lambda s, r: [r, r]))


def test_profile_type_roundtrip():
    prof = LeakageProfileSS((0.0, 1.0, 1.0), {(): 0.0, (1,): 1.0, (2,): 1.0, (1, 2): 1.0}, True)
    assert prof.L == 2
    assert check_ramp(prof, 1, 1).passed
