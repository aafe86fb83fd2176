from fractions import Fraction

from qcover.ratspan import in_span, span_solve


def test_three_slit_family_misses_omega():
    assert span_solve(3, [0b011, 0b110], 0b111) is None
    assert not in_span(3, [0b011, 0b110], 0b111)


def test_symmetric_pair_family_hits_omega():
    coeffs = span_solve(3, [0b011, 0b101, 0b110], 0b111)
    assert coeffs == [Fraction(1, 2)] * 3


def test_identity_and_negative_coefficients():
    assert span_solve(2, [0b11], 0b11) == [Fraction(1)]
    # {1}, {1,2} reach {2} with a negative coefficient
    coeffs = span_solve(2, [0b01, 0b11], 0b10)
    assert coeffs == [Fraction(-1), Fraction(1)]


def test_redundant_members_pin_free_coefficients_to_zero():
    # the third member is the sum of the first two; elimination leaves it free
    coeffs = span_solve(3, [0b001, 0b110, 0b111], 0b111)
    assert coeffs is not None
    assert sum(
        c for c, m in zip(coeffs, [0b001, 0b110, 0b111]) if m & 0b001
    ) == 1
    assert coeffs.count(Fraction(0)) >= 1


def test_exactness_against_float_noise():
    # a family whose span membership a float solver could get wrong:
    # singletons of a 12-set reach omega only with all twelve present
    masks = [1 << i for i in range(12)]
    assert span_solve(12, masks[:-1], (1 << 12) - 1) is None
    assert span_solve(12, masks, (1 << 12) - 1) == [Fraction(1)] * 12
