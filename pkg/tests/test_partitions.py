import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codd_lab.calculus.partitions import (
    BitString,
    Distribution,
    InputSpace,
    Partition,
    dit_set,
    logical_entropy,
    max_logical_entropy,
    refines,
    shannon_entropy,
    shannon_of_masses,
)
from codd_lab.core.exceptions import (
    InvalidDistributionError,
    InvalidParameterError,
    InvalidPartitionError,
    SpaceMismatchError,
)
from codd_lab.utils import derive_rng, format_rational, map_ordered, parse_rational
from tests.helpers import distributions


class TestBitString:
    def test_from_int_is_most_significant_first(self):
        assert str(BitString.from_int(5, 4)) == "0101"
        assert BitString.from_str("0101").to_int() == 5

    def test_bits_past_the_end_read_as_zero(self):
        assert BitString.from_str("1").bit(3) == 0

    def test_to_bytes_pads_on_the_right(self):
        assert BitString.from_str("1").to_bytes() == b"\x80"

    def test_rejects_other_digits(self):
        with pytest.raises(InvalidParameterError):
            BitString.from_str("012")

    def test_value_must_fit(self):
        with pytest.raises(InvalidParameterError):
            BitString.from_int(4, 2)


class TestInputSpace:
    def test_bit_zero_is_most_significant(self, space2):
        assert space2.bit(2, 0) == 1
        assert space2.bit(2, 1) == 0

    @pytest.mark.parametrize("n", [0, 17])
    def test_size_caps(self, n):
        with pytest.raises(InvalidParameterError):
            InputSpace(n)


class TestDistribution:
    def test_masses_must_sum_to_one(self, space2):
        with pytest.raises(InvalidDistributionError):
            Distribution(space2, (Fraction(1, 4),) * 3 + (Fraction(1, 2),))

    def test_negative_mass(self, space2):
        with pytest.raises(InvalidDistributionError):
            Distribution(space2, (Fraction(1), Fraction(1), Fraction(-1), Fraction(0)))

    def test_wrong_length(self, space2):
        with pytest.raises(InvalidDistributionError):
            Distribution(space2, (Fraction(1),))

    def test_from_weights_normalizes(self, space2):
        d = Distribution.from_weights(space2, [1, 1, 2, 0])
        assert d.mass == (Fraction(1, 4), Fraction(1, 4), Fraction(1, 2), Fraction(0))


class TestPartition:
    def test_from_labels_is_canonical(self, space2):
        assert Partition.from_labels(space2, "baab").cell == (0, 1, 1, 0)
        assert Partition.from_labels(space2, [7, 3, 3, 7]) == Partition.from_labels(space2, "xyyx")

    def test_non_canonical_ids_rejected(self, space2):
        with pytest.raises(InvalidPartitionError):
            Partition(space2, (1, 0, 0, 1))

    def test_dit_set_of_two_cells(self, space2):
        dits = dit_set(Partition.from_labels(space2, [0, 0, 1, 1]))
        assert sorted(dits) == [(0, 2), (0, 3), (1, 2), (1, 3)]
        assert (3, 0) in dits

    def test_blocks(self, space2):
        assert Partition.from_labels(space2, [0, 1, 0, 1]).blocks() == [
            frozenset({0, 2}),
            frozenset({1, 3}),
        ]


class TestEntropy:
    def test_logical_entropy_of_half_quarter_quarter(self, space2, uniform2):
        p = Partition.from_labels(space2, [0, 1, 2, 2])
        assert logical_entropy(p, uniform2) == Fraction(5, 8)
        assert shannon_entropy(p, uniform2) == pytest.approx(1.5)

    def test_indiscrete_is_zero(self, space2, uniform2):
        p = Partition.indiscrete(space2)
        assert logical_entropy(p, uniform2) == 0
        assert shannon_entropy(p, uniform2) == 0.0

    def test_shannon_of_unnormalized_masses(self):
        assert shannon_of_masses([Fraction(2), Fraction(1), Fraction(1), Fraction(0)]) == pytest.approx(1.5)
        single = shannon_of_masses([Fraction(0), Fraction(3)])
        assert single == 0.0
        assert math.copysign(1.0, single) == 1.0
        assert shannon_of_masses([]) == 0.0

    def test_maximum_is_one_minus_sum_of_squares(self, uniform2):
        assert max_logical_entropy(uniform2) == Fraction(3, 4)

    def test_space_mismatch(self, uniform2):
        with pytest.raises(SpaceMismatchError):
            logical_entropy(Partition.indiscrete(InputSpace(3)), uniform2)

    @given(d=distributions(3), labels=st.lists(st.integers(0, 3), min_size=8, max_size=8))
    def test_logical_entropy_is_mass_of_distinctions(self, d, labels):
        p = Partition.from_labels(d.space, labels)
        pair_mass = sum((d.mass[x] * d.mass[y] for x, y in dit_set(p)), Fraction(0))
        assert logical_entropy(p, d) == 2 * pair_mass

    @given(
        d=distributions(3),
        coarse=st.lists(st.integers(0, 2), min_size=8, max_size=8),
        extra=st.lists(st.integers(0, 2), min_size=8, max_size=8),
    )
    def test_refinement_never_lowers_entropy(self, d, coarse, extra):
        fine = Partition.from_labels(d.space, zip(coarse, extra))
        rough = Partition.from_labels(d.space, coarse)
        assert refines(fine, rough)
        assert logical_entropy(fine, d) >= logical_entropy(rough, d)
        assert logical_entropy(fine, d) <= max_logical_entropy(d)


class TestRefines:
    def test_discrete_refines_indiscrete(self, space2):
        assert refines(Partition.discrete(space2), Partition.indiscrete(space2))
        assert not refines(Partition.indiscrete(space2), Partition.discrete(space2))

    def test_crossing_halves(self, space2):
        by_first = Partition.from_labels(space2, [0, 0, 1, 1])
        by_second = Partition.from_labels(space2, [0, 1, 0, 1])
        assert not refines(by_first, by_second)
        assert refines(by_first, by_first)

    @given(
        ds=st.lists(distributions(3), min_size=3, max_size=3),
        coarse=st.lists(st.integers(0, 2), min_size=8, max_size=8),
        extra=st.lists(st.integers(0, 2), min_size=8, max_size=8),
    )
    def test_refinement_orders_entropy_under_every_distribution(self, ds, coarse, extra):
        fine = Partition.from_labels(ds[0].space, zip(coarse, extra))
        rough = Partition.from_labels(ds[0].space, coarse)
        assert refines(fine, rough)
        assert dit_set(rough).issubset(dit_set(fine))
        for d in ds:
            assert logical_entropy(fine, d) >= logical_entropy(rough, d)
            assert shannon_entropy(fine, d) >= shannon_entropy(rough, d) - 1e-9
        if not refines(rough, fine):
            assert not dit_set(fine).issubset(dit_set(rough))



class TestRationals:
    def test_format_always_has_denominator(self):
        assert format_rational(Fraction(1)) == "1/1"
        assert format_rational(Fraction(2, 4)) == "1/2"

    @pytest.mark.parametrize("text, value", [("3/8", Fraction(3, 8)), ("0.25", Fraction(1, 4)), (" 2 ", Fraction(2))])
    def test_parse(self, text, value):
        assert parse_rational(text) == value

    @pytest.mark.parametrize("text", ["x", "1/0", ""])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_rational(text)

    @given(st.fractions())
    def test_text_form_is_exact(self, value):
        assert parse_rational(format_rational(value)) == value


class TestSeeding:
    def test_same_path_same_stream(self):
        assert derive_rng(7, 1, 2).integers(1 << 30) == derive_rng(7, 1, 2).integers(1 << 30)

    def test_paths_are_independent(self):
        draws = {int(derive_rng(7, k).integers(1 << 62)) for k in range(20)}
        assert len(draws) == 20

    def test_map_ordered_keeps_item_order(self):
        items = [-3, 1, -2, 5, -8]
        assert map_ordered(abs, items, jobs=2) == [3, 1, 2, 5, 8]
        assert map_ordered(abs, items) == [3, 1, 2, 5, 8]
