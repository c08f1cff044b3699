"""Arithmetic on the quotient groups G_l and their tree structure."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nadnn.localfield import (
    BallId,
    CapacityError,
    Characteristic,
    FieldConfig,
    TreeIndex,
    add,
    add_table,
    digit_table,
    enumerate_level,
    group_size,
    lifts,
    multiply,
    neg,
    one,
    parent_ranks,
    project,
    project_to,
    sub,
    sub_table,
    zero,
)

from conftest import POS, ZERO

P2_POS = FieldConfig(2, POS)
P2_ZERO = FieldConfig(2, ZERO)


def T(*digits):
    return TreeIndex(digits)


class TestFieldConfig:
    def test_rejects_composite(self):
        with pytest.raises(ValueError):
            FieldConfig(4, POS)

    def test_rejects_large_prime(self):
        with pytest.raises(ValueError):
            FieldConfig(257, POS)

    def test_accepts_251(self):
        assert FieldConfig(251, ZERO).size(1) == 251

    def test_parse_characteristic(self):
        assert Characteristic.parse("pos") is POS
        assert Characteristic.parse("zero") is ZERO
        with pytest.raises(ValueError):
            Characteristic.parse("two")

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            group_size(2, 40)
        assert group_size(2, 32) == 2**32


class TestTreeIndex:
    def test_rank_little_endian(self):
        assert T(1, 1, 0).rank(2) == 3
        assert T(0, 1).rank(3) == 3

    def test_from_rank_roundtrip(self):
        for r in range(27):
            assert TreeIndex.from_rank(r, 3, 3).rank(3) == r

    def test_digit_out_of_range(self):
        with pytest.raises(ValueError):
            T(2).rank(2)

    def test_text_form(self):
        assert TreeIndex.parse("110") == T(1, 1, 0)
        assert T(1, 1, 0).to_text() == "110"
        assert TreeIndex.parse("").level == 0

    def test_text_form_large_prime(self):
        x = T(12, 0, 3)
        assert x.to_text() == "12,0,3"
        assert TreeIndex.parse("12,0,3", 13) == x

    def test_ball_measure_exact(self):
        assert BallId(T(1, 0, 1)).measure(3) == Fraction(1, 27)

    def test_ball_contains(self):
        ball = BallId(T(1))
        assert ball.contains(T(1, 0))
        assert not ball.contains(T(0, 1))


class TestEnumeration:
    def test_p2_level2(self):
        assert enumerate_level(P2_POS, 2) == [T(0, 0), T(1, 0), T(0, 1), T(1, 1)]

    def test_p3_level1(self):
        assert len(enumerate_level(FieldConfig(3, ZERO), 1)) == 3

    def test_p2_level10_distinct(self):
        xs = enumerate_level(P2_POS, 10)
        assert len(xs) == 1024
        assert len(set(xs)) == 1024

    def test_rank_is_identity_permutation(self, cfg):
        for l in range(4):
            ranks = [x.rank(cfg.p) for x in enumerate_level(cfg, l)]
            assert ranks == list(range(cfg.p**l))

    def test_digit_table_matches_enumeration(self, cfg):
        table = digit_table(cfg.p, 3)
        for r, x in enumerate(enumerate_level(cfg, 3)):
            assert tuple(table[r]) == x.digits


class TestProjectionAndLifts:
    def test_drops_last_digit(self):
        assert project(P2_POS, T(1, 1)) == T(1)
        assert project(FieldConfig(3, ZERO), T(1, 2)) == T(1)

    def test_level_zero_rejected(self):
        with pytest.raises(ValueError):
            project(P2_POS, T())

    def test_project_to(self):
        assert project_to(P2_POS, T(1, 0, 1, 1), 2) == T(1, 0)

    def test_parent_ranks(self):
        for p, l in [(2, 3), (3, 2)]:
            cfg = FieldConfig(p, POS)
            expected = [project(cfg, x).rank(p) for x in enumerate_level(cfg, l)]
            np.testing.assert_array_equal(parent_ranks(p, l), expected)

    def test_lifts_example(self):
        assert lifts(P2_POS, T(1)) == [T(1, 0), T(1, 1)]

    def test_lifts_partition_level(self):
        cfg = FieldConfig(3, POS)
        children = [k for j in enumerate_level(cfg, 2) for k in lifts(cfg, j)]
        assert len(children) == 27
        assert set(children) == set(enumerate_level(cfg, 3))
        for j in enumerate_level(cfg, 2):
            assert len(lifts(cfg, j)) == 3
            assert all(project(cfg, k) == j for k in lifts(cfg, j))

    def test_project_surjective_kernel_size_p(self, cfg):
        for l in range(1, 4):
            xs = enumerate_level(cfg, l)
            images = [project(cfg, x) for x in xs]
            assert set(images) == set(enumerate_level(cfg, l - 1))
            kernel = [x for x, y in zip(xs, images) if y == zero(l - 1)]
            assert len(kernel) == cfg.p

    def test_project_is_homomorphism(self, cfg):
        for l in range(1, 4):
            xs = enumerate_level(cfg, l)
            for x, y in itertools.product(xs, xs):
                assert project(cfg, add(cfg, x, y)) == add(cfg, project(cfg, x), project(cfg, y))


class TestAddition:
    def test_char2_self_inverse(self):
        assert add(P2_POS, T(1, 1), T(1, 1)) == T(0, 0)

    def test_carry_mod4(self):
        assert add(P2_ZERO, T(1, 1), T(1, 1)) == T(0, 1)

    def test_lower_level_not_closed_in_char_zero(self):
        one_ = T(1, 0)
        assert add(P2_ZERO, one_, one_).rank(2) == 2
        assert add(P2_ZERO, one_, one_).rank(2) not in {0, 1}
        assert add(P2_POS, one_, one_).rank(2) in {0, 1}

    def test_mismatched_levels(self):
        with pytest.raises(ValueError):
            add(P2_POS, T(1), T(1, 0))

    def test_group_axioms_exhaustive(self, cfg):
        for l in range(4):
            xs = enumerate_level(cfg, l)
            z = zero(l)
            for x in xs:
                assert add(cfg, x, z) == x
                assert add(cfg, x, neg(cfg, x)) == z
            for x, y in itertools.product(xs, xs):
                assert add(cfg, x, y) == add(cfg, y, x)
                assert sub(cfg, add(cfg, x, y), y) == x
            if l <= 2 or cfg.p == 2:
                for x, y, w in itertools.product(xs, xs, xs):
                    assert add(cfg, add(cfg, x, y), w) == add(cfg, x, add(cfg, y, w))

    def test_associativity_p3_level3_sampled(self, cfg):
        rng = np.random.default_rng(7)
        n = cfg.p**3
        for a, b, c in rng.integers(0, n, size=(300, 3)):
            x, y, w = (TreeIndex.from_rank(int(r), cfg.p, 3) for r in (a, b, c))
            assert add(cfg, add(cfg, x, y), w) == add(cfg, x, add(cfg, y, w))

    def test_characteristic_p(self):
        for p in (2, 3):
            cfg = FieldConfig(p, POS)
            for x in enumerate_level(cfg, 3):
                acc = zero(3)
                for _ in range(p):
                    acc = add(cfg, acc, x)
                assert acc == zero(3)

    def test_char_zero_is_integer_addition(self):
        cfg = FieldConfig(3, ZERO)
        for x, y in itertools.product(enumerate_level(cfg, 2), repeat=2):
            assert add(cfg, x, y).rank(3) == (x.rank(3) + y.rank(3)) % 9

    def test_tables_match_scalar_ops(self, cfg):
        xs = enumerate_level(cfg, 2)
        at, st_ = add_table(cfg, 2), sub_table(cfg, 2)
        for x, y in itertools.product(xs, xs):
            i, j = x.rank(cfg.p), y.rank(cfg.p)
            assert at[i, j] == add(cfg, x, y).rank(cfg.p)
            assert st_[i, j] == sub(cfg, x, y).rank(cfg.p)

    @settings(max_examples=50, deadline=None)
    @given(
        p=st.sampled_from([2, 3, 5, 7]),
        char=st.sampled_from([POS, ZERO]),
        data=st.data(),
    )
    def test_add_sub_inverse_property(self, p, char, data):
        cfg = FieldConfig(p, char)
        l = data.draw(st.integers(1, 6))
        digits = st.lists(st.integers(0, p - 1), min_size=l, max_size=l).map(tuple)
        x = TreeIndex(data.draw(digits))
        y = TreeIndex(data.draw(digits))
        assert sub(cfg, add(cfg, x, y), y) == x
        assert add(cfg, neg(cfg, x), x) == zero(l)


class TestMultiplication:
    def test_identity(self):
        for char in (POS, ZERO):
            cfg = FieldConfig(3, char)
            for x in enumerate_level(cfg, 2):
                assert multiply(cfg, x, one(2)) == x

    def test_truncation(self):
        assert multiply(P2_POS, T(0, 1), T(0, 1)) == T(0, 0)

    def test_char_zero_mod4(self):
        assert multiply(P2_ZERO, T(1, 1), T(1, 1)).rank(2) == 1

    def test_distributive(self):
        for char in (POS, ZERO):
            cfg = FieldConfig(2, char)
            for l in range(1, 4):
                xs = enumerate_level(cfg, l)
                for x, y, w in itertools.product(xs, xs, xs):
                    lhs = multiply(cfg, x, add(cfg, y, w))
                    rhs = add(cfg, multiply(cfg, x, y), multiply(cfg, x, w))
                    assert lhs == rhs

    def test_positive_char_is_polynomial_product(self):
        # (1 + 2T) (2 + T) = 2 + 5T + 2T^2 = 2 + 2T + 2T^2 over F_3
        cfg = FieldConfig(3, POS)
        assert multiply(cfg, T(1, 2, 0), T(2, 1, 0)) == T(2, 2, 2)
