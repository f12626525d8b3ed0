import numpy as np
import pytest

from blockplan.seeding import derive, rng_from, seed_tuple


def test_int_normalizes_to_singleton():
    assert seed_tuple(5) == (5,)
    assert seed_tuple(np.int64(5)) == (5,)


def test_iterable_passthrough():
    assert seed_tuple((1, 2, 3)) == (1, 2, 3)
    assert seed_tuple([4]) == (4,)


def test_negative_rejected():
    with pytest.raises(ValueError):
        seed_tuple(-1)
    with pytest.raises(ValueError):
        seed_tuple((0, -2))


def test_derive_appends_indices():
    assert derive(7, 1, 2) == (7, 1, 2)
    assert derive((7, 1), 2) == (7, 1, 2)


def test_rng_deterministic():
    a = rng_from((3, 1)).random(4)
    b = rng_from((3, 1)).random(4)
    assert np.array_equal(a, b)


def test_sibling_streams_differ():
    a = rng_from(derive(0, 1)).random(4)
    b = rng_from(derive(0, 2)).random(4)
    assert not np.array_equal(a, b)


def test_nesting_not_flattening():
    # (1, 23) and (12, 3) must not collide: components are SeedSequence
    # spawn keys, not concatenated digits.
    a = rng_from((1, 23)).random(4)
    b = rng_from((12, 3)).random(4)
    assert not np.array_equal(a, b)
