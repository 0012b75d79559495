import functools
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tabch.bench import balance_fraction
from tabch.tabulation import TABLE_SIZE, TabulationTables, init_tables
from tabch.tiebreak import (
    BiasArray,
    InconsistentTest,
    TabHash,
    make_bias_array,
    make_tie_breaker,
    precedes,
)


def test_hash_order_by_value():
    tb = TabHash(TabulationTables.identity())  # h(x) = x for x < 2**16
    assert precedes(tb, 3, 7)
    assert not precedes(tb, 7, 3)


def test_hash_collision_falls_back_to_id():
    zeros = np.zeros(TABLE_SIZE, np.uint16)
    tb = TabHash(TabulationTables(zeros, zeros.copy()))
    assert precedes(tb, 2, 9)
    assert not precedes(tb, 9, 2)


def test_bias_example():
    tb = BiasArray([2, 0, 1])
    assert precedes(tb, 1, 2)
    assert not precedes(tb, 2, 1)


def test_make_bias_array():
    assert make_bias_array(1, 3).values.tolist() == [0]
    assert np.array_equal(make_bias_array(5, 11).values, make_bias_array(5, 11).values)
    assert sorted(make_bias_array(10_000, 2).values.tolist()) == list(range(10_000))
    with pytest.raises(ValueError):
        make_bias_array(0, 1)


def test_equal_nodes_rejected():
    with pytest.raises(AssertionError):
        make_tie_breaker("xor", 10, 0).precedes(4, 4)


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_tie_breaker("nope", 3, 0)


def test_inconsistent_never_precedes():
    tb = InconsistentTest()
    assert not tb.consistent
    assert not precedes(tb, 0, 1) and not precedes(tb, 1, 0)


@pytest.mark.parametrize("kind", ["bias", "xor"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_strict_total_order_exhaustive(kind, seed):
    n = 50
    tb = make_tie_breaker(kind, n, seed)
    nodes = range(n)
    for a, b in itertools.permutations(nodes, 2):
        assert precedes(tb, a, b) != precedes(tb, b, a)
    for a, b, c in itertools.permutations(nodes, 3):
        if precedes(tb, a, b) and precedes(tb, b, c):
            assert precedes(tb, a, c)


@pytest.mark.parametrize("kind", ["bias", "xor"])
def test_key_realizes_precedes(kind):
    tb = make_tie_breaker(kind, 300, 9)
    nodes = np.arange(300)
    keys = tb.keys(nodes)
    for a, b in itertools.combinations(range(300), 2):
        assert precedes(tb, a, b) == (keys[a] < keys[b]) == (tb.key(a) < tb.key(b))


tables_for = functools.lru_cache(maxsize=None)(init_tables)


@settings(deadline=None)
@given(st.integers(0, 15), st.integers(0, 0xFFFFFFFF), st.integers(0, 0xFFFFFFFF))
def test_hash_order_antisymmetric(seed, a, b):
    if a == b:
        return
    tb = TabHash(tables_for(seed))
    assert precedes(tb, a, b) != precedes(tb, b, a)


@pytest.mark.slow
def test_balance_fraction():
    rng = np.random.default_rng(2024)
    frac = balance_fraction(rng.integers(0, 1 << 63, 10), 100_000, rng)
    assert abs(frac - 0.5) <= 0.01
