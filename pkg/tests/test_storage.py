import pytest
from hypothesis import given, settings, strategies as st

from _models import colliding_keys, run_storage_model
from conftest import needs_core
from tabch.storage import CAPACITY, CELL_BYTES, STAMP_MAX, HashStorage, StorageFullError
from tabch.tabulation import TabulationTables, init_tables

TABLES = init_tables(17)


def core_storage(tables=TABLES):
    from tabch import _core
    return _core.CoreHashStorage(tables.t0, tables.t1)


STORES = [pytest.param(lambda t=TABLES: HashStorage(t), id="python"),
          pytest.param(core_storage, id="compiled", marks=needs_core)]


@pytest.mark.parametrize("make", STORES)
def test_slot_examples(make):
    s = make(TabulationTables.identity())
    assert s.slot_of(0x0000) == 0
    assert s.slot_of(0xFFFF) == 0x7FFF
    assert s.slot_of(0x8003) == 3


def test_footprint():
    s = HashStorage(TABLES)
    assert CAPACITY == 32768 and CELL_BYTES == 12
    assert s.nbytes == 32768 * 12 == 393216
    assert s.capacity == CAPACITY


@needs_core
def test_core_footprint():
    from tabch import _core
    assert _core.cell_size() == 12
    s = core_storage()
    assert s.nbytes == 393216 and len(s.cells_bytes()) == 393216


@pytest.mark.parametrize("make", STORES)
def test_roundtrip_and_overwrite(make):
    s = make()
    assert s.get(5) is None
    s.put(5, 7)
    assert s.get(5) == 7
    s.put(5, 9)
    assert s.get(5) == 9
    assert s.live_count == 1


@pytest.mark.parametrize("make", STORES)
def test_colliding_keys_probe_forward(make):
    s = make()
    k1, k2 = colliding_keys(s.slot_of, 2)
    s.put(k1, 1)
    s.put(k2, 2)
    assert s.get(k1) == 1 and s.get(k2) == 2


def test_collision_occupies_next_slot_with_wrap():
    s = HashStorage(TABLES)
    k1, k2 = colliding_keys(s.slot_of, 2, want_slot=CAPACITY - 1)
    s.put(k1, 1)
    s.put(k2, 2)
    assert s.cells[3 * (CAPACITY - 1)] == k1
    assert s.cells[0] == k2 and s.cells[1] == 2  # wrapped to slot 0
    assert s.get(k2) == 2


@pytest.mark.parametrize("make", STORES)
def test_clear(make):
    s = make()
    keys = list(range(0, 20_000, 10))
    for k in keys:
        s.put(k, k + 1)
    before = bytes(s.cells) if isinstance(s, HashStorage) else s.cells_bytes()
    stamp = s.current_stamp
    s.clear()
    after = bytes(s.cells) if isinstance(s, HashStorage) else s.cells_bytes()
    assert before == after  # no cell rewritten
    assert s.current_stamp == stamp + 1
    assert s.live_count == 0
    assert all(s.get(k) is None for k in keys)


@pytest.mark.parametrize("make", STORES)
def test_clear_empty_only_bumps_stamp(make):
    s = make()
    stamp = s.current_stamp
    s.clear()
    assert s.current_stamp == stamp + 1 and s.live_count == 0


@pytest.mark.parametrize("make", STORES)
def test_stamp_wrap_sweeps(make):
    s = make()
    s.current_stamp = STAMP_MAX
    for k in range(100):
        s.put(k, k)
    s.clear()
    assert s.current_stamp == 1
    assert all(s.get(k) is None for k in range(100))
    s.put(3, 4)
    assert s.get(3) == 4 and s.get(4) is None


@pytest.mark.parametrize("make", STORES)
def test_full_table_is_error(make):
    s = make()
    for k in range(CAPACITY):
        s.put(k, 1)
    assert s.live_count == CAPACITY
    with pytest.raises((StorageFullError, Exception)) as info:
        s.put(CAPACITY + 12345, 1)
    assert "full" in str(info.value)
    assert s.get(CAPACITY - 1) == 1
    assert s.get(CAPACITY + 12345) is None


def test_no_delete_operation():
    assert not any(hasattr(HashStorage, name) for name in ("delete", "remove", "__delitem__", "pop"))


@pytest.mark.parametrize("make", STORES)
def test_model_equivalence_small(make):
    s = make()
    extra = colliding_keys(s.slot_of, 8)
    run_storage_model(make, 2_000, seed=1, extra_keys=extra)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("pgc"),
                          # k and k + 0x8000 share a slot under identity tables
                          st.integers(0, 39).map(lambda k: k % 8 + 0x8000 * (k // 8)),
                          st.integers(0, 2**32 - 1)),
                max_size=200))
def test_hypothesis_against_dict(ops):
    s = HashStorage(TabulationTables.identity())
    model = {}
    for op, key, value in ops:
        if op == "p":
            s.put(key, value)
            model[key] = value
        elif op == "g":
            assert s.get(key) == model.get(key)
        else:
            s.clear()
            model.clear()
        assert s.live_count == len(model)
