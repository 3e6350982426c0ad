from __future__ import annotations

import pytest

from pipelock.data import Store, atomic_open, default, load_defaults, store, write_table


class Counting(Store):
    def __init__(self):
        super(Counting, self).__init__()
        self.calls = 0

    @store
    def square(self, x: int) -> int:
        self.calls += 1
        return x * x

    @store('cube')
    def third_power(self, x: int, offset: int = 0) -> int:
        self.calls += 1
        return x ** 3 + offset


def test_store_caches_per_argument():
    cache = Counting()
    assert cache.square(3) == cache.square(3) == 9
    assert cache.calls == 1
    assert cache.square(4) == 16
    assert cache.third_power(2, offset=1) == 9
    assert cache.third_power(2, offset=1) == 9
    assert cache.calls == 3
    assert ('cube', 2, ('offset', 1)) in cache
    assert cache.load(('square', 5), 'missing') == 'missing'
    cache.clear()
    assert cache.square(3) == 9
    assert cache.calls == 4


def test_default():
    assert default(None, 1) == 1
    assert default(0, 1) == 1
    assert default(0, 1, boolean=False) == 0
    assert default('name', 'trace') == 'name'


def test_packaged_defaults():
    defaults = load_defaults()
    assert defaults['clock'] == {'chunk_bytes': 80, 'clock_ghz': 1.0, 'gap_cycles': 0}
    assert defaults['header_bytes'] == 88
    assert defaults['sweep']['n_max'] == 30


def test_write_table(tmp_path):
    path = write_table(tmp_path / 'nested' / 'table.csv', ('a', 'b'), [(1, 0.1), (2, '')])
    assert path.read_bytes() == b'a,b\n1,0.1\n2,\n'


def test_atomic_open_keeps_the_old_file_on_errors(tmp_path):
    path = tmp_path / 'out.csv'
    path.write_text('old', encoding='utf-8')
    with pytest.raises(RuntimeError):
        with atomic_open(path) as fp:
            fp.write('new')
            raise RuntimeError
    assert path.read_text(encoding='utf-8') == 'old'
    assert [p.name for p in tmp_path.iterdir()] == ['out.csv']
