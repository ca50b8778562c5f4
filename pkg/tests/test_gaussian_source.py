import numpy as np
import pytest

from levysim.gaussian_source import (
    StreamSpec,
    blocks,
    draw_normal_vector,
    map_blocks,
    open_stream,
    worker_count,
)


def test_same_spec_reproduces():
    a = open_stream(StreamSpec(7, 3)).normal(1000)
    b = open_stream(StreamSpec(7, 3)).normal(1000)
    assert np.array_equal(a, b)


def test_distinct_streams_uncorrelated():
    n = 100_000
    a = open_stream(StreamSpec(1, 0)).normal(n)
    b = open_stream(StreamSpec(1, 1)).normal(n)
    assert abs(np.corrcoef(a, b)[0, 1]) <= 3 / np.sqrt(n)


def test_normal_moments():
    n = 1_000_000
    z = open_stream(StreamSpec(2, 0)).normal(n)
    assert abs(z.mean()) <= 3 / np.sqrt(n)
    assert abs(z.var() - 1) <= 3 * np.sqrt(2 / n)
    # kurtosis 3, variance of z^4 is 105 - 9 = 96
    assert abs(np.mean(z ** 4) - 3) <= 3 * np.sqrt(96 / n)
    assert abs(z.mean()) <= 3e-3 and abs(z.var() - 1) <= 5e-3


def test_draw_vector_contract():
    s = open_stream(StreamSpec(5, 0))
    assert draw_normal_vector(s, 0).size == 0 and s.consumed == 0
    first = np.concatenate([draw_normal_vector(s, 3), draw_normal_vector(s, 3)])
    assert np.array_equal(first, draw_normal_vector(open_stream(StreamSpec(5, 0)), 6))


def test_chi2_counts_and_mean():
    s = open_stream(StreamSpec(9, 0))
    x = s.chi2_2(200_000)
    assert s.consumed == 400_000
    assert abs(x.mean() - 2) <= 3 * 2 / np.sqrt(x.size)


def test_spec_validation():
    with pytest.raises(ValueError):
        StreamSpec(-1, 0)
    with pytest.raises(ValueError):
        StreamSpec(0, 1 << 64)


def test_blocks_cover():
    assert list(blocks(2500, 1024)) == [(0, 0, 1024), (1, 1024, 1024), (2, 2048, 452)]
    assert list(blocks(0)) == []


def test_map_blocks_independent_of_workers(monkeypatch):
    def fn(stream, count):
        return stream.normal(count)

    monkeypatch.setenv("LEVYSIM_THREADS", "1")
    assert worker_count() == 1
    one = np.concatenate(map_blocks(fn, 11, 5000, 700))
    monkeypatch.setenv("LEVYSIM_THREADS", "4")
    assert worker_count() == 4
    four = np.concatenate(map_blocks(fn, 11, 5000, 700))
    assert np.array_equal(one, four)
