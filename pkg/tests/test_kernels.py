import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfmine import _kernels

traces = st.lists(st.lists(st.integers(0, 5), max_size=15), min_size=1, max_size=8)


def encode(ts):
    codes = np.array([a for t in ts for a in t], dtype=np.int64)
    offsets = np.zeros(len(ts) + 1, dtype=np.int64)
    np.cumsum([len(t) for t in ts], out=offsets[1:])
    return codes, offsets


def reference(ts, n):
    direct = np.zeros((n, n), dtype=np.int64)
    aba = np.zeros((n, n), dtype=np.int64)
    freq, starts, ends = (np.zeros(n, dtype=np.int64) for _ in range(3))
    for t in ts:
        if not t:
            continue
        starts[t[0]] += 1
        ends[t[-1]] += 1
        for i, a in enumerate(t):
            freq[a] += 1
            if i + 1 < len(t):
                direct[a, t[i + 1]] += 1
            if i + 2 < len(t) and t[i + 2] == a:
                aba[a, t[i + 1]] += 1
    return direct, aba, freq, starts, ends


@settings(max_examples=200, deadline=None)
@given(traces)
def test_dfg_backends_match_reference(ts):
    codes, offsets = encode(ts)
    ref = reference(ts, 6)
    for got in (_kernels.dfg_counts_numpy(codes, offsets, 6), _kernels.dfg_counts(codes, offsets, 6)):
        for g, r in zip(got, ref):
            assert np.array_equal(g, r)


def _moments(fn, batches):
    cells = batches[0].shape[1]
    count, mean, m2 = np.zeros(cells, dtype=np.int64), np.zeros(cells), np.zeros(cells)
    for b in batches:
        fn(count, mean, m2, b)
    return count, mean, m2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.lists(st.one_of(st.floats(-50, 50), st.just(float("nan"))), min_size=3, max_size=3),
                         min_size=1, max_size=6), min_size=1, max_size=5))
def test_moment_backends_match_two_pass(raw):
    batches = [np.array(b, dtype=np.float64) for b in raw]
    allv = np.vstack(batches)
    for fn in (_kernels.merge_moments_numpy, _kernels.merge_moments):
        count, mean, m2 = _moments(fn, batches)
        for j in range(3):
            col = allv[:, j][~np.isnan(allv[:, j])]
            assert count[j] == col.size
            if col.size:
                assert mean[j] == pytest.approx(col.mean(), abs=1e-9)
                assert m2[j] == pytest.approx(((col - col.mean()) ** 2).sum(), abs=1e-7)


def test_backend_name():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_backend_env_flag(monkeypatch):
    import importlib

    monkeypatch.setenv("QFMINE_BACKEND", "numpy")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "numpy"
        monkeypatch.setenv("QFMINE_BACKEND", "fortran")
        with pytest.raises(ValueError):
            importlib.reload(_kernels)
    finally:
        monkeypatch.delenv("QFMINE_BACKEND")
        importlib.reload(_kernels)
