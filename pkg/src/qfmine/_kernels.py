"""Numeric hot loops with a numba and a pure-numpy implementation.

The backend is picked once at import from ``QFMINE_BACKEND`` (``numba`` or
``numpy``). Without the variable numba is used when it imports cleanly.
Both backends return identical results; ``tests/test_kernels.py`` checks it.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["BACKEND", "dfg_counts_numpy", "merge_moments_numpy", "dfg_counts", "merge_moments"]


def dfg_counts_numpy(codes: np.ndarray, offsets: np.ndarray, n: int):
    """Directly-follows statistics over int-encoded traces.

    Args:
        codes: concatenated activity codes of all traces (int64).
        offsets: trace boundaries, ``len(traces) + 1`` entries starting at 0.
        n: number of distinct activities.

    Returns:
        ``(direct, aba, freq, starts, ends)`` where ``direct[a, b]`` counts
        adjacent pairs, ``aba[a, b]`` counts ``a, b, a`` windows, and the
        vectors count occurrences, trace starts and trace ends.
    """
    codes = np.asarray(codes, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    direct = np.zeros((n, n), dtype=np.int64)
    aba = np.zeros((n, n), dtype=np.int64)
    freq = np.bincount(codes, minlength=n).astype(np.int64)
    lengths = np.diff(offsets)
    nonempty = lengths > 0
    starts = np.bincount(codes[offsets[:-1][nonempty]], minlength=n).astype(np.int64)
    ends = np.bincount(codes[offsets[1:][nonempty] - 1], minlength=n).astype(np.int64)
    if codes.size >= 2:
        # pair i -> i+1 is valid unless i+1 starts a new trace
        valid = np.ones(codes.size - 1, dtype=bool)
        cut = offsets[1:-1]
        valid[cut[(cut > 0) & (cut < codes.size)] - 1] = False
        np.add.at(direct, (codes[:-1][valid], codes[1:][valid]), 1)
        if codes.size >= 3:
            valid3 = valid[:-1] & valid[1:]
            a, b, c = codes[:-2], codes[1:-1], codes[2:]
            hit = valid3 & (a == c)
            np.add.at(aba, (a[hit], b[hit]), 1)
    return direct, aba, freq, starts, ends


def merge_moments_numpy(count, mean, m2, samples):
    """Fold a batch into running per-cell moments (Chan et al. update).

    ``samples`` is ``(batch, cells)`` with NaN marking a missing value. The
    three state arrays are updated in place.
    """
    samples = np.asarray(samples, dtype=np.float64)
    ok = ~np.isnan(samples)
    nb = ok.sum(axis=0).astype(np.int64)
    safe = np.where(ok, samples, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mb = np.where(nb > 0, safe.sum(axis=0) / np.maximum(nb, 1), 0.0)
    m2b = (np.where(ok, samples - mb, 0.0) ** 2).sum(axis=0)
    total = count + nb
    delta = mb - mean
    upd = nb > 0
    frac = np.where(upd, nb / np.maximum(total, 1), 0.0)
    new_mean = mean + delta * frac
    new_m2 = m2 + m2b + delta * delta * np.where(upd, count * frac, 0.0)
    mean[:] = np.where(upd, new_mean, mean)
    m2[:] = np.where(upd, new_m2, m2)
    count[:] = total


def _load_numba():
    from numba import njit

    @njit(cache=True)
    def dfg_kernel(codes, offsets, n):
        direct = np.zeros((n, n), dtype=np.int64)
        aba = np.zeros((n, n), dtype=np.int64)
        freq = np.zeros(n, dtype=np.int64)
        starts = np.zeros(n, dtype=np.int64)
        ends = np.zeros(n, dtype=np.int64)
        for t in range(offsets.size - 1):
            lo, hi = offsets[t], offsets[t + 1]
            if hi <= lo:
                continue
            starts[codes[lo]] += 1
            ends[codes[hi - 1]] += 1
            for i in range(lo, hi):
                freq[codes[i]] += 1
                if i + 1 < hi:
                    direct[codes[i], codes[i + 1]] += 1
                if i + 2 < hi and codes[i] == codes[i + 2]:
                    aba[codes[i], codes[i + 1]] += 1
        return direct, aba, freq, starts, ends

    @njit(cache=True)
    def moments_kernel(count, mean, m2, samples):
        for j in range(samples.shape[1]):
            nb = 0
            s = 0.0
            for i in range(samples.shape[0]):
                x = samples[i, j]
                if not np.isnan(x):
                    nb += 1
                    s += x
            if nb == 0:
                continue
            mb = s / nb
            m2b = 0.0
            for i in range(samples.shape[0]):
                x = samples[i, j]
                if not np.isnan(x):
                    m2b += (x - mb) * (x - mb)
            total = count[j] + nb
            delta = mb - mean[j]
            frac = nb / total
            mean[j] = mean[j] + delta * frac
            m2[j] = m2[j] + m2b + delta * delta * count[j] * frac
            count[j] = total

    def dfg_counts(codes, offsets, n):
        return dfg_kernel(np.asarray(codes, dtype=np.int64), np.asarray(offsets, dtype=np.int64), n)

    def merge_moments(count, mean, m2, samples):
        moments_kernel(count, mean, m2, np.ascontiguousarray(samples, dtype=np.float64))

    return dfg_counts, merge_moments


def _select():
    wanted = os.environ.get("QFMINE_BACKEND", "").strip().lower()
    if wanted not in ("", "numba", "numpy"):
        raise ValueError(f"QFMINE_BACKEND must be 'numba' or 'numpy', got {wanted!r}")
    if wanted != "numpy":
        try:
            return ("numba", *_load_numba())
        except ImportError:
            if wanted == "numba":
                raise
    return "numpy", dfg_counts_numpy, merge_moments_numpy


BACKEND, dfg_counts, merge_moments = _select()
