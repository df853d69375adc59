"""Heuristics Miner over preprocessed event logs.

Counting runs in :mod:`qfmine._kernels`; the dependency measures and edge
selection are plain Python over the resulting count matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .eventlog import EventLog

__all__ = [
    "START",
    "END",
    "DfgStats",
    "MinerConfig",
    "HnEdge",
    "HeuristicNet",
    "dfg_counts",
    "dependency",
    "loop2",
    "discover",
    "net_to_dot",
]

START = "START"
END = "END"


def _traces(log: EventLog | Iterable[Sequence[str]]) -> list[Sequence[str]]:
    if isinstance(log, EventLog):
        return [acts for _, acts in log.traces]
    return list(log)


@dataclass
class DfgStats:
    """Directly-follows counts indexed by sorted activity name."""

    activities: list[str]
    direct: np.ndarray
    aba: np.ndarray
    freq: np.ndarray
    starts: np.ndarray
    ends: np.ndarray
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {a: i for i, a in enumerate(self.activities)}

    def count(self, a: str, b: str) -> int:
        """|a>b|: how often ``b`` directly follows ``a``."""
        ia, ib = self.index.get(a), self.index.get(b)
        return 0 if ia is None or ib is None else int(self.direct[ia, ib])

    def count2(self, a: str, b: str) -> int:
        """|a>>b|: occurrences of the window ``a, b, a``."""
        ia, ib = self.index.get(a), self.index.get(b)
        return 0 if ia is None or ib is None else int(self.aba[ia, ib])

    def activity_freq(self, a: str) -> int:
        return int(self.freq[self.index[a]])


def dfg_counts(log: EventLog | Iterable[Sequence[str]]) -> DfgStats:
    traces = _traces(log)
    acts = sorted({a for t in traces for a in t})
    index = {a: i for i, a in enumerate(acts)}
    codes = np.fromiter((index[a] for t in traces for a in t), dtype=np.int64)
    offsets = np.zeros(len(traces) + 1, dtype=np.int64)
    np.cumsum([len(t) for t in traces], out=offsets[1:])
    direct, aba, freq, starts, ends = _kernels.dfg_counts(codes, offsets, len(acts))
    return DfgStats(acts, direct, aba, freq, starts, ends)


def dependency(a: str, b: str, stats: DfgStats) -> float:
    """Dependency measure; the self-loop variant when ``a == b``."""
    if a == b:
        n = stats.count(a, a)
        return n / (n + 1)
    ab, ba = stats.count(a, b), stats.count(b, a)
    return (ab - ba) / (ab + ba + 1)


def loop2(a: str, b: str, stats: DfgStats) -> float:
    """Length-two loop measure."""
    n = stats.count2(a, b) + stats.count2(b, a)
    return n / (n + 1)


@dataclass(frozen=True)
class MinerConfig:
    dependency_threshold: float = 0.5
    and_threshold: float = 0.65
    loop_two_threshold: float = 0.5
    noise_pre_clean: float = 0.0


@dataclass(frozen=True)
class HnEdge:
    freq: int
    dependency: float


@dataclass
class HeuristicNet:
    """Mined heuristic net.

    ``and_measures`` maps ``(activity, "out"|"in", b, c)`` to the AND
    measure between two of its successors (predecessors). It is kept for
    export only.
    """

    activities: dict[str, int]
    edges: dict[tuple[str, str], HnEdge]
    start: dict[str, int]
    end: dict[str, int]
    config: MinerConfig
    and_measures: dict[tuple[str, str, str, str], float] = field(default_factory=dict)

    def successors(self, a: str) -> list[str]:
        return sorted(b for x, b in self.edges if x == a)

    def predecessors(self, b: str) -> list[str]:
        return sorted(a for a, y in self.edges if y == b)


def _pre_clean(stats: DfgStats, thresh: float) -> DfgStats:
    """Drop directly-follows entries below ``thresh`` times the source's strongest one."""
    if thresh <= 0:
        return stats
    direct = stats.direct.copy()
    best = direct.max(axis=1, keepdims=True)
    direct[direct < thresh * best] = 0
    return DfgStats(stats.activities, direct, stats.aba, stats.freq, stats.starts, stats.ends)


def discover(log: EventLog | Iterable[Sequence[str]], cfg: MinerConfig = MinerConfig()) -> HeuristicNet:
    """Build the heuristic net of ``log``.

    An observed pair (a, b) becomes an edge if its dependency reaches the
    threshold. Self-loops use the loop measure; length-two loops are added
    in both directions when neither end has a self-loop. Every activity also
    keeps its best outgoing and incoming edge (ties by name) so no activity
    is left unconnected.
    """
    stats = _pre_clean(dfg_counts(log), cfg.noise_pre_clean)
    acts = stats.activities
    edges: dict[tuple[str, str], HnEdge] = {}

    def keep(a: str, b: str, dep: float) -> None:
        edges[(a, b)] = HnEdge(stats.count(a, b), dep)

    observed = [(acts[i], acts[j]) for i, j in zip(*np.nonzero(stats.direct))]
    self_loop = set()
    for a, b in observed:
        dep = dependency(a, b, stats)
        if dep >= cfg.dependency_threshold:
            keep(a, b, dep)
            if a == b:
                self_loop.add(a)
    for a, b in observed:
        if a < b and a not in self_loop and b not in self_loop and stats.count(b, a) > 0:
            l2 = loop2(a, b, stats)
            if l2 >= cfg.loop_two_threshold:
                keep(a, b, dependency(a, b, stats))
                keep(b, a, dependency(b, a, stats))
    # all-activities-connected
    out_best: dict[str, tuple[float, str]] = {}
    in_best: dict[str, tuple[float, str]] = {}
    for a, b in observed:
        if a == b:
            continue
        dep = dependency(a, b, stats)
        if a not in out_best or (-dep, b) < (-out_best[a][0], out_best[a][1]):
            out_best[a] = (dep, b)
        if b not in in_best or (-dep, a) < (-in_best[b][0], in_best[b][1]):
            in_best[b] = (dep, a)
    for a, (dep, b) in out_best.items():
        if (a, b) not in edges:
            keep(a, b, dep)
    for b, (dep, a) in in_best.items():
        if (a, b) not in edges:
            keep(a, b, dep)

    and_measures: dict[tuple[str, str, str, str], float] = {}
    succ: dict[str, list[str]] = {}
    pred: dict[str, list[str]] = {}
    for a, b in sorted(edges):
        if a != b:
            succ.setdefault(a, []).append(b)
            pred.setdefault(b, []).append(a)
    for a, outs in succ.items():
        for b, c in combinations(outs, 2):
            and_measures[(a, "out", b, c)] = (stats.count(b, c) + stats.count(c, b)) / (
                stats.count(a, b) + stats.count(a, c) + 1
            )
    for a, ins in pred.items():
        for b, c in combinations(ins, 2):
            and_measures[(a, "in", b, c)] = (stats.count(b, c) + stats.count(c, b)) / (
                stats.count(b, a) + stats.count(c, a) + 1
            )

    return HeuristicNet(
        activities={a: stats.activity_freq(a) for a in acts},
        edges=dict(sorted(edges.items())),
        start={a: int(n) for a, n in zip(acts, stats.starts) if n},
        end={a: int(n) for a, n in zip(acts, stats.ends) if n},
        config=cfg,
        and_measures=and_measures,
    )


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def net_to_dot(net: HeuristicNet) -> str:
    """DOT rendering: START green, END red, edges labelled ``freq / dep``."""
    lines = ["digraph HN {"]
    lines.append(f"  {_q(START)} [shape=circle, style=filled, fillcolor=green, label=\"\"];")
    lines.append(f"  {_q(END)} [shape=circle, style=filled, fillcolor=red, label=\"\"];")
    for a, n in net.activities.items():
        lines.append(f"  {_q(a)} [shape=box, label={_q(f'{a} ({n})')}];")
    for a, n in net.start.items():
        lines.append(f"  {_q(START)} -> {_q(a)} [label=\"{n}\"];")
    for (a, b), e in net.edges.items():
        lines.append(f"  {_q(a)} -> {_q(b)} [label=\"{e.freq} / {e.dependency:.3f}\"];")
    for a, n in net.end.items():
        lines.append(f"  {_q(a)} -> {_q(END)} [label=\"{n}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
