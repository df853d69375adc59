"""Specified vs mined procedural graphs and their diff.

Edges are identified by ``(source, action text, target)``. Guards and
effects are not part of the identity, so spec transitions that differ only
there collapse into one edge whose ``multiplicity`` counts them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .eventlog import decode
from .errors import DecodeError
from .miner import HeuristicNet
from .model import Model
from .simulator import DEADLOCK

__all__ = [
    "BOTH",
    "SPEC_ONLY",
    "MINED_ONLY",
    "EdgeKey",
    "ProcGraph",
    "DiffGraph",
    "spec_graph",
    "mined_graph",
    "diff",
    "to_dot",
    "to_json",
]

BOTH, SPEC_ONLY, MINED_ONLY = "both", "specOnly", "minedOnly"
EdgeKey = tuple[str, str, str]


@dataclass
class ProcGraph:
    nodes: set[str] = field(default_factory=set)
    edges: set[EdgeKey] = field(default_factory=set)
    freq: dict[EdgeKey, int] = field(default_factory=dict)
    multiplicity: dict[EdgeKey, int] = field(default_factory=dict)


@dataclass
class DiffGraph:
    nodes: dict[str, str]
    edges: dict[EdgeKey, str]
    freq: dict[EdgeKey, int] = field(default_factory=dict)
    multiplicity: dict[EdgeKey, int] = field(default_factory=dict)

    def of_class(self, cls: str) -> set[EdgeKey]:
        return {k for k, c in self.edges.items() if c == cls}

    @property
    def spec_only(self) -> set[EdgeKey]:
        return self.of_class(SPEC_ONLY)

    @property
    def mined_only(self) -> set[EdgeKey]:
        return self.of_class(MINED_ONLY)

    @property
    def both(self) -> set[EdgeKey]:
        return self.of_class(BOTH)

    def red_nodes(self) -> set[str]:
        """Nodes not in both graphs, plus spec nodes whose every incident edge is specOnly."""
        red = {n for n, c in self.nodes.items() if c != BOTH}
        incident: dict[str, list[str]] = {}
        for (s, _, t), c in self.edges.items():
            incident.setdefault(s, []).append(c)
            if t != s:
                incident.setdefault(t, []).append(c)
        red |= {n for n, cs in incident.items() if all(c == SPEC_ONLY for c in cs)}
        return red


def spec_graph(model: Model) -> ProcGraph:
    g = ProcGraph()
    for p in model.processes:
        g.nodes.update(p.states)
        for t in p.transitions:
            g.edges.add(t.key)
            g.multiplicity[t.key] = g.multiplicity.get(t.key, 0) + 1
    return g


def mined_graph(net: HeuristicNet) -> ProcGraph:
    """One edge per mined activity; START and END are dropped.

    Raises:
        DecodeError: an activity is not a valid encoding; the message names it.
    """
    g = ProcGraph()
    for act, n in net.activities.items():
        try:
            key = decode(act)
        except DecodeError:
            raise DecodeError(f"cannot decode mined activity {act!r}") from None
        action, source, target = key
        edge = (source, action, target)
        g.nodes.update((source, target))
        g.edges.add(edge)
        g.freq[edge] = g.freq.get(edge, 0) + n
    return g


def diff(spec: ProcGraph, mined: ProcGraph) -> DiffGraph:
    def classify(x, a, b):
        return BOTH if x in a and x in b else (SPEC_ONLY if x in a else MINED_ONLY)

    nodes = {n: classify(n, spec.nodes, mined.nodes) for n in spec.nodes | mined.nodes}
    edges = {e: classify(e, spec.edges, mined.edges) for e in spec.edges | mined.edges}
    return DiffGraph(nodes, edges, dict(mined.freq), dict(spec.multiplicity))


_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_KEYWORDS = {"node", "edge", "graph", "digraph", "subgraph", "strict"}


def _id(name: str) -> str:
    if _ID.match(name) and name.lower() not in _KEYWORDS:
        return name
    return _str(name)


def _str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _attrs(pairs: list[tuple[str, str]]) -> str:
    return " [" + ", ".join(f"{k}={v}" for k, v in pairs) + "]" if pairs else ""


def to_dot(g: DiffGraph | ProcGraph) -> str:
    """Deterministic DOT text for a diff or a plain procedural graph."""
    if isinstance(g, DiffGraph):
        node_names, edge_keys = set(g.nodes), set(g.edges)
        red = g.red_nodes()
        edge_cls = g.edges
    else:
        node_names, edge_keys = set(g.nodes), set(g.edges)
        red, edge_cls = set(), {}
    if not node_names and not edge_keys:
        return "digraph G { }\n"
    lines = ["digraph G {"]
    for n in sorted(node_names):
        attrs: list[tuple[str, str]] = []
        if n == DEADLOCK:
            attrs = [("shape", "octagon"), ("color", "red")]
        elif n in red:
            attrs = [("color", "red")]
            if isinstance(g, DiffGraph) and g.nodes[n] == SPEC_ONLY:
                attrs.append(("style", "dashed"))
        lines.append(f"  {_id(n)}{_attrs(attrs)};")
    for key in sorted(edge_keys):
        s, action, t = key
        attrs = []
        cls = edge_cls.get(key, BOTH)
        if cls == SPEC_ONLY:
            attrs += [("color", "red"), ("style", "dashed")]
        elif cls == MINED_ONLY:
            attrs += [("color", "red"), ("style", "solid")]
        label = action
        mult = g.multiplicity.get(key, 1)
        if mult > 1:
            label += f" x{mult}"
        if key in g.freq:
            label += f" [{g.freq[key]}]"
        attrs.append(("label", _str(label)))
        lines.append(f"  {_id(s)} -> {_id(t)}{_attrs(attrs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(d: DiffGraph) -> str:
    """Classification as JSON, for tooling."""
    data = {
        "nodes": [{"name": n, "class": d.nodes[n]} for n in sorted(d.nodes)],
        "edges": [
            {
                "source": s,
                "action": a,
                "target": t,
                "class": d.edges[(s, a, t)],
                "freq": d.freq.get((s, a, t)),
                "multiplicity": d.multiplicity.get((s, a, t), 0),
            }
            for s, a, t in sorted(d.edges)
        ],
        "summary": {cls: len(d.of_class(cls)) for cls in (BOTH, SPEC_ONLY, MINED_ONLY)},
    }
    return json.dumps(data, indent=2) + "\n"
