"""Domain types of a product-line model and its static checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator

from . import expr as E
from .errors import ResolutionError
from .expr import SourceSpan
from .rational import format_rational

__all__ = [
    "Relation",
    "FeatureNode",
    "CrossTreeConstraint",
    "ActionConstraint",
    "QuantitativeConstraint",
    "ActionLabel",
    "Assignment",
    "Transition",
    "Process",
    "Init",
    "Property",
    "QuerySpec",
    "Model",
    "Configuration",
    "Diagnostic",
    "validate_static",
    "attribute_sum",
    "initial_configuration",
]


def _span():
    return field(default=None, compare=False, repr=False)


class Relation(str, enum.Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    OR = "or"
    XOR = "xor"


@dataclass
class FeatureNode:
    name: str
    children: list[tuple["FeatureNode", Relation]] = field(default_factory=list)
    attributes: dict[str, Fraction] = field(default_factory=dict)
    span: SourceSpan | None = _span()

    @property
    def kind(self) -> str:
        return "abstract" if self.children else "concrete"

    def iter_subtree(self) -> Iterator["FeatureNode"]:
        yield self
        for child, _ in self.children:
            yield from child.iter_subtree()


@dataclass
class CrossTreeConstraint:
    kind: str  # "requires" | "excludes"
    lhs: str
    rhs: str
    span: SourceSpan | None = _span()


@dataclass
class ActionConstraint:
    action: "ActionLabel"
    condition: E.BoolExpr
    span: SourceSpan | None = _span()


@dataclass
class QuantitativeConstraint:
    expr: E.BoolExpr
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class ActionLabel:
    """What a transition does.

    ``kind`` is one of ``name`` (custom action or use of a feature),
    ``install``, ``uninstall``, ``replace``, ``ask`` and ``call``
    (a custom action with identifier arguments, e.g. ``succ(RobBank)``).
    """

    kind: str
    name: str
    args: tuple[str, ...] = ()
    cond: E.BoolExpr | None = None

    @property
    def text(self) -> str:
        if self.kind == "name":
            return self.name
        if self.kind == "ask":
            return f"ask({{{E.render(self.cond)}}})"
        return f"{self.name}({','.join(self.args)})"

    def __str__(self) -> str:
        return self.text


@dataclass
class Assignment:
    var: str
    expr: E.ArithExpr
    span: SourceSpan | None = _span()


@dataclass
class Transition:
    source: str
    action: ActionLabel
    weight: Fraction
    target: str
    effects: list[Assignment] = field(default_factory=list)
    guard: E.BoolExpr | None = None
    span: SourceSpan | None = _span()

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.source, self.action.text, self.target)


@dataclass
class Process:
    name: str
    states: list[str] = field(default_factory=list)
    transitions: list[Transition] = field(default_factory=list)
    span: SourceSpan | None = _span()


@dataclass
class Init:
    installed: list[str] = field(default_factory=list)
    # process names (start in their first state) or state names
    processes: list[str] | None = None
    span: SourceSpan | None = _span()


@dataclass
class Property:
    expr: E.ArithExpr
    delta: Fraction | None = None
    span: SourceSpan | None = _span()

    @property
    def text(self) -> str:
        return E.render(self.expr)


@dataclass
class QuerySpec:
    kind: str  # "when" | "range"
    properties: list[Property]
    cond: E.BoolExpr | None = None
    start: int = 0
    stop: int = 0
    by: int = 1
    delta: Fraction = Fraction(1, 20)
    alpha: Fraction = Fraction(1, 20)
    parallelism: int = 1
    logs: str | None = None
    span: SourceSpan | None = _span()

    def delta_for(self, prop: Property) -> float:
        return float(prop.delta if prop.delta is not None else self.delta)

    @property
    def steps(self) -> list[int]:
        return list(range(self.start, self.stop + 1, self.by)) if self.kind == "range" else []


@dataclass
class Configuration:
    installed: frozenset[str]
    vars: dict[str, Fraction]
    locus: dict[str, str]

    def copy(self) -> "Configuration":
        return Configuration(self.installed, dict(self.vars), dict(self.locus))


@dataclass(frozen=True)
class Diagnostic:
    span: SourceSpan | None
    message: str

    def __str__(self) -> str:
        where = str(self.span) if self.span else "<model>"
        return f"{where}: {self.message}"


@dataclass
class Model:
    name: str | None = None
    root: FeatureNode | None = None
    cross_tree: list[CrossTreeConstraint] = field(default_factory=list)
    action_constraints: list[ActionConstraint] = field(default_factory=list)
    quant_constraints: list[QuantitativeConstraint] = field(default_factory=list)
    actions: list[str] = field(default_factory=list)
    variables: dict[str, Fraction] = field(default_factory=dict)
    processes: list[Process] = field(default_factory=list)
    init: Init = field(default_factory=Init)
    analyses: list[QuerySpec] = field(default_factory=list)
    source: str = field(default="<string>", compare=False, repr=False)

    def __getstate__(self):
        # cached indexes are cheap to rebuild; keep pickles small
        return {k: v for k, v in self.__dict__.items() if k in self.__dataclass_fields__}

    @cached_property
    def features(self) -> dict[str, FeatureNode]:
        if self.root is None:
            return {}
        out: dict[str, FeatureNode] = {}
        for node in self.root.iter_subtree():
            out.setdefault(node.name, node)
        return out

    @cached_property
    def leaves_below(self) -> dict[str, frozenset[str]]:
        """Concrete descendants (inclusive) of every feature."""
        out: dict[str, frozenset[str]] = {}

        def visit(node: FeatureNode) -> frozenset[str]:
            if not node.children:
                res = frozenset([node.name])
            else:
                res = frozenset().union(*(visit(c) for c, _ in node.children))
            out[node.name] = res
            return res

        if self.root is not None:
            visit(self.root)
        return out

    @cached_property
    def xor_groups(self) -> list[list[frozenset[str]]]:
        """Each xor group as the list of its members' leaf sets."""
        groups = []
        for node in self.features.values():
            members = [self.leaves_below[c.name] for c, rel in node.children if rel is Relation.XOR]
            if len(members) > 1:
                groups.append(members)
        return groups

    @cached_property
    def attribute_names(self) -> set[str]:
        return {a for f in self.features.values() for a in f.attributes}

    def process_of_state(self, state: str) -> Process | None:
        for p in self.processes:
            if state in p.states:
                return p
        return None

    def initial_loci(self) -> dict[str, str]:
        """Map of active process name to its starting state."""
        if self.init.processes is None:
            return {p.name: p.states[0] for p in self.processes if p.states}
        loci: dict[str, str] = {}
        by_name = {p.name: p for p in self.processes}
        for item in self.init.processes:
            if item in by_name:
                if by_name[item].states:
                    loci[item] = by_name[item].states[0]
                continue
            owner = self.process_of_state(item)
            if owner is None:
                raise ResolutionError(f"initial process or state {item!r} is not declared")
            loci[owner.name] = item
        return loci


def initial_configuration(model: Model) -> Configuration:
    return Configuration(
        installed=frozenset(model.init.installed),
        vars=dict(sorted(model.variables.items())),
        locus=model.initial_loci(),
    )


def attribute_sum(model: Model, cfg: Configuration, attr: str, root: str) -> Fraction:
    """Sum ``attr`` over the installed concrete features below ``root``.

    Features lacking the attribute count as zero.
    """
    try:
        leaves = model.leaves_below[root]
    except KeyError:
        raise ResolutionError(f"unknown feature {root!r}") from None
    total = Fraction(0)
    for name in leaves & cfg.installed:
        total += model.features[name].attributes.get(attr, 0)
    return total


# -- static validation --------------------------------------------------------


def validate_static(model: Model) -> list[Diagnostic]:
    """Check name resolution and structural invariants.

    Returns diagnostics in a stable order (model order of the offending
    elements); an empty list means the model is well formed.
    """
    diags: list[Diagnostic] = []

    def bad(span, msg):
        diags.append(Diagnostic(span, msg))

    features = model.features
    variables = model.variables
    attrs = model.attribute_names

    if model.root is not None:
        seen: set[str] = set()
        for node in model.root.iter_subtree():
            if node.name in seen:
                bad(node.span, f"duplicate feature {node.name!r}")
            seen.add(node.name)

    def check_expr(e, where):
        if e is None:
            return
        for n in E.walk(e):
            if isinstance(n, E.Ref) and n.name not in variables and n.name not in features:
                bad(n.span or where, f"unknown variable or feature {n.name!r}")
            elif isinstance(n, E.AttrAgg):
                if n.feature not in features:
                    bad(n.span or where, f"unknown feature {n.feature!r}")
                if n.attr not in attrs:
                    bad(n.span or where, f"unknown attribute {n.attr!r}")
            elif isinstance(n, E.Has) and n.feature not in features:
                bad(n.span or where, f"unknown feature {n.feature!r}")

    for c in model.cross_tree:
        if c.lhs == c.rhs:
            bad(c.span, f"self-reference in {c.kind}({c.lhs}, {c.rhs})")
        for name in (c.lhs, c.rhs):
            if name not in features:
                bad(c.span, f"unknown feature {name!r}")

    def check_label(label: ActionLabel, span):
        concrete = {n for n, f in features.items() if not f.children}
        if label.kind == "name":
            if label.name not in model.actions and label.name not in features:
                bad(span, f"undeclared action {label.name!r}")
        elif label.kind in ("install", "uninstall", "replace"):
            for name in label.args:
                if name not in concrete:
                    bad(span, f"{label.kind} needs a concrete feature, got {name!r}")
        elif label.kind == "ask":
            check_expr(label.cond, span)
        elif label.kind == "call":
            if label.name not in model.actions:
                bad(span, f"undeclared action {label.name!r}")

    for ac in model.action_constraints:
        check_label(ac.action, ac.span)
        check_expr(ac.condition, ac.span)
    for qc in model.quant_constraints:
        check_expr(qc.expr, qc.span)

    if not model.processes:
        bad(None, "model declares no process")
    owners: dict[str, str] = {}
    for p in model.processes:
        used: set[str] = set()
        for s in p.states:
            if s in owners:
                bad(p.span, f"state {s!r} declared in both {owners[s]!r} and {p.name!r}")
            owners.setdefault(s, p.name)
        for t in p.transitions:
            for s in (t.source, t.target):
                if s not in p.states:
                    bad(t.span, f"unknown state {s!r} in process {p.name!r}")
                used.add(s)
            if t.weight < 0:
                bad(t.span, f"negative weight {format_rational(t.weight)}")
            check_label(t.action, t.span)
            check_expr(t.guard, t.span)
            for a in t.effects:
                if a.var not in variables:
                    bad(a.span or t.span, f"unknown variable {a.var!r}")
                check_expr(a.expr, a.span or t.span)
        for s in p.states:
            if s not in used and p.transitions:
                bad(p.span, f"state {s!r} of process {p.name!r} has no transitions")

    for name in model.init.installed:
        f = features.get(name)
        if f is None:
            bad(model.init.span, f"unknown feature {name!r} in init")
        elif f.children:
            bad(model.init.span, f"abstract feature {name!r} cannot be installed")
    try:
        loci = model.initial_loci()
    except ResolutionError as exc:
        bad(model.init.span, str(exc))
        loci = None

    for q in model.analyses:
        check_expr(q.cond, q.span)
        for prop in q.properties:
            check_expr(prop.expr, prop.span or q.span)

    if not diags and loci is not None:
        from .evaluator import config_admissible

        if not config_admissible(model, initial_configuration(model)):
            bad(model.init.span, "initial configuration violates the constraints")
    return diags
