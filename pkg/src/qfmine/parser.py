"""Recursive-descent parser and pretty printer for the textual model format.

The grammar is documented in ``docs/grammar.md``. Parsing is whitespace
insensitive; ``//`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import expr as E
from .errors import ParseError
from .expr import SourceSpan
from .model import (
    ActionConstraint,
    ActionLabel,
    Assignment,
    CrossTreeConstraint,
    FeatureNode,
    Init,
    Model,
    Process,
    Property,
    QuantitativeConstraint,
    QuerySpec,
    Relation,
    Transition,
)
from .rational import format_rational

__all__ = ["parse_model", "parse_query", "parse_expression", "parse_bool", "pretty_print"]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<num>\d+(?:\.\d+)?|\.\d+)
  | (?P<str>"[^"\n]*")
  | (?P<id>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>->|<=|>=|==|!=|&&|\|\||[-+*/<>=!(){}\[\],:;])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | str | id | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str, file: str = "<string>") -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}", SourceSpan(file, line, pos - line_start + 1)
            )
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# multi-word block headers, longest first so "action constraints" wins over "actions"
_BLOCKS = [
    ("cross", "-", "tree", "constraints"),
    ("quantitative", "constraints"),
    ("action", "constraints"),
    ("processes", "diagram"),
    ("feature", "tree"),
    ("attributes",),
    ("variables",),
    ("analysis",),
    ("actions",),
    ("process",),
    ("model",),
    ("init",),
]

_CMP = set(E.CMP_OPS)


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str, file: str = "<string>"):
        self.file = file
        self.toks = tokenize(text, file)
        self.pos = 0

    # -- token helpers --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def span(self, tok: Token | None = None) -> SourceSpan:
        t = tok or self.tok
        return SourceSpan(self.file, t.line, t.col)

    def error(self, message: str, expected=(), tok: Token | None = None) -> ParseError:
        t = tok or self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(f"{message}, found {found}", self.span(t), expected)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "id") and self.tok.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            t = self.tok
            self.pos += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise self.error(f"expected {text!r}", {text})
        return t

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "id":
            raise self.error(f"expected {what}", {what})
        t = self.tok
        self.pos += 1
        return t.text

    def number(self) -> Fraction:
        neg = self.accept("-") is not None
        if self.tok.kind != "num":
            raise self.error("expected a number", {"number"})
        value = Fraction(self.tok.text)
        self.pos += 1
        return -value if neg else value

    def integer(self) -> int:
        t = self.tok
        value = self.number()
        if value.denominator != 1:
            raise self.error("expected an integer", {"integer"}, tok=t)
        return int(value)

    def comma_list(self, item: Callable, stop: tuple[str, ...] = ()) -> list:
        if any(self.at(s) for s in stop) or self.tok.kind == "eof":
            return []
        items = [item()]
        while self.accept(","):
            items.append(item())
        return items

    # -- expressions ----------------------------------------------------------

    def arith(self) -> E.ArithExpr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            t = self.tok
            self.pos += 1
            left = E.BinOp(t.text, left, self.term(), self.span(t))
        return left

    def term(self) -> E.ArithExpr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            t = self.tok
            self.pos += 1
            left = E.BinOp(t.text, left, self.unary(), self.span(t))
        return left

    def unary(self) -> E.ArithExpr:
        t = self.accept("-")
        if t is not None:
            return E.Neg(self.unary(), self.span(t))
        return self.atom()

    def atom(self) -> E.ArithExpr:
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            return E.Num(Fraction(t.text), self.span(t))
        if t.kind == "id":
            self.pos += 1
            if self.accept("("):
                feature = self.ident("feature name")
                self.expect(")")
                return E.AttrAgg(t.text, feature, self.span(t))
            return E.Ref(t.text, self.span(t))
        if self.accept("("):
            e = self.arith()
            self.expect(")")
            return e
        raise self.error("expected an arithmetic expression", {"number", "identifier", "("})

    def boolean(self) -> E.BoolExpr:
        left = self.bool_and()
        while True:
            t = self.accept("or") or self.accept("||")
            if t is None:
                return left
            left = E.Or(left, self.bool_and(), self.span(t))

    def bool_and(self) -> E.BoolExpr:
        left = self.bool_not()
        while True:
            t = self.accept("and") or self.accept("&&")
            if t is None:
                return left
            left = E.And(left, self.bool_not(), self.span(t))

    def bool_not(self) -> E.BoolExpr:
        t = self.accept("!") or self.accept("not")
        if t is not None:
            return E.Not(self.bool_not(), self.span(t))
        return self.bool_atom()

    def bool_atom(self) -> E.BoolExpr:
        t = self.tok
        if t.kind == "id" and t.text == "has" and self.peek().text == "(":
            self.pos += 2
            feature = self.ident("feature name")
            self.expect(")")
            return E.Has(feature, self.span(t))
        if t.kind == "id" and t.text in ("true", "false"):
            self.pos += 1
            return E.BoolConst(t.text == "true", self.span(t))
        if self.at("("):
            save = self.pos
            try:
                self.pos += 1
                inner = self.boolean()
                self.expect(")")
                nxt = self.tok
                if nxt.kind == "op" and (nxt.text in _CMP or nxt.text in E.ARITH_OPS):
                    raise _Backtrack
                return inner
            except (ParseError, _Backtrack):
                self.pos = save
        left = self.arith()
        op = self.tok
        if op.kind != "op" or op.text not in _CMP:
            raise self.error("expected a comparison operator", _CMP)
        self.pos += 1
        return E.Cmp(op.text, left, self.arith(), self.span(op))

    # -- model pieces ---------------------------------------------------------

    def action_label(self) -> ActionLabel:
        name = self.ident("action")
        if not self.accept("("):
            return ActionLabel("name", name)
        if name == "ask":
            self.expect("{")
            cond = self.boolean()
            self.expect("}")
            self.expect(")")
            return ActionLabel("ask", "ask", (), cond)
        args = tuple(self.comma_list(lambda: self.ident("argument")))
        close = self.expect(")")
        if name in ("install", "uninstall") and len(args) != 1:
            raise self.error(f"{name} takes exactly one feature", tok=close)
        if name == "replace" and len(args) != 2:
            raise self.error("replace takes exactly two features", tok=close)
        kind = name if name in ("install", "uninstall", "replace") else "call"
        return ActionLabel(kind, name, args)

    def effects(self) -> list[Assignment]:
        self.expect("{")
        out = []

        def one():
            t = self.tok
            var = self.ident("variable")
            self.expect("=")
            out.append(Assignment(var, self.arith(), self.span(t)))

        self.comma_list(one, stop=("}",))
        self.expect("}")
        return out

    def transition(self) -> Transition:
        start = self.tok
        source = self.ident("source state")
        self.expect("-")
        self.expect("(")
        label = self.action_label()
        self.expect(",")
        weight = self.number()
        effects: list[Assignment] = []
        guard = None
        while self.accept(","):
            if self.at("{"):
                effects = self.effects()
            else:
                guard = self.boolean()
        self.expect(")")
        self.expect("->")
        target = self.ident("target state")
        return Transition(source, label, weight, target, effects, guard, self.span(start))

    def block_header(self) -> tuple[tuple[str, ...], Token]:
        t = self.tok
        for words in _BLOCKS:
            n = len(words)
            window = self.toks[self.pos : self.pos + n]
            if len(window) == n and all(w.text == s for w, s in zip(window, words)):
                self.pos += n
                return words, t
        raise self.error("unknown block kind", {" ".join(w).replace(" - ", "-") for w in _BLOCKS})

    def close_block(self, words: tuple[str, ...], opened: Token) -> None:
        if not self.at("end"):
            raise self.error(f"unbalanced block: 'begin {_block_name(words)}' (line {opened.line}) is not closed", {"end"})
        end_tok = self.tok
        self.pos += 1
        for w in words:
            if not self.at(w):
                raise self.error(
                    f"'end' does not match 'begin {_block_name(words)}' opened on line {opened.line}",
                    {_block_name(words)},
                    tok=end_tok if self.tok.kind == "eof" else None,
                )
            self.pos += 1

    # -- blocks ---------------------------------------------------------------

    def parse_model(self) -> Model:
        model = Model(source=self.file)
        seen: set[tuple[str, ...]] = set()
        pending_attrs: list[tuple[str, str, Fraction, SourceSpan]] = []
        tree_nodes: dict[str, FeatureNode] | None = None
        wrapper = False
        if self.at("begin") and self.peek().text == "model":
            self.pos += 2
            model.name = self.ident("model name")
            wrapper = True
        while True:
            if self.tok.kind == "eof":
                if wrapper:
                    raise self.error("unbalanced block: 'begin model' is not closed", {"end"})
                break
            if wrapper and self.at("end") and self.peek().text == "model":
                self.pos += 2
                if self.tok.kind != "eof":
                    raise self.error("unexpected text after 'end model'", {"end of input"})
                break
            begin = self.tok
            self.expect("begin")
            words, opened = self.block_header()
            if words in seen and words != ("analysis",):
                raise self.error(f"duplicate block 'begin {_block_name(words)}'", tok=begin)
            if words in (("process",), ("model",)):
                raise self.error(f"'begin {words[0]}' is not allowed here", tok=opened)
            seen.add(words)
            if words == ("feature", "tree"):
                tree_nodes, model.root = self.feature_tree()
            elif words == ("attributes",):
                pending_attrs.extend(self.attributes())
            elif words[0] == "cross":
                model.cross_tree = self.cross_tree()
            elif words == ("action", "constraints"):
                model.action_constraints = self.action_constraints()
            elif words == ("quantitative", "constraints"):
                model.quant_constraints = self.quant_constraints()
            elif words == ("actions",):
                model.actions = self.actions()
            elif words == ("variables",):
                model.variables = self.variables()
            elif words == ("processes", "diagram"):
                model.processes = self.processes()
            elif words == ("init",):
                model.init = self.init_block(self.span(opened))
            elif words == ("analysis",):
                model.analyses.append(self.query_body(self.span(opened)))
            self.close_block(words, opened)
        for attr, feature, value, span in pending_attrs:
            if tree_nodes is None or feature not in tree_nodes:
                raise ParseError(f"attribute {attr}({feature}) refers to an unknown feature", span)
            tree_nodes[feature].attributes[attr] = value
        return model

    def feature_tree(self) -> tuple[dict[str, FeatureNode], FeatureNode | None]:
        nodes: dict[str, FeatureNode] = {}
        order: list[str] = []
        parent_of: dict[str, str] = {}

        def node(name: str, tok: Token) -> FeatureNode:
            if name not in nodes:
                nodes[name] = FeatureNode(name, span=self.span(tok))
                order.append(name)
            return nodes[name]

        def add_child(parent: FeatureNode, tok: Token, rel: Relation) -> None:
            name = self.ident("feature name")
            if name in parent_of or name == parent.name:
                raise self.error(f"feature {name!r} already has a parent", tok=tok)
            parent_of[name] = parent.name
            parent.children.append((node(name, tok), rel))

        while not self.at("end") and self.tok.kind != "eof":
            t = self.tok
            parent = node(self.ident("feature name"), t)
            if not self.accept("->"):
                continue
            self.expect("{")
            groups_used: set[Relation] = set()

            def item():
                kw = self.tok
                if self.accept("optional"):
                    add_child(parent, self.tok, Relation.OPTIONAL)
                elif self.accept("mandatory"):
                    add_child(parent, self.tok, Relation.MANDATORY)
                elif self.at("or") or self.at("xor"):
                    rel = Relation(kw.text)
                    if rel in groups_used:
                        raise self.error(f"{kw.text} group declared twice for {parent.name!r}", tok=kw)
                    groups_used.add(rel)
                    self.pos += 1
                    self.expect("{")
                    self.comma_list(lambda: add_child(parent, self.tok, rel), stop=("}",))
                    self.expect("}")
                else:
                    raise self.error("expected a child declaration", {"optional", "mandatory", "or", "xor"})

            self.comma_list(item, stop=("}",))
            self.expect("}")
        roots = [n for n in order if n not in parent_of]
        if len(roots) > 1:
            raise ParseError(f"feature tree has several roots: {', '.join(roots)}", nodes[roots[1]].span)
        return nodes, (nodes[roots[0]] if roots else None)

    def attributes(self):
        out = []
        while not self.at("end") and self.tok.kind != "eof":
            t = self.tok
            attr = self.ident("attribute name")
            self.expect("(")
            feature = self.ident("feature name")
            self.expect(")")
            self.expect("=")
            out.append((attr, feature, self.number(), self.span(t)))
        return out

    def cross_tree(self) -> list[CrossTreeConstraint]:
        out = []
        while not self.at("end") and self.tok.kind != "eof":
            t = self.tok
            lhs = self.ident("feature name")
            kind = self.tok.text
            if kind not in ("requires", "excludes"):
                raise self.error("expected 'requires' or 'excludes'", {"requires", "excludes"})
            self.pos += 1
            out.append(CrossTreeConstraint(kind, lhs, self.ident("feature name"), self.span(t)))
        return out

    def action_constraints(self) -> list[ActionConstraint]:
        out = []
        while not self.at("end") and self.tok.kind != "eof":
            t = self.expect("do")
            self.expect("(")
            label = self.action_label()
            self.expect(")")
            self.expect("->")
            out.append(ActionConstraint(label, self.boolean(), self.span(t)))
        return out

    def quant_constraints(self) -> list[QuantitativeConstraint]:
        out = []
        while not self.at("end") and self.tok.kind != "eof":
            t = self.expect("{")
            e = self.boolean()
            self.expect("}")
            out.append(QuantitativeConstraint(e, self.span(t)))
        return out

    def actions(self) -> list[str]:
        out = []
        while not self.at("end") and self.tok.kind != "eof":
            out.append(self.ident("action name"))
        return out

    def variables(self) -> dict[str, Fraction]:
        out: dict[str, Fraction] = {}
        while not self.at("end") and self.tok.kind != "eof":
            t = self.tok
            name = self.ident("variable name")
            if name in out:
                raise self.error(f"variable {name!r} declared twice", tok=t)
            self.expect("=")
            out[name] = self.number()
        return out

    def processes(self) -> list[Process]:
        out = []
        while self.at("begin"):
            self.pos += 1
            opened = self.tok
            self.expect("process")
            proc = Process(self.ident("process name"), span=self.span(opened))
            while not self.at("end") and self.tok.kind != "eof":
                if self.accept("states"):
                    self.expect("=")
                    proc.states = self.comma_list(lambda: self.ident("state name"), stop=("transitions", "end"))
                elif self.accept("transitions"):
                    self.expect("=")
                    proc.transitions = self.transition_list()
                else:
                    raise self.error("expected 'states' or 'transitions'", {"states", "transitions"})
            self.close_block(("process",), opened)
            out.append(proc)
        return out

    def transition_list(self) -> list[Transition]:
        if self.at("end") or self.at("states"):
            return []
        out = [self.transition()]
        while self.accept(","):
            if self.at("end"):
                break
            out.append(self.transition())
        return out

    def init_block(self, span: SourceSpan) -> Init:
        init = Init(span=span)
        while not self.at("end") and self.tok.kind != "eof":
            if self.accept("installedFeatures"):
                self.expect("=")
                self.expect("{")
                init.installed = self.comma_list(lambda: self.ident("feature name"), stop=("}",))
                self.expect("}")
            elif self.accept("initialProcesses"):
                self.expect("=")
                init.processes = self.comma_list(
                    lambda: self.ident("process name"), stop=("end", "installedFeatures")
                )
            else:
                raise self.error("expected 'installedFeatures' or 'initialProcesses'",
                                 {"installedFeatures", "initialProcesses"})
        return init

    def query_body(self, span: SourceSpan | None = None) -> QuerySpec:
        if self.at("query"):
            self.pos += 1
            self.expect("=")
        head = self.tok
        span = span or self.span(head)
        if self.accept("when"):
            q = QuerySpec("when", [], cond=self.boolean(), span=span)
        elif self.accept("eval"):
            self.expect("from")
            start_tok = self.tok
            start = self.integer()
            self.expect("to")
            stop = self.integer()
            self.expect("by")
            by_tok = self.tok
            by = self.integer()
            if start > stop:
                raise self.error(f"empty range: from {start} > to {stop}", tok=start_tok)
            if by <= 0:
                raise self.error("'by' must be positive", tok=by_tok)
            if start < 0:
                raise self.error("'from' must be non-negative", tok=start_tok)
            q = QuerySpec("range", [], start=start, stop=stop, by=by, span=span)
        else:
            raise self.error("expected 'when' or 'eval'", {"when", "eval"})
        self.expect(":")
        self.expect("{")

        def prop():
            t = self.tok
            e = self.arith()
            delta = None
            if self.accept("["):
                self.expect("delta")
                self.expect("=")
                dt = self.tok
                delta = self.number()
                if delta <= 0:
                    raise self.error("delta must be positive", tok=dt)
                self.expect("]")
            return Property(e, delta, self.span(t))

        q.properties = self.comma_list(prop, stop=("}",))
        self.expect("}")
        while not self.at("end") and self.tok.kind != "eof":
            if self.accept("default"):
                continue
            key_tok = self.tok
            key = self.ident("option")
            self.expect("=")
            val_tok = self.tok
            if key == "delta":
                q.delta = self.number()
                if q.delta <= 0:
                    raise self.error("delta must be positive", tok=val_tok)
            elif key == "alpha":
                q.alpha = self.number()
                if not 0 < q.alpha < 1:
                    raise self.error("alpha must lie in (0, 1)", tok=val_tok)
            elif key == "parallelism":
                q.parallelism = self.integer()
                if q.parallelism < 1:
                    raise self.error("parallelism must be at least 1", tok=val_tok)
            elif key == "logs":
                if self.tok.kind != "str":
                    raise self.error("expected a quoted file name", {"string"})
                q.logs = self.tok.text[1:-1]
                self.pos += 1
            else:
                raise self.error(f"unknown analysis option {key!r}",
                                 {"delta", "alpha", "parallelism", "logs"}, tok=key_tok)
        return q


def _block_name(words: tuple[str, ...]) -> str:
    return " ".join(words).replace(" - ", "-")


def parse_model(text: str, file: str = "<string>") -> Model:
    """Parse model text into a :class:`Model`.

    Raises:
        ParseError: on any syntax error, with the position of the offending token.
    """
    return Parser(text, file).parse_model()


def parse_query(text: str, file: str = "<string>") -> QuerySpec:
    """Parse an analysis, either a bare query or a full ``begin analysis`` block."""
    p = Parser(text, file)
    if p.at("begin"):
        opened = p.tok
        p.pos += 1
        p.expect("analysis")
        q = p.query_body(p.span(opened))
        p.close_block(("analysis",), opened)
    else:
        q = p.query_body()
    if p.tok.kind != "eof":
        raise p.error("unexpected text after the query", {"end of input"})
    return q


def _parse_whole(text: str, rule: str):
    p = Parser(text)
    result = getattr(p, rule)()
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing text", {"end of input"})
    return result


def parse_expression(text: str) -> E.ArithExpr:
    return _parse_whole(text, "arith")


def parse_bool(text: str) -> E.BoolExpr:
    return _parse_whole(text, "boolean")


# -- pretty printing ----------------------------------------------------------


def _fmt_transition(t: Transition) -> str:
    parts = [t.action.text, format_rational(t.weight)]
    if t.effects:
        parts.append("{" + ", ".join(f"{a.var} = {E.render(a.expr)}" for a in t.effects) + "}")
    if t.guard is not None:
        parts.append(E.render(t.guard))
    return f"{t.source} -({', '.join(parts)})-> {t.target}"


def _fmt_query(q: QuerySpec, indent: str = "    ") -> list[str]:
    if q.kind == "when":
        head = f"query = when {E.render(q.cond)} :"
    else:
        head = f"query = eval from {q.start} to {q.stop} by {q.by} :"
    props = []
    for p in q.properties:
        text = E.render(p.expr)
        if p.delta is not None:
            text += f" [delta = {format_rational(p.delta)}]"
        props.append(text)
    lines = [
        indent + head,
        indent + "{" + ", ".join(props) + "}",
        indent + f"default delta = {format_rational(q.delta)}    alpha = {format_rational(q.alpha)}"
        f"    parallelism = {q.parallelism}",
    ]
    if q.logs is not None:
        lines.append(indent + f'logs = "{q.logs}"')
    return lines


def pretty_print(model: Model) -> str:
    """Canonical text form of ``model``; ``parse_model`` reads it back unchanged."""
    out: list[str] = []
    ind = "    "
    if model.name:
        out.append(f"begin model {model.name}")
    if model.root is not None:
        out.append("begin feature tree")
        for node in model.root.iter_subtree():
            if not node.children:
                if node is model.root:
                    out.append(ind + node.name)
                continue
            items = []
            grouped: dict[Relation, list[str]] = {}
            for child, rel in node.children:
                if rel in (Relation.OR, Relation.XOR):
                    if rel not in grouped:
                        grouped[rel] = []
                        items.append(rel)
                    grouped[rel].append(child.name)
                else:
                    items.append(f"{rel.value} {child.name}")
            rendered = [
                f"{it.value} {{{', '.join(grouped[it])}}}" if isinstance(it, Relation) else it for it in items
            ]
            out.append(f"{ind}{node.name} -> {{{', '.join(rendered)}}}")
        out.append("end feature tree")
        attrs = [
            f"{ind}{a}({f.name}) = {format_rational(v)}"
            for f in model.root.iter_subtree()
            for a, v in f.attributes.items()
        ]
        if attrs:
            out += ["begin attributes", *attrs, "end attributes"]
    if model.cross_tree:
        out.append("begin cross-tree constraints")
        out += [f"{ind}{c.lhs} {c.kind} {c.rhs}" for c in model.cross_tree]
        out.append("end cross-tree constraints")
    if model.action_constraints:
        out.append("begin action constraints")
        out += [f"{ind}do({c.action.text}) -> {E.render(c.condition)}" for c in model.action_constraints]
        out.append("end action constraints")
    if model.quant_constraints:
        out.append("begin quantitative constraints")
        out += [f"{ind}{{ {E.render(c.expr)} }}" for c in model.quant_constraints]
        out.append("end quantitative constraints")
    if model.actions:
        out += ["begin actions", ind + " ".join(model.actions), "end actions"]
    if model.variables:
        out.append("begin variables")
        out.append(ind + "    ".join(f"{k} = {format_rational(v)}" for k, v in model.variables.items()))
        out.append("end variables")
    if model.processes:
        out.append("begin processes diagram")
        for p in model.processes:
            out.append(f"begin process {p.name}")
            out.append(f"{ind}states = {', '.join(p.states)}")
            out.append(f"{ind}transitions =")
            rows = [_fmt_transition(t) for t in p.transitions]
            out += [f"{ind}{ind}{r}{',' if i < len(rows) - 1 else ''}" for i, r in enumerate(rows)]
            out.append("end process")
        out.append("end processes diagram")
    init = model.init
    if init.installed or init.processes is not None:
        out.append("begin init")
        out.append(f"{ind}installedFeatures = {{ {', '.join(init.installed)} }}")
        if init.processes is not None:
            out.append(f"{ind}initialProcesses = {', '.join(init.processes)}")
        out.append("end init")
    for q in model.analyses:
        out += ["begin analysis", *_fmt_query(q), "end analysis"]
    if model.name:
        out.append("end model")
    return "\n".join(out) + "\n"
