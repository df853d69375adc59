"""Expression evaluation and constraint checking against a configuration.

Two routes are provided. The ``eval_*`` / ``*_admissible`` functions walk the
expression trees directly and are the reference semantics. :class:`Compiled`
turns a model into closures with per-feature-set caches for the simulator;
the test-suite checks the two routes agree.
"""

from __future__ import annotations

import operator
from fractions import Fraction
from typing import Callable

from . import expr as E
from .errors import EvalError, ResolutionError
from .model import ActionLabel, Configuration, Model, attribute_sum

__all__ = [
    "eval_arith",
    "eval_bool",
    "feature_present",
    "config_admissible",
    "action_admissible",
    "apply_label",
    "Compiled",
]

_CMP = {
    "<": operator.lt,
    "<=": operator.le,
    "==": operator.eq,
    "!=": operator.ne,
    ">=": operator.ge,
    ">": operator.gt,
}


def feature_present(model: Model, installed: frozenset[str], name: str) -> bool:
    """Abstract features are present iff some concrete descendant is installed."""
    try:
        leaves = model.leaves_below[name]
    except KeyError:
        raise ResolutionError(f"unknown feature {name!r}") from None
    return not leaves.isdisjoint(installed)


def _div(a: Fraction, b: Fraction) -> Fraction:
    if b == 0:
        raise EvalError("division by zero")
    return a / b


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": _div}


def eval_arith(e: E.ArithExpr, model: Model, cfg: Configuration) -> Fraction:
    if isinstance(e, E.Num):
        return e.value
    if isinstance(e, E.Ref):
        if e.name in cfg.vars:
            return cfg.vars[e.name]
        if e.name in model.features:
            return Fraction(int(feature_present(model, cfg.installed, e.name)))
        raise ResolutionError(f"unknown variable {e.name!r}")
    if isinstance(e, E.AttrAgg):
        return attribute_sum(model, cfg, e.attr, e.feature)
    if isinstance(e, E.Neg):
        return -eval_arith(e.operand, model, cfg)
    if isinstance(e, E.BinOp):
        return _ARITH[e.op](eval_arith(e.left, model, cfg), eval_arith(e.right, model, cfg))
    raise TypeError(f"not an arithmetic expression: {e!r}")


def eval_bool(e: E.BoolExpr, model: Model, cfg: Configuration) -> bool:
    if isinstance(e, E.Cmp):
        return _CMP[e.op](eval_arith(e.left, model, cfg), eval_arith(e.right, model, cfg))
    if isinstance(e, E.Has):
        return feature_present(model, cfg.installed, e.feature)
    if isinstance(e, E.BoolConst):
        return e.value
    if isinstance(e, E.Not):
        return not eval_bool(e.operand, model, cfg)
    if isinstance(e, E.And):
        return eval_bool(e.left, model, cfg) and eval_bool(e.right, model, cfg)
    if isinstance(e, E.Or):
        return eval_bool(e.left, model, cfg) or eval_bool(e.right, model, cfg)
    raise TypeError(f"not a boolean expression: {e!r}")


def config_admissible(model: Model, cfg: Configuration) -> bool:
    """All quantitative, requires, excludes and xor (at most one) constraints hold."""
    installed = cfg.installed
    for c in model.cross_tree:
        lhs = feature_present(model, installed, c.lhs)
        rhs = feature_present(model, installed, c.rhs)
        if c.kind == "requires" and lhs and not rhs:
            return False
        if c.kind == "excludes" and lhs and rhs:
            return False
    for members in model.xor_groups:
        if sum(not m.isdisjoint(installed) for m in members) > 1:
            return False
    return all(eval_bool(q.expr, model, cfg) for q in model.quant_constraints)


def apply_label(installed: frozenset[str], label: ActionLabel) -> frozenset[str] | None:
    """Feature set after ``label``, or None if the label's own precondition fails."""
    if label.kind == "install":
        (f,) = label.args
        return None if f in installed else installed | {f}
    if label.kind == "uninstall":
        (f,) = label.args
        return installed - {f} if f in installed else None
    if label.kind == "replace":
        old, new = label.args
        if old not in installed or new in installed:
            return None
        return (installed - {old}) | {new}
    return installed


def action_admissible(model: Model, cfg: Configuration, label: ActionLabel) -> bool:
    """Whether ``label`` may execute in ``cfg``.

    Feature use needs the feature present, every matching action constraint
    must hold, and (un)install/replace must lead to an admissible configuration.
    """
    if label.kind == "name" and label.name in model.features:
        if not feature_present(model, cfg.installed, label.name):
            return False
    if label.kind == "ask" and not eval_bool(label.cond, model, cfg):
        return False
    for ac in model.action_constraints:
        if ac.action.text == label.text and not eval_bool(ac.condition, model, cfg):
            return False
    if label.kind in ("install", "uninstall", "replace"):
        after = apply_label(cfg.installed, label)
        if after is None:
            return False
        return config_admissible(model, Configuration(after, cfg.vars, cfg.locus))
    return True


# -- compiled route -----------------------------------------------------------

Env = dict  # variable name -> Fraction
ArithFn = Callable[[frozenset, Env], Fraction]
BoolFn = Callable[[frozenset, Env], bool]


class Compiled:
    """Closures over a model, caching everything that depends only on features.

    Args:
        model: the model to compile. It must not be mutated afterwards.
    """

    def __init__(self, model: Model):
        self.model = model
        self.var_names = frozenset(model.variables)
        self._admissible_cache: dict[frozenset, bool] = {}
        self._quant = [self.boolean(q.expr) for q in model.quant_constraints]
        self.quant_uses_vars = any(self.uses_vars(q.expr) for q in model.quant_constraints)
        self._structure_cache: dict[frozenset, bool] = {}

    def uses_vars(self, e) -> bool:
        return e is not None and any(
            isinstance(n, E.Ref) and n.name in self.var_names for n in E.walk(e)
        )

    def present(self, name: str) -> Callable[[frozenset], bool]:
        leaves = self.model.leaves_below.get(name)
        if leaves is None:
            raise ResolutionError(f"unknown feature {name!r}")
        if len(leaves) == 1:
            (only,) = leaves
            return lambda inst: only in inst
        return lambda inst: not leaves.isdisjoint(inst)

    def arith(self, e: E.ArithExpr) -> ArithFn:
        if isinstance(e, E.Num):
            v = e.value
            return lambda inst, env: v
        if isinstance(e, E.Ref):
            name = e.name
            if name in self.var_names:
                def var(inst, env, name=name):
                    try:
                        return env[name]
                    except KeyError:
                        raise ResolutionError(f"unknown variable {name!r}") from None
                return var
            if name in self.model.features:
                has = self.present(name)
                one, zero = Fraction(1), Fraction(0)
                return lambda inst, env: one if has(inst) else zero
            raise ResolutionError(f"unknown variable {name!r}")
        if isinstance(e, E.AttrAgg):
            model = self.model
            if e.feature not in model.leaves_below:
                raise ResolutionError(f"unknown feature {e.feature!r}")
            weights = {
                leaf: model.features[leaf].attributes[e.attr]
                for leaf in model.leaves_below[e.feature]
                if e.attr in model.features[leaf].attributes
            }
            cache: dict[frozenset, Fraction] = {}

            def agg(inst, env):
                try:
                    return cache[inst]
                except KeyError:
                    total = sum((w for f, w in weights.items() if f in inst), Fraction(0))
                    cache[inst] = total
                    return total

            return agg
        if isinstance(e, E.Neg):
            inner = self.arith(e.operand)
            return lambda inst, env: -inner(inst, env)
        if isinstance(e, E.BinOp):
            left, right, op = self.arith(e.left), self.arith(e.right), _ARITH[e.op]
            return lambda inst, env: op(left(inst, env), right(inst, env))
        raise TypeError(f"not an arithmetic expression: {e!r}")

    def boolean(self, e: E.BoolExpr) -> BoolFn:
        if isinstance(e, E.Cmp):
            left, right, op = self.arith(e.left), self.arith(e.right), _CMP[e.op]
            return lambda inst, env: op(left(inst, env), right(inst, env))
        if isinstance(e, E.Has):
            has = self.present(e.feature)
            return lambda inst, env: has(inst)
        if isinstance(e, E.BoolConst):
            v = e.value
            return lambda inst, env: v
        if isinstance(e, E.Not):
            inner = self.boolean(e.operand)
            return lambda inst, env: not inner(inst, env)
        if isinstance(e, E.And):
            a, b = self.boolean(e.left), self.boolean(e.right)
            return lambda inst, env: a(inst, env) and b(inst, env)
        if isinstance(e, E.Or):
            a, b = self.boolean(e.left), self.boolean(e.right)
            return lambda inst, env: a(inst, env) or b(inst, env)
        raise TypeError(f"not a boolean expression: {e!r}")

    def structure_ok(self, inst: frozenset) -> bool:
        """requires / excludes / xor constraints, cached per feature set."""
        try:
            return self._structure_cache[inst]
        except KeyError:
            pass
        model = self.model
        ok = True
        for c in model.cross_tree:
            lhs = feature_present(model, inst, c.lhs)
            rhs = feature_present(model, inst, c.rhs)
            if (c.kind == "requires" and lhs and not rhs) or (c.kind == "excludes" and lhs and rhs):
                ok = False
                break
        if ok:
            for members in model.xor_groups:
                if sum(not m.isdisjoint(inst) for m in members) > 1:
                    ok = False
                    break
        self._structure_cache[inst] = ok
        return ok

    def admissible(self, inst: frozenset, env: Env) -> bool:
        if not self.quant_uses_vars:
            try:
                return self._admissible_cache[inst]
            except KeyError:
                ok = self.structure_ok(inst) and all(q(inst, env) for q in self._quant)
                self._admissible_cache[inst] = ok
                return ok
        return self.structure_ok(inst) and all(q(inst, env) for q in self._quant)
