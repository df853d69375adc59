"""Discrete-step probabilistic simulation of a model.

All active processes pool their enabled transitions into a single weighted
choice per step. Weights are exact rationals; only the final comparison
against the uniform draw happens in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import expr as E
from .errors import EvalError
from .evaluator import Compiled, apply_label
from .model import Configuration, Model, Transition, initial_configuration

__all__ = [
    "DEADLOCK",
    "StepRecord",
    "SimOutcome",
    "MaxSteps",
    "UntilCond",
    "RandomStream",
    "Simulator",
    "enabled_transitions",
    "sample_transition",
    "step",
    "run_simulation",
]

DEADLOCK = "DEADLOCK"
U64 = (1 << 64) - 1


class StepRecord(NamedTuple):
    step: int
    case_id: int
    action: str
    source: str
    target: str
    installed: tuple[str, ...]
    vars: tuple[tuple[str, Fraction], ...]


@dataclass
class SimOutcome:
    case_id: int
    records: list[StepRecord]
    terminal: str  # "maxSteps" | "conditionMet" | "deadlock"
    initial_cfg: Configuration
    final_cfg: Configuration


@dataclass(frozen=True)
class MaxSteps:
    n: int


@dataclass(frozen=True)
class UntilCond:
    cond: E.BoolExpr
    cap: int = 10_000


class RandomStream:
    """Seedable Philox (counter-based) uniform stream.

    Draws are taken from numpy in blocks; the sequence is the same as drawing
    one value at a time and does not depend on the platform.
    """

    name = "philox"
    _BLOCK = 256

    def __init__(self, seed: int):
        self.seed = seed & U64
        self._gen = np.random.Generator(np.random.Philox(self.seed))
        self._buf: list[float] = []
        self._i = 0

    def random(self) -> float:
        if self._i >= len(self._buf):
            self._buf = self._gen.random(self._BLOCK).tolist()
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        return u


class _CT:
    """A transition prepared for fast enabledness checks."""

    __slots__ = (
        "trans", "pidx", "label", "text", "source", "target", "weight",
        "guard", "effects", "checks", "ask", "feature_use", "changes", "static",
    )


def _cumulative(weights: Sequence[Fraction]) -> tuple[list[float], float]:
    cum, acc = [], Fraction(0)
    for w in weights:
        acc += w
        cum.append(float(acc))
    return cum, float(acc)


def _pick(cum: list[float], total: float, u: float) -> int:
    x = u * total
    for i, c in enumerate(cum):
        if x < c:
            return i
    return len(cum) - 1


class Simulator:
    """Compiled simulator for one model; cheap to reuse across many runs."""

    def __init__(self, model: Model):
        self.model = model
        self.compiled = c = Compiled(model)
        self.proc_names = [p.name for p in model.processes]
        self.out: list[dict[str, list[_CT]]] = []
        ac_by_text: dict[str, list] = {}
        for ac in model.action_constraints:
            ac_by_text.setdefault(ac.action.text, []).append(ac)
        for pidx, proc in enumerate(model.processes):
            table: dict[str, list[_CT]] = {s: [] for s in proc.states}
            for t in proc.transitions:
                ct = _CT()
                ct.trans, ct.pidx, ct.label = t, pidx, t.action
                ct.text, ct.source, ct.target, ct.weight = t.action.text, t.source, t.target, t.weight
                ct.guard = c.boolean(t.guard) if t.guard is not None else None
                ct.effects = [(a.var, c.arith(a.expr)) for a in t.effects]
                conds = [x.condition for x in ac_by_text.get(ct.text, [])]
                ct.checks = [c.boolean(x) for x in conds]
                ct.ask = c.boolean(t.action.cond) if t.action.kind == "ask" else None
                ct.feature_use = (
                    c.present(t.action.name)
                    if t.action.kind == "name" and t.action.name in model.features
                    else None
                )
                ct.changes = t.action.kind in ("install", "uninstall", "replace")
                ct.static = not (
                    c.uses_vars(t.guard)
                    or c.uses_vars(t.action.cond)
                    or any(c.uses_vars(x) for x in conds)
                    or (c.quant_uses_vars and (ct.effects or ct.changes))
                )
                table.setdefault(t.source, []).append(ct)
            self.out.append(table)
        self._pool_cache: dict[tuple, tuple] = {}
        self._snap_cache: dict[frozenset, tuple[str, ...]] = {}

    # -- enabledness ----------------------------------------------------------

    def _check(self, ct: _CT, inst: frozenset, env: dict) -> bool:
        if ct.guard is not None and not ct.guard(inst, env):
            return False
        if ct.feature_use is not None and not ct.feature_use(inst):
            return False
        if ct.ask is not None and not ct.ask(inst, env):
            return False
        for chk in ct.checks:
            if not chk(inst, env):
                return False
        after = inst
        if ct.changes:
            after = apply_label(inst, ct.label)
            if after is None:
                return False
        comp = self.compiled
        if comp.quant_uses_vars and ct.effects:
            env2 = dict(env)
            for var, fn in ct.effects:
                env2[var] = fn(after, env2)
            return comp.admissible(after, env2)
        if ct.changes:
            return comp.admissible(after, env)
        return True

    def _pool(self, inst: frozenset, env: dict, loci: tuple) -> tuple:
        key = (loci, inst)
        entry = self._pool_cache.get(key)
        if entry is None:
            cands, dynamic = [], False
            for pidx, state in enumerate(loci):
                if state is None:
                    continue
                for ct in self.out[pidx].get(state, ()):
                    if not ct.static:
                        dynamic = True
                        cands.append(ct)
                    elif self._check(ct, inst, env):
                        cands.append(ct)
            if dynamic:
                entry = (cands, True, None, None, None)
            else:
                pos = [ct for ct in cands if ct.weight > 0]
                cum, total = _cumulative([ct.weight for ct in pos])
                entry = (cands, False, pos, cum, total)
            self._pool_cache[key] = entry
        return entry

    def enabled_internal(self, inst: frozenset, env: dict, loci: tuple) -> list[_CT]:
        cands, dynamic = self._pool(inst, env, loci)[:2]
        if not dynamic:
            return cands
        return [ct for ct in cands if ct.static or self._check(ct, inst, env)]

    def choose(self, inst: frozenset, env: dict, loci: tuple, rng: RandomStream) -> _CT | None:
        cands, dynamic, pos, cum, total = self._pool(inst, env, loci)
        if dynamic:
            pos = [ct for ct in cands if ct.weight > 0 and (ct.static or self._check(ct, inst, env))]
            if not pos:
                return None
            cum, total = _cumulative([ct.weight for ct in pos])
        elif not pos:
            return None
        return pos[_pick(cum, total, rng.random())]

    def apply(self, ct: _CT, inst: frozenset, env: dict, loci: tuple) -> tuple[frozenset, tuple]:
        """Execute ``ct``; ``env`` is updated in place."""
        if ct.changes:
            after = apply_label(inst, ct.label)
            if after is None:
                raise EvalError(f"{ct.text} is not applicable")
            inst = after
        for var, fn in ct.effects:
            env[var] = fn(inst, env)
        new_loci = list(loci)
        new_loci[ct.pidx] = ct.target
        return inst, tuple(new_loci)

    def snapshot(self, inst: frozenset) -> tuple[str, ...]:
        snap = self._snap_cache.get(inst)
        if snap is None:
            snap = self._snap_cache[inst] = tuple(sorted(inst))
        return snap

    def deadlock_source(self, loci: tuple) -> str:
        active = [(i, s) for i, s in enumerate(loci) if s is not None]
        for i, s in active:
            if self.model.processes[i].transitions and self.out[i].get(s):
                return s
        return active[0][1] if active else DEADLOCK

    # -- conversions ----------------------------------------------------------

    def _unpack(self, cfg: Configuration) -> tuple[frozenset, dict, tuple]:
        loci = tuple(cfg.locus.get(n) for n in self.proc_names)
        return frozenset(cfg.installed), dict(sorted(cfg.vars.items())), loci

    def _pack(self, inst: frozenset, env: dict, loci: tuple) -> Configuration:
        locus = {n: s for n, s in zip(self.proc_names, loci) if s is not None}
        return Configuration(inst, dict(env), locus)

    # -- public operations ----------------------------------------------------

    def enabled_transitions(self, cfg: Configuration) -> list[tuple[Transition, Fraction]]:
        inst, env, loci = self._unpack(cfg)
        return [(ct.trans, ct.weight) for ct in self.enabled_internal(inst, env, loci)]

    def step(self, cfg: Configuration, rng: RandomStream, step_no: int = 1, case_id: int = 0):
        """Take one step from ``cfg``.

        Returns ``(record, new_cfg)``. On deadlock the record has action and
        target ``"DEADLOCK"`` and the configuration is unchanged.
        """
        inst, env, loci = self._unpack(cfg)
        ct = self.choose(inst, env, loci, rng)
        if ct is None:
            rec = StepRecord(step_no, case_id, DEADLOCK, self.deadlock_source(loci), DEADLOCK,
                             self.snapshot(inst), tuple(env.items()))
            return rec, cfg.copy()
        inst2, loci2 = self.apply(ct, inst, env, loci)
        rec = StepRecord(step_no, case_id, ct.text, ct.source, ct.target,
                         self.snapshot(inst2), tuple(env.items()))
        return rec, self._pack(inst2, env, loci2)

    def run(self, stop_rule: MaxSteps | UntilCond, seed: int) -> SimOutcome:
        """One simulation. Deterministic in ``seed``."""
        seed &= U64
        rng = RandomStream(seed)
        init = initial_configuration(self.model)
        inst, env, loci = self._unpack(init)
        if isinstance(stop_rule, UntilCond):
            cond = self.compiled.boolean(stop_rule.cond)
            cap = stop_rule.cap
        else:
            cond, cap = None, stop_rule.n
        records: list[StepRecord] = []
        terminal = "maxSteps"
        if cond is not None and cond(inst, env):
            terminal = "conditionMet"
        else:
            choose, apply, snapshot = self.choose, self.apply, self.snapshot
            for k in range(1, cap + 1):
                ct = choose(inst, env, loci, rng)
                if ct is None:
                    records.append(StepRecord(k, seed, DEADLOCK, self.deadlock_source(loci), DEADLOCK,
                                              snapshot(inst), tuple(env.items())))
                    terminal = "deadlock"
                    break
                inst, loci = apply(ct, inst, env, loci)
                records.append(StepRecord(k, seed, ct.text, ct.source, ct.target,
                                          snapshot(inst), tuple(env.items())))
                if cond is not None and cond(inst, env):
                    terminal = "conditionMet"
                    break
        return SimOutcome(seed, records, terminal, init, self._pack(inst, env, loci))


def enabled_transitions(model: Model, cfg: Configuration) -> list[tuple[Transition, Fraction]]:
    """Enabled transitions of every active process, weight-0 ones included."""
    return Simulator(model).enabled_transitions(cfg)


def sample_transition(enabled: Sequence[tuple[Transition, Fraction]], rng: RandomStream) -> Transition:
    """Pick a transition with probability proportional to its weight.

    Raises:
        ValueError: if no entry has positive weight (the caller reports a deadlock).
    """
    pos = [(t, w) for t, w in enabled if w > 0]
    if not pos:
        raise ValueError("no transition with positive weight")
    cum, total = _cumulative([w for _, w in pos])
    return pos[_pick(cum, total, rng.random())][0]


def step(model: Model, cfg: Configuration, rng: RandomStream, step_no: int = 1, case_id: int = 0):
    return Simulator(model).step(cfg, rng, step_no, case_id)


def run_simulation(model: Model, stop_rule: MaxSteps | UntilCond, seed: int) -> SimOutcome:
    return Simulator(model).run(stop_rule, seed)
