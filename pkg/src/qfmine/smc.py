"""Statistical model checking by sequential mean estimation.

Simulations run in batches. After each batch every cell (property, or
property at a step for range queries) gets a Student-t confidence interval;
the analysis stops once every interval is at most ``delta`` wide.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from . import _kernels
from .eventlog import LogWriter
from .model import Model, QuerySpec
from .simulator import MaxSteps, SimOutcome, Simulator, UntilCond

__all__ = [
    "BATCH_SIZE",
    "MIN_SAMPLES",
    "WHEN_CAP",
    "Cell",
    "EstimationReport",
    "Observer",
    "observe",
    "stop_rule",
    "t_quantile",
    "sequential_estimate",
    "emit_logs",
]

BATCH_SIZE = 20
MIN_SAMPLES = 40
WHEN_CAP = 10_000
NORMAL_ABOVE = 1000
DEFAULT_MAX_SIMULATIONS = 1_000_000


def stop_rule(query: QuerySpec, cap: int = WHEN_CAP) -> MaxSteps | UntilCond:
    if query.kind == "when":
        return UntilCond(query.cond, cap)
    return MaxSteps(query.stop)


def t_quantile(alpha: float, n: int) -> float:
    """Two-sided quantile for ``n`` samples; normal once ``n`` exceeds 1000."""
    if n > NORMAL_ABOVE:
        return float(stats.norm.ppf(1 - alpha / 2))
    return float(stats.t.ppf(1 - alpha / 2, n - 1))


class Observer:
    """Extracts property samples from simulation outcomes."""

    def __init__(self, model: Model, query: QuerySpec, compiled=None):
        self.query = query
        if compiled is None:
            compiled = Simulator(model).compiled
        self._fns = [compiled.arith(p.expr) for p in query.properties]
        self._var_free = [not compiled.uses_vars(p.expr) for p in query.properties]
        self._inst: dict[tuple, frozenset] = {}
        self._cache: dict[tuple, float] = {}

    @property
    def n_cells(self) -> int:
        q = self.query
        return len(q.properties) * (len(q.steps) if q.kind == "range" else 1)

    def _values(self, installed: tuple, vars_: tuple) -> list[float]:
        inst = self._inst.get(installed)
        if inst is None:
            inst = self._inst[installed] = frozenset(installed)
        env = None
        out = []
        for i, (fn, free) in enumerate(zip(self._fns, self._var_free)):
            if free:
                key = (i, installed)
                v = self._cache.get(key)
                if v is None:
                    v = self._cache[key] = float(fn(inst, {}))
            else:
                if env is None:
                    env = dict(vars_)
                v = float(fn(inst, env))
            out.append(v)
        return out

    def observe(self, outcome: SimOutcome) -> np.ndarray:
        """Sample vector of one simulation.

        When-queries give one value per property (NaN if the condition was
        never met). Range queries give ``steps x properties`` values flattened
        step-major; a run that ended early carries its last state forward.
        """
        q = self.query
        if q.kind == "when":
            if outcome.terminal != "conditionMet":
                return np.full(len(self._fns), np.nan)
            cfg = outcome.final_cfg
            return np.array(self._values(tuple(sorted(cfg.installed)), tuple(sorted(cfg.vars.items()))))
        init = outcome.initial_cfg
        init_snap = (tuple(sorted(init.installed)), tuple(sorted(init.vars.items())))
        recs = outcome.records
        rows = []
        for s in q.steps:
            if s == 0 or not recs:
                snap = init_snap
            else:
                r = recs[min(s, len(recs)) - 1]
                snap = (r.installed, r.vars)
            rows.append(self._values(*snap))
        return np.array(rows, dtype=np.float64).ravel()


def observe(query: QuerySpec, outcome: SimOutcome, model: Model) -> np.ndarray:
    return Observer(model, query).observe(outcome)


@dataclass
class Cell:
    property: str
    step: int | None
    mean: float
    half_width: float
    n: int
    delta: float

    @property
    def closed(self) -> bool:
        return 2 * self.half_width <= self.delta


@dataclass
class EstimationReport:
    query: QuerySpec
    cells: list[Cell]
    simulations: int
    missing: int = 0
    converged: bool = True
    wall_time: float = field(default=0.0, compare=False)

    def cell(self, prop: str, step: int | None = None) -> Cell:
        for c in self.cells:
            if c.property == prop and c.step == step:
                return c
        raise KeyError((prop, step))

    def to_csv(self) -> str:
        lines = ["property,step,mean,ciHalfWidth,n"]
        for c in self.cells:
            prop = f'"{c.property}"' if any(ch in c.property for ch in ',"\n') else c.property
            step = "" if c.step is None else str(c.step)
            lines.append(f"{prop},{step},{c.mean:.6f},{c.half_width:.6f},{c.n}")
        return "\n".join(lines) + "\n"

    def summary(self, limit: int = 20) -> str:
        width = max([len(c.property) for c in self.cells] + [8])
        out = [f"{'property':<{width}}  {'step':>5}  {'mean':>10}  {'+/-':>9}  {'n':>7}"]
        shown = self.cells if len(self.cells) <= limit else self.cells[-limit:]
        if shown is not self.cells:
            out.append(f"(last {limit} of {len(self.cells)} cells)")
        for c in shown:
            step = "" if c.step is None else str(c.step)
            out.append(f"{c.property:<{width}}  {step:>5}  {c.mean:>10.4f}  {c.half_width:>9.4f}  {c.n:>7}")
        out.append(f"simulations: {self.simulations}  missing: {self.missing}"
                   f"  converged: {'yes' if self.converged else 'no'}  time: {self.wall_time:.2f}s")
        return "\n".join(out)


# -- worker side --------------------------------------------------------------

_WORKER: Simulator | None = None


def _worker_init(model: Model) -> None:
    global _WORKER
    _WORKER = Simulator(model)


def _worker_run(args) -> list[SimOutcome]:
    rule, seeds = args
    return [_WORKER.run(rule, s) for s in seeds]


def _chunks(seeds: list[int], parts: int) -> list[list[int]]:
    size = math.ceil(len(seeds) / parts)
    return [seeds[i:i + size] for i in range(0, len(seeds), size)]


# -- estimation ---------------------------------------------------------------


def _half_widths(count, m2, alpha: float) -> np.ndarray:
    h = np.full(count.shape, np.inf)
    for n in np.unique(count):
        n = int(n)
        if n < 2:
            continue
        sel = count == n
        var = np.maximum(m2[sel], 0.0) / (n - 1)
        h[sel] = t_quantile(alpha, n) * np.sqrt(var / n)
    return h


def sequential_estimate(
    model: Model,
    query: QuerySpec,
    base_seed: int,
    *,
    batch_size: int = BATCH_SIZE,
    min_samples: int = MIN_SAMPLES,
    max_simulations: int | None = DEFAULT_MAX_SIMULATIONS,
    parallelism: int | None = None,
    log_path: str | os.PathLike | None = None,
    when_cap: int = WHEN_CAP,
    simulator: Simulator | None = None,
) -> EstimationReport:
    """Run simulations until every cell's interval is at most delta wide.

    Args:
        model: validated model.
        query: the analysis to estimate.
        base_seed: simulation ``i`` uses seed ``base_seed + i``.
        batch_size: simulations per batch; counts are multiples of it.
        min_samples: no cell closes with fewer samples.
        max_simulations: safety stop; the report is then marked unconverged.
        parallelism: worker processes (defaults to the query's setting).
        log_path: if given, every simulation used is streamed to this CSV.
        when_cap: step cap for when-queries.
        simulator: reuse an already compiled simulator.

    Returns:
        The final estimation report.
    """
    started = time.perf_counter()
    sim = simulator or Simulator(model)
    rule = stop_rule(query, when_cap)
    observer = Observer(model, query, sim.compiled)
    n_cells = observer.n_cells
    alpha = float(query.alpha)
    if query.kind == "range":
        labels = [(p, s) for s in query.steps for p in query.properties]
    else:
        labels = [(p, None) for p in query.properties]
    deltas = np.array([query.delta_for(p) for p, _ in labels])

    count = np.zeros(n_cells, dtype=np.int64)
    mean = np.zeros(n_cells)
    m2 = np.zeros(n_cells)
    workers = parallelism if parallelism is not None else query.parallelism
    pool = ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(model,)) if workers > 1 else None
    writer = LogWriter(log_path) if log_path is not None else None
    done, missing, converged = 0, 0, False
    try:
        while True:
            seeds = [base_seed + done + i for i in range(batch_size)]
            if pool is None:
                outcomes = [sim.run(rule, s) for s in seeds]
            else:
                outcomes = [o for part in pool.map(_worker_run, [(rule, c) for c in _chunks(seeds, workers)])
                            for o in part]
            samples = np.vstack([observer.observe(o) for o in outcomes])
            if query.kind == "when":
                missing += int(np.isnan(samples[:, 0]).sum())
            _kernels.merge_moments(count, mean, m2, samples)
            if writer is not None:
                for o in outcomes:
                    writer.write_case(o.records)
            done += batch_size
            h = _half_widths(count, m2, alpha)
            if (count >= min_samples).all() and (2 * h <= deltas).all():
                converged = True
                break
            if max_simulations is not None and done >= max_simulations:
                break
    except BaseException:
        if writer is not None:
            writer.discard()
        raise
    finally:
        if pool is not None:
            pool.shutdown()
    if writer is not None:
        writer.close()
    cells = [
        Cell(p.text, s, float(mean[j]), float(h[j]), int(count[j]), float(deltas[j]))
        for j, (p, s) in enumerate(labels)
    ]
    return EstimationReport(query, cells, done, missing, converged, time.perf_counter() - started)


def emit_logs(query: QuerySpec, outcomes: Sequence[SimOutcome], path: str | os.PathLike | None = None) -> None:
    """Write the records of ``outcomes`` as one event log.

    ``path`` defaults to the query's ``logs`` setting.
    """
    path = path if path is not None else query.logs
    if path is None:
        raise ValueError("query has no logs path")
    if not outcomes:
        raise ValueError("no simulations to log")
    with LogWriter(path) as w:
        for o in sorted(outcomes, key=lambda o: o.case_id):
            w.write_case(o.records)
