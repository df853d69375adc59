from fractions import Fraction

import numpy as np
import pytest

from qfmine import parse_model
from qfmine.evaluator import config_admissible
from qfmine.model import Configuration, Transition, initial_configuration
from qfmine.parser import parse_bool
from qfmine.simulator import (
    DEADLOCK,
    MaxSteps,
    RandomStream,
    Simulator,
    UntilCond,
    enabled_transitions,
    run_simulation,
    sample_transition,
    step,
)

from conftest import load


def at(model, state, installed, **vars_):
    base = dict(model.variables)
    base.update({k: Fraction(v) for k, v in vars_.items()})
    return Configuration(frozenset(installed), base, {model.processes[0].name: state})


def labels(enabled):
    return {t.action.text: w for t, w in enabled}


def test_price_bound_blocks_cappuccino(vending10, vending15):
    assert "install(Cappuccino)" not in labels(enabled_transitions(vending10, at(vending10, "factory", {"Coffee"})))
    assert "install(Cappuccino)" in labels(enabled_transitions(vending15, at(vending15, "factory", {"Coffee"})))


def test_factory_enabled_set(vending10):
    got = labels(enabled_transitions(vending10, at(vending10, "factory", {"Coffee"})))
    assert got == {"replace(Coffee,Tea)": 20, "install(Cocoa)": 10, "sell": 1}


def test_zero_weight_reported_not_sampled(elevator):
    sim = Simulator(elevator)
    cfg = initial_configuration(elevator)
    cfg.vars["floor"] = Fraction(2)
    got = labels(sim.enabled_transitions(cfg))
    assert got["down"] == 0
    rng = RandomStream(7)
    for _ in range(2000):
        assert sample_transition(sim.enabled_transitions(cfg), rng).action.text != "down"


def test_sample_frequencies():
    a = Transition("s", None, Fraction(2), "s")
    b = Transition("s", None, Fraction(1), "t")
    rng = RandomStream(2024)
    n = 90_000
    hits = sum(sample_transition([(a, a.weight), (b, b.weight)], rng) is a for _ in range(n))
    assert abs(hits / n - 2 / 3) <= 0.01


def test_sample_single_and_empty():
    a = Transition("s", None, Fraction(5), "s")
    z = Transition("s", None, Fraction(0), "s")
    rng = RandomStream(1)
    assert all(sample_transition([(a, a.weight), (z, z.weight)], rng) is a for _ in range(100))
    with pytest.raises(ValueError):
        sample_transition([(z, z.weight)], rng)
    with pytest.raises(ValueError):
        sample_transition([], rng)


def test_random_stream_is_philox_and_blocked():
    rng = RandomStream(99)
    ref = np.random.Generator(np.random.Philox(99)).random(600)
    assert [rng.random() for _ in range(600)] == ref.tolist()


def test_step_sell_and_deploy(vending10):
    sim = Simulator(vending10)
    cfg = at(vending10, "factory", {"Tea"})
    # only sell and replace-free options remain; draw until sell happens
    rng = RandomStream(3)
    while True:
        rec, cfg = sim.step(cfg, rng)
        if rec.action == "sell":
            break
    assert cfg.vars["sold"] == 1 and cfg.locus["dynamics"] == "deposit"
    while True:
        before = cfg.vars["deploys"]
        rec, cfg = sim.step(cfg, rng)
        if rec.action == "deploy":
            assert cfg.vars["deploys"] == before + 1
            break


def test_step_deadlock():
    m = parse_model("""
        begin variables v = 0 end variables
        begin quantitative constraints { v <= 1 } end quantitative constraints
        begin actions go end actions
        begin processes diagram begin process P states = a, b
        transitions = a -(go, 1, {v = v + 5})-> b, b -(go, 1)-> a
        end process end processes diagram""")
    rec, cfg = step(m, initial_configuration(m), RandomStream(0))
    assert (rec.action, rec.source, rec.target) == (DEADLOCK, "a", DEADLOCK)
    assert cfg.locus == {"P": "a"}


def test_effects_left_to_right():
    m = parse_model("""
        begin variables x = 1 y = 0 end variables
        begin actions go end actions
        begin processes diagram begin process P states = a
        transitions = a -(go, 1, {x = x + 1, y = x * 10})-> a
        end process end processes diagram""")
    out = run_simulation(m, MaxSteps(1), 0)
    assert dict(out.records[0].vars) == {"x": 2, "y": 20}


def test_until_condition(vending10):
    out = run_simulation(vending10, UntilCond(parse_bool("sold == 1")), 11)
    assert out.terminal == "conditionMet"
    assert out.final_cfg.locus == {"dynamics": "deposit"}
    assert out.records[-1].action == "sell"


def test_until_met_at_step_zero(vending10):
    out = run_simulation(vending10, UntilCond(parse_bool("sold == 0")), 11)
    assert out.terminal == "conditionMet" and out.records == []


def test_until_cap(vending10):
    out = run_simulation(vending10, UntilCond(parse_bool("sold == 7"), cap=30), 11)
    assert out.terminal == "maxSteps" and len(out.records) == 30


def test_max_steps_and_determinism(vending10):
    a = run_simulation(vending10, MaxSteps(500), 123)
    b = run_simulation(vending10, MaxSteps(500), 123)
    assert len(a.records) == 500 and a.terminal == "maxSteps"
    assert a.records == b.records
    assert [r.step for r in a.records] == list(range(1, 501))
    assert all(r.case_id == 123 for r in a.records)


def test_deadlock_outcome(deadlock_model):
    sim = Simulator(deadlock_model)
    outs = [sim.run(MaxSteps(20), s) for s in range(200)]
    dead = [o for o in outs if o.terminal == "deadlock"]
    assert dead
    for o in outs:
        assert (o.terminal == "deadlock") == (o.records[-1].action == DEADLOCK)
    for o in dead:
        assert (o.records[-1].source, o.records[-1].target) == ("TryBlowUp", DEADLOCK)


@pytest.mark.parametrize("name", ["vending10", "vending15", "elevator5", "deadlock", "deadlock_fixed"])
def test_safety_and_soundness(name):
    m = load(name)
    sim = Simulator(m)
    spec = {t.key: t.weight for p in m.processes for t in p.transitions}
    for seed in range(30):
        out = sim.run(MaxSteps(200), seed)
        prev = {}
        for r in out.records:
            c = Configuration(frozenset(r.installed), dict(r.vars), {})
            assert config_admissible(m, c)
            if r.action == DEADLOCK:
                continue
            assert (r.source, r.action, r.target) in spec
            assert spec[(r.source, r.action, r.target)] > 0
            owner = m.process_of_state(r.source).name
            if owner in prev:
                assert prev[owner] == r.source
            prev[owner] = r.target


def test_pooled_interleaving(elevator):
    out = run_simulation(elevator, MaxSteps(400), 5)
    moved = {elevator.process_of_state(r.source).name for r in out.records}
    assert moved == {"LiftProc", "ControllerProc", "ButtonsProc", "PeopleProc"}


def test_normalised_probabilities(vending15):
    sim = Simulator(vending15)
    enabled = sim.enabled_transitions(at(vending15, "deposit", {"Coffee"}))
    pos = [w for _, w in enabled if w > 0]
    assert sum(w / sum(pos) for w in pos) == 1
