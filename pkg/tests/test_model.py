from fractions import Fraction

import pytest

from qfmine import ResolutionError, parse_model, validate_static
from qfmine.model import Configuration, attribute_sum, initial_configuration


def cfg(installed, vars_=None):
    return Configuration(frozenset(installed), dict(vars_ or {}), {})


@pytest.mark.parametrize(
    "installed, expected",
    [({"Coffee"}, 5), ({"Coffee", "Cappuccino"}, 12), (set(), 0), ({"Tea", "Cocoa"}, 7)],
)
def test_attribute_sum(vending10, installed, expected):
    assert attribute_sum(vending10, cfg(installed), "price", "Machine") == expected


def test_attribute_sum_is_additive(vending15):
    inst = cfg({"Coffee", "Cappuccino", "Cocoa"})
    whole = attribute_sum(vending15, inst, "price", "Machine")
    parts = sum(attribute_sum(vending15, inst, "price", c.name) for c, _ in vending15.root.children)
    assert whole == parts == 14


def test_missing_attribute_counts_zero(vending10):
    assert attribute_sum(vending10, cfg({"Coffee"}), "weight", "Machine") == 0


def test_attribute_sum_unknown_feature(vending10):
    with pytest.raises(ResolutionError):
        attribute_sum(vending10, cfg({"Coffee"}), "price", "Nope")


def test_vending_model_is_well_formed(vending10):
    assert validate_static(vending10) == []
    assert validate_static(vending10) == validate_static(vending10)


def test_feature_kinds(vending10):
    f = vending10.features
    assert f["Machine"].kind == "abstract" and f["CoffeeBased"].kind == "abstract"
    assert f["Coffee"].kind == "concrete"
    assert vending10.leaves_below["Beverages"] == {"Coffee", "Cappuccino", "Tea"}


def test_initial_configuration(vending10):
    c = initial_configuration(vending10)
    assert c.installed == {"Coffee"}
    assert c.vars == {"deploys": 0, "sold": 0}
    assert c.locus == {"dynamics": "factory"}


BASE = """
begin feature tree
    Root -> {optional A, optional B}
end feature tree
begin actions go end actions
begin variables v = 0 end variables
begin processes diagram
begin process P
    states = s, t
    transitions = s -(go, 1)-> t, t -(go, 1)-> s
end process
end processes diagram
begin init installedFeatures = { A } initialProcesses = P end init
"""


def diags(text):
    return [d.message for d in validate_static(parse_model(text))]


def test_base_is_clean():
    assert diags(BASE) == []


def test_unknown_state():
    msgs = diags(BASE.replace("t -(go, 1)-> s", "t -(go, 1)-> depositt"))
    assert len(msgs) == 1 and "unknown state" in msgs[0]


def test_self_reference():
    text = BASE + "begin cross-tree constraints A requires A end cross-tree constraints"
    msgs = diags(text)
    assert len(msgs) == 1 and "self-reference" in msgs[0]


@pytest.mark.parametrize(
    "old, new, fragment",
    [
        ("s -(go, 1)-> t", "s -(jump, 1)-> t", "undeclared action"),
        ("s -(go, 1)-> t", "s -(go, 1, {w = 1})-> t", "unknown variable"),
        ("s -(go, 1)-> t", "s -(go, 1, has(C))-> t", "unknown feature"),
        ("s -(go, 1)-> t", "s -(install(Root), 1)-> t", "concrete"),
        ("installedFeatures = { A }", "installedFeatures = { Root }", "abstract"),
        ("initialProcesses = P", "initialProcesses = Q", "not declared"),
        ("states = s, t", "states = s, t, u", "no transitions"),
    ],
)
def test_diagnostics(old, new, fragment):
    msgs = diags(BASE.replace(old, new))
    assert any(fragment in m for m in msgs), msgs


def test_no_process():
    assert any("no process" in m for m in diags("begin actions a end actions"))


def test_inadmissible_initial_configuration():
    text = BASE + "begin cross-tree constraints A excludes B end cross-tree constraints"
    text = text.replace("installedFeatures = { A }", "installedFeatures = { A, B }")
    assert any("initial configuration" in m for m in diags(text))


def test_diagnostics_carry_location():
    m = parse_model(BASE.replace("t -(go, 1)-> s", "t -(go, 1)-> depositt"), "x.qfl")
    (d,) = validate_static(m)
    assert d.span.file == "x.qfl" and d.span.line > 1
    assert str(d).startswith("x.qfl:")


def test_weights_are_exact(vending10):
    weights = {t.weight for t in vending10.processes[0].transitions}
    assert Fraction(2) in weights and all(isinstance(w, Fraction) for w in weights)
