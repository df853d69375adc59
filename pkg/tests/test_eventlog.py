from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qfmine import DecodeError, LogFormatError
from qfmine.eventlog import HEADER, decode, encode, preprocess, read_log, write_log, write_xes
from qfmine.simulator import MaxSteps, Simulator, StepRecord


def rec(step, case, action="go", source="a", target="b", installed=("Coffee",), vars_=(("x", Fraction(1)),)):
    return StepRecord(step, case, action, source, target, installed, vars_)


def test_two_steps_three_lines(tmp_path):
    p = tmp_path / "log.csv"
    write_log(p, [[rec(1, 5), rec(2, 5)]])
    raw = p.read_bytes()
    assert raw.count(b"\n") == 3 and b"\r" not in raw
    assert raw.splitlines()[0] == ",".join(HEADER).encode()


def test_deadlock_and_sorted_columns(tmp_path):
    p = tmp_path / "log.csv"
    write_log(p, [[rec(1, 1, "DEADLOCK", "TryBlowUp", "DEADLOCK", ("Coffee", "Tea"),
                       (("a", Fraction(1, 3)), ("b", Fraction(5, 2))))]])
    line = p.read_text().splitlines()[1]
    assert line == "1,1,DEADLOCK,TryBlowUp,DEADLOCK,Coffee;Tea,a=1/3;b=2.5"


def test_quoting(tmp_path):
    p = tmp_path / "log.csv"
    write_log(p, [[rec(1, 1, "replace(Coffee,Tea)")]])
    assert '"replace(Coffee,Tea)"' in p.read_text()
    assert read_log(p)[0][0].action == "replace(Coffee,Tea)"


def test_round_trip_bytes(vending15, tmp_path):
    sim = Simulator(vending15)
    cases = [sim.run(MaxSteps(60), s).records for s in (4, 2, 9)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_log(a, cases)
    back = read_log(a)
    assert back == sorted(cases, key=lambda c: c[0].case_id)
    write_log(b, back)
    assert a.read_bytes() == b.read_bytes()


def test_missing_header(tmp_path):
    p = tmp_path / "log.csv"
    p.write_text("1,1,go,a,b,,\n")
    with pytest.raises(LogFormatError) as info:
        read_log(p)
    assert info.value.line == 1


def test_empty_file(tmp_path):
    p = tmp_path / "log.csv"
    p.write_text("")
    with pytest.raises(LogFormatError):
        read_log(p)


@pytest.mark.parametrize(
    "rows, line",
    [
        (["2,1,go,a,b,,", "1,1,go,b,a,,"], 3),
        (["1,2,go,a,b,,", "1,1,go,a,b,,"], 3),
        (["1,1,go,a,b"], 2),
        (["x,1,go,a,b,,"], 2),
        (["1,1,go,a,b,,x"], 2),
    ],
)
def test_malformed_rows(tmp_path, rows, line):
    p = tmp_path / "log.csv"
    p.write_text("\n".join([",".join(HEADER), *rows]) + "\n")
    with pytest.raises(LogFormatError) as info:
        read_log(p)
    assert info.value.line == line


@pytest.mark.parametrize(
    "triple, text",
    [
        (("ActionC", "B", "C"), "ActionC##B##C"),
        (("ActionC", "E", "C"), "ActionC##E##C"),
        (("DEADLOCK", "TryBlowUp", "DEADLOCK"), "DEADLOCK##TryBlowUp##DEADLOCK"),
    ],
)
def test_encode_decode(triple, text):
    assert encode(*triple) == text
    assert decode(text) == triple


@pytest.mark.parametrize("bad", ["a##b", "a##b##c##d", "##b##c", "plain"])
def test_decode_rejects(bad):
    with pytest.raises(DecodeError):
        decode(bad)


def test_encode_rejects_separator():
    with pytest.raises(DecodeError):
        encode("a##x", "b", "c")


ident = st.text(st.characters(blacklist_characters="#\n\r", blacklist_categories=("Cs",)), min_size=1).filter(
    lambda s: "##" not in s
)


@given(ident, ident, ident)
def test_bijection(a, s, t):
    assert decode(encode(a, s, t)) == (a, s, t)


def test_preprocess(vending10):
    sim = Simulator(vending10)
    cases = [sim.run(MaxSteps(30), s).records for s in range(5)]
    log = preprocess(cases)
    assert [len(acts) for _, acts in log.traces] == [len(c) for c in cases]
    assert log.traces[0][1][0] == encode(cases[0][0].action, cases[0][0].source, cases[0][0].target)
    events = list(log.events())
    assert events[0] == (0, log.traces[0][1][0], 0)


def test_xes_export(tmp_path):
    log = preprocess([[rec(1, 3, "x<y")]])
    p = tmp_path / "log.xes"
    write_xes(log, p)
    text = p.read_text()
    assert '<trace>' in text and 'value="x&lt;y##a##b"' in text
