import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcfglearn.errors import StructuralError
from mcfglearn.monoid import (DFA, FiniteMonoid, format_monoid, h_type, h_word, parse_dfa,
                              parse_monoid, state_map, transition_monoid)

from oracles import all_words, monoid_value


def test_z2_table(z2):
    m = z2.monoid
    s, e = m.element("s"), m.element("e")
    assert m.mul(s, s) == e
    assert m.mul(e, s) == s
    for x in range(len(m)):
        assert m.mul(m.identity, x) == x == m.mul(x, m.identity)


def test_z2_word_values(z2):
    name = z2.monoid.name
    assert name(h_word(z2, "ab")) == "s"
    assert name(h_word(z2, "")) == "e"
    assert name(h_word(z2, "aa")) == "e"


def test_componentwise_types(z2):
    names = lambda p: tuple(z2.monoid.name(m) for m in p)
    assert names(h_type(z2, ("a", "b"))) == ("s", "e")
    assert names(h_type(z2, ("aa", "ab"))) == ("e", "s")
    assert h_type(z2, ("", "")) == (z2.identity, z2.identity)


def test_l3_transition_monoid(l3_dfa, h_l3):
    m = h_l3.monoid
    assert len(m) == 8  # regression constant
    assert m.names[m.identity] == "1"
    values = {a: h_l3.letter(a) for a in "abc"}
    assert len(set(values.values())) == 3 and m.identity not in values.values()
    # no nonempty word reaches the identity
    for w in all_words("abc", 5):
        if w:
            assert h_word(h_l3, w) != m.identity


def test_l3_composite_map(l3_dfa, h_l3):
    ab = h_l3.monoid.mul(h_l3.letter("a"), h_l3.letter("b"))
    by_hand = tuple(l3_dfa.delta[(l3_dfa.delta[(q, "a")], "b")] for q in l3_dfa.states)
    assert state_map(h_l3, l3_dfa, ab) == by_hand


def test_single_state_dfa_is_trivial():
    dfa = DFA(("q",), "q", ("a", "b"), {("q", "a"): "q", ("q", "b"): "q"})
    m, h = transition_monoid(dfa)
    assert len(m) == 1
    assert h_word(h, "abba") == m.identity


def test_monoid_round_trip(z2):
    again = parse_monoid(format_monoid(z2))[1]
    assert again.monoid == z2.monoid
    assert dict(again.letter_values) == dict(z2.letter_values)


@pytest.mark.parametrize("text, needle", [
    ("elements: e s\nidentity: e\ne * e = e\ne * s = s\ns * e = s\nh: a -> s\n", "missing product"),
    ("elements: e s\nidentity: s\ne * e = e\ne * s = s\ns * e = s\ns * s = e\nh: a -> s\n", "identity"),
    ("elements: e s t\nidentity: e\n" + "".join(f"{x} * {y} = {z}\n" for x, y, z in [
        ("e", "e", "e"), ("e", "s", "s"), ("e", "t", "t"), ("s", "e", "s"), ("s", "s", "t"),
        ("s", "t", "s"), ("t", "e", "t"), ("t", "s", "e"), ("t", "t", "t")]) + "h: a -> s\n",
     "associative"),
])
def test_bad_monoids_rejected(text, needle):
    with pytest.raises(StructuralError, match=needle):
        parse_monoid(text)


def test_incomplete_dfa_rejected():
    with pytest.raises(StructuralError, match="no transition"):
        parse_dfa("states: 0 1\nstart: 0\n0 --a--> 1\n")


def test_foreign_letter(h_l3):
    with pytest.raises(StructuralError):
        h_word(h_l3, "abd")


words = st.text(alphabet="abc", max_size=8)


@settings(max_examples=300, deadline=None)
@given(words, words)
def test_homomorphism_property(h_l3, u, v):
    m = h_l3.monoid
    assert h_word(h_l3, u + v) == m.mul(h_word(h_l3, u), h_word(h_l3, v))
    assert h_word(h_l3, u) == monoid_value(h_l3, u)


@settings(max_examples=200, deadline=None)
@given(words)
def test_transition_monoid_tracks_the_dfa(l3_dfa, h_l3, w):
    state = list(l3_dfa.states)
    for a in w:
        state = [l3_dfa.delta[(q, a)] for q in state]
    assert state_map(h_l3, l3_dfa, h_word(h_l3, w)) == tuple(state)


def test_from_names_matches_parse(z2):
    m = FiniteMonoid.from_names(["e", "s"], "e", {("e", "e"): "e", ("e", "s"): "s",
                                                  ("s", "e"): "s", ("s", "s"): "e"})
    assert m == z2.monoid
