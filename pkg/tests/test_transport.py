import random
from itertools import permutations, product

import pytest

from mcfglearn.context import (InterfaceType, SentenceContext, format_interface, hole_context,
                               interface_type, start_interface)
from mcfglearn.errors import DomainError
from mcfglearn.grammar import Var, parse_template, template_arities
from mcfglearn.monoid import h_type
from mcfglearn.transport import (induced_context_B, induced_context_C, normalize, render_normal_form,
                                 render_trace, template_eval, trace_B, trace_C, transport_B,
                                 transport_C)

from oracles import (all_templates, check_instance, contract_randomly, random_context, random_template,
                     random_word, representatives)

FIG = parse_template("(y1 x2 a, b x1)")


@pytest.fixture(scope="module")
def fig(z2):
    e, s = z2.monoid.element("e"), z2.monoid.element("s")
    return dict(h=z2, e=e, s=s, q=h_type(z2, ("a", "b")), r=h_type(z2, ("a",)),
                tau=InterfaceType((1, 2), (e, s, e)))


def test_fig_output_map(fig):
    assert fig["q"] == (fig["s"], fig["e"]) and fig["r"] == (fig["s"],)
    assert template_eval(FIG, fig["q"], fig["r"], fig["h"]) == (fig["e"], fig["s"])


def test_fig_traces(fig):
    h = fig["h"]
    gb = trace_B(FIG, fig["tau"], fig["r"], h)
    gc = trace_C(FIG, fig["tau"], fig["q"], h)
    assert render_trace(gb, h) == "e s x2 s s e x1 e"
    assert render_trace(gc, h) == "e y1 e s s e s e"
    assert render_normal_form(normalize(gb, h), h, "x") == "s x2 e x1 e"
    assert render_normal_form(normalize(gc, h), h, "y") == "e y1 s"


def test_fig_transport(fig):
    h = fig["h"]
    assert format_interface(transport_B(FIG, fig["tau"], fig["r"], h), h) == "((12); s,e,e)"
    assert format_interface(transport_C(FIG, fig["tau"], fig["q"], h), h) == "(id1; e,s)"


def test_identity_and_routing_cases(z2):
    one = z2.identity
    s = z2.monoid.element("s")
    assert normalize((one, Var("x", 1), one), z2) == InterfaceType((1,), (one, one))
    route = parse_template("(x1, y1)")
    assert template_eval(route, (s,), (one,), z2) == (s, one)
    tau = InterfaceType((1, 2), (one, one, one))
    assert transport_B(route, tau, (s,), z2) == InterfaceType((1,), (one, s))
    assert transport_C(route, tau, (s,), z2) == InterfaceType((1,), (s, one))


def test_placement_example(z2_abc):
    h = z2_abc
    e, s = h.monoid.element("e"), h.monoid.element("s")
    rho_id, rho_sw = parse_template("(x1 y1 x2)"), parse_template("(x2 y1 x1)")
    tau = start_interface(h)
    assert transport_B(rho_sw, tau, (e,), h) == InterfaceType((2, 1), (e, e, e))
    assert transport_C(rho_id, tau, (s, s), h) == InterfaceType((1,), (s, s))
    assert str(induced_context_B(rho_id, hole_context(1), ("c",))) == "[1]c[2]"
    assert str(induced_context_B(rho_sw, hole_context(1), ("c",))) == "[2]c[1]"


def test_l3_top_rule_trace(h_l3):
    top = parse_template("(x1 x2 y1)")
    tr = trace_B(top, start_interface(h_l3), (h_l3.letter("c"),), h_l3)
    assert [it for it in tr if isinstance(it, Var)] == [Var("x", 1), Var("x", 2)]
    assert transport_B(top, start_interface(h_l3), (h_l3.letter("c"),), h_l3) == interface_type(
        h_l3, SentenceContext.parse("[1][2]c"))


def test_empty_sibling_leaves_skeleton():
    E = induced_context_B(FIG, SentenceContext.parse("[1]c[2]"), ("",))
    assert str(E) == "[2]acb[1]"


def test_domain_errors(fig):
    h = fig["h"]
    with pytest.raises(DomainError):
        transport_B(FIG, start_interface(h), fig["r"], h)
    with pytest.raises(DomainError):
        template_eval(FIG, fig["r"], fig["r"], h)
    with pytest.raises(DomainError):
        induced_context_C(FIG, hole_context(1), ("a", "b"))


def test_exhaustive_small_cases(z2):
    """Every letter-free template of fan-out <= 2, every interface and sibling type, realized concretely."""
    h = z2
    reps = representatives(h)
    elems = sorted(reps)
    count = 0
    for template in all_templates():
        e = len(template)
        dB, dC = template_arities(template)
        for perm in permutations(range(1, e + 1)):
            for bounds in product(elems, repeat=e + 1):
                E = SentenceContext.from_parts(perm, [reps[m] for m in bounds])
                for qv in product(elems, repeat=dB):
                    for rv in product(elems, repeat=dC):
                        check_instance(h, template, E, [reps[m] for m in qv], [reps[m] for m in rv])
                        count += 1
    assert count > 1000


@pytest.mark.parametrize("monoid", ["z2_abc", "h_l3"])
def test_randomized_instances(request, monoid):
    h = request.getfixturevalue(monoid)
    rng = random.Random(20261016)
    alphabet = list(h.alphabet)
    for _ in range(6000):
        template = random_template(rng, alphabet)
        dB, dC = template_arities(template)
        E = random_context(rng, alphabet, len(template))
        u = [random_word(rng, alphabet) for _ in range(dB)]
        v = [random_word(rng, alphabet) for _ in range(dC)]
        check_instance(h, template, E, u, v)


def test_contraction_order_does_not_matter(h_l3):
    rng = random.Random(7)
    alphabet = list(h_l3.alphabet)
    for _ in range(3000):
        template = random_template(rng, alphabet)
        dB, dC = template_arities(template)
        E = random_context(rng, alphabet, len(template))
        tau = interface_type(h_l3, E)
        r = h_type(h_l3, [random_word(rng, alphabet) for _ in range(dC)])
        tr = trace_B(template, tau, r, h_l3)
        nf = normalize(tr, h_l3)
        items = contract_randomly(tr, h_l3, rng)
        assert normalize(items, h_l3) == nf
        assert [it for it in items if isinstance(it, Var)] == [Var("x", k) for k in nf.permutation]
        # fully contracted: never two elements side by side
        assert all(isinstance(a, Var) or isinstance(b, Var) for a, b in zip(items, items[1:]))
