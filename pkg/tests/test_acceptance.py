"""The thirteen acceptance criteria, one test each.

Every test is timed against its runtime budget and records a one-line
verdict; the lines are printed in the terminal summary (see conftest).
"""

import functools
import random
import time
from itertools import combinations, permutations, product

import numpy as np

from mcfglearn.cli import simulate_text
from mcfglearn.context import (InterfaceType, SentenceContext, fill, format_interface, hole_context,
                               interface_type)
from mcfglearn.grammar import (BinaryRule, StartRule, enumerate_trees, enumerate_tuples, language_up_to, parse_grammar,
                               parse_template, template_arities)
from mcfglearn.learner import build, eliminate_units, has_unit_rules, observe, substitution_rules
from mcfglearn.monoid import h_type, parse_dfa, parse_monoid, transition_monoid
from mcfglearn.refinement import (annotate, build_trimmed_refinement, check_typing_invariant, forget,
                                  languages_equal_up_to, successful_trees, typed_tuple_language)
from mcfglearn.sampler import characteristic_sample, exposure_metrics
from mcfglearn.transport import (induced_context_B, normalize, render_normal_form, template_eval,
                                 trace_B, trace_C, transport_B, transport_C)

from conftest import read
from oracles import (all_templates, check_instance, in_l3, l3_a_tuples, l3_words, random_context,
                     random_template, random_word, representatives)

RESULTS: list[str] = []


def criterion(number: int, title: str, budget: float):
    def wrap(test):
        @functools.wraps(test)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                test(*args, **kwargs)
                elapsed = time.perf_counter() - t0
                assert elapsed < budget, f"took {elapsed:.1f} s, budget {budget:.0f} s"
            except BaseException as exc:
                elapsed = time.perf_counter() - t0
                RESULTS.append(f"FAIL  {number:2d}. {title} ({elapsed:.1f} s): {exc}".splitlines()[0])
                raise
            RESULTS.append(f"PASS  {number:2d}. {title} ({elapsed:.1f} s)")
        return run
    return wrap


def z2():
    return parse_monoid(read("z2.monoid"))[1]


def z2_abc():
    return parse_monoid(read("z2_abc.monoid"))[1]


def h_l3():
    return transition_monoid(parse_dfa(read("l3.dfa")))[1]


def fixtures():
    """(target grammar, homomorphism) for the L3 grammar and the swap grammar."""
    h, hs = h_l3(), z2_abc()
    return [(parse_grammar(read("l3.grammar"), tuple(h.alphabet)), h),
            (parse_grammar(read("swap.grammar"), tuple(hs.alphabet)), hs)]


@criterion(1, "transport worked example", 1)
def test_transport_worked_example():
    h = z2()
    e, s = h.monoid.element("e"), h.monoid.element("s")
    rule = parse_template("(y1 x2 a, b x1)")
    q, r = h_type(h, ("a", "b")), h_type(h, ("a",))
    assert (q, r) == ((s, e), (s,))
    assert template_eval(rule, q, r, h) == (e, s)
    tau = InterfaceType((1, 2), (e, s, e))
    assert render_normal_form(normalize(trace_B(rule, tau, r, h), h), h, "x") == "s x2 e x1 e"
    assert format_interface(transport_B(rule, tau, r, h), h) == "((12); s,e,e)"
    assert render_normal_form(normalize(trace_C(rule, tau, q, h), h), h, "y") == "e y1 s"
    assert format_interface(transport_C(rule, tau, q, h), h) == "(id1; e,s)"


@criterion(2, "placement example: two typed copies", 1)
def test_placement_example():
    g, h = fixtures()[1]
    contexts = sorted((induced_context_B(r.template, hole_context(1), ("c",))
                       for r in g.rules if isinstance(r, BinaryRule) and r.lhs == "T"), key=str)
    assert [str(E) for E in contexts] == ["[1]c[2]", "[2]c[1]"]
    assert [format_interface(interface_type(h, E), h) for E in contexts] == \
        ["(id2; e,e,e)", "((12); e,e,e)"]
    copies = build_trimmed_refinement(g, h, 2).copies_of("A")
    assert len(copies) == 2 and len({X.interface for X in copies}) == 2


@criterion(3, "L3 grammar semantics", 5)
def test_l3_semantics():
    g, _ = fixtures()[0]
    for k in range(1, 5):
        assert enumerate_tuples(g, "A", 3 * k + 2) == l3_a_tuples(3 * k + 2)
    assert language_up_to(g, 12) == {"abc", "aabbcc", "aaabbbccc", "aaaabbbbcccc"}


@criterion(4, "untyped substitutability counterexample", 1)
def test_untyped_counterexample():
    h = h_l3()
    x, y = ("a", "c"), ("aab", "cc")
    E, F = SentenceContext.parse("[1]b[2]"), SentenceContext.parse("[1]abb[2]c")
    assert (fill(E, x), fill(E, y)) == ("abc", "aabbcc") and in_l3("abc") and in_l3("aabbcc")
    assert fill(F, x) == "aabbcc" and in_l3(fill(F, x))
    assert fill(F, y) == "aababbccc" and not in_l3(fill(F, y))
    assert h_type(h, x) != h_type(h, y)
    rules = substitution_rules(observe(["abc", "aabbcc"], h, 2), h)
    assert not any({a.tuple, b.tuple} == {x, y} for a, b in rules)


@criterion(5, "typing invariant up to length 9", 30)
def test_typing_invariant():
    for g, h in fixtures():
        tg = build_trimmed_refinement(g, h, 2)
        checked = 0
        for X in tg.nonterminals:
            for t in typed_tuple_language(tg, X, 9):
                assert check_typing_invariant(tg, X, t), (X, t)
                checked += 1
        assert checked > 0
        base_rules = set(g.rules)
        for tree in successful_trees(tg, 9):
            assert StartRule(g.start, forget(tree.rule)) in base_rules
            assert all(forget(node.rule) in base_rules for node in list(tree.nodes())[1:])
        typed = set(tg.rules)
        for tree in enumerate_trees(g, g.start, 9):
            assert all(node.rule in typed for node in annotate(tree, h).nodes())


@criterion(6, "refinement preserves the language", 30)
def test_refinement_language():
    for g, h in fixtures():
        assert languages_equal_up_to(g, build_trimmed_refinement(g, h, 2), 12) == (True, None)


@criterion(7, "transport property suite", 60)
def test_transport_properties():
    rng = random.Random(11)
    count = 0
    for h in (z2_abc(), h_l3()):
        alphabet = list(h.alphabet)
        for _ in range(5000):
            template = random_template(rng, alphabet)
            dB, dC = template_arities(template)
            E = random_context(rng, alphabet, len(template))
            u = [random_word(rng, alphabet) for _ in range(dB)]
            v = [random_word(rng, alphabet) for _ in range(dC)]
            check_instance(h, template, E, u, v)
            count += 1
    assert count >= 10_000
    h = z2()
    reps = representatives(h)
    elems = sorted(reps)
    for template in all_templates():
        dB, dC = template_arities(template)
        e = len(template)
        for perm in permutations(range(1, e + 1)):
            for bounds in product(elems, repeat=e + 1):
                E = SentenceContext.from_parts(perm, [reps[m] for m in bounds])
                for qv in product(elems, repeat=dB):
                    for rv in product(elems, repeat=dC):
                        check_instance(h, template, E, [reps[m] for m in qv], [reps[m] for m in rv])


@criterion(8, "characteristic sample is positive", 30)
def test_sample_positivity():
    for g, h in fixtures():
        words = characteristic_sample(build_trimmed_refinement(g, h, 2)).words
        assert words and set(words) <= language_up_to(g, max(map(len, words)))


@criterion(9, "reconstruction from CS and supersets", 300)
def test_reconstruction():
    g, h = fixtures()[0]
    cs = characteristic_sample(build_trimmed_refinement(g, h, 2)).words
    target = language_up_to(g, 12)
    extra = ["a" * k + "b" * k + "c" * k for k in (5, 6, 7)]
    samples = [cs] + [cs + list(c) for n in (1, 2, 3) for c in combinations(extra, n)]
    for K in samples:
        assert build(K, h, 2).language_up_to(12) == target, K


@criterion(10, "convergence on the length-lex text", 600)
def test_text_convergence():
    g, h = fixtures()[0]
    run = simulate_text(g, h, 2, n=12, extra=5)
    assert run.stable
    assert len(run.checks) == run.cover + 5
    assert all(eq for i, eq, _ in run.checks if i >= run.cover)


@criterion(11, "unit elimination keeps the learned language", 60)
def test_unit_elimination():
    g, h = fixtures()[0]
    cs = characteristic_sample(build_trimmed_refinement(g, h, 2)).words
    ext = build(cs, h, 2, eliminate=False).grammar
    assert has_unit_rules(ext)
    free = eliminate_units(ext)
    assert not has_unit_rules(free)
    assert language_up_to(ext, 12) == language_up_to(free, 12) == l3_words(12)


@criterion(12, "exposure size inequalities", 1)
def test_exposure_bounds():
    for g, h in fixtures():
        tg = build_trimmed_refinement(g, h, 2)
        m = exposure_metrics(tg, characteristic_sample(tg))
        assert m.size <= m.n_symbols + m.n_rules
        assert m.positive_size <= (m.n_symbols + m.n_rules) * m.max_length


GROWTH_SAMPLES = [(1, 2), (1, 2, 3), (1, 2, 3, 7), (1, 2, 3, 4, 5, 11)]  # ||K||+ = 9, 18, 39, 78


@criterion(13, "polynomial growth of learner cost", 600)
def test_growth():
    h = h_l3()
    sizes, seconds, rules = [], [], []
    for ks in GROWTH_SAMPLES:
        K = ["a" * k + "b" * k + "c" * k for k in ks]
        best = None
        for _ in range(3):
            t0 = time.perf_counter()
            lg = build(K, h, 2)
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        sizes.append(sum(map(len, K)))
        seconds.append(best)
        rules.append(lg.metrics["rules_total"])
    assert sizes == [9, 18, 39, 78]
    x = np.log(sizes)
    limit = 4 * 2 + 3
    for y in (seconds, rules):
        slope = np.polyfit(x, np.log(y), 1)[0]
        assert slope <= limit, (slope, y)
