"""Independent reference computations used only by the tests."""

from __future__ import annotations

import random
import re
from itertools import permutations, product

from mcfglearn.context import InterfaceType, SentenceContext
from mcfglearn.context import fill, interface_type
from mcfglearn.grammar import BinaryRule, StartRule, TerminalRule, UnitRule, Var, substitute
from mcfglearn.monoid import h_type, h_word
from mcfglearn.transport import induced_context_B, induced_context_C, template_eval, transport_B, transport_C

_L3 = re.compile(r"^(a+)(b+)(c+)$")


def in_l3(w: str) -> bool:
    m = _L3.match(w)
    return bool(m) and len(m.group(1)) == len(m.group(2)) == len(m.group(3))


def l3_words(n: int) -> set[str]:
    return {"a" * k + "b" * k + "c" * k for k in range(1, n // 3 + 1)}


def l3_a_tuples(bound: int) -> set[tuple]:
    """Closed form of the A-language of the L3 fixture: (a^n, b^n c^(n-1))."""
    return {("a" * n, "b" * n + "c" * (n - 1)) for n in range(1, bound + 1) if 3 * n - 1 <= bound}


def monoid_value(h, w: str) -> int:
    """Fold with the raw table, one letter at a time."""
    m = h.monoid.identity
    for a in w:
        m = h.monoid.table[m][h.letter_values[a]]
    return m


def interface_by_hand(h, E: SentenceContext) -> InterfaceType:
    perm, bounds, cur = [], [], ""
    for it in E.items:
        if isinstance(it, int):
            perm.append(it)
            bounds.append(monoid_value(h, cur))
            cur = ""
        else:
            cur += it
    bounds.append(monoid_value(h, cur))
    return InterfaceType(tuple(perm), tuple(bounds))


def range_recognize(g, w: str) -> bool:
    """Chart recognizer over position ranges, independent of tuple enumeration.

    An item is (symbol, ((i1, j1), ...)); a rule fires when the child ranges
    and template letters line up contiguously inside ``w``.
    """
    n = len(w)
    items: dict = {}

    def add(A, rng):
        s = items.setdefault(A, set())
        if rng in s:
            return False
        s.add(rng)
        return True

    for r in g.rules:
        if isinstance(r, TerminalRule):
            for i in range(n):
                if w[i] == r.letter:
                    add(r.lhs, ((i, i + 1),))
    binaries = [r for r in g.rules if isinstance(r, BinaryRule)]
    units = [r for r in g.rules if isinstance(r, UnitRule)]
    changed = True
    while changed:
        changed = False
        for r in units:
            for rng in list(items.get(r.child, ())):
                changed |= add(r.lhs, rng)
        for r in binaries:
            for lr in list(items.get(r.left, ())):
                for rr in list(items.get(r.right, ())):
                    for out in _place(r.template, lr, rr, w):
                        changed |= add(r.lhs, out)
    for r in g.rules:
        if isinstance(r, StartRule) and ((0, n),) in items.get(r.child, ()):
            return True
    return False


def _place(template, lr, rr, w):
    """Every way to read the template's components as contiguous ranges of ``w``."""
    options = [_component_ranges(comp, lr, rr, w) for comp in template]
    return [tuple(c) for c in product(*options)]


def _component_ranges(comp, lr, rr, w):
    var_at = [k for k, it in enumerate(comp) if isinstance(it, Var)]
    if not var_at:
        text = "".join(comp)
        return [(s, s + len(text)) for s in range(len(w) - len(text) + 1) if w.startswith(text, s)]
    k0 = var_at[0]
    first = comp[k0]
    start = (lr if first.side == "x" else rr)[first.index - 1][0] - k0
    if start < 0:
        return []
    pos = start
    for it in comp:
        if isinstance(it, Var):
            i, j = (lr if it.side == "x" else rr)[it.index - 1]
            if i != pos:
                return []
            pos = j
        else:
            if pos >= len(w) or w[pos] != it:
                return []
            pos += 1
    return [(start, pos)]


def contract_randomly(trace, h, rng: random.Random):
    """Contract adjacent element pairs in random order until none remain."""
    items = list(trace)
    while True:
        spots = [k for k in range(len(items) - 1)
                 if not isinstance(items[k], Var) and not isinstance(items[k + 1], Var)]
        if not spots:
            return items
        k = rng.choice(spots)
        items[k:k + 2] = [h.monoid.table[items[k]][items[k + 1]]]


def random_template(rng: random.Random, alphabet, f: int = 2, max_letters: int = 3):
    """A random linear nondeleting template with fan-outs at most ``f``."""
    e, dB, dC = (rng.randint(1, f) for _ in range(3))
    variables = [Var("x", i) for i in range(1, dB + 1)] + [Var("y", j) for j in range(1, dC + 1)]
    while True:
        rng.shuffle(variables)
        cuts = sorted(rng.randint(0, len(variables)) for _ in range(e - 1))
        bounds = [0] + cuts + [len(variables)]
        comps = [list(variables[bounds[i]:bounds[i + 1]]) for i in range(e)]
        for _ in range(rng.randint(0, max_letters)):
            c = rng.randrange(e)
            comps[c].insert(rng.randint(0, len(comps[c])), rng.choice(alphabet))
        if all(comps):
            return tuple(tuple(c) for c in comps)


def random_word(rng: random.Random, alphabet, max_len: int = 3) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, max_len)))


def random_context(rng: random.Random, alphabet, d: int, max_len: int = 3) -> SentenceContext:
    perm = list(range(1, d + 1))
    rng.shuffle(perm)
    return SentenceContext.from_parts(perm, [random_word(rng, alphabet, max_len) for _ in range(d + 1)])


def all_words(alphabet, n: int):
    for k in range(n + 1):
        for p in product(alphabet, repeat=k):
            yield "".join(p)


def permutations_of(d: int):
    return list(permutations(range(1, d + 1)))


def check_instance(h, template, E, u, v):
    """Output map, filling identity and trace realization for one concrete instance."""
    z = substitute(template, u, v)
    q, r = h_type(h, u), h_type(h, v)
    assert h_type(h, z) == template_eval(template, q, r, h)
    EB = induced_context_B(template, E, v)
    EC = induced_context_C(template, E, u)
    w = fill(E, z)
    assert fill(EB, u) == w == fill(EC, v)
    tau = interface_type(h, E)
    assert interface_type(h, EB) == transport_B(template, tau, r, h)
    assert interface_type(h, EC) == transport_C(template, tau, q, h)


def representatives(h):
    """Shortest word for every reachable monoid element."""
    reps = {h.identity: ""}
    frontier = [""]
    while frontier:
        nxt = []
        for w in frontier:
            for a in h.alphabet:
                m = h_word(h, w + a)
                if m not in reps:
                    reps[m] = w + a
                    nxt.append(w + a)
        frontier = nxt
    return reps


def all_templates(f=2):
    for e in range(1, f + 1):
        for dB in range(1, f + 1):
            for dC in range(1, f + 1):
                vs = [Var("x", i) for i in range(1, dB + 1)] + [Var("y", j) for j in range(1, dC + 1)]
                for perm in permutations(vs):
                    for cut in range(1, len(vs)) if e == 2 else [None]:
                        if cut is None:
                            yield (tuple(perm),)
                        else:
                            yield (tuple(perm[:cut]), tuple(perm[cut:]))
