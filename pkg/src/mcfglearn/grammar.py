"""Working binary linear nondeleting MCFGs.

Nonterminals may be any hashable value: plain names for input grammars,
typed copies for refinements, observed typed tuples for learner
hypotheses.  All three share the bounded bottom-up enumeration here.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence, Union

from .errors import DomainError, StructuralError


class Var(NamedTuple):
    side: str  # "x" (left child) or "y" (right child)
    index: int  # 1-based

    def __str__(self):
        return f"{self.side}{self.index}"


Item = Union[str, Var]
Template = tuple  # tuple[tuple[Item, ...], ...]


@dataclass(frozen=True)
class StartRule:
    lhs: Hashable
    child: Hashable


@dataclass(frozen=True)
class TerminalRule:
    lhs: Hashable
    letter: str


@dataclass(frozen=True)
class BinaryRule:
    lhs: Hashable
    template: Template
    left: Hashable
    right: Hashable


@dataclass(frozen=True)
class UnitRule:
    """Only present in extended (learner) grammars."""

    lhs: Hashable
    child: Hashable


Rule = Union[StartRule, TerminalRule, BinaryRule, UnitRule]


@dataclass(eq=False)
class Grammar:
    alphabet: tuple[str, ...]
    fanout: Mapping[Hashable, int]
    start: Hashable
    rules: tuple
    _memo: dict = field(default_factory=dict, repr=False)

    @property
    def nonterminals(self):
        return tuple(self.fanout)

    def rules_for(self, lhs) -> list:
        if "by_lhs" not in self._memo:
            idx = defaultdict(list)
            for r in self.rules:
                idx[r.lhs].append(r)
            self._memo["by_lhs"] = idx
        return self._memo["by_lhs"].get(lhs, [])

    def has_units(self) -> bool:
        return any(isinstance(r, UnitRule) for r in self.rules)


# -- templates -----------------------------------------------------------


@lru_cache(maxsize=None)
def compile_template(template: Template):
    """Merge letter runs; returns per component a tuple of (kind, payload)."""
    comps = []
    for comp in template:
        out = []
        for it in comp:
            if isinstance(it, Var):
                out.append((it.side, it.index - 1))
            elif out and out[-1][0] == "t":
                out[-1] = ("t", out[-1][1] + it)
            else:
                out.append(("t", it))
        comps.append(tuple(out))
    return tuple(comps)


@lru_cache(maxsize=None)
def template_arities(template: Template) -> tuple[int, int]:
    xs = [it.index for c in template for it in c if isinstance(it, Var) and it.side == "x"]
    ys = [it.index for c in template for it in c if isinstance(it, Var) and it.side == "y"]
    return max(xs, default=0), max(ys, default=0)


@lru_cache(maxsize=None)
def terminal_count(template: Template) -> int:
    return sum(1 for c in template for it in c if not isinstance(it, Var))


def substitute(template: Template, u: Sequence[str], v: Sequence[str]) -> tuple[str, ...]:
    out = []
    for comp in compile_template(template):
        parts = []
        for kind, p in comp:
            parts.append(p if kind == "t" else (u[p] if kind == "x" else v[p]))
        out.append("".join(parts))
    return tuple(out)


def apply_rule(rule: BinaryRule | Template, u: Sequence[str], v: Sequence[str],
               fanout: Mapping | None = None) -> tuple[str, ...]:
    """Simultaneous substitution of ``u`` for the x-variables and ``v`` for the y-variables."""
    template = rule.template if isinstance(rule, BinaryRule) else rule
    if fanout is not None and isinstance(rule, BinaryRule):
        dB, dC = fanout[rule.left], fanout[rule.right]
    else:
        dB, dC = template_arities(template)
    if len(u) != dB or len(v) != dC:
        raise DomainError(f"arity mismatch: template takes ({dB}, {dC}), got ({len(u)}, {len(v)})")
    return substitute(template, u, v)


_TOKEN = re.compile(r"'([^'])'|\"([^\"])\"|([xy])(\d+)|(\S)")


@lru_cache(maxsize=4096)
def parse_template(text: str) -> Template:
    """``"(a x1, b x2 y1)"`` -> template.  Letters may be bare or quoted."""
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise StructuralError(f"template must be parenthesised: {text!r}")
    comps = []
    for raw in text[1:-1].split(","):
        comp = []
        for m in _TOKEN.finditer(raw):
            q1, q2, side, num, bare = m.groups()
            if side:
                comp.append(Var(side, int(num)))
            else:
                letter = q1 or q2 or bare
                if letter in "(),":
                    raise StructuralError(f"unexpected {letter!r} in template {text!r}")
                comp.append(letter)
        comps.append(tuple(comp))
    return tuple(comps)


def format_template(template: Template, quote: Iterable[str] = ()) -> str:
    quote = set(quote)

    def item(it):
        if isinstance(it, Var):
            return str(it)
        return f"'{it}'" if it in quote else it

    return "(" + ", ".join(" ".join(item(it) for it in c) for c in template) + ")"


# -- validation ----------------------------------------------------------


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    reduced: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = [f"violation: {v}" for v in self.violations]
        out += [f"warning: {w}" for w in self.warnings]
        out.append(f"valid: {'yes' if self.ok else 'no'}")
        out.append(f"reduced: {'yes' if self.reduced else 'no'}")
        return out


def validate(g: Grammar, f: int, allow_units: bool = False) -> ValidationReport:
    rep = ValidationReport()
    mu = g.fanout
    bad = rep.violations.append
    for A, d in mu.items():
        if not isinstance(d, int) or d < 1:
            bad(f"fanout of {A} must be a positive integer")
        elif d > f:
            bad(f"fanout of {A} is {d} > bound {f}")
    if g.start not in mu:
        bad(f"start symbol {g.start} undeclared")
    elif mu[g.start] != 1:
        bad(f"start symbol {g.start} must have fanout 1")

    def declared(sym, r):
        if sym not in mu:
            bad(f"{show_rule(r)}: undeclared nonterminal {sym}")
            return False
        return True

    for r in g.rules:
        if isinstance(r, StartRule):
            if r.lhs != g.start:
                bad(f"{show_rule(r)}: start-form rule whose left side is not the start symbol")
            if declared(r.child, r):
                if r.child == g.start:
                    bad(f"{show_rule(r)}: start-separated: start symbol as its own child")
                elif mu[r.child] != 1:
                    bad(f"{show_rule(r)}: start child must have fanout 1")
        elif isinstance(r, TerminalRule):
            if r.lhs == g.start:
                bad(f"{show_rule(r)}: start-separated: terminal rule for the start symbol")
            if declared(r.lhs, r) and mu[r.lhs] != 1:
                bad(f"{show_rule(r)}: terminal rule left side must have fanout 1")
            if r.letter not in g.alphabet:
                bad(f"{show_rule(r)}: letter {r.letter!r} not in alphabet")
        elif isinstance(r, BinaryRule):
            if r.lhs == g.start:
                bad(f"{show_rule(r)}: start-separated: binary rule for the start symbol")
            if g.start in (r.left, r.right):
                bad(f"{show_rule(r)}: start-separated: start symbol used as a child")
            if not all(declared(s, r) for s in (r.lhs, r.left, r.right)):
                continue
            if len(r.template) != mu[r.lhs]:
                bad(f"{show_rule(r)}: template has {len(r.template)} components, "
                    f"fanout of {r.lhs} is {mu[r.lhs]}")
            counts = defaultdict(int)
            for comp in r.template:
                for it in comp:
                    if isinstance(it, Var):
                        counts[it] += 1
                    elif it not in g.alphabet:
                        bad(f"{show_rule(r)}: letter {it!r} not in alphabet")
            wanted = {Var("x", i) for i in range(1, mu[r.left] + 1)}
            wanted |= {Var("y", j) for j in range(1, mu[r.right] + 1)}
            for v in sorted(wanted - set(counts)):
                bad(f"{show_rule(r)}: nondeleting: variable {v} does not occur")
            for v, c in sorted(counts.items()):
                if v not in wanted:
                    bad(f"{show_rule(r)}: variable {v} has no matching child component")
                elif c > 1:
                    bad(f"{show_rule(r)}: linear: variable {v} occurs {c} times")
        elif isinstance(r, UnitRule):
            if not allow_units:
                bad(f"{show_rule(r)}: unit rule outside an extended grammar")
            if all(declared(s, r) for s in (r.lhs, r.child)) and mu[r.lhs] != mu[r.child]:
                bad(f"{show_rule(r)}: unit rule joins different fanouts")
    if rep.violations:
        rep.reduced = False
        return rep
    prod = productive(g)
    reach = reachable(g)
    for A in mu:
        if A == g.start and not g.rules:
            continue
        if A not in prod:
            rep.warnings.append(f"{A} is not productive")
        if A not in reach:
            rep.warnings.append(f"{A} is not reachable")
    rep.reduced = not rep.warnings
    if not g.rules:
        rep.warnings.append("grammar has no rules and generates the empty language")
    return rep


def show_rule(r: Rule) -> str:
    if isinstance(r, (StartRule, UnitRule)):
        return f"{r.lhs} -> {r.child}"
    if isinstance(r, TerminalRule):
        return f"{r.lhs} -> '{r.letter}'"
    return f"{r.lhs} -> {format_template(r.template)}({r.left}, {r.right})"


def productive(g: Grammar) -> set:
    """Least fixpoint of nonterminals deriving at least one terminal tuple."""
    done: set = set()
    waiting = defaultdict(list)
    pending = {}
    queue = []
    for i, r in enumerate(g.rules):
        if isinstance(r, TerminalRule):
            queue.append(r.lhs)
            continue
        kids = {r.child} if isinstance(r, (StartRule, UnitRule)) else {r.left, r.right}
        pending[i] = len(kids)
        for k in kids:
            waiting[k].append(i)
    while queue:
        A = queue.pop()
        if A in done:
            continue
        done.add(A)
        for i in waiting.get(A, ()):
            pending[i] -= 1
            if pending[i] == 0:
                queue.append(g.rules[i].lhs)
    return done


def reachable(g: Grammar, among: set | None = None) -> set:
    succ = defaultdict(list)
    for r in g.rules:
        kids = (r.child,) if isinstance(r, (StartRule, UnitRule)) else (
            () if isinstance(r, TerminalRule) else (r.left, r.right))
        if among is not None and (r.lhs not in among or any(k not in among for k in kids)):
            continue
        succ[r.lhs].extend(kids)
    seen = {g.start}
    stack = [g.start]
    while stack:
        for k in succ.get(stack.pop(), ()):
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return seen


def _kids(r):
    if isinstance(r, TerminalRule):
        return ()
    if isinstance(r, BinaryRule):
        return (r.left, r.right)
    return (r.child,)


def trim(g: Grammar) -> Grammar:
    """Drop unproductive symbols, then unreachable ones, with their rules."""
    prod = productive(g) | {g.start}
    rules = [r for r in g.rules if r.lhs in prod and all(k in prod for k in _kids(r))]
    g1 = Grammar(g.alphabet, {A: d for A, d in g.fanout.items() if A in prod}, g.start, tuple(rules))
    reach = reachable(g1)
    rules = tuple(r for r in rules if r.lhs in reach)
    return Grammar(g.alphabet, {A: d for A, d in g.fanout.items() if A in reach}, g.start, rules)


# -- bounded enumeration -------------------------------------------------




def saturate(g: Grammar, bound: int, trace: bool = False):
    """All facts ``(A, u)`` with ``A =>* u`` and total length of ``u`` at most ``bound``.

    Facts are finalised in rounds of increasing total length.  Every pair
    of child facts is combined once, when the later of the two is
    finalised (binary parents are strictly longer than both children).
    Unit rules are closed within a round.  Returns ``{A: set of tuples}``;
    with ``trace`` also one back-pointer per fact.
    """
    key = ("sat", bound, trace)
    if key in g._memo:
        return g._memo[key]
    by_left = defaultdict(list)
    by_right = defaultdict(list)
    unit_parents = defaultdict(list)
    pending: dict = defaultdict(lambda: defaultdict(set))
    how: dict | None = {} if trace else None
    for r in g.rules:
        if isinstance(r, TerminalRule):
            if bound >= 1:
                pending[1][r.lhs].add((r.letter,))
                if trace:
                    how.setdefault((r.lhs, (r.letter,)), (r,))
        elif isinstance(r, BinaryRule):
            t = terminal_count(r.template)
            by_left[r.left].append((r, t))
            by_right[r.right].append((r, t))
        elif isinstance(r, UnitRule):
            unit_parents[r.child].append(r)
    facts: dict = defaultdict(set)
    by_len: dict = defaultdict(lambda: defaultdict(list))

    for L in range(1, bound + 1):
        new = pending.pop(L, {})
        if unit_parents:
            stack = [(A, u) for A, us in new.items() for u in us]
            while stack:
                B, u = stack.pop()
                for r in unit_parents.get(B, ()):
                    tgt = new.setdefault(r.lhs, set())
                    if u not in tgt:
                        tgt.add(u)
                        if trace:
                            how.setdefault((r.lhs, u), (r, u))
                        stack.append((r.lhs, u))
        fresh = []
        for A, us in new.items():
            known = facts[A]
            for u in us:
                if u not in known:
                    known.add(u)
                    by_len[A][L].append(u)
                    fresh.append((A, u))
        for A, u in fresh:
            for r, t in by_left.get(A, ()):
                room = bound - L - t
                lens = by_len.get(r.right)
                if room < 1 or not lens:
                    continue
                for lc, vs in lens.items():
                    if lc > room or lc > L:
                        continue
                    out = pending[L + lc + t][r.lhs]
                    for v in vs:
                        z = substitute(r.template, u, v)
                        out.add(z)
                        if trace:
                            how.setdefault((r.lhs, z), (r, u, v))
            for r, t in by_right.get(A, ()):
                room = bound - L - t
                lens = by_len.get(r.left)
                if room < 1 or not lens:
                    continue
                for lb, us in lens.items():
                    if lb > room or lb >= L:
                        continue
                    out = pending[L + lb + t][r.lhs]
                    for u2 in us:
                        z = substitute(r.template, u2, u)
                        out.add(z)
                        if trace:
                            how.setdefault((r.lhs, z), (r, u2, u))
    facts = {A: s for A, s in facts.items() if s}
    result = (facts, how) if trace else facts
    g._memo[key] = result
    return result


def enumerate_tuples(g: Grammar, A, bound: int) -> frozenset:
    """Tuples derivable from ``A`` with total length at most ``bound``."""
    if A not in g.fanout:
        raise StructuralError(f"unknown nonterminal {A}")
    return frozenset(saturate(g, bound).get(A, ()))


def language_up_to(g: Grammar, n: int) -> frozenset:
    facts = saturate(g, n)
    words = set()
    for r in g.rules_for(g.start):
        if isinstance(r, StartRule):
            words.update(u[0] for u in facts.get(r.child, ()) if len(u) == 1)
    return frozenset(words)


def member(g: Grammar, w: str) -> bool:
    for a in w:
        if a not in g.alphabet:
            raise StructuralError(f"letter {a!r} outside the alphabet")
    return w in language_up_to(g, len(w))


def shortlex(words: Iterable[str], alphabet: Sequence[str] = ()) -> list[str]:
    rank = {a: i for i, a in enumerate(alphabet)}
    return sorted(words, key=lambda w: (len(w), [rank.get(a, len(rank)) for a in w], w))


# -- derivation trees ----------------------------------------------------


@dataclass(frozen=True)
class Tree:
    rule: Rule
    children: tuple
    value: tuple  # the derived tuple

    @property
    def size(self) -> int:
        return sum(len(w) for w in self.value)

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()


def enumerate_trees(g: Grammar, A, bound: int) -> list[Tree]:
    """Every derivation tree of ``A`` whose yield has total length at most ``bound``.

    Exhaustive, so only meant for small grammars.  Unit rules are not
    supported (they allow unboundedly many trees per yield).
    """
    if g.has_units():
        raise DomainError("tree enumeration needs a grammar without unit rules")
    by_len: dict = defaultdict(lambda: defaultdict(list))
    for r in g.rules:
        if isinstance(r, TerminalRule) and bound >= 1:
            by_len[r.lhs][1].append(Tree(r, (), (r.letter,)))
    binaries = [r for r in g.rules if isinstance(r, BinaryRule)]
    for L in range(2, bound + 1):
        for r in binaries:
            t = terminal_count(r.template)
            for lb in range(1, L - t):
                lc = L - t - lb
                for tb in by_len[r.left].get(lb, ()):
                    for tc in by_len[r.right].get(lc, ()):
                        by_len[r.lhs][L].append(
                            Tree(r, (tb, tc), substitute(r.template, tb.value, tc.value)))
    if A == g.start:
        out = []
        for r in g.rules_for(A):
            if isinstance(r, StartRule):
                for L in range(1, bound + 1):
                    out.extend(Tree(r, (c,), c.value) for c in by_len[r.child].get(L, ()))
        return out
    return [t for L in range(1, bound + 1) for t in by_len[A].get(L, ())]


# -- text format ---------------------------------------------------------

_HEADER = re.compile(r"^start\s+(\S+)\s*(?:;\s*fanout\s*(.*))?$")
_RULE = re.compile(r"^(\S+)\s*->\s*(.+)$")
_BINARY = re.compile(r"^(\(.*\))\s*\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)$")


def parse_grammar(text: str, alphabet: Sequence[str] | None = None) -> Grammar:
    """Parse the grammar text format.

    ::

        start S; fanout A=2, T=1
        alphabet: a b c          # optional; otherwise inferred in order of use
        S -> T
        A -> 'a'
        A -> (a x1, b x2 y1)(A, A_c)

    Nonterminals not listed under ``fanout`` default to fanout 1.  A rule
    ``X -> Y`` is a start rule when ``X`` is the start symbol and a unit
    rule otherwise.
    """
    start = None
    fanout: dict[str, int] = {}
    declared_alpha = list(alphabet) if alphabet is not None else None
    seen_letters: list[str] = []
    rules = []
    mentioned: dict[str, None] = {}  # insertion-ordered set

    def mention(*names):
        for n in names:
            mentioned.setdefault(n, None)

    def letter(a):
        if a not in seen_letters:
            seen_letters.append(a)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _HEADER.match(line):
            if start is not None:
                raise StructuralError(f"line {lineno}: second header")
            start = m.group(1)
            mention(start)
            for part in filter(None, (p.strip() for p in (m.group(2) or "").split(","))):
                name, _, val = part.partition("=")
                try:
                    fanout[name.strip()] = int(val)
                except ValueError:
                    raise StructuralError(f"line {lineno}: bad fanout entry {part!r}") from None
                mention(name.strip())
            continue
        if line.startswith("alphabet") and line[8:].lstrip().startswith(":"):
            declared_alpha = line.split(":", 1)[1].split()
            continue
        m = _RULE.match(line)
        if not m:
            raise StructuralError(f"line {lineno}: cannot parse {line!r}")
        lhs, rhs = m.group(1), m.group(2).strip()
        mention(lhs)
        if len(rhs) == 3 and rhs[0] == rhs[2] and rhs[0] in "'\"":
            rules.append(TerminalRule(lhs, rhs[1]))
            letter(rhs[1])
        elif mb := _BINARY.match(rhs):
            tpl = parse_template(mb.group(1))
            for c in tpl:
                for it in c:
                    if not isinstance(it, Var):
                        letter(it)
            rules.append(BinaryRule(lhs, tpl, mb.group(2), mb.group(3)))
            mention(mb.group(2), mb.group(3))
        elif re.fullmatch(r"[^\s(),']+", rhs):
            if start is not None and lhs == start:
                rules.append(StartRule(lhs, rhs))
            else:
                rules.append(UnitRule(lhs, rhs))
            mention(rhs)
        else:
            raise StructuralError(f"line {lineno}: cannot parse right side {rhs!r}")
    if start is None:
        raise StructuralError("grammar needs a 'start S; fanout ...' header")
    for n in mentioned:
        fanout.setdefault(n, 1)
    if declared_alpha is None:
        declared_alpha = seen_letters
    else:
        for a in seen_letters:
            if a not in declared_alpha:
                raise StructuralError(f"letter {a!r} is not in the declared alphabet")
    return Grammar(tuple(declared_alpha), fanout, start, tuple(rules))


def format_grammar(g: Grammar, names: Mapping | None = None,
                   legend: Mapping | None = None) -> str:
    """Inverse of :func:`parse_grammar`; ``names`` renames non-string nonterminals."""
    nm = (lambda A: names[A]) if names is not None else str
    quote = [a for a in g.alphabet if a in "xy(),'\" "]
    fan = ", ".join(f"{nm(A)}={d}" for A, d in g.fanout.items())
    out = [f"start {nm(g.start)}; fanout {fan}", "alphabet: " + " ".join(g.alphabet)]
    if legend:
        out += [f"# {nm(A)} = {legend[A]}" for A in g.fanout if A in legend]
    for r in g.rules:
        if isinstance(r, (StartRule, UnitRule)):
            out.append(f"{nm(r.lhs)} -> {nm(r.child)}")
        elif isinstance(r, TerminalRule):
            out.append(f"{nm(r.lhs)} -> '{r.letter}'")
        else:
            out.append(f"{nm(r.lhs)} -> {format_template(r.template, quote)}"
                       f"({nm(r.left)}, {nm(r.right)})")
    return "\n".join(out) + "\n"
