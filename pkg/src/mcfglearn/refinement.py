"""Typed refinement of a grammar by output h-type and sentence-interface type."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .context import (InterfaceType, SentenceContext, format_htype, format_interface,
                      hole_context, interface_type, start_interface)
from .errors import DomainError
from .grammar import (BinaryRule, Grammar, StartRule, TerminalRule, Tree, UnitRule,
                      enumerate_trees, enumerate_tuples, format_template, language_up_to,
                      saturate, shortlex, substitute, trim, validate)
from .monoid import Homomorphism, HType, h_type
from .transport import induced_context_B, induced_context_C, template_eval, transport_B, transport_C


class TypedNT(NamedTuple):
    base: object
    output: HType
    interface: InterfaceType


class _FreshStart:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "S~"

    __str__ = __repr__

    def __reduce__(self):
        return (_FreshStart, ())


FRESH_START = _FreshStart()


def typed_key(X) -> tuple:
    """Canonical encoding; the fresh start sorts first."""
    if X is FRESH_START:
        return (0, "", (), (), ())
    return (1, str(X.base), X.output, X.interface.permutation, X.interface.boundaries)


@dataclass(eq=False)
class TypedGrammar:
    grammar: Grammar  # nonterminals are TypedNT plus FRESH_START
    base: Grammar
    h: Homomorphism

    @property
    def nonterminals(self) -> list:
        return sorted((X for X in self.grammar.fanout if X is not FRESH_START), key=typed_key)

    @property
    def rules(self) -> tuple:
        return self.grammar.rules

    def copies_of(self, base) -> list:
        return [X for X in self.nonterminals if X.base == base]


def productive_types(g: Grammar, h: Homomorphism) -> dict:
    """For each nonterminal, the output h-types of its derivable tuples (least fixpoint)."""
    prod: dict = defaultdict(set)
    for r in g.rules:
        if isinstance(r, TerminalRule):
            prod[r.lhs].add((h.letter(r.letter),))
    binaries = [r for r in g.rules if isinstance(r, BinaryRule)]
    changed = True
    while changed:
        changed = False
        for r in binaries:
            for q in list(prod.get(r.left, ())):
                for rr in list(prod.get(r.right, ())):
                    p = template_eval(r.template, q, rr, h)
                    if p not in prod[r.lhs]:
                        prod[r.lhs].add(p)
                        changed = True
    return prod


def build_trimmed_refinement(g: Grammar, h: Homomorphism, f: int | None = None) -> TypedGrammar:
    f = f if f is not None else max(g.fanout.values(), default=1)
    rep = validate(g, f)
    if not rep.ok or not rep.reduced:
        raise DomainError("refinement needs a valid, reduced grammar (trim it first): "
                          + "; ".join(rep.violations + rep.warnings))
    prod = productive_types(g, h)
    tau_st = start_interface(h)
    rules: list = []
    seen: set = set()
    queue: list = []

    def visit(X):
        if X not in seen:
            seen.add(X)
            queue.append(X)

    for r in g.rules:
        if isinstance(r, StartRule):
            for p in sorted(prod.get(r.child, ())):
                X = TypedNT(r.child, p, tau_st)
                rules.append(StartRule(FRESH_START, X))
                visit(X)
    while queue:
        X = queue.pop()
        for r in g.rules_for(X.base):
            if isinstance(r, TerminalRule):
                if X.output == (h.letter(r.letter),):
                    rules.append(TerminalRule(X, r.letter))
            elif isinstance(r, BinaryRule):
                for q in sorted(prod.get(r.left, ())):
                    for rr in sorted(prod.get(r.right, ())):
                        if template_eval(r.template, q, rr, h) != X.output:
                            continue
                        Y = TypedNT(r.left, q, transport_B(r.template, X.interface, rr, h))
                        Z = TypedNT(r.right, rr, transport_C(r.template, X.interface, q, h))
                        rules.append(BinaryRule(X, r.template, Y, Z))
                        visit(Y)
                        visit(Z)
    fanout = {FRESH_START: 1}
    for X in sorted(seen, key=typed_key):
        fanout[X] = g.fanout[X.base]
    rules.sort(key=_rule_key)
    full = Grammar(g.alphabet, fanout, FRESH_START, tuple(rules))
    return TypedGrammar(trim(full), g, h)


def _rule_key(r) -> tuple:
    if isinstance(r, StartRule):
        return (0, typed_key(r.child))
    if isinstance(r, TerminalRule):
        return (1, typed_key(r.lhs), r.letter)
    return (2, typed_key(r.lhs), format_template(r.template), typed_key(r.left), typed_key(r.right))


def typed_tuple_language(tg: TypedGrammar, X, bound: int) -> frozenset:
    return enumerate_tuples(tg.grammar, X, bound)


def forget(rule):
    """The base rule underlying a typed rule."""
    if isinstance(rule, StartRule):
        return rule.child.base
    if isinstance(rule, TerminalRule):
        return TerminalRule(rule.lhs.base, rule.letter)
    return BinaryRule(rule.lhs.base, rule.template, rule.left.base, rule.right.base)


def typed_derivation(tg: TypedGrammar, X, t: tuple) -> Tree | None:
    """One typed derivation tree of ``t`` from ``X``, rebuilt from saturation back-pointers."""
    bound = sum(len(w) for w in t)
    _, how = saturate(tg.grammar, bound, trace=True)

    def build(A, u):
        step = how.get((A, u))
        if step is None:
            return None
        r = step[0]
        if isinstance(r, TerminalRule):
            return Tree(r, (), u)
        left, right = build(r.left, step[1]), build(r.right, step[2])
        return Tree(r, (left, right), u)

    return build(X, tuple(t))


def check_typing_invariant(tg: TypedGrammar, X, t: Sequence[str]) -> bool:
    """``h_type(t)`` equals the copy's output type and the forgotten derivation is a base derivation."""
    t = tuple(t)
    if h_type(tg.h, t) != X.output:
        return False
    tree = typed_derivation(tg, X, t)
    if tree is None:
        return False
    base_rules = set(tg.base.rules)
    for node in tree.nodes():
        if forget(node.rule) not in base_rules:
            return False
        r = node.rule
        if isinstance(r, BinaryRule):
            if substitute(r.template, node.children[0].value, node.children[1].value) != node.value:
                return False
    return True


def languages_equal_up_to(g1, g2, n: int) -> tuple[bool, str | None]:
    """Compare bounded languages; on difference return the shortlex-first witness word."""
    g1 = g1.grammar if isinstance(g1, TypedGrammar) else g1
    g2 = g2.grammar if isinstance(g2, TypedGrammar) else g2
    l1, l2 = language_up_to(g1, n), language_up_to(g2, n)
    diff = l1 ^ l2
    if not diff:
        return True, None
    alphabet = list(g1.alphabet) + [a for a in g2.alphabet if a not in g1.alphabet]
    return False, shortlex(diff, alphabet)[0]


# -- derivation trees and outside contexts -------------------------------


def outside_contexts(tree: Tree) -> list[tuple[Tree, SentenceContext]]:
    """Each node below the start rule of ``tree`` paired with its outside context."""
    if not isinstance(tree.rule, StartRule):
        raise DomainError("outside contexts are defined for successful (start-rooted) trees")
    out = []
    stack = [(tree.children[0], hole_context(1))]
    while stack:
        node, E = stack.pop()
        out.append((node, E))
        if isinstance(node.rule, BinaryRule):
            left, right = node.children
            stack.append((left, induced_context_B(node.rule.template, E, right.value)))
            stack.append((right, induced_context_C(node.rule.template, E, left.value)))
    return out


def annotate(tree: Tree, h: Homomorphism) -> Tree:
    """Lift a successful base tree: every node gets its output h-type and outside interface.

    Contexts are passed top-down rather than looked up per node object,
    since enumerated trees share subtrees between positions.
    """
    if not isinstance(tree.rule, StartRule):
        raise DomainError("only successful (start-rooted) trees can be annotated")

    def lift(node, E):
        X = TypedNT(node.rule.lhs, h_type(h, node.value), interface_type(h, E))
        r = node.rule
        if isinstance(r, TerminalRule):
            return X, Tree(TerminalRule(X, r.letter), (), node.value)
        left, right = node.children
        Y, tl = lift(left, induced_context_B(r.template, E, right.value))
        Z, tr = lift(right, induced_context_C(r.template, E, left.value))
        return X, Tree(BinaryRule(X, r.template, Y, Z), (tl, tr), node.value)

    X, sub = lift(tree.children[0], hole_context(1))
    return Tree(StartRule(FRESH_START, X), (sub,), tree.value)


def successful_trees(tg: TypedGrammar, bound: int) -> list[Tree]:
    return enumerate_trees(tg.grammar, FRESH_START, bound)


# -- report --------------------------------------------------------------


def typed_name(X, h: Homomorphism) -> str:
    if X is FRESH_START:
        return "S~"
    return f"{X.base} [p={format_htype(X.output, h)}] [τ={format_interface(X.interface, h)}]"


def refinement_report(tg: TypedGrammar) -> str:
    h = tg.h
    lines = [f"# typed nonterminals: {len(tg.nonterminals)}", f"# typed rules: {len(tg.rules)}"]
    lines += [typed_name(X, h) for X in tg.nonterminals]
    lines.append("")
    for r in tg.rules:
        if isinstance(r, StartRule):
            lines.append(f"S~ -> {typed_name(r.child, h)}")
        elif isinstance(r, TerminalRule):
            lines.append(f"{typed_name(r.lhs, h)} -> '{r.letter}'")
        elif isinstance(r, BinaryRule):
            lines.append(f"{typed_name(r.lhs, h)} -> {format_template(r.template)}"
                         f"({typed_name(r.left, h)}, {typed_name(r.right, h)})")
        elif isinstance(r, UnitRule):
            lines.append(f"{typed_name(r.lhs, h)} -> {typed_name(r.child, h)}")
    return "\n".join(lines) + "\n"


def typed_names(tg: TypedGrammar) -> dict:
    """Short parseable names (``A_1``, ``A_2``, ...) for the grammar text format."""
    names = {FRESH_START: "S~"}
    count: dict = defaultdict(int)
    for X in tg.nonterminals:
        count[X.base] += 1
        names[X] = f"{X.base}_{count[X.base]}"
    return names
