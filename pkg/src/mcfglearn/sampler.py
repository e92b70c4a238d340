"""Anchors, exposing contexts and the characteristic sample of a typed refinement."""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import product

from .context import SentenceContext, context_order_key, fill, hole_context, tuple_order_key
from .grammar import (BinaryRule, StartRule, TerminalRule, enumerate_tuples, language_up_to,
                      shortlex, substitute, terminal_count)
from .monoid import h_word
from .refinement import TypedGrammar, _rule_key, typed_key
from .transport import induced_context_B, induced_context_C


def min_lengths(tg: TypedGrammar) -> dict:
    """Least total length derivable from each typed nonterminal."""
    best: dict = {}
    rules = [r for r in tg.rules if isinstance(r, (TerminalRule, BinaryRule))]
    changed = True
    while changed:
        changed = False
        for r in rules:
            if isinstance(r, TerminalRule):
                val = 1
            elif r.left in best and r.right in best:
                val = best[r.left] + best[r.right] + terminal_count(r.template)
            else:
                continue
            if val < best.get(r.lhs, val + 1):
                best[r.lhs] = val
                changed = True
    return best


class Sampler:
    """Computes and caches exposures for one trimmed refinement.

    Membership in the target language is answered from a single bounded
    enumeration that is widened on demand, so every word is tested once.
    """

    def __init__(self, tg: TypedGrammar):
        self.tg = tg
        self.h = tg.h
        self.alphabet = tg.base.alphabet
        self._minlen = min_lengths(tg)
        self._anchor: dict = {}
        self._witness: dict = {}
        self._chi: dict = {}
        self._lang: frozenset = frozenset()
        self._lang_bound = -1
        self.membership_queries = 0

    # membership
    def member(self, w: str) -> bool:
        self.membership_queries += 1
        if len(w) > self._lang_bound:
            self._lang_bound = max(len(w), 2 * self._lang_bound)
            self._lang = language_up_to(self.tg.base, self._lang_bound)
        return w in self._lang

    def anchor(self, X) -> tuple:
        if X not in self._anchor:
            n = self._minlen[X]
            shortest = [t for t in enumerate_tuples(self.tg.grammar, X, n)
                        if sum(map(len, t)) == n]
            self._anchor[X] = min(shortest, key=lambda t: tuple_order_key(t, self.alphabet))
        return self._anchor[X]

    def _outside_tree(self):
        """Lightest outside derivation for every typed nonterminal (Dijkstra).

        Weight is the terminal length of the outside context: a child's
        weight adds the template letters and the sibling's least length.
        Ties break by canonical rule order, so choices are reproducible.
        """
        if hasattr(self, "_parent"):
            return self._parent
        by_lhs = defaultdict(list)
        for r in sorted(self.tg.rules, key=_rule_key):
            if isinstance(r, BinaryRule):
                by_lhs[r.lhs].append(r)
        parent: dict = {}
        weight: dict = {}
        heap = []
        for r in sorted(self.tg.rules, key=_rule_key):
            if isinstance(r, StartRule):
                heapq.heappush(heap, (0, typed_key(r.child), (), r.child, None))
        while heap:
            w, _, tie, X, via = heapq.heappop(heap)
            if X in weight:
                continue
            weight[X] = w
            parent[X] = via
            for r in by_lhs.get(X, ()):
                t = terminal_count(r.template)
                wl = w + t + self._minlen[r.right]
                wr = w + t + self._minlen[r.left]
                key = _rule_key(r)
                heapq.heappush(heap, (wl, typed_key(r.left), (key, 0), r.left, (r, 0)))
                heapq.heappush(heap, (wr, typed_key(r.right), (key, 1), r.right, (r, 1)))
        self._parent = parent
        self._outside_weight = weight
        return parent

    def witness_context(self, X) -> SentenceContext:
        """Outside context of ``X`` in a least successful derivation containing it."""
        if X in self._witness:
            return self._witness[X]
        parent = self._outside_tree()
        chain = []
        Y = X
        while parent[Y] is not None:
            chain.append(Y)
            Y = parent[Y][0].lhs
        E = hole_context(1)
        self._witness[Y] = E
        for Y in reversed(chain):
            r, side = parent[Y]
            E = self._witness[r.lhs]
            if side == 0:
                E = induced_context_B(r.template, E, self.anchor(r.right))
            else:
                E = induced_context_C(r.template, E, self.anchor(r.left))
            self._witness[Y] = E
        return self._witness[X]

    def exposing_context(self, X) -> SentenceContext:
        """Least context (by context order) of the copy's interface accepting its anchor.

        Contexts are scanned by increasing terminal length up to the witness
        context.  Only contexts already carrying the target interface are
        generated, which yields the same minimum as filtering all contexts.
        """
        if X in self._chi:
            return self._chi[X]
        tau = X.interface
        omega = self.anchor(X)
        witness = self.witness_context(X)
        limit = context_order_key(witness, self.alphabet)
        found = None
        for T in range(limit[0] + 1):
            for E in self._contexts_with_interface(tau, T):
                key = context_order_key(E, self.alphabet)
                if key > limit:
                    break
                if self.member(fill(E, omega)):
                    found = E
                    break
            if found is not None:
                break
        if found is None:  # cannot happen: the witness qualifies
            raise AssertionError(f"no exposing context found for {X}")
        self._chi[X] = found
        return found

    def _words_by_value(self, n: int) -> dict:
        cache = self.__dict__.setdefault("_wbv", {})
        if n not in cache:
            groups = defaultdict(list)
            for letters in product(self.alphabet, repeat=n):
                w = "".join(letters)
                groups[h_word(self.h, w)].append(w)
            cache[n] = groups
        return cache[n]

    def _contexts_with_interface(self, tau, T: int) -> list[SentenceContext]:
        d = tau.arity
        out = []
        for lens in _compositions(T, d + 1):
            pools = [self._words_by_value(n).get(m, ()) for n, m in zip(lens, tau.boundaries)]
            for bounds in product(*pools):
                out.append(SentenceContext.from_parts(tau.permutation, bounds))
        out.sort(key=lambda E: context_order_key(E, self.alphabet))
        return out

    def exposure(self, X) -> "Exposure":
        return Exposure(X, self.anchor(X), self.witness_context(X), self.exposing_context(X))


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class Exposure:
    symbol: object
    anchor: tuple
    witness: SentenceContext
    chi: SentenceContext


@dataclass
class CharacteristicSample:
    words: list  # shortlex order
    provenance: dict = field(default_factory=dict)  # word -> list of labels
    exposures: dict = field(default_factory=dict)  # typed symbol -> Exposure
    n_symbols: int = 0
    n_rules: int = 0


def observations(tg: TypedGrammar, sampler: Sampler | None = None) -> CharacteristicSample:
    """Symbol observations for every typed copy and rule observations for every non-start rule."""
    s = sampler or Sampler(tg)
    prov: dict = defaultdict(list)
    exposures = {}
    names = _labels(tg)
    for X in tg.nonterminals:
        ex = s.exposure(X)
        exposures[X] = ex
        prov[fill(ex.chi, ex.anchor)].append(f"symbol {names[X]}")
    n_rules = 0
    for i, r in enumerate(sorted(tg.rules, key=_rule_key)):
        if isinstance(r, StartRule):
            continue
        n_rules += 1
        chi = exposures[r.lhs].chi
        if isinstance(r, TerminalRule):
            z = (r.letter,)
        else:
            z = substitute(r.template, s.anchor(r.left), s.anchor(r.right))
        prov[fill(chi, z)].append(f"rule {names[r.lhs]} #{i}")
    words = shortlex(prov, tg.base.alphabet)
    return CharacteristicSample(words, {w: prov[w] for w in words}, exposures,
                                len(tg.nonterminals), n_rules)


def _labels(tg: TypedGrammar) -> dict:
    from .refinement import typed_names
    return typed_names(tg)


def characteristic_sample(tg: TypedGrammar) -> CharacteristicSample:
    return observations(tg)


@dataclass(frozen=True)
class ExposureMetrics:
    max_length: int  # longest observation word
    n_symbols: int
    n_rules: int
    size: int  # number of distinct words
    positive_size: int  # sum of max(1, |w|)

    @property
    def count_bound_holds(self) -> bool:
        return self.size <= self.n_symbols + self.n_rules

    @property
    def size_bound_holds(self) -> bool:
        return self.positive_size <= (self.n_symbols + self.n_rules) * self.max_length

    def lines(self) -> list[str]:
        return [
            f"B(G,h) = {self.max_length}",
            f"N_NT = {self.n_symbols}",
            f"N_Rule = {self.n_rules}",
            f"|CS| = {self.size}",
            f"||CS||+ = {self.positive_size}",
            f"|CS| <= N_NT + N_Rule: {'yes' if self.count_bound_holds else 'no'}",
            f"||CS||+ <= (N_NT + N_Rule) * B: {'yes' if self.size_bound_holds else 'no'}",
        ]


def positive_size(words) -> int:
    return sum(max(1, len(w)) for w in words)


def exposure_metrics(tg: TypedGrammar, cs: CharacteristicSample) -> ExposureMetrics:
    return ExposureMetrics(
        max_length=max((len(w) for w in cs.words), default=0),
        n_symbols=cs.n_symbols,
        n_rules=cs.n_rules,
        size=len(cs.words),
        positive_size=positive_size(cs.words),
    )
