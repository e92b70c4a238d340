"""Finite monoids, letter homomorphisms and transition monoids of DFAs.

Elements are interned to indices ``0..n-1``; every other module stores
indices only and goes through :class:`FiniteMonoid` for names.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, StructuralError

HType = tuple  # tuple[int, ...]: componentwise monoid values of a tuple


@dataclass(frozen=True)
class FiniteMonoid:
    names: tuple[str, ...]
    identity: int
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.names)
        if n == 0:
            raise StructuralError("monoid has no elements")
        if len(set(self.names)) != n:
            raise StructuralError("duplicate element names")
        if not 0 <= self.identity < n:
            raise StructuralError("identity is not an element")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise StructuralError(f"product table must be {n}x{n}")
        for row in self.table:
            for z in row:
                if not (isinstance(z, int) and 0 <= z < n):
                    raise StructuralError(f"product {z!r} is not an element")
        t = self.table
        for m in range(n):
            if t[self.identity][m] != m or t[m][self.identity] != m:
                raise StructuralError(
                    f"{self.names[self.identity]} is not a two-sided identity "
                    f"(fails at {self.names[m]})")
        for a, b, c in product(range(n), repeat=3):
            if t[t[a][b]][c] != t[a][t[b][c]]:
                names = self.names
                raise StructuralError(
                    f"not associative at ({names[a]}, {names[b]}, {names[c]})")

    def __len__(self):
        return len(self.names)

    def element(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise StructuralError(f"unknown monoid element {name!r}") from None

    def mul(self, a: int, b: int) -> int:
        n = len(self.names)
        if not (0 <= a < n and 0 <= b < n):
            raise StructuralError(f"unknown element index in product ({a}, {b})")
        return self.table[a][b]

    def product(self, elements: Iterable[int]) -> int:
        acc = self.identity
        t = self.table
        for m in elements:
            acc = t[acc][m]
        return acc

    def name(self, m: int) -> str:
        return self.names[m]

    @classmethod
    def from_names(cls, names: Sequence[str], identity: str,
                   products: Mapping[tuple[str, str], str]) -> "FiniteMonoid":
        index = {x: i for i, x in enumerate(names)}
        rows = []
        for x in names:
            row = []
            for y in names:
                if (x, y) not in products:
                    raise StructuralError(f"missing product {x} * {y}")
                z = products[(x, y)]
                if z not in index:
                    raise StructuralError(f"product {x} * {y} = {z} is not an element")
                row.append(index[z])
            rows.append(tuple(row))
        if identity not in index:
            raise StructuralError(f"identity {identity!r} is not an element")
        return cls(tuple(names), index[identity], tuple(rows))


@dataclass(frozen=True, eq=False)
class Homomorphism:
    """Explicit h: Sigma* -> M given by one monoid value per letter.

    The alphabet order is the declaration order and is used as the terminal
    order wherever contexts or tuples are compared.
    """

    monoid: FiniteMonoid
    alphabet: tuple[str, ...]
    letter_values: Mapping[str, int] = field(repr=False)

    def __post_init__(self):
        if set(self.letter_values) != set(self.alphabet):
            raise StructuralError("letter values must cover exactly the alphabet")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise StructuralError("duplicate letters in alphabet")
        for a, m in self.letter_values.items():
            if len(a) != 1:
                raise StructuralError(f"letters are single characters, got {a!r}")
            if not 0 <= m < len(self.monoid):
                raise StructuralError(f"h({a}) is not an element")

    @property
    def identity(self) -> int:
        return self.monoid.identity

    def __call__(self, w: str) -> int:
        return h_word(self, w)

    def letter(self, a: str) -> int:
        try:
            return self.letter_values[a]
        except KeyError:
            raise StructuralError(f"letter {a!r} outside the alphabet") from None

    def with_letter(self, a: str, m: int) -> "Homomorphism":
        values = dict(self.letter_values)
        values[a] = m
        return Homomorphism(self.monoid, self.alphabet, values)


def mul(m: FiniteMonoid, a: int, b: int) -> int:
    return m.mul(a, b)


def h_word(h: Homomorphism, w: str) -> int:
    t = h.monoid.table
    acc = h.monoid.identity
    values = h.letter_values
    for a in w:
        try:
            acc = t[acc][values[a]]
        except KeyError:
            raise StructuralError(f"letter {a!r} outside the alphabet") from None
    return acc


def h_type(h: Homomorphism, words: Sequence[str], fanout: int | None = None) -> HType:
    """Componentwise h-values of a tuple of words."""
    d = len(words)
    if d == 0 or (fanout is not None and d > fanout):
        raise DomainError(f"tuple arity {d} outside 1..{fanout}")
    return tuple(h_word(h, w) for w in words)


# -- transition monoids --------------------------------------------------


@dataclass(frozen=True)
class DFA:
    states: tuple[str, ...]
    start: str
    alphabet: tuple[str, ...]
    delta: Mapping[tuple[str, str], str] = field(hash=False, compare=False)
    accepting: tuple[str, ...] = ()

    def __post_init__(self):
        if self.start not in self.states:
            raise StructuralError(f"start state {self.start!r} undeclared")
        for q in self.states:
            for a in self.alphabet:
                if (q, a) not in self.delta:
                    raise StructuralError(f"no transition from {q!r} on {a!r}")
                if self.delta[(q, a)] not in self.states:
                    raise StructuralError(f"transition target {self.delta[(q, a)]!r} undeclared")

    def letter_map(self, a: str) -> tuple[int, ...]:
        idx = {q: i for i, q in enumerate(self.states)}
        return tuple(idx[self.delta[(q, a)]] for q in self.states)


def transition_monoid(dfa: DFA) -> tuple[FiniteMonoid, Homomorphism]:
    """Saturate the letter maps under composition (breadth first).

    Elements are state maps, i.e. vectors indexed by the declared state
    order.  Each element is named by the shortlex-least word inducing it
    (``1`` for the identity), which makes identifiers stable across runs.
    """
    n = len(dfa.states)
    ident = tuple(range(n))
    letter_maps = {a: dfa.letter_map(a) for a in dfa.alphabet}

    def then(f, g):  # apply f, then g
        return tuple(g[f[q]] for q in range(n))

    names = {ident: "1"}
    order = [ident]
    queue = deque([ident])
    while queue:
        f = queue.popleft()
        for a in dfa.alphabet:
            g = then(f, letter_maps[a])
            if g not in names:
                names[g] = ("" if f == ident else names[f]) + a
                order.append(g)
                queue.append(g)
    index = {f: i for i, f in enumerate(order)}
    table = tuple(tuple(index[then(f, g)] for g in order) for f in order)
    monoid = FiniteMonoid(tuple(names[f] for f in order), 0, table)
    h = Homomorphism(monoid, dfa.alphabet, {a: index[letter_maps[a]] for a in dfa.alphabet})
    return monoid, h


def state_map(h: Homomorphism, dfa: DFA, m: int) -> tuple[str, ...]:
    """Recover the state transformation named by element ``m`` (transition monoids only)."""
    word = h.monoid.names[m]
    state = list(dfa.states)
    if word != "1":
        for a in word:
            state = [dfa.delta[(q, a)] for q in state]
    return tuple(state)


# -- text formats --------------------------------------------------------

_PRODUCT = re.compile(r"^(\S+)\s*\*\s*(\S+)\s*=\s*(\S+)$")
_HLINE = re.compile(r"^h\s*:\s*(\S+)\s*->\s*(\S+)$")
_ARROW = re.compile(r"^(\S+)\s*--(\S+)-->\s*(\S+)$")


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _keyword(line: str, key: str):
    if line.startswith(key) and line[len(key):].lstrip().startswith(":"):
        return line.split(":", 1)[1].split()
    return None


def parse_monoid(text: str) -> tuple[FiniteMonoid, Homomorphism]:
    """Parse the monoid/homomorphism format.

    ::

        elements: e s
        identity: e
        e * e = e
        ...
        h: a -> s
    """
    names = identity = None
    products: dict[tuple[str, str], str] = {}
    letters: dict[str, str] = {}
    order: list[str] = []
    for lineno, line in _lines(text):
        if (vals := _keyword(line, "elements")) is not None:
            names = vals
        elif (vals := _keyword(line, "identity")) is not None:
            if len(vals) != 1:
                raise StructuralError(f"line {lineno}: identity takes one element")
            identity = vals[0]
        elif m := _HLINE.match(line):
            a, x = m.group(1).strip("'\""), m.group(2)
            if a in letters:
                raise StructuralError(f"line {lineno}: h({a}) given twice")
            letters[a] = x
            order.append(a)
        elif m := _PRODUCT.match(line):
            key = (m.group(1), m.group(2))
            if key in products:
                raise StructuralError(f"line {lineno}: product {key[0]} * {key[1]} given twice")
            products[key] = m.group(3)
        else:
            raise StructuralError(f"line {lineno}: cannot parse {line!r}")
    if names is None or identity is None:
        raise StructuralError("monoid file needs 'elements:' and 'identity:' lines")
    monoid = FiniteMonoid.from_names(names, identity, products)
    h = Homomorphism(monoid, tuple(order), {a: monoid.element(x) for a, x in letters.items()})
    return monoid, h


def format_monoid(h: Homomorphism) -> str:
    m = h.monoid
    out = [f"elements: {' '.join(m.names)}", f"identity: {m.names[m.identity]}"]
    for a in range(len(m)):
        for b in range(len(m)):
            out.append(f"{m.names[a]} * {m.names[b]} = {m.names[m.table[a][b]]}")
    for a in h.alphabet:
        out.append(f"h: {a} -> {m.names[h.letter_values[a]]}")
    return "\n".join(out) + "\n"


def parse_dfa(text: str) -> DFA:
    """Parse ``states:``, ``start:``, optional ``alphabet:``/``accept:`` and ``q --a--> r`` lines."""
    states = start = alphabet = None
    accepting: list[str] = []
    delta: dict[tuple[str, str], str] = {}
    seen_letters: list[str] = []
    for lineno, line in _lines(text):
        if (vals := _keyword(line, "states")) is not None:
            states = tuple(vals)
        elif (vals := _keyword(line, "start")) is not None:
            start = vals[0] if vals else None
        elif (vals := _keyword(line, "alphabet")) is not None:
            alphabet = tuple(vals)
        elif (vals := _keyword(line, "accept")) is not None:
            accepting = vals
        elif m := _ARROW.match(line):
            q, a, r = m.groups()
            if (q, a) in delta and delta[(q, a)] != r:
                raise StructuralError(f"line {lineno}: nondeterministic transition {q} --{a}-->")
            delta[(q, a)] = r
            if a not in seen_letters:
                seen_letters.append(a)
        else:
            raise StructuralError(f"line {lineno}: cannot parse {line!r}")
    if states is None or start is None:
        raise StructuralError("DFA file needs 'states:' and 'start:' lines")
    return DFA(states, start, alphabet or tuple(seen_letters), delta, tuple(accepting))
