"""Sentence contexts with named holes, interface types and tuple occurrences."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, permutations, product
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import DomainError, StructuralError
from .monoid import Homomorphism, h_word


@dataclass(frozen=True)
class SentenceContext:
    """A word over letters (``str``) and holes (``int`` names 1..d), each hole once."""

    items: tuple

    def __post_init__(self):
        holes = [it for it in self.items if isinstance(it, int)]
        if sorted(holes) != list(range(1, len(holes) + 1)):
            raise StructuralError(f"holes must be 1..d, each exactly once: {holes}")
        for it in self.items:
            if isinstance(it, str) and len(it) != 1:
                raise StructuralError(f"context letters are single characters, got {it!r}")

    @property
    def arity(self) -> int:
        return sum(1 for it in self.items if isinstance(it, int))

    @property
    def permutation(self) -> tuple[int, ...]:
        """Hole names in reading order."""
        return tuple(it for it in self.items if isinstance(it, int))

    @property
    def boundaries(self) -> tuple[str, ...]:
        parts, cur = [], []
        for it in self.items:
            if isinstance(it, int):
                parts.append("".join(cur))
                cur = []
            else:
                cur.append(it)
        parts.append("".join(cur))
        return tuple(parts)

    @property
    def terminal_length(self) -> int:
        return len(self.items) - self.arity

    @classmethod
    def from_parts(cls, permutation: Sequence[int], boundaries: Sequence[str]) -> "SentenceContext":
        if len(boundaries) != len(permutation) + 1:
            raise DomainError("need one more boundary than holes")
        items: list = list(boundaries[0])
        for name, u in zip(permutation, boundaries[1:]):
            items.append(name)
            items.extend(u)
        return cls(tuple(items))

    @classmethod
    def parse(cls, text: str) -> "SentenceContext":
        """Inverse of ``str``: letters verbatim, holes as ``[i]``."""
        items: list = []
        i = 0
        while i < len(text):
            if text[i] == "[":
                j = text.index("]", i)
                items.append(int(text[i + 1:j]))
                i = j + 1
            elif not text[i].isspace():
                items.append(text[i])
                i += 1
            else:
                i += 1
        return cls(tuple(items))

    def __str__(self):
        return "".join(f"[{it}]" if isinstance(it, int) else it for it in self.items)


def hole_context(d: int) -> SentenceContext:
    """□1 □2 ... □d with empty boundaries."""
    return SentenceContext(tuple(range(1, d + 1)))


def fill(E: SentenceContext, t: Sequence[str]) -> str:
    if len(t) != E.arity:
        raise DomainError(f"context of arity {E.arity} filled with a {len(t)}-tuple")
    return "".join(t[it - 1] if isinstance(it, int) else it for it in E.items)


class InterfaceType(NamedTuple):
    permutation: tuple  # hole name at each reading position
    boundaries: tuple  # d+1 monoid element indices

    @property
    def arity(self) -> int:
        return len(self.permutation)


def start_interface(h: Homomorphism) -> InterfaceType:
    return InterfaceType((1,), (h.identity, h.identity))


def interface_type(h: Homomorphism, E: SentenceContext) -> InterfaceType:
    return InterfaceType(E.permutation, tuple(h_word(h, u) for u in E.boundaries))


def cycle_notation(perm: Sequence[int]) -> str:
    """``(2, 1)`` -> ``(12)``; the identity prints as ``id<d>``."""
    seen, cycles = set(), []
    for i in range(1, len(perm) + 1):
        if i in seen:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = perm[j - 1]
        if len(cyc) > 1:
            cycles.append("(" + "".join(map(str, cyc)) + ")")
    return "".join(cycles) or f"id{len(perm)}"


def format_interface(tau: InterfaceType, h: Homomorphism) -> str:
    names = h.monoid.names
    return f"({cycle_notation(tau.permutation)}; {','.join(names[m] for m in tau.boundaries)})"


def format_htype(p: Sequence[int], h: Homomorphism) -> str:
    return "(" + ",".join(h.monoid.names[m] for m in p) + ")"


# -- orders --------------------------------------------------------------


def context_order_key(E: SentenceContext, alphabet: Sequence[str]) -> tuple:
    """(terminal length, encoded items) with letters in alphabet order, then holes □1 < □2 < ..."""
    rank = {a: i for i, a in enumerate(alphabet)}
    n = len(rank)
    code = tuple(n + it if isinstance(it, int) else rank[it] for it in E.items)
    return (E.terminal_length, code)


def tuple_order_key(t: Sequence[str], alphabet: Sequence[str]) -> tuple:
    """(total length, concatenation with a component separator below every letter)."""
    rank = {a: i for i, a in enumerate(alphabet)}
    code: list[int] = []
    for i, w in enumerate(t):
        if i:
            code.append(-1)
        code.extend(rank[a] for a in w)
    return (sum(len(w) for w in t), tuple(code))


@lru_cache(maxsize=None)
def _words(alphabet: tuple, n: int) -> tuple[str, ...]:
    return tuple("".join(p) for p in product(alphabet, repeat=n))


def contexts_of_length(alphabet: Sequence[str], d: int, T: int) -> list[SentenceContext]:
    """Every arity-``d`` context with ``T`` letters, sorted by :func:`context_order_key`.

    There are exactly ``d! * C(T+d, d) * |alphabet|**T`` of them.
    """
    out = []
    alphabet = tuple(alphabet)
    for slots in combinations(range(T + d), d):
        for names in permutations(range(1, d + 1)):
            for w in _words(alphabet, T):
                items, k, it = [], 0, iter(w)
                for pos in range(T + d):
                    if k < d and slots[k] == pos:
                        items.append(names[k])
                        k += 1
                    else:
                        items.append(next(it))
                out.append(SentenceContext(tuple(items)))
    out.sort(key=lambda E: context_order_key(E, alphabet))
    return out


def iter_contexts(alphabet: Sequence[str], d: int, max_T: int | None = None) -> Iterator[SentenceContext]:
    """All arity-``d`` contexts in increasing :func:`context_order_key` order."""
    T = 0
    while max_T is None or T <= max_T:
        yield from contexts_of_length(alphabet, d, T)
        T += 1


# -- occurrences ---------------------------------------------------------


@dataclass(frozen=True)
class TupleOccurrence:
    """An occurrence ``(E, x)`` with ``E[x] = word``.

    ``spans`` lists the component intervals in reading order (nondecreasing,
    so zero-length components at a shared cut are tie-ordered by position in
    this list); ``permutation`` names the component read at each slot.
    """

    word: str
    spans: tuple  # ((start, end), ...) in reading order
    permutation: tuple

    @property
    def arity(self) -> int:
        return len(self.spans)

    @property
    def tuple(self) -> tuple[str, ...]:
        out = [""] * len(self.spans)
        for (i, j), name in zip(self.spans, self.permutation):
            out[name - 1] = self.word[i:j]
        return tuple(out)

    @property
    def context(self) -> SentenceContext:
        w = self.word
        cuts = [0]
        for i, j in self.spans:
            cuts += [i, j]
        cuts.append(len(w))
        bounds = [w[cuts[2 * k]:cuts[2 * k + 1]] for k in range(len(self.spans) + 1)]
        return SentenceContext.from_parts(self.permutation, bounds)

    @property
    def tie_ranks(self) -> dict[int, tuple[int, int]]:
        """For each empty component: (cut position, rank among empties at that cut)."""
        ranks, seen = {}, {}
        for (i, j), name in zip(self.spans, self.permutation):
            if i == j:
                ranks[name] = (i, seen.get(i, 0))
                seen[i] = seen.get(i, 0) + 1
        return ranks


def occurrence_spans(n: int, d: int) -> Iterator[tuple]:
    """Nondecreasing 2d-position sequences over 0..n, grouped into d spans."""
    for pos in combinations_with_replacement(range(n + 1), 2 * d):
        yield tuple((pos[2 * k], pos[2 * k + 1]) for k in range(d))


def enumerate_occurrences(w: str, d: int, ordered: bool = True,
                          alphabet: Sequence[str] | None = None) -> list[TupleOccurrence]:
    """All arity-``d`` occurrences in ``w``, one per (context, tuple) pair.

    With ``ordered`` the result is sorted by the induced context order (the
    alphabet defaults to the letters of ``w`` in sorted order).
    """
    if d < 1:
        raise DomainError("occurrence arity must be positive")
    perms = list(permutations(range(1, d + 1)))
    occ = [TupleOccurrence(w, spans, p) for spans in occurrence_spans(len(w), d) for p in perms]
    if ordered:
        alpha = tuple(alphabet) if alphabet is not None else tuple(sorted(set(w)))
        occ.sort(key=lambda o: context_order_key(o.context, alpha))
    return occ


def occurrence_count(n: int, d: int) -> int:
    from math import comb, factorial
    return comb(n + 2 * d, 2 * d) * factorial(d)


def parse_interface(text: str, h: Homomorphism) -> InterfaceType:
    """Parse ``(id2; e,e,e)`` or ``((12); s,e,e)``."""
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    perm_txt, _, bounds_txt = body.partition(";")
    names = [b.strip() for b in bounds_txt.split(",") if b.strip()]
    d = len(names) - 1
    perm = list(range(1, d + 1))
    perm_txt = perm_txt.strip()
    if not perm_txt.startswith("id"):
        import re
        for cyc in re.findall(r"\((\d+)\)", perm_txt):
            ids = [int(c) for c in cyc]
            for a, b in zip(ids, ids[1:] + ids[:1]):
                perm[a - 1] = b
    return InterfaceType(tuple(perm), tuple(h.monoid.element(x) for x in names))


def iter_words(alphabet: Iterable[str], n: int) -> tuple[str, ...]:
    return _words(tuple(alphabet), n)
