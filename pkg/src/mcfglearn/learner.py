"""The canonical learner over observed typed tuples.

Two constructions share this module:

* :func:`build_verbatim` follows the rule definitions literally (every
  segmentation of every observed parent, terminal gaps included).  It is
  the reference and is only practical for short samples.
* :func:`build` produces a grammar with the same language much faster.
  It keeps rules whose template components are runs of variables (or
  empty), names tuple components in reading order, and merges
  unit-connected tuples into classes.  The decisions ledger records why
  each step preserves the language; the test-suite compares both
  constructions on small samples.
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, permutations, product
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .context import (InterfaceType, SentenceContext, enumerate_occurrences, format_interface,
                      interface_type, start_interface)
from .errors import DomainError, StructuralError
from .grammar import (BinaryRule, Grammar, StartRule, TerminalRule, UnitRule, Var,
                      format_grammar, substitute, terminal_count)
from .monoid import Homomorphism, h_type
from .transport import transport_B, transport_C


class ObservedTuple(NamedTuple):
    tuple: tuple
    interface: InterfaceType


class _LearnerStart:
    def __repr__(self):
        return "S^"

    __str__ = __repr__


LEARNER_START = _LearnerStart()


def check_sample(K: Iterable[str], h: Homomorphism) -> list[str]:
    words = sorted(set(K), key=lambda w: (len(w), w))
    for w in words:
        if not w:
            raise DomainError("the empty word cannot be a positive example")
        for a in w:
            if a not in h.letter_values:
                raise StructuralError(f"sample word {w!r} uses letter {a!r} outside the alphabet")
    return words


def positive_size(K: Iterable[str]) -> int:
    return sum(max(1, len(w)) for w in K)


def describe(t: ObservedTuple, h: Homomorphism) -> str:
    return f"[({','.join(t.tuple)}) : {format_interface(t.interface, h)}]"


# -- verbatim construction -----------------------------------------------


def observe(K: Iterable[str], h: Homomorphism, f: int) -> dict:
    """Observed typed tuples of ``K`` mapped to their witness contexts."""
    seen: dict = defaultdict(list)
    for w in check_sample(K, h):
        for d in range(1, f + 1):
            for occ in enumerate_occurrences(w, d, ordered=False):
                E = occ.context
                seen[ObservedTuple(occ.tuple, interface_type(h, E))].append(E)
    return dict(seen)


@dataclass(frozen=True)
class BinaryWitness:
    parent: ObservedTuple
    template: tuple
    left: ObservedTuple
    right: ObservedTuple
    spans: tuple  # per variable in template order: (component, start, end)


def _arrangements(variables: Sequence[Var], e: int):
    """Every way to distribute the variables over ``e`` ordered component lists."""
    V = len(variables)
    for perm in permutations(variables):
        for cuts in combinations_with_replacement(range(V + 1), e - 1):
            bounds = (0,) + cuts + (V,)
            yield tuple(perm[bounds[i]:bounds[i + 1]] for i in range(e))


def segmentations(z: Sequence[str], dB: int, dC: int):
    """All (template, x, y, spans) with ``template(x, y) == z``; variable intervals may be empty."""
    variables = [Var("x", i) for i in range(1, dB + 1)] + [Var("y", j) for j in range(1, dC + 1)]
    e = len(z)
    for arr in _arrangements(variables, e):
        choices = [combinations_with_replacement(range(len(z[i]) + 1), 2 * len(arr[i]))
                   for i in range(e)]
        for cut in product(*map(list, choices)):
            comps, value, spans = [], {}, {}
            for i in range(e):
                zi, vs, c = z[i], arr[i], cut[i]
                items: list = list(zi[:c[0]] if vs else zi)
                for k, v in enumerate(vs):
                    s, t = c[2 * k], c[2 * k + 1]
                    value[v] = zi[s:t]
                    spans[v] = (i, s, t)
                    items.append(v)
                    nxt = c[2 * k + 2] if k + 1 < len(vs) else len(zi)
                    items.extend(zi[t:nxt])
                comps.append(tuple(items))
            x = tuple(value[Var("x", i)] for i in range(1, dB + 1))
            y = tuple(value[Var("y", j)] for j in range(1, dC + 1))
            yield tuple(comps), x, y, tuple(spans[v] for v in variables)


def binary_witnesses(observed: dict, h: Homomorphism, f: int) -> list[BinaryWitness]:
    """Typed binary witnesses, one per distinct parent tuple and segmentation."""
    out = []
    for parent in observed:
        tau = parent.interface
        for dB in range(1, f + 1):
            for dC in range(1, f + 1):
                for template, x, y, spans in segmentations(parent.tuple, dB, dC):
                    tB = transport_B(template, tau, h_type(h, y), h)
                    tC = transport_C(template, tau, h_type(h, x), h)
                    left, right = ObservedTuple(x, tB), ObservedTuple(y, tC)
                    if left in observed and right in observed:
                        out.append(BinaryWitness(parent, template, left, right, spans))
    return out


def substitution_rules(observed: dict, h: Homomorphism) -> dict:
    """Directed unit rules between tuples sharing a concrete context and an h-type.

    Returns ``{(lhs, rhs): shared context}``; reflexive pairs are included.
    """
    groups: dict = defaultdict(list)
    for t, contexts in observed.items():
        p = h_type(h, t.tuple)
        for E in contexts:
            groups[(E, p)].append(t)
    rules: dict = {}
    for (E, _), members in sorted(groups.items(), key=lambda kv: str(kv[0][0])):
        for a in members:
            for b in members:
                rules.setdefault((a, b), E)
    return rules


@dataclass(eq=False)
class LearnerGrammar:
    """A learner hypothesis, kept as rule objects, as rule arrays, or both."""

    h: Homomorphism
    extended: bool
    legend: dict = field(default_factory=dict)  # nonterminal -> readable description
    metrics: dict = field(default_factory=dict)
    rules: Grammar | None = None
    arrays: "CompiledGrammar | None" = None

    @property
    def grammar(self) -> Grammar:
        if self.rules is None:
            self.rules = self.arrays.to_grammar()
        return self.rules

    @property
    def compiled(self) -> "CompiledGrammar":
        if self.arrays is None:
            self.arrays = compile_grammar(self.grammar)
        return self.arrays

    def language_up_to(self, n: int) -> frozenset:
        return bounded_language(self.compiled, n)

    def text(self) -> str:
        g = self.grammar
        names = {g.start: "S^"}
        for i, X in enumerate(n for n in g.fanout if n != g.start):
            names[X] = f"N{i}"
        return format_grammar(g, names, self.legend)

    def metric_lines(self) -> list[str]:
        return [f"{k} = {v}" for k, v in self.metrics.items()]


def _sort_key(t: ObservedTuple):
    return (sum(map(len, t.tuple)), t.tuple, t.interface.permutation, t.interface.boundaries)


def build_verbatim(K: Iterable[str], h: Homomorphism, f: int) -> LearnerGrammar:
    """The learner grammar with every rule kind taken literally from its definition."""
    t0 = time.perf_counter()
    words = check_sample(K, h)
    observed = observe(words, h, f)
    tau_st = start_interface(h)
    unary_hole = SentenceContext((1,))
    rules: list = []
    for w in words:
        X = ObservedTuple((w,), tau_st)
        if unary_hole in observed.get(X, ()):
            rules.append(StartRule(LEARNER_START, X))
    for t in observed:
        if len(t.tuple) == 1 and len(t.tuple[0]) == 1:
            rules.append(TerminalRule(t, t.tuple[0]))
    wit = binary_witnesses(observed, h, f)
    binary = {BinaryRule(b.parent, b.template, b.left, b.right) for b in wit}
    subst = substitution_rules(observed, h)
    rules.extend(sorted(binary, key=lambda r: (_sort_key(r.lhs), str(r.template),
                                               _sort_key(r.left), _sort_key(r.right))))
    rules.extend(UnitRule(a, b) for (a, b) in sorted(subst, key=lambda p: (_sort_key(p[0]), _sort_key(p[1]))))
    fanout = {LEARNER_START: 1}
    for t in sorted(observed, key=_sort_key):
        fanout[t] = len(t.tuple)
    g = Grammar(tuple(h.alphabet), fanout, LEARNER_START, tuple(rules))
    legend = {t: describe(t, h) for t in observed}
    metrics = {
        "sample_words": len(words),
        "sample_positive_size": positive_size(words),
        "observed_tuples": len(observed),
        "binary_witnesses": len(wit),
        "binary_rules": len(binary),
        "substitution_rules": len(subst),
        "rules_total": len(rules),
        "seconds": round(time.perf_counter() - t0, 3),
    }
    return LearnerGrammar(h, True, legend, metrics, rules=g)


# -- fast construction ---------------------------------------------------


class Shape(NamedTuple):
    """A variable-only template over reading-ordered pieces.

    ``runs[i]`` is the number of pieces in parent component ``i`` (0 means
    an empty component); ``left`` lists the pieces of the left child.
    """

    runs: tuple
    left: tuple
    right: tuple
    template: tuple


@lru_cache(maxsize=None)
def shapes(f: int) -> tuple:
    out = []
    for e in range(1, f + 1):
        for dB in range(1, f + 1):
            for dC in range(1, f + 1):
                V = dB + dC
                for cuts in combinations_with_replacement(range(V + 1), e - 1):
                    bounds = (0,) + cuts + (V,)
                    runs = tuple(bounds[i + 1] - bounds[i] for i in range(e))
                    for rest in combinations(range(1, V), dB - 1):
                        left = (0,) + rest
                        right = tuple(p for p in range(V) if p not in left)
                        name = {p: Var("x", k + 1) for k, p in enumerate(left)}
                        name.update({p: Var("y", k + 1) for k, p in enumerate(right)})
                        template = tuple(tuple(name[p] for p in range(bounds[i], bounds[i + 1]))
                                         for i in range(e))
                        out.append(Shape(runs, left, right, template))
    return tuple(out)


def _positions(n: int, k: int) -> np.ndarray:
    """All nondecreasing ``k``-sequences over 0..n as rows."""
    return _positions_cached(n, k)


@lru_cache(maxsize=32)
def _positions_cached(n: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), dtype=np.int16)
    flat = np.fromiter((v for c in combinations_with_replacement(range(n + 1), k) for v in c),
                       dtype=np.int16)
    arr = flat.reshape(-1, k)
    arr.setflags(write=False)
    return arr


class _Index:
    """Identity-named occurrences of all arities in every sample word."""

    def __init__(self, words: list[str], h: Homomorphism, f: int):
        self.h, self.f, self.words = h, f, words
        self.keys: list = []  # node id -> (parts, boundary values)
        self.node_id: dict = {}
        group_id: dict = {}
        self.groups: list = []  # node id -> list of group ids
        edge_node, edge_group = [], []
        self.arrays: list = []
        self.unit_groups: dict = defaultdict(list)
        for w in words:
            n = len(w)
            H = [[h.identity] * (n + 1) for _ in range(n + 1)]
            for i in range(n + 1):
                acc = h.identity
                for j in range(i, n):
                    acc = h.monoid.table[acc][h.letter_values[w[j]]]
                    H[i][j + 1] = acc
            per_d = {}
            for d in range(1, f + 1):
                pos = _positions(n, 2 * d)
                ids = np.empty(len(pos), dtype=np.int64)
                for r, p in enumerate(pos.tolist()):
                    parts = tuple(w[p[2 * k]:p[2 * k + 1]] for k in range(d))
                    cut = [0] + p + [n]
                    bstr = tuple(w[cut[2 * k]:cut[2 * k + 1]] for k in range(d + 1))
                    bval = tuple(H[cut[2 * k]][cut[2 * k + 1]] for k in range(d + 1))
                    key = (parts, bval)
                    nid = self.node_id.get(key)
                    if nid is None:
                        nid = self.node_id[key] = len(self.keys)
                        self.keys.append(key)
                    ids[r] = nid
                    gkey = (bstr, tuple(H[p[2 * k]][p[2 * k + 1]] for k in range(d)))
                    gid = group_id.get(gkey)
                    if gid is None:
                        gid = group_id[gkey] = len(group_id)
                    edge_node.append(nid)
                    edge_group.append(gid)
                arr = np.full((n + 1,) * (2 * d), -1, dtype=np.int64)
                arr[tuple(pos.T.astype(np.int64))] = ids
                per_d[d] = arr
            self.arrays.append(per_d)
        self.n_nodes = len(self.keys)
        self.n_groups = len(group_id)
        self.edge_node = np.asarray(edge_node, dtype=np.int64)
        self.edge_group = np.asarray(edge_group, dtype=np.int64)
        self.group_keys = group_id

    def classes(self) -> np.ndarray:
        """Connected components of the shared-context graph, numbered by first member."""
        N = self.n_nodes
        m = coo_matrix((np.ones(len(self.edge_node), dtype=np.int8),
                        (self.edge_node, N + self.edge_group)),
                       shape=(N + self.n_groups, N + self.n_groups))
        _, labels = connected_components(m, directed=False)
        labels = labels[:N]
        _, first = np.unique(labels, return_index=True)
        order = np.argsort(first)
        renum = np.empty(len(order), dtype=np.int64)
        renum[order] = np.arange(len(order))
        lab_index = np.unique(labels, return_inverse=True)[1]
        return renum[lab_index]

    def tuple_of(self, nid: int) -> ObservedTuple:
        parts, bval = self.keys[nid]
        return ObservedTuple(parts, InterfaceType(tuple(range(1, len(parts) + 1)), bval))


def _rule_rows(index: _Index, label: np.ndarray, f: int) -> dict:
    """Unique (parent, left, right) label triples per shape, over all words."""
    M = int(label.max()) + 1
    found: dict = defaultdict(list)
    for w, per_d in zip(index.words, index.arrays):
        n = len(w)
        for s_id, shape in enumerate(shapes(f)):
            P = sum(k + 1 for k in shape.runs)
            pos = _positions(n, P).astype(np.int64)
            cols, comp_spans, pieces = 0, [], []
            for k in shape.runs:
                comp_spans.append((cols, cols + k))
                pieces.extend((cols + i, cols + i + 1) for i in range(k))
                cols += k + 1
            parent = per_d[len(shape.runs)][tuple(pos[:, c] for span in comp_spans for c in span)]
            left = per_d[len(shape.left)][tuple(pos[:, c] for p in shape.left for c in pieces[p])]
            right = per_d[len(shape.right)][tuple(pos[:, c] for p in shape.right for c in pieces[p])]
            key = (label[parent] * M + label[left]) * M + label[right]
            found[s_id].append(np.unique(key))
    out = {}
    for s_id, chunks in found.items():
        key = np.unique(np.concatenate(chunks))
        out[s_id] = np.stack([key // (M * M), (key // M) % M, key % M], axis=1)
    return out


def _class_names(index: _Index, label: np.ndarray, h: Homomorphism) -> dict:
    """Readable description of each class: its least member."""
    best: dict = {}
    for nid in range(index.n_nodes):
        c = int(label[nid])
        t = index.tuple_of(nid)
        key = (sum(map(len, t.tuple)), t.tuple, t.interface.boundaries)
        if c not in best or key < best[c][0]:
            best[c] = (key, t)
    return {c: describe(t, h) for c, (_, t) in best.items()}


def build(K: Iterable[str], h: Homomorphism, f: int, eliminate: bool = True) -> LearnerGrammar:
    """Fast learner grammar.

    With ``eliminate`` (the default) nonterminals are unit classes and the
    grammar has no unit rules; the result is held as rule arrays and turned
    into rule objects only on request.  Otherwise nonterminals are observed
    tuples and substitution rules are kept, which gives the extended grammar
    over the reduced rule family.
    """
    t0 = time.perf_counter()
    words = check_sample(K, h)
    if not words:
        g = Grammar(tuple(h.alphabet), {LEARNER_START: 1}, LEARNER_START, ())
        return LearnerGrammar(h, not eliminate, {}, {"sample_words": 0, "rules_total": 0}, rules=g)
    index = _Index(words, h, f)
    cls = index.classes()
    label = cls if eliminate else np.arange(index.n_nodes)
    rows = _rule_rows(index, label, f)
    n_labels = int(label.max()) + 1
    fanout = np.zeros(n_labels, dtype=np.int64)
    for nid, (parts, _) in enumerate(index.keys):
        fanout[label[nid]] = len(parts)
    starts = sorted({int(label[per_d[1][0, len(w)]]) for w, per_d in zip(words, index.arrays)})
    terms = sorted({(int(label[nid]), parts[0]) for nid, (parts, _) in enumerate(index.keys)
                    if len(parts) == 1 and len(parts[0]) == 1})
    shape_list = shapes(f)
    groups = [(shape_list[s].template, rows[s][:, 0], rows[s][:, 1], rows[s][:, 2])
              for s in sorted(rows)]
    cg = CompiledGrammar(tuple(h.alphabet), list(range(n_labels)), fanout,
                         np.asarray(starts, dtype=np.int64), terms, groups)
    n_binary = sum(len(grp[1]) for grp in groups)
    n_units = 0
    rules = None
    if not eliminate:
        members = defaultdict(set)
        for nid, gid in zip(index.edge_node.tolist(), index.edge_group.tolist()):
            members[gid].add(nid)
        pairs = set()
        for gid in sorted(members):
            ms = sorted(members[gid])
            pairs.update((a, b) for a in ms for b in ms)
        base = cg.to_grammar()
        units = tuple(UnitRule(a, b) for a, b in sorted(pairs))
        rules = Grammar(base.alphabet, base.fanout, base.start, base.rules + units)
        n_units = len(pairs)
        cg = None
    if eliminate:
        legend = _class_names(index, label, h)
    else:
        legend = {nid: describe(index.tuple_of(nid), h) for nid in range(index.n_nodes)}
    metrics = {
        "sample_words": len(words),
        "sample_positive_size": positive_size(words),
        "observed_tuples": index.n_nodes,
        "shared_context_groups": index.n_groups,
        "unit_classes": int(cls.max()) + 1,
        "binary_rules": n_binary,
        "substitution_rules": n_units,
        "rules_total": len(starts) + len(terms) + n_binary + n_units,
        "seconds": round(time.perf_counter() - t0, 3),
    }
    return LearnerGrammar(h, not eliminate, legend, metrics, rules=rules, arrays=cg)


# -- rule arrays and bounded languages -----------------------------------


@dataclass(eq=False)
class CompiledGrammar:
    """A unit-free grammar as integer arrays, one block of binary rules per template."""

    alphabet: tuple
    symbols: list  # index -> original nonterminal
    fanout: np.ndarray
    starts: np.ndarray  # symbols reachable by a start rule
    terminals: list  # (symbol, letter)
    groups: list  # (template, parents, lefts, rights)
    start: object = LEARNER_START

    def to_grammar(self) -> Grammar:
        sym = self.symbols
        rules: list = [StartRule(self.start, sym[c]) for c in self.starts.tolist()]
        rules += [TerminalRule(sym[c], a) for c, a in self.terminals]
        for tpl, P, L, R in self.groups:
            rules += [BinaryRule(sym[p], tpl, sym[l], sym[r])
                      for p, l, r in zip(P.tolist(), L.tolist(), R.tolist())]
        fanout = {self.start: 1}
        fanout.update((sym[i], int(d)) for i, d in enumerate(self.fanout.tolist()))
        return Grammar(self.alphabet, fanout, self.start, tuple(rules))


def compile_grammar(g: Grammar) -> CompiledGrammar:
    if has_unit_rules(g):
        g = eliminate_units(g)
    symbols = list(g.fanout)
    idx = {A: i for i, A in enumerate(symbols)}
    starts, terms = [], []
    blocks: dict = defaultdict(lambda: ([], [], []))
    for r in g.rules:
        if isinstance(r, StartRule):
            starts.append(idx[r.child])
        elif isinstance(r, TerminalRule):
            terms.append((idx[r.lhs], r.letter))
        else:
            b = blocks[r.template]
            b[0].append(idx[r.lhs])
            b[1].append(idx[r.left])
            b[2].append(idx[r.right])
    if any(isinstance(r, (TerminalRule, BinaryRule)) and r.lhs == g.start for r in g.rules):
        starts.append(idx[g.start])
    groups = [(tpl, *(np.asarray(v, dtype=np.int64) for v in b)) for tpl, b in blocks.items()]
    return CompiledGrammar(g.alphabet, symbols, np.asarray([g.fanout[A] for A in symbols]),
                           np.asarray(sorted(set(starts)), dtype=np.int64), terms, groups, g.start)


_CHUNK = 4_000_000


def bounded_language(cg: CompiledGrammar, n: int) -> frozenset:
    """Words of length at most ``n`` derivable from a start rule.

    Facts (symbol, tuple) are built by total length.  For each template and
    length split the rule arrays are joined with the facts of both children;
    each distinct pair of child tuples is substituted once.
    """
    S = len(cg.symbols)
    tuples: list = []
    tid: dict = {}

    def intern(t):
        i = tid.get(t)
        if i is None:
            i = tid[t] = len(tuples)
            tuples.append(t)
        return i

    facts: dict = {}  # length -> (symbols sorted, tuple ids, counts per symbol, offsets)

    def store(L, syms, tids):
        if len(syms) == 0:
            return
        key = np.unique(syms * (len(tuples) + 1) + tids)
        syms, tids = key // (len(tuples) + 1), key % (len(tuples) + 1)
        count = np.bincount(syms, minlength=S)
        facts[L] = (syms, tids, count, np.cumsum(count) - count)

    if cg.terminals:
        store(1, np.asarray([c for c, _ in cg.terminals], dtype=np.int64),
              np.asarray([intern((a,)) for _, a in cg.terminals], dtype=np.int64))
    groups = [(tpl, terminal_count(tpl), P, Lc, Rc) for tpl, P, Lc, Rc in cg.groups]
    for L in range(2, n + 1):
        T0 = len(tuples)
        out_s, out_t = [], []
        for tpl, tc, P, Lc, Rc in groups:
            for a in range(1, L - tc):
                b = L - tc - a
                if a not in facts or b not in facts:
                    continue
                ls, lt, lcount, lstart = facts[a]
                rs, rt, rcount, rstart = facts[b]
                cl, cr = lcount[Lc], rcount[Rc]
                tot = cl * cr
                live = np.nonzero(tot)[0]
                if len(live) == 0:
                    continue
                for part in _split(live, tot[live]):
                    reps = tot[part]
                    ridx = np.repeat(part, reps)
                    off = np.arange(len(ridx)) - np.repeat(np.cumsum(reps) - reps, reps)
                    li, ri = off // cr[ridx], off % cr[ridx]
                    tl = lt[lstart[Lc[ridx]] + li]
                    tr = rt[rstart[Rc[ridx]] + ri]
                    pair, inv = np.unique(tl * T0 + tr, return_inverse=True)
                    made = np.fromiter(
                        (intern(substitute(tpl, tuples[p // T0], tuples[p % T0]))
                         for p in pair.tolist()), dtype=np.int64, count=len(pair))
                    out_s.append(P[ridx])
                    out_t.append(made[inv.ravel()])
        if out_s:
            store(L, np.concatenate(out_s), np.concatenate(out_t))
    starts = set(cg.starts.tolist())
    words = set()
    for syms, tids, _, _ in facts.values():
        for c, t in zip(syms.tolist(), tids.tolist()):
            if c in starts and len(tuples[t]) == 1:
                words.add(tuples[t][0])
    return frozenset(words)


def _split(idx: np.ndarray, weight: np.ndarray):
    """Cut ``idx`` into consecutive pieces whose total weight stays near the chunk size."""
    if weight.sum() <= _CHUNK:
        yield idx
        return
    cum = np.cumsum(weight)
    cuts = np.searchsorted(cum, np.arange(_CHUNK, cum[-1], _CHUNK))
    for part in np.split(idx, np.unique(cuts + 1)):
        if len(part):
            yield part


# -- unit elimination ----------------------------------------------------


def eliminate_units(g: Grammar) -> Grammar:
    """Remove unit rules without changing the language.

    Strongly connected groups of unit rules are first collapsed onto their
    earliest member (all members derive the same tuples).  Then every
    symbol receives the non-unit rules of everything it reaches by unit
    steps, and unit rules are dropped.
    """
    units = [r for r in g.rules if isinstance(r, UnitRule)]
    if not units:
        return g
    order = {A: i for i, A in enumerate(g.fanout)}
    succ: dict = defaultdict(set)
    for r in units:
        succ[r.lhs].add(r.child)
    rep = _collapse_sccs(list(g.fanout), succ, order)

    def R(A):
        return rep.get(A, A)

    dag: dict = defaultdict(set)
    for r in units:
        a, b = R(r.lhs), R(r.child)
        if a != b:
            dag[a].add(b)
    reach: dict = {}

    def closure(A):
        if A not in reach:
            out = {A}
            for B in dag.get(A, ()):
                out |= closure(B)
            reach[A] = out
        return reach[A]

    own: dict = defaultdict(list)
    seen = set()
    for r in g.rules:
        if isinstance(r, UnitRule):
            continue
        if isinstance(r, StartRule):
            nr = StartRule(r.lhs, R(r.child))
        elif isinstance(r, TerminalRule):
            nr = TerminalRule(R(r.lhs), r.letter)
        else:
            nr = BinaryRule(R(r.lhs), r.template, R(r.left), R(r.right))
        if nr not in seen:
            seen.add(nr)
            own[nr.lhs].append(nr)
    symbols = [A for A in g.fanout if R(A) == A]
    rules, emitted = [], set()
    for A in symbols:
        for B in sorted(closure(A), key=order.get):
            for r in own.get(B, ()):
                nr = r if B == A else _relabel(r, A)
                if nr not in emitted:
                    emitted.add(nr)
                    rules.append(nr)
    fanout = {A: d for A, d in g.fanout.items() if R(A) == A}
    return Grammar(g.alphabet, fanout, g.start, tuple(rules))


def _relabel(r, A):
    if isinstance(r, StartRule):
        return StartRule(A, r.child)
    if isinstance(r, TerminalRule):
        return TerminalRule(A, r.letter)
    return BinaryRule(A, r.template, r.left, r.right)


def _collapse_sccs(nodes, succ, order) -> dict:
    """Map each symbol on a unit cycle to the earliest symbol of its component (Tarjan)."""
    index, low, on, stack, rep = {}, {}, set(), [], {}
    counter = [0]

    def visit(v):
        work = [(v, iter(sorted(succ.get(v, ()), key=order.get)))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on.add(v)
        while work:
            u, it = work[-1]
            advanced = False
            for x in it:
                if x not in index:
                    index[x] = low[x] = counter[0]
                    counter[0] += 1
                    stack.append(x)
                    on.add(x)
                    work.append((x, iter(sorted(succ.get(x, ()), key=order.get))))
                    advanced = True
                    break
                if x in on:
                    low[u] = min(low[u], index[x])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[u])
            if low[u] == index[u]:
                comp = []
                while True:
                    x = stack.pop()
                    on.discard(x)
                    comp.append(x)
                    if x == u:
                        break
                head = min(comp, key=order.get)
                for x in comp:
                    rep[x] = head

    for v in nodes:
        if v not in index:
            visit(v)
    return rep


def has_unit_rules(g: Grammar) -> bool:
    return any(isinstance(r, UnitRule) for r in g.rules)
