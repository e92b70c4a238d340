"""Output maps, decorated traces and child-interface transport.

A decorated trace is a tuple whose items are monoid element indices
(``int``) and visible variables (:class:`~mcfglearn.grammar.Var`).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .context import InterfaceType, SentenceContext
from .errors import DomainError
from .grammar import BinaryRule, Template, Var, template_arities
from .monoid import Homomorphism, HType


def _template(rule) -> Template:
    return rule.template if isinstance(rule, BinaryRule) else rule


def _check(template, tau_arity=None, dB=None, dC=None, q=None, r=None):
    xB, xC = template_arities(template)
    if tau_arity is not None and tau_arity != len(template):
        raise DomainError(f"interface of arity {tau_arity} for a {len(template)}-component template")
    if q is not None and len(q) != (dB if dB is not None else xB):
        raise DomainError(f"left h-type has arity {len(q)}, template expects {xB}")
    if r is not None and len(r) != (dC if dC is not None else xC):
        raise DomainError(f"right h-type has arity {len(r)}, template expects {xC}")


def template_eval(rule, q: HType, r: HType, h: Homomorphism) -> HType:
    """The rule's output map on child h-types."""
    template = _template(rule)
    _check(template, q=q, r=r)
    return _template_eval(template, tuple(q), tuple(r), h)


@lru_cache(maxsize=None)
def _template_eval(template, q, r, h):
    t = h.monoid.table
    out = []
    for comp in template:
        acc = h.monoid.identity
        for it in comp:
            if isinstance(it, Var):
                m = q[it.index - 1] if it.side == "x" else r[it.index - 1]
            else:
                m = h.letter_values[it]
            acc = t[acc][m]
        out.append(acc)
    return tuple(out)


def _trace(template, tau: InterfaceType, sibling: Sequence[int], h: Homomorphism, visible: str):
    items: list = [tau.boundaries[0]]
    for name, m in zip(tau.permutation, tau.boundaries[1:]):
        for it in template[name - 1]:
            if isinstance(it, Var):
                items.append(it if it.side == visible else sibling[it.index - 1])
            else:
                items.append(h.letter_values[it])
        items.append(m)
    return tuple(items)


def trace_B(rule, tau: InterfaceType, r: HType, h: Homomorphism) -> tuple:
    template = _template(rule)
    _check(template, tau_arity=tau.arity, r=r)
    return _trace(template, tau, r, h, "x")


def trace_C(rule, tau: InterfaceType, q: HType, h: Homomorphism) -> tuple:
    template = _template(rule)
    _check(template, tau_arity=tau.arity, q=q)
    return _trace(template, tau, q, h, "y")


def normalize(trace: Sequence, h: Homomorphism) -> InterfaceType:
    """Contract each maximal run of elements to its product, in one left-to-right pass."""
    t = h.monoid.table
    order, bounds = [], []
    acc = h.monoid.identity
    for it in trace:
        if isinstance(it, Var):
            order.append(it.index)
            bounds.append(acc)
            acc = h.monoid.identity
        else:
            acc = t[acc][it]
    bounds.append(acc)
    return InterfaceType(tuple(order), tuple(bounds))


@lru_cache(maxsize=None)
def _transport(template, tau, sibling, h, visible):
    return normalize(_trace(template, tau, sibling, h, visible), h)


def transport_B(rule, tau: InterfaceType, r: HType, h: Homomorphism) -> InterfaceType:
    """Interface of the left child, given the parent's interface and the right sibling's h-type."""
    template = _template(rule)
    _check(template, tau_arity=tau.arity, r=r)
    return _transport(template, tau, tuple(r), h, "x")


def transport_C(rule, tau: InterfaceType, q: HType, h: Homomorphism) -> InterfaceType:
    template = _template(rule)
    _check(template, tau_arity=tau.arity, q=q)
    return _transport(template, tau, tuple(q), h, "y")


def _induced(template, E: SentenceContext, sibling: Sequence[str], visible: str) -> SentenceContext:
    if E.arity != len(template):
        raise DomainError(f"context of arity {E.arity} for a {len(template)}-component template")
    xB, xC = template_arities(template)
    want = xC if visible == "x" else xB
    if len(sibling) != want:
        raise DomainError(f"sibling tuple has arity {len(sibling)}, template expects {want}")
    bounds = E.boundaries
    items: list = list(bounds[0])
    for name, u in zip(E.permutation, bounds[1:]):
        for it in template[name - 1]:
            if isinstance(it, Var):
                if it.side == visible:
                    items.append(it.index)
                else:
                    items.extend(sibling[it.index - 1])
            else:
                items.append(it)
        items.extend(u)
    return SentenceContext(tuple(items))


def induced_context_B(rule, E: SentenceContext, v: Sequence[str]) -> SentenceContext:
    """Context seen by the left child when the right child yields ``v``."""
    return _induced(_template(rule), E, v, "x")


def induced_context_C(rule, E: SentenceContext, u: Sequence[str]) -> SentenceContext:
    return _induced(_template(rule), E, u, "y")


# -- rendering -----------------------------------------------------------


def render_trace(trace: Sequence, h: Homomorphism) -> str:
    names = h.monoid.names
    return " ".join(str(it) if isinstance(it, Var) else names[it] for it in trace)


def render_normal_form(nf: InterfaceType, h: Homomorphism, side: str) -> str:
    names = h.monoid.names
    parts = [names[nf.boundaries[0]]]
    for k, m in zip(nf.permutation, nf.boundaries[1:]):
        parts += [f"{side}{k}", names[m]]
    return " ".join(parts)
