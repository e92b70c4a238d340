"""Command-line pipeline: validate, refine, sample, learn, compare, simulate-text, worked-example.

Exit codes: 0 success or equal, 1 violation, mismatch or inequality,
2 usage error, 3 unreadable or unwritable file.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib.resources import files
from pathlib import Path

from .context import InterfaceType, format_htype, format_interface, hole_context, interface_type
from .errors import DomainError, StructuralError
from .grammar import (BinaryRule, Grammar, format_grammar, language_up_to, parse_grammar,
                      parse_template, shortlex, validate)
from .learner import bounded_language, build, compile_grammar, eliminate_units, positive_size
from .monoid import Homomorphism, h_type, parse_dfa, parse_monoid, transition_monoid
from .refinement import build_trimmed_refinement, refinement_report, typed_names
from .sampler import characteristic_sample, exposure_metrics
from .transport import (induced_context_B, normalize, render_normal_form, render_trace,
                        template_eval, trace_B, trace_C, transport_B, transport_C)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class InputError(Exception):
    """A file could not be read or written."""


@dataclass
class RunConfig:
    fanout: int = 2
    monoid: str | None = None
    dfa: str | None = None
    grammar: str | None = None
    sample: str | None = None
    hypothesis: str | None = None
    bound: int = 12
    out: str | None = None
    extra: int = 5
    eliminate_units: bool = False
    structured: bool = False

    def __post_init__(self):
        if self.fanout < 1:
            raise DomainError("fan-out bound must be at least 1")
        if self.bound < 0:
            raise DomainError("length bound must be nonnegative")


# -- loading -------------------------------------------------------------


def read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def load_homomorphism(cfg: RunConfig) -> Homomorphism:
    if cfg.monoid:
        return parse_monoid(read_text(cfg.monoid))[1]
    if cfg.dfa:
        return transition_monoid(parse_dfa(read_text(cfg.dfa)))[1]
    raise DomainError("a homomorphism is required: pass --monoid FILE or --dfa FILE")


def load_grammar(path: str, h: Homomorphism | None = None, fanout: int | None = None) -> Grammar:
    g = parse_grammar(read_text(path), tuple(h.alphabet) if h is not None else None)
    if fanout is not None and max(g.fanout.values(), default=1) > fanout:
        raise DomainError(f"grammar fan-out {max(g.fanout.values())} exceeds the bound {fanout}")
    return g


def read_sample(path: str) -> list[str]:
    words = []
    for line in read_text(path).splitlines():
        w = line.split("#", 1)[0].strip()
        if w:
            words.append(w)
    return words


def write_out(cfg: RunConfig, name: str, text: str) -> None:
    if not cfg.out:
        return
    try:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / name).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {Path(cfg.out) / name}: {exc.strerror or exc}") from exc


def emit(cfg: RunConfig, lines: list[str], data: dict) -> None:
    if cfg.structured:
        print(json.dumps(data, indent=2, sort_keys=True, default=str))
    else:
        print("\n".join(lines))


# -- subcommands ---------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> int:
    g = load_grammar(cfg.grammar)
    rep = validate(g, cfg.fanout)
    emit(cfg, rep.lines(), {"violations": rep.violations, "warnings": rep.warnings,
                            "valid": rep.ok, "reduced": rep.reduced})
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_refine(cfg: RunConfig) -> int:
    h = load_homomorphism(cfg)
    g = load_grammar(cfg.grammar, h, cfg.fanout)
    tg = build_trimmed_refinement(g, h, cfg.fanout)
    report = refinement_report(tg)
    write_out(cfg, "refinement.txt", report)
    write_out(cfg, "refined.grammar", format_grammar(tg.grammar, typed_names(tg)))
    emit(cfg, report.rstrip("\n").split("\n"),
         {"typed_nonterminals": len(tg.nonterminals), "typed_rules": len(tg.rules),
          "report": report})
    return EXIT_OK


def sample_grammar(g: Grammar, h: Homomorphism, f: int):
    tg = build_trimmed_refinement(g, h, f)
    cs = characteristic_sample(tg)
    return tg, cs, exposure_metrics(tg, cs)


def cmd_sample(cfg: RunConfig) -> int:
    h = load_homomorphism(cfg)
    g = load_grammar(cfg.grammar, h, cfg.fanout)
    tg, cs, met = sample_grammar(g, h, cfg.fanout)
    names = typed_names(tg)
    prov = [f"{w}\t{'; '.join(cs.provenance[w])}" for w in cs.words]
    expo = [f"{names[X]}\tanchor=({','.join(ex.anchor)})\twitness={ex.witness}\tchi={ex.chi}"
            for X, ex in cs.exposures.items()]
    write_out(cfg, "sample.txt", "".join(w + "\n" for w in cs.words))
    write_out(cfg, "provenance.txt", "\n".join(prov + [""] + expo) + "\n")
    write_out(cfg, "metrics.txt", "\n".join(met.lines()) + "\n")
    emit(cfg, cs.words + ["# provenance"] + prov + ["# exposures"] + expo + ["# metrics"] + met.lines(),
         {"words": cs.words, "provenance": cs.provenance,
          "exposures": {names[X]: {"anchor": ex.anchor, "witness": str(ex.witness), "chi": str(ex.chi)}
                        for X, ex in cs.exposures.items()},
          "metrics": asdict(met),
          "count_bound_holds": met.count_bound_holds, "size_bound_holds": met.size_bound_holds})
    return EXIT_OK


def cmd_learn(cfg: RunConfig) -> int:
    """Learn from the sample alone; this subcommand has no grammar input."""
    h = load_homomorphism(cfg)
    K = read_sample(cfg.sample)
    t0 = time.perf_counter()
    hyp = build(K, h, cfg.fanout, eliminate=False)
    metrics = dict(hyp.metrics)
    metrics["sample_positive_size"] = positive_size(K)
    write_out(cfg, "hypothesis.grammar", hyp.text())
    lines = [f"# {k} = {v}" for k, v in metrics.items() if k != "seconds"]
    if cfg.eliminate_units:
        free = eliminate_units(hyp.grammar)
        metrics["unit_free_rules"] = len(free.rules)
        names = {free.start: "S^"}
        names.update((X, f"N{X}") for X in free.fanout if X != free.start)
        legend = {X: hyp.legend[X] for X in free.fanout if X in hyp.legend}
        write_out(cfg, "hypothesis.unitfree.grammar", format_grammar(free, names, legend))
        lines.append(f"# unit_free_rules = {len(free.rules)}")
    metrics["seconds"] = round(time.perf_counter() - t0, 3)
    write_out(cfg, "metrics.txt", "".join(f"{k} = {v}\n" for k, v in metrics.items()))
    print(f"learned in {metrics['seconds']} s", file=sys.stderr)
    if not cfg.out and not cfg.structured:
        print(hyp.text(), end="")
    emit(cfg, lines, {"metrics": {k: v for k, v in metrics.items() if k != "seconds"}})
    return EXIT_OK


@dataclass
class Comparison:
    equal: bool
    counterexample: str | None
    bound: int
    only_target: list = field(default_factory=list)
    only_hypothesis: list = field(default_factory=list)


def compare_languages(target: Grammar, hypothesis_words: frozenset, n: int) -> Comparison:
    tl = language_up_to(target, n)
    alphabet = target.alphabet
    a = shortlex(tl - hypothesis_words, alphabet)
    b = shortlex(hypothesis_words - tl, alphabet)
    diff = shortlex(a + b, alphabet)
    return Comparison(not diff, diff[0] if diff else None, n, a, b)


def cmd_compare(cfg: RunConfig) -> int:
    h = load_homomorphism(cfg) if (cfg.monoid or cfg.dfa) else None
    target = load_grammar(cfg.grammar, h)
    if cfg.hypothesis:
        hyp = parse_grammar(read_text(cfg.hypothesis))
        words = bounded_language(compile_grammar(hyp), cfg.bound)
    elif cfg.sample:
        if h is None:
            raise DomainError("learning from --sample needs --monoid or --dfa")
        words = build(read_sample(cfg.sample), h, cfg.fanout).language_up_to(cfg.bound)
    else:
        raise DomainError("compare needs --hypothesis FILE or --sample FILE")
    c = compare_languages(target, words, cfg.bound)
    lines = [f"bound = {c.bound}", "equal" if c.equal else "unequal"]
    if not c.equal:
        lines.append(f"counterexample = {c.counterexample}")
    emit(cfg, lines, asdict(c))
    return EXIT_OK if c.equal else EXIT_FAIL


@dataclass
class TextRun:
    text: list  # the presented prefix of the length-lex text
    cover: int  # shortest prefix containing the characteristic sample
    checks: list  # (prefix length, equal, counterexample)
    converged_at: int | None  # first prefix length after which every check is equal

    @property
    def stable(self) -> bool:
        return self.converged_at is not None and self.converged_at <= self.cover


def length_lex_text(g: Grammar, count: int, limit: int = 64) -> list[str]:
    n = 1
    while True:
        words = shortlex(language_up_to(g, n), g.alphabet)
        if len(words) >= count or n >= limit:
            return words[:count]
        n = min(2 * n, limit)


def simulate_text(g: Grammar, h: Homomorphism, f: int, n: int = 12, extra: int = 5) -> TextRun:
    """Relearn from every prefix of the length-lex text and compare bounded languages."""
    _, cs, _ = sample_grammar(g, h, f)
    need = len(cs.words)
    while True:
        text = length_lex_text(g, need)
        missing = [w for w in cs.words if w not in text]
        if not missing or len(text) < need:
            break
        need += len(missing)
    cover = max(text.index(w) for w in cs.words) + 1
    text = length_lex_text(g, cover + extra)
    checks = []
    for i in range(1, len(text) + 1):
        words = build(text[:i], h, f).language_up_to(n)
        c = compare_languages(g, words, n)
        checks.append((i, c.equal, c.counterexample))
    converged = None
    for i, eq, _ in reversed(checks):
        if not eq:
            break
        converged = i
    return TextRun(text, cover, checks, converged)


def cmd_simulate_text(cfg: RunConfig) -> int:
    h = load_homomorphism(cfg)
    g = load_grammar(cfg.grammar, h, cfg.fanout)
    run = simulate_text(g, h, cfg.fanout, cfg.bound, cfg.extra)
    lines = [f"{i}\t{run.text[i - 1]}\t{'equal' if eq else 'unequal ' + str(cx)}"
             for i, eq, cx in run.checks]
    lines += [f"characteristic sample covered at prefix {run.cover}",
              f"converged at prefix {run.converged_at}",
              f"stable after cover: {'yes' if run.stable else 'no'}"]
    write_out(cfg, "text_run.txt", "\n".join(lines) + "\n")
    emit(cfg, lines, {"text": run.text, "cover": run.cover, "checks": run.checks,
                      "converged_at": run.converged_at, "stable": run.stable})
    return EXIT_OK if run.stable else EXIT_FAIL


# -- worked example ------------------------------------------------------


def _fixture(name: str) -> str:
    return (files("mcfglearn") / "data" / name).read_text()


def worked_example(flip: str | None = None) -> tuple[bool, list[str]]:
    """Recompute the two-element-monoid transport example and the placement example.

    ``flip`` changes the value of one letter in the first example, as a
    negative control.
    """
    h = parse_monoid(_fixture("z2.monoid"))[1]
    if flip is not None:
        h = h.with_letter(flip, (h.letter(flip) + 1) % len(h.monoid))
    rule = parse_template("(y1 x2 a, b x1)")
    u, v = ("a", "b"), ("a",)
    q, r = h_type(h, u), h_type(h, v)
    e, s = h.monoid.element("e"), h.monoid.element("s")
    tau = InterfaceType((1, 2), (e, s, e))
    gb, gc = trace_B(rule, tau, r, h), trace_C(rule, tau, q, h)
    nb, nc = normalize(gb, h), normalize(gc, h)
    got = [
        ("q", format_htype(q, h), "(s,e)"),
        ("r", format_htype(r, h), "(s)"),
        ("out", format_htype(template_eval(rule, q, r, h), h), "(e,s)"),
        ("B-trace", render_trace(gb, h), "e s x2 s s e x1 e"),
        ("B-trace reduced", render_normal_form(nb, h, "x"), "s x2 e x1 e"),
        ("B-transport", format_interface(transport_B(rule, tau, r, h), h), "((12); s,e,e)"),
        ("C-trace", render_trace(gc, h), "e y1 e s s e s e"),
        ("C-trace reduced", render_normal_form(nc, h, "y"), "e y1 s"),
        ("C-transport", format_interface(transport_C(rule, tau, q, h), h), "(id1; e,s)"),
    ]
    h2 = parse_monoid(_fixture("z2_abc.monoid"))[1]
    swap = parse_grammar(_fixture("swap.grammar"), tuple(h2.alphabet))
    contexts = []
    for r_ in swap.rules:
        if isinstance(r_, BinaryRule) and r_.lhs == "T":
            contexts.append(induced_context_B(r_, hole_context(1), ("c",)))
    contexts.sort(key=str)
    tg = build_trimmed_refinement(swap, h2, 2)
    copies = sorted(format_interface(X.interface, h2) for X in tg.copies_of("A"))
    got += [
        ("placement contexts", " ".join(map(str, contexts)), "[1]c[2] [2]c[1]"),
        ("placement interfaces",
         " ".join(format_interface(interface_type(h2, E), h2) for E in contexts),
         "(id2; e,e,e) ((12); e,e,e)"),
        ("typed A-copies", " ".join(copies), "((12); e,e,e) (id2; e,e,e)"),
    ]
    ok = True
    lines = []
    for label, value, expected in got:
        if value == expected:
            lines.append(f"ok        {label}: {value}")
        else:
            ok = False
            lines.append(f"MISMATCH  {label}: {value} (expected {expected})")
    return ok, lines


def cmd_worked_example(cfg: RunConfig, flip: str | None = None) -> int:
    ok, lines = worked_example(flip)
    emit(cfg, lines, {"ok": ok, "lines": lines})
    return EXIT_OK if ok else EXIT_FAIL


# -- argument parsing ----------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcfglearn", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grammar=True, h=True):
        sp.add_argument("--fanout", type=int, default=2, help="fan-out bound f")
        if grammar:
            sp.add_argument("--grammar", required=True, metavar="FILE")
        if h:
            sp.add_argument("--monoid", metavar="FILE", help="monoid and homomorphism file")
            sp.add_argument("--dfa", metavar="FILE", help="use the transition monoid of this DFA")
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--structured", action="store_true", help="print JSON instead of text")

    common(sub.add_parser("validate", help="check the grammar class conditions"), h=False)
    common(sub.add_parser("refine", help="print the trimmed typed refinement"))
    common(sub.add_parser("sample", help="compute the characteristic sample"))
    sp = sub.add_parser("learn", help="learn a grammar from a positive sample")
    common(sp, grammar=False)
    sp.add_argument("--sample", required=True, metavar="FILE", help="one word per line")
    sp.add_argument("--eliminate-units", action="store_true",
                    help="also write the unit-free hypothesis")
    sp = sub.add_parser("compare", help="compare bounded languages")
    common(sp)
    sp.add_argument("--hypothesis", metavar="FILE")
    sp.add_argument("--sample", metavar="FILE", help="learn the hypothesis from this sample")
    sp.add_argument("--bound", type=int, default=12)
    sp = sub.add_parser("simulate-text", help="relearn on growing prefixes of the length-lex text")
    common(sp)
    sp.add_argument("--bound", type=int, default=12)
    sp.add_argument("--extra", type=int, default=5, help="words checked beyond the cover")
    sp = sub.add_parser("worked-example", help="recompute the embedded worked examples")
    sp.add_argument("--flip", metavar="LETTER", help="perturb one letter value (negative control)")
    sp.add_argument("--structured", action="store_true")
    return p


COMMANDS = {
    "validate": cmd_validate, "refine": cmd_refine, "sample": cmd_sample, "learn": cmd_learn,
    "compare": cmd_compare, "simulate-text": cmd_simulate_text,
}


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    opts = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    try:
        cfg = RunConfig(**opts)
        if args.command == "worked-example":
            return cmd_worked_example(cfg, args.flip)
        return COMMANDS[args.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
