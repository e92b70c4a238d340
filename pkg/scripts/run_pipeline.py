"""Refine, sample, learn and compare on the bundled fixtures.

    python scripts/run_pipeline.py [--bound 12] [--supersets 3]
"""

import argparse
import time
from dataclasses import dataclass
from importlib.resources import files
from itertools import combinations

from mcfglearn.grammar import language_up_to, parse_grammar
from mcfglearn.learner import build
from mcfglearn.monoid import parse_dfa, parse_monoid, transition_monoid
from mcfglearn.refinement import build_trimmed_refinement, languages_equal_up_to
from mcfglearn.sampler import characteristic_sample, exposure_metrics

DATA = files("mcfglearn") / "data"


@dataclass
class PipelineConfig:
    bound: int = 12
    supersets: int = 3  # extra target words added on top of the characteristic sample
    fanout: int = 2


def load(name):
    if name == "l3":
        h = transition_monoid(parse_dfa((DATA / "l3.dfa").read_text()))[1]
    else:
        h = parse_monoid((DATA / "z2_abc.monoid").read_text())[1]
    g = parse_grammar((DATA / f"{name}.grammar").read_text(), tuple(h.alphabet))
    return g, h


def run(name: str, cfg: PipelineConfig) -> None:
    g, h = load(name)
    tg = build_trimmed_refinement(g, h, cfg.fanout)
    print(f"== {name}: {len(tg.nonterminals)} typed nonterminals, {len(tg.rules)} typed rules")
    print("refinement language equal:", languages_equal_up_to(g, tg, cfg.bound)[0])
    cs = characteristic_sample(tg)
    print("CS:", " ".join(cs.words))
    for line in exposure_metrics(tg, cs).lines():
        print("  " + line)
    target = language_up_to(g, cfg.bound)
    longer = sorted((w for w in language_up_to(g, 3 * cfg.bound) if w not in cs.words),
                    key=lambda w: (len(w), w))[:cfg.supersets]
    for n in range(len(longer) + 1):
        for extra in combinations(longer, n):
            K = cs.words + list(extra)
            t0 = time.perf_counter()
            lg = build(K, h, cfg.fanout)
            equal = lg.language_up_to(cfg.bound) == target
            print(f"  K = CS + {list(extra)}: equal at n={cfg.bound}: {equal}"
                  f"  ({lg.metrics['rules_total']} rules, {time.perf_counter() - t0:.1f} s)")


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--bound", type=int, default=PipelineConfig.bound)
    p.add_argument("--supersets", type=int, default=PipelineConfig.supersets)
    args = p.parse_args()
    cfg = PipelineConfig(args.bound, args.supersets)
    for name in ("swap", "l3"):
        run(name, cfg)


if __name__ == "__main__":
    main()
