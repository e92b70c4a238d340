"""Learner cost against sample size on L3 words, with log-log slopes.

    python scripts/growth.py [--repeats 3] [--fanout 2]
"""

import argparse
import time
from dataclasses import dataclass, field
from importlib.resources import files

import numpy as np

from mcfglearn.learner import build
from mcfglearn.monoid import parse_dfa, transition_monoid


@dataclass
class GrowthConfig:
    # exponents k of the words a^k b^k c^k; total lengths 9, 18, 39, 78
    samples: list = field(default_factory=lambda: [(1, 2), (1, 2, 3), (1, 2, 3, 7), (1, 2, 3, 4, 5, 11)])
    repeats: int = 3
    fanout: int = 2


def measure(cfg: GrowthConfig):
    h = transition_monoid(parse_dfa((files("mcfglearn") / "data" / "l3.dfa").read_text()))[1]
    rows = []
    for ks in cfg.samples:
        K = ["a" * k + "b" * k + "c" * k for k in ks]
        times = []
        for _ in range(cfg.repeats):
            t0 = time.perf_counter()
            lg = build(K, h, cfg.fanout)
            times.append(time.perf_counter() - t0)
        rows.append((sum(map(len, K)), min(times), lg.metrics["rules_total"], lg.metrics["unit_classes"]))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--fanout", type=int, default=2)
    args = p.parse_args()
    cfg = GrowthConfig(repeats=args.repeats, fanout=args.fanout)
    rows = measure(cfg)
    print(f"{'||K||+':>7} {'seconds':>9} {'rules':>10} {'classes':>8}")
    for size, sec, rules, classes in rows:
        print(f"{size:7d} {sec:9.3f} {rules:10d} {classes:8d}")
    x = np.log([r[0] for r in rows])
    for label, col in (("seconds", 1), ("rules", 2)):
        slope = np.polyfit(x, np.log([r[col] for r in rows]), 1)[0]
        print(f"log-log slope of {label}: {slope:.2f} (limit {4 * cfg.fanout + 3})")


if __name__ == "__main__":
    main()
