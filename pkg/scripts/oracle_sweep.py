"""Run every oracle suite over the presets and several seeds; print a pass/fail tally."""

import argparse
from collections import Counter

from bosegas.oracle.suites import PRESETS, SUITES, run_suites


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--presets", nargs="+", default=["tiny-d1", "three-mode-d1", "small-d1"])
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    for name in args.presets:
        tally = Counter()
        for seed in range(args.seeds):
            for chk in run_suites(PRESETS[name], SUITES, seed):
                tally[(chk.suite, chk.hard, chk.passed)] += 1
        for (suite, hard, ok), n in sorted(tally.items()):
            print(f"{name},{suite},{'hard' if hard else 'soft'},{'pass' if ok else 'fail'},{n}")


if __name__ == "__main__":
    main()
