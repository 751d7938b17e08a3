"""Compare symbolic orbits of the interval map in double and in extended precision."""
import argparse

import numpy as np

from deductron import wlang


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=120)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    x0 = wlang.random_x0(rng, wlang.required_digits(args.frames), 0, 11)
    exact = wlang.generate_chaotic(x0, args.frames)
    dbl = wlang.generate_chaotic(float(x0), args.frames, arithmetic="float")
    diverge = next((k for k, (a, b) in enumerate(zip(exact, dbl)) if a != b), None)
    print("x0 =", str(x0)[:30] + "...")
    print("decimal:", " ".join(s.name for s in exact[:40]))
    print("double: ", " ".join(s.name for s in dbl[:40]))
    print("first disagreement at frame", diverge, "; double tail from there:", {s.name for s in dbl[diverge or 0:]})


if __name__ == "__main__":
    main()
