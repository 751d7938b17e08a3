"""Adam on a generated 500-frame sentence, best of several seeds.

    python3 scripts/reproduce_sgd.py --seeds 5 --lr 1e-3
"""
import argparse
import logging

import numpy as np

from deductron import wlang
from deductron.dataset import make_dataset
from deductron.grad import SGDConfig, train_sgd

log = logging.getLogger("reproduce_sgd")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--memory", type=int, default=4)
    ap.add_argument("--frames", type=int, default=500)
    ap.add_argument("--sample-seed", type=int, default=7)
    ap.add_argument("--lr", type=float, default=1e-3)
    ap.add_argument("--epochs", type=int, default=20000)
    ap.add_argument("--curve", help="CSV of the per-epoch loss of every seed")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    rng = np.random.default_rng(args.sample_seed)
    data = make_dataset(wlang.states_to_image(wlang.generate_basic(args.frames, rng)))
    curves = []
    for seed in range(args.seeds):
        cfg = SGDConfig(alpha=args.lr, epochs=args.epochs, seed=seed, stop_when_perfect=True)
        r = train_sgd(data, (6, args.memory, 2), cfg)
        curves.append(r.losses)
        log.info("seed %d: accuracy %.4f after %d epochs, loss %.4g", seed, r.accuracy, r.epochs_run, r.losses[-1])
    if args.curve:
        with open(args.curve, "w", encoding="utf-8") as fh:
            fh.write("seed,epoch,loss\n")
            for seed, c in enumerate(curves):
                fh.writelines(f"{seed},{k},{v!r}\n" for k, v in enumerate(c))


if __name__ == "__main__":
    main()
