"""Anneal 3-cell deductrons on the XOOXXO sample image and test them on fresh sentences.

    python3 scripts/reproduce_anneal.py --seeds 5 --beta-step 1e-5
"""
import argparse
import logging

import numpy as np

from deductron import wlang
from deductron.anneal import AnnealSchedule, anneal_runs, evaluate_accuracy
from deductron.dataset import make_dataset
from deductron.logic import report
from deductron.network import HARD

log = logging.getLogger("reproduce_anneal")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--memory", type=int, default=3)
    ap.add_argument("--beta-step", type=float, default=1e-5)
    ap.add_argument("--fresh", type=int, default=3, help="number of fresh 500-frame test images")
    ap.add_argument("--out", help="write the winning parameters here")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    train = make_dataset(wlang.fig4_image())
    sched = AnnealSchedule(beta_step=args.beta_step)
    best, results = anneal_runs(train, (6, args.memory, 2), sched, range(args.seeds))
    tests = [make_dataset(wlang.states_to_image(wlang.generate_basic(500, np.random.default_rng(10_000 + k))))
             for k in range(args.fresh)]
    for r in results:
        accs = [evaluate_accuracy(r.best_params, HARD, d).frame_accuracy for d in tests]
        log.info("seed %d: training loss %g, %d restarts, fresh frame accuracy %s",
                 r.seed, r.best_loss, r.restarts, " ".join(f"{a:.3f}" for a in accs))
    log.info("winner: seed %d, loss %g", best.seed, best.best_loss)
    print(report(best.best_params).render(), end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(best.best_params.to_json({"schedule": vars(args)}))


if __name__ == "__main__":
    main()
