"""Command-line entry point: ``deductron <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import decimal
import json
import logging
import sys
from dataclasses import asdict
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, decoder, logic, wlang
from .anneal import AnnealSchedule, anneal_runs, evaluate_accuracy
from .dataset import WindowSeq, format_wset, make_dataset, parse_wset
from .grad import SGDConfig, TrainingDiverged, train_sgd
from .lstm import LstmParams, lstm_forward
from .network import (CONTINUOUS, HARD, RISING, DeductronParams, falling, forward, handcrafted_params,
                      quantize, quantized_to_continuous)

log = logging.getLogger("deductron")


class CliError(Exception):
    pass


def data_path(name: str) -> Path:
    return Path(str(resources.files("deductron") / "data" / name))


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _config_line(args) -> str:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return "config " + json.dumps(cfg, sort_keys=True, default=str)


def load_image(path) -> wlang.Image:
    return wlang.parse_image(_read(path), str(path))


def load_params(path) -> DeductronParams:
    try:
        return DeductronParams.from_json(_read(path))
    except (ValueError, KeyError) as e:
        raise CliError(f"{path}: bad parameter file: {e}") from None


def load_windows(path) -> WindowSeq:
    """Accept a ``wset`` dataset or a ``wimg`` image (labelled on the fly)."""
    text = _read(path)
    head = next((l.split()[0] for l in text.splitlines() if l.strip() and not l.startswith("#")), "")
    if head == "wimg":
        return make_dataset(wlang.parse_image(text, str(path)))
    return parse_wset(text, str(path))


# --- subcommands -------------------------------------------------------------

def cmd_gen(args):
    rng = np.random.default_rng(args.seed)
    if args.chain == "basic":
        states = wlang.generate_basic(args.frames, rng)
    elif args.chain == "precise":
        states = wlang.generate_precise(args.frames, rng)
    else:
        # headroom for running on to a terminal state
        digits = args.digits or wlang.required_digits(args.frames + 200)
        x0 = decimal.Decimal(args.x0) if args.x0 is not None else wlang.random_x0(rng, digits)
        cfg = wlang.IntervalMapConfig(digits=digits)
        states = wlang.generate_chaotic(x0, args.frames, cfg, terminate=True)
    comments = [f"deductron {__version__}", _config_line(args)]
    if args.states_out:
        _write(args.states_out, wlang.format_chain(states, comments))
    _write(args.out, wlang.format_image(wlang.states_to_image(states), comments))
    return 0


def cmd_decode(args):
    img = load_image(args.image)
    dec = decoder.decode(img, args.emit)
    if args.emit_trace:
        print("x11 x21 x31 x12 x22 x32 | tX tO | emit")
        for w, t in zip(dec.windows, dec.targets):
            sym = "X" if t[0] else "O" if t[1] else ""
            print(" ".join(f"{b:>3d}" for b in w), "|", f"{t[0]:>2d} {t[1]:>2d}", "|", sym)
    print(dec.text)
    return 0


def cmd_make_dataset(args):
    img = load_image(args.image)
    ds = make_dataset(img, args.emit, validate=not args.no_validate)
    _write(args.out, format_wset(ds, [f"deductron {__version__}", _config_line(args)]))
    log.info("%d windows, emitted %r", len(ds), ds.text)
    return 0


def _activation(args, params):
    if args.act == "hard":
        return HARD
    if args.act == "rising" or (args.act == "sigmoid" and params.mode == CONTINUOUS):
        return RISING
    return falling(args.beta)


def cmd_sim(args):
    params = load_params(args.params)
    ds = load_windows(args.image)
    act = _activation(args, params)
    tr = forward(params, act, ds.windows)
    pred = (tr.o > 0.5).astype(np.uint8)
    if args.trace:
        print("x11 x21 x31 x12 x22 x32 | tX tO | oX     oO     | emit")
        for w, t, o, p in zip(ds.windows, ds.targets, tr.o, pred):
            sym = "X" if p[0] else "O" if p[1] else ""
            print(" ".join(f"{b:>3d}" for b in w), "|", f"{t[0]:>2d} {t[1]:>2d}", "|",
                  f"{o[0]:.4f} {o[1]:.4f}", "|", sym)
    print(decoder.emitted_text(pred))
    return 0


def _write_run_log(path, results):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "iteration", "beta", "current_loss", "best_loss"])
        for r in results:
            for it, beta, cur, best in r.loss_history:
                w.writerow([r.seed, int(it), f"{beta:.6g}", repr(float(cur)), repr(float(best))])


def cmd_train_anneal(args):
    ds = load_windows(args.data)
    sched = AnnealSchedule(beta_start=args.beta_start, beta_end=args.beta_end, beta_step=args.beta_step,
                           stuck_limit=args.stuck_limit, gamma=args.gamma, seed=args.seed,
                           acceptance=args.acceptance, tied_bias=args.tied_bias, log_every=args.log_every)
    seeds = [args.seed + k for k in range(args.runs)]
    best, results = anneal_runs(ds, (ds.n_in, args.memory, ds.n_out), sched, seeds, args.threads)
    for r in results:
        log.info("seed %d: best hard loss %g, %d restarts", r.seed, r.best_loss, r.restarts)
    extra = {"schedule": asdict(sched), "seeds": seeds, "winner_seed": best.seed,
             "best_loss": best.best_loss, "version": __version__}
    _write(args.out, best.best_params.to_json(extra))
    if args.log:
        _write_run_log(args.log, results)
    acc = evaluate_accuracy(best.best_params, HARD, ds)
    print(f"best loss {best.best_loss:g} (seed {best.seed}); training accuracy {acc.accuracy:.4f}")
    return 0


def cmd_train_sgd(args):
    ds = load_windows(args.data)
    cfg = SGDConfig(alpha=args.lr, epochs=args.epochs, seed=args.seed, init_scale=args.init_scale,
                    clip=args.clip, stop_when_perfect=args.stop_when_perfect)
    init = None
    if args.init:
        init = load_params(args.init)
        if init.mode != CONTINUOUS:
            init = quantized_to_continuous(init, args.beta)
    try:
        res = train_sgd(ds, (ds.n_in, args.memory, ds.n_out), cfg, init)
    except TrainingDiverged as e:
        raise CliError(str(e)) from None
    extra = {"sgd": asdict(cfg), "version": __version__, "final_loss": float(res.losses[-1])}
    _write(args.out, res.params.to_json(extra))
    if args.curve:
        with open(args.curve, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "loss"])
            for k, v in enumerate(res.losses):
                w.writerow([k, repr(float(v))])
    print(f"final loss {res.losses[-1]:.6g} after {res.epochs_run} epochs; thresholded accuracy {res.accuracy:.4f}")
    return 0


def cmd_eval(args):
    params = load_params(args.params)
    ds = load_windows(args.data)
    acc = evaluate_accuracy(params, _activation(args, params), ds)
    print(f"accuracy {acc.accuracy:.6f}")
    print(f"frame_accuracy {acc.frame_accuracy:.6f}")
    print(f"text_match {acc.text_match}")
    for k, c in acc.confusion.items():
        print(f"output {k}: tp={c['tp']} fp={c['fp']} fn={c['fn']} tn={c['tn']}")
    return 0


def cmd_extract_logic(args):
    params = load_params(args.params)
    if params.mode == CONTINUOUS:
        log.warning("continuous parameters rounded to the quantized domain; the formulas are approximate")
        params = quantize(params)
    sys.stdout.write(logic.report(params, dnf=args.dnf).render())
    return 0


def cmd_lstm_sim(args):
    try:
        params = LstmParams.from_json(_read(args.params))
    except (ValueError, KeyError) as e:
        raise CliError(f"{args.params}: bad LSTM parameter file: {e}") from None
    ds = load_windows(args.image)
    _, h = lstm_forward(params, ds.windows)
    for row in h:
        print(" ".join(f"{v:.6f}" for v in row))
    return 0


def cmd_export_handcrafted(args):
    _write(args.out, handcrafted_params().to_json())
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deductron", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a W-language image")
    g.add_argument("--chain", choices=["basic", "precise", "chaotic"], default="basic")
    g.add_argument("--frames", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--x0", help="initial point for --chain chaotic (decimal string)")
    g.add_argument("--digits", type=int, help="decimal precision for --chain chaotic")
    g.add_argument("--out", default="-")
    g.add_argument("--states-out", help="also write the chain state sequence")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("decode", help="run the reference decoder on an image")
    d.add_argument("--image", required=True)
    d.add_argument("--emit-trace", action="store_true")
    d.add_argument("--emit", choices=decoder.EMIT_MODES, default="entry")
    d.set_defaults(func=cmd_decode)

    m = sub.add_parser("make-dataset", help="label an image's windows with the reference decoder")
    m.add_argument("--image", required=True)
    m.add_argument("--out", default="-")
    m.add_argument("--emit", choices=decoder.EMIT_MODES, default="entry")
    m.add_argument("--no-validate", action="store_true")
    m.set_defaults(func=cmd_make_dataset)

    def act_args(sp):
        sp.add_argument("--act", choices=["hard", "sigmoid", "rising"], default="hard")
        sp.add_argument("--beta", type=float, default=15.0)

    s = sub.add_parser("sim", help="simulate a deductron on an image or dataset")
    s.add_argument("--params", required=True)
    s.add_argument("--image", required=True)
    act_args(s)
    s.add_argument("--trace", action="store_true")
    s.set_defaults(func=cmd_sim)

    a = sub.add_parser("train-anneal", help="simulated annealing over quantized weights")
    a.add_argument("--data", required=True)
    a.add_argument("--memory", type=int, default=3)
    a.add_argument("--beta-start", type=float, default=0.0)
    a.add_argument("--beta-end", type=float, default=10.0)
    a.add_argument("--beta-step", type=float, default=1e-5)
    a.add_argument("--stuck-limit", type=int, default=None,
                   help="iterations without improvement before restarting from the best (default: 2%% of the schedule)")
    a.add_argument("--gamma", type=int, choices=[1, 2], default=1)
    a.add_argument("--acceptance", choices=["metropolis", "greedy"], default="metropolis")
    a.add_argument("--tied-bias", action="store_true")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--runs", type=int, default=1)
    a.add_argument("--threads", type=int, help="default: $DEDUCTRON_THREADS or CPU count")
    a.add_argument("--log-every", type=int, default=1000)
    a.add_argument("--out", default="params.json")
    a.add_argument("--log", help="run-log CSV (seed, iteration, beta, current_loss, best_loss)")
    a.set_defaults(func=cmd_train_anneal)

    t = sub.add_parser("train-sgd", help="Adam training of continuous weights")
    t.add_argument("--data", required=True)
    t.add_argument("--memory", type=int, default=4)
    t.add_argument("--epochs", type=int, default=20000)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--init-scale", type=float, default=1.0)
    t.add_argument("--clip", type=float)
    t.add_argument("--init", help="warm-start parameter file (quantized files are converted)")
    t.add_argument("--beta", type=float, default=10.0, help="conversion beta for quantized --init")
    t.add_argument("--stop-when-perfect", action="store_true")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", default="params.json")
    t.add_argument("--curve")
    t.set_defaults(func=cmd_train_sgd)

    e = sub.add_parser("eval", help="thresholded accuracy of parameters on a dataset")
    e.add_argument("--params", required=True)
    e.add_argument("--data", required=True)
    act_args(e)
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("extract-logic", help="print the logic formula of every unit")
    x.add_argument("--params", required=True)
    x.add_argument("--dnf", action="store_true")
    x.set_defaults(func=cmd_extract_logic)

    l = sub.add_parser("lstm-sim", help="peephole LSTM forward pass; prints h_t per window")
    l.add_argument("--params", required=True)
    l.add_argument("--image", required=True)
    l.set_defaults(func=cmd_lstm_sim)

    h = sub.add_parser("export-handcrafted", help="write the hand-built 4-cell parameters")
    h.add_argument("--out", default="-")
    h.set_defaults(func=cmd_export_handcrafted)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError) as e:
        print(f"deductron: error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
