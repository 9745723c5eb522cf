"""Trainer command line: pair synthesis, training, fixture export."""

import argparse
import sys

import torch

from . import data, export
from .archive import write_archive
from .config import parse_config
from .train import train


def _build_parser():
    parser = argparse.ArgumentParser(prog="cwnet-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-pairs", help="generate training triples via the "
                       "engine CLI")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("train", help="train and export a weight archive")
    p.add_argument("--config", required=True)
    p.add_argument("--pairs-dir", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export-fixtures", help="write golden parity fixtures")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--init-seed", type=int, default=7)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    torch.set_num_threads(max(torch.get_num_threads(), 1))
    if args.command == "synth-pairs":
        cfg = parse_config(args.config)
        data.synth_pairs(cfg.pairs, args.out_dir, seed=cfg.seed,
                         size=cfg.pair_size)
        print(f"pairs={cfg.pairs} dir={args.out_dir}")
        return 0
    if args.command == "train":
        cfg = parse_config(args.config)
        pairs = data.load_pairs(args.pairs_dir)
        weights, history = train(cfg, pairs)
        write_archive(weights, args.out)
        print(f"initial_total={history['initial']['total']:.6f}")
        print(f"final_total={history['final']['total']:.6f}")
        print(f"weights={args.out}")
        return 0
    paths = export.make_parity_fixtures(args.out_dir, init_seed=args.init_seed)
    for path in paths:
        print(f"fixture={path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
