"""CLI: train on a simulator dataset, infer beam picks for a dataset."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import torch

from dliabt.config import NetworkConfig
from dliabt.data import read_dataset, write_beams
from dliabt.selection import gumbel_select
from dliabt.train import _complex_noise, load_checkpoint, train


def _cmd_train(args):
    header, _ = read_dataset(args.dataset)
    config = NetworkConfig(
        k_users=int(header["k"]),
        n_a=int(header["n_a"]),
        n_q=args.nq,
        m_slots=args.m_slots,
        encoder_dims=tuple(int(d) for d in args.encoder_dims.split(",")),
        tfm_layers=args.tfm_layers,
        heads=args.heads,
        dropout=args.dropout,
        tau_start=args.tau_start,
        tau_end=args.tau_end,
        lr=args.lr,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        epochs=args.epochs,
        snr_db=args.snr_db,
        val_frac=args.val_frac,
        holdout_frac=args.holdout_frac,
    )
    artifacts = train(args.dataset, config, seed=args.seed, out_dir=args.out_dir, quiet=not args.verbose)
    print(
        json.dumps(
            {
                "checkpoint": str(artifacts.checkpoint_path),
                "combiner": str(artifacts.combiner_path),
                "beams": str(artifacts.beams_path),
                "log": str(artifacts.log_path),
                "best_val_loss": artifacts.best_val_loss,
                "wall_time_s": artifacts.wall_time_s,
            }
        )
    )


def _cmd_infer(args):
    model = load_checkpoint(args.checkpoint)
    header, channels = read_dataset(args.dataset)
    if int(header["k"]) != model.config.k_users or int(header["n_a"]) != model.config.n_a:
        raise SystemExit("dataset dimensions do not match the checkpoint")
    config = model.config
    noise_var = config.p_t / 10.0 ** (args.snr_db / 10.0)
    gen = torch.Generator().manual_seed(args.seed)
    noise = _complex_noise(
        (len(channels), config.m_slots, channels.shape[1], channels.shape[2]), noise_var**0.5, gen
    )
    with torch.no_grad():
        logits = model(channels, noise)
        indices, _ = gumbel_select(logits, 1.0, model.beams, mode="eval")
    write_beams(range(len(channels)), indices, args.out)
    print(f"wrote {len(channels)} beam rows to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dliabt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the predictor on a channel dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--nq", type=int, required=True, help="codebook size")
    p.add_argument("--m-slots", type=int, default=8)
    p.add_argument("--encoder-dims", default="512,256,128")
    p.add_argument("--tfm-layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--dropout", type=float, default=0.3)
    p.add_argument("--tau-start", type=float, default=1.0)
    p.add_argument("--tau-end", type=float, default=0.1)
    p.add_argument("--lr", type=float, default=5e-4)
    p.add_argument("--weight-decay", type=float, default=2e-3)
    p.add_argument("--batch-size", type=int, default=1024)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--val-frac", type=float, default=0.1)
    p.add_argument("--holdout-frac", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("infer", help="predict beam indices for every dataset sample")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--snr-db", type=float, default=10.0, help="measurement SNR")
    p.add_argument("--seed", type=int, default=0, help="measurement noise seed")
    p.set_defaults(func=_cmd_infer)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
