"""Training loop: soft beam selection against the precoder-free loss.

Channels are used only to evaluate the loss; the network itself sees nothing
but the (noisy) pilot measurements produced by its own sensing front-end.
Artifacts exported after training: model checkpoint, the learned combiner in
the simulator's binary format, beam picks for a held-out slice, and a
JSON-lines log with one record per epoch.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import torch

from dliabt.config import NetworkConfig
from dliabt.data import TrainingLog, read_dataset, write_beams, write_combiner
from dliabt.loss import variant_mse_loss
from dliabt.network import BeamPredictor
from dliabt.selection import assemble_block_diag, gumbel_select


@dataclass
class TrainingArtifacts:
    checkpoint_path: Path
    combiner_path: Path
    beams_path: Path
    log_path: Path
    holdout_ids: list[int]
    best_val_loss: float
    final_train_loss: float
    wall_time_s: float


def _complex_noise(shape, std: float, generator: torch.Generator) -> torch.Tensor:
    re = torch.randn(shape, generator=generator)
    im = torch.randn(shape, generator=generator)
    return torch.complex(re, im) * (std / math.sqrt(2.0))


def tau_schedule(config: NetworkConfig, epoch: int) -> float:
    """Linear anneal from tau_start to tau_end across the training run."""
    if config.epochs <= 1:
        return config.tau_end
    frac = epoch / (config.epochs - 1)
    return config.tau_start + (config.tau_end - config.tau_start) * frac


def split_dataset(count: int, config: NetworkConfig) -> tuple[range, range, range]:
    """Deterministic contiguous split: train | validation | holdout."""
    n_hold = int(round(count * config.holdout_frac))
    n_val = int(round((count - n_hold) * config.val_frac))
    n_train = count - n_hold - n_val
    if n_train < 1:
        raise ValueError(f"split leaves no training samples (count={count})")
    return range(0, n_train), range(n_train, n_train + n_val), range(count - n_hold, count)


def _batch_loss(
    model: BeamPredictor,
    h: torch.Tensor,
    config: NetworkConfig,
    tau: float,
    noise_gen: torch.Generator,
    gumbel_gen: torch.Generator,
) -> torch.Tensor:
    noise = _complex_noise(
        (h.shape[0], config.m_slots, h.shape[1], h.shape[2]), config.noise_var**0.5, noise_gen
    )
    logits = model(h, noise)
    _, soft_beams = gumbel_select(logits, tau, model.beams, mode="train", generator=gumbel_gen)
    f_rf = assemble_block_diag(soft_beams)
    return variant_mse_loss(h, f_rf, config.p_t, config.noise_var).mean()


@torch.no_grad()
def hard_loss(
    model: BeamPredictor, h: torch.Tensor, config: NetworkConfig, noise_gen: torch.Generator
) -> float:
    """Mean loss of argmax beam picks on noisy measurements (eval mode)."""
    was_training = model.training
    model.eval()
    noise = _complex_noise(
        (h.shape[0], config.m_slots, h.shape[1], h.shape[2]), config.noise_var**0.5, noise_gen
    )
    logits = model(h, noise)
    _, beams = gumbel_select(logits, 1.0, model.beams, mode="eval")
    loss = variant_mse_loss(h, assemble_block_diag(beams), config.p_t, config.noise_var).mean()
    if was_training:
        model.train()
    return float(loss)


@torch.no_grad()
def soft_hard_gap(
    model: BeamPredictor, h: torch.Tensor, config: NetworkConfig, tau: float, seed: int
) -> float:
    """|loss(relaxed beams) - loss(argmax beams)| on a fixed batch.

    Uses the noise-free relaxation (no Gumbel perturbation) so the gap
    tracks the temperature anneal rather than sampling noise.
    """
    was_training = model.training
    model.eval()
    gen = torch.Generator().manual_seed(seed)
    noise = _complex_noise(
        (h.shape[0], config.m_slots, h.shape[1], h.shape[2]), config.noise_var**0.5, gen
    )
    logits = model(h, noise)
    zero = torch.zeros_like(logits)
    _, soft = gumbel_select(logits, tau, model.beams, mode="train", gumbel_noise=zero)
    _, hard = gumbel_select(logits, tau, model.beams, mode="eval")
    loss_soft = variant_mse_loss(h, assemble_block_diag(soft), config.p_t, config.noise_var).mean()
    loss_hard = variant_mse_loss(h, assemble_block_diag(hard), config.p_t, config.noise_var).mean()
    if was_training:
        model.train()
    return float(abs(loss_soft - loss_hard))


def train(
    dataset_path, config: NetworkConfig, seed: int, out_dir, quiet: bool = True
) -> TrainingArtifacts:
    """Train on a simulator-exported dataset and write all artifacts to out_dir."""
    start = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header, channels = read_dataset(dataset_path)
    if int(header["n_sub"]) != int(header["k"]):
        raise ValueError(
            f"prediction head ties subarrays to users; dataset has n_sub={header['n_sub']}, k={header['k']}"
        )
    if int(header["k"]) != config.k_users or int(header["n_a"]) != config.n_a:
        raise ValueError("dataset dimensions do not match the network config")

    torch.manual_seed(seed)
    model = BeamPredictor(config)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr, weight_decay=config.weight_decay)
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=config.epochs)

    train_idx, val_idx, holdout_idx = split_dataset(len(channels), config)
    h_train = channels[list(train_idx)]
    h_val = channels[list(val_idx)] if len(val_idx) else channels[list(train_idx)]

    shuffle_gen = torch.Generator().manual_seed(seed + 1)
    gumbel_gen = torch.Generator().manual_seed(seed + 2)
    gap_batch = h_val[: min(len(h_val), 256)]

    log = TrainingLog(out_dir / "training_log.jsonl")
    best_val = math.inf
    best_state = None
    train_loss = math.nan
    batch = min(config.batch_size, len(h_train))
    for epoch in range(config.epochs):
        tau = tau_schedule(config, epoch)
        model.train()
        noise_gen = torch.Generator().manual_seed(seed + 1000 + epoch)
        order = torch.randperm(len(h_train), generator=shuffle_gen)
        epoch_losses = []
        for i in range(0, len(h_train), batch):
            h = h_train[order[i : i + batch]]
            optimizer.zero_grad()
            loss = _batch_loss(model, h, config, tau, noise_gen, gumbel_gen)
            loss.backward()
            optimizer.step()
            epoch_losses.append(loss.item())
        scheduler.step()
        train_loss = sum(epoch_losses) / len(epoch_losses)
        val_gen = torch.Generator().manual_seed(seed + 5000 + epoch)
        val_loss = hard_loss(model, h_val, config, val_gen)
        gap = soft_hard_gap(model, gap_batch, config, tau, seed + 77)
        log.write(
            {"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss, "tau": tau,
             "soft_hard_gap": gap}
        )
        if not quiet:
            print(f"epoch {epoch:4d}  tau {tau:.3f}  train {train_loss:.4f}  val {val_loss:.4f}")
        if val_loss < best_val:
            best_val = val_loss
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
    log.close()

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()

    checkpoint_path = out_dir / "model.pt"
    torch.save({"config": config.to_dict(), "state_dict": model.state_dict()}, checkpoint_path)

    combiner_path = out_dir / "combiner.bin"
    write_combiner(model.frontend.combiner(), combiner_path)

    beams_path = out_dir / "holdout_beams.csv"
    holdout_ids = list(holdout_idx)
    if holdout_ids:
        h_hold = channels[holdout_ids]
        hold_gen = torch.Generator().manual_seed(seed + 9999)
        noise = _complex_noise(
            (len(h_hold), config.m_slots, h_hold.shape[1], h_hold.shape[2]),
            config.noise_var**0.5,
            hold_gen,
        )
        with torch.no_grad():
            logits = model(h_hold, noise)
            indices, _ = gumbel_select(logits, 1.0, model.beams, mode="eval")
        write_beams(holdout_ids, indices, beams_path)
    else:
        write_beams([], torch.zeros((0, config.k_users), dtype=torch.long), beams_path)

    return TrainingArtifacts(
        checkpoint_path=checkpoint_path,
        combiner_path=combiner_path,
        beams_path=beams_path,
        log_path=out_dir / "training_log.jsonl",
        holdout_ids=holdout_ids,
        best_val_loss=best_val,
        final_train_loss=train_loss,
        wall_time_s=time.perf_counter() - start,
    )


def load_checkpoint(path) -> BeamPredictor:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    config = NetworkConfig.from_dict(blob["config"])
    model = BeamPredictor(config)
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model
