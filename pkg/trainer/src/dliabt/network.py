"""The beam-prediction network: encoder, user-attention stack, shared head."""

from __future__ import annotations

import math

import torch
from torch import nn

from dliabt.config import NetworkConfig
from dliabt.layers import ComplexBatchNorm, ComplexLinear, SensingFrontEnd, complex_relu
from dliabt.selection import codebook_beams


class ComplexEncoder(nn.Module):
    """Shared per-user complex MLP: vec(measurement slice) -> C^d embedding.

    The same parameters encode every user, so user order cannot leak into
    the features; batch norm runs over the flattened (batch x user) axis.
    """

    def __init__(self, in_features: int, dims: tuple[int, ...]):
        super().__init__()
        self.linears = nn.ModuleList()
        self.norms = nn.ModuleList()
        prev = in_features
        for d in dims:
            self.linears.append(ComplexLinear(prev, d))
            self.norms.append(ComplexBatchNorm(d))
            prev = d

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        for linear, norm in zip(self.linears, self.norms):
            z = complex_relu(norm(linear(z)))
        return z


class SelfAttention(nn.Module):
    """Multihead self-attention over the user tokens.

    The value aggregation multiplies then sums over the token axis in separate
    ops (no fused multiply-add across tokens), so reordering the tokens of a
    two-user input reorders the output bit-exactly; attention itself carries
    no notion of token position.
    """

    def __init__(self, d_model: int, heads: int, dropout: float):
        super().__init__()
        if d_model % heads != 0:
            raise ValueError("d_model must be divisible by heads")
        self.heads = heads
        self.d_head = d_model // heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.out_proj = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, k, _ = x.shape

        def split(t):
            return t.reshape(b, k, self.heads, self.d_head).transpose(1, 2)

        q, key, v = split(self.q_proj(x)), split(self.k_proj(x)), split(self.v_proj(x))
        scores = torch.einsum("bhid,bhjd->bhij", q, key) / math.sqrt(self.d_head)
        probs = self.dropout(torch.softmax(scores, dim=-1))
        mixed = (probs.unsqueeze(-1) * v.unsqueeze(2)).sum(dim=3)  # (b, h, i, d_head)
        merged = mixed.transpose(1, 2).reshape(b, k, self.heads * self.d_head)
        return self.out_proj(merged)


class TransformerBlock(nn.Module):
    """Pre-normalization block: attention and feed-forward, each with a residual."""

    def __init__(self, d_model: int, heads: int, dropout: float):
        super().__init__()
        self.norm_attn = nn.LayerNorm(d_model)
        self.norm_ffn = nn.LayerNorm(d_model)
        self.attn = SelfAttention(d_model, heads, dropout)
        self.ffn = nn.Sequential(
            nn.Linear(d_model, 4 * d_model),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(4 * d_model, d_model),
        )
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = x + self.dropout(self.attn(self.norm_attn(x)))
        return x + self.dropout(self.ffn(self.norm_ffn(x)))


class BeamPredictor(nn.Module):
    """Measurements in, per-subarray beam logits out.

    Input is the user-major measurement tensor (B, K, M, K): per user, its
    column of the stacked uplink measurement reshaped to (slots, streams).
    Tokens carry no positional encoding; users are a set, and the head is
    shared across subarrays, so model size is independent of K.
    """

    def __init__(self, config: NetworkConfig):
        super().__init__()
        self.config = config
        self.frontend = SensingFrontEnd(config.m_slots, config.k_users * config.n_a, config.k_users)
        self.encoder = ComplexEncoder(config.m_slots * config.k_users, config.encoder_dims)
        self.blocks = nn.ModuleList(
            [
                TransformerBlock(config.d_model, config.heads, config.dropout)
                for _ in range(config.tfm_layers)
            ]
        )
        self.head = nn.Linear(config.d_model, config.n_q)
        self.register_buffer("beams", codebook_beams(config.n_q, config.n_a))

    def measure(self, h: torch.Tensor, noise: torch.Tensor | None = None) -> torch.Tensor:
        """Channels (B, N, K) -> user-major measurements (B, K, M, K)."""
        y = self.frontend(h, noise)  # (B, M, K_streams, K_users)
        return y.permute(0, 3, 1, 2)

    def logits_from_measurements(self, y_user_major: torch.Tensor) -> torch.Tensor:
        b, k, m, streams = y_user_major.shape
        z = y_user_major.reshape(b * k, m * streams)
        e = self.encoder(z).reshape(b, k, -1)
        tokens = torch.cat([e.real, e.imag], dim=-1)
        for block in self.blocks:
            tokens = block(tokens)
        return self.head(tokens)  # (B, K, n_q)

    def forward(self, h: torch.Tensor, noise: torch.Tensor | None = None) -> torch.Tensor:
        return self.logits_from_measurements(self.measure(h, noise))
