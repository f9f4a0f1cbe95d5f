"""Complex-valued building blocks: linear, batch norm, ReLU, sensing front-end."""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn


def complex_relu(x: torch.Tensor) -> torch.Tensor:
    """ReLU applied independently to real and imaginary parts."""
    return torch.complex(F.relu(x.real), F.relu(x.imag))


class ComplexLinear(nn.Module):
    """Fully connected layer with complex weights stored as (re, im) pairs."""

    def __init__(self, in_features: int, out_features: int, bias: bool = True):
        super().__init__()
        scale = 1.0 / math.sqrt(2 * in_features)
        self.weight_re = nn.Parameter(torch.randn(out_features, in_features) * scale)
        self.weight_im = nn.Parameter(torch.randn(out_features, in_features) * scale)
        if bias:
            self.bias_re = nn.Parameter(torch.zeros(out_features))
            self.bias_im = nn.Parameter(torch.zeros(out_features))
        else:
            self.register_parameter("bias_re", None)
            self.register_parameter("bias_im", None)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        weight = torch.complex(self.weight_re, self.weight_im)
        out = x @ weight.T
        if self.bias_re is not None:
            out = out + torch.complex(self.bias_re, self.bias_im)
        return out


class ComplexBatchNorm(nn.Module):
    """Split-variance complex batch normalization.

    Real and imaginary parts are normalized independently; cheap, and keeps
    phase information through the per-feature affine parameters.
    """

    def __init__(self, num_features: int):
        super().__init__()
        self.bn_re = nn.BatchNorm1d(num_features)
        self.bn_im = nn.BatchNorm1d(num_features)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.complex(self.bn_re(x.real), self.bn_im(x.imag))


class SensingFrontEnd(nn.Module):
    """Learned per-slot pilot combining as bias-free grouped convolutions.

    Slot m owns a K x N complex kernel; complex multiplication is realized by
    two parallel real grouped 1-D convolutions over the pilot-stream axis.
    Kernel rows (the combining vectors) are normalized to unit norm in every
    forward pass, so the exported combiner honours the receive-beamformer
    normalization and measurement noise keeps variance sigma^2 per entry.
    """

    def __init__(self, m_slots: int, n_elements: int, k_streams: int):
        super().__init__()
        self.m_slots = m_slots
        self.n_elements = n_elements
        self.k_streams = k_streams
        scale = 1.0 / math.sqrt(2 * n_elements)
        self.weight_re = nn.Parameter(torch.randn(m_slots * k_streams, n_elements, 1) * scale)
        self.weight_im = nn.Parameter(torch.randn(m_slots * k_streams, n_elements, 1) * scale)

    def _normalized_weights(self) -> tuple[torch.Tensor, torch.Tensor]:
        norm = torch.sqrt((self.weight_re**2 + self.weight_im**2).sum(dim=1, keepdim=True))
        return self.weight_re / norm, self.weight_im / norm

    def combiner(self) -> torch.Tensor:
        """Per-slot combining matrices, shape (m_slots, n_elements, k_streams).

        Column (m, :, j) is the unit-norm receive beamformer of stream j in
        slot m; measurements equal combiner^H applied per slot.
        """
        w_re, w_im = self._normalized_weights()
        w = torch.complex(w_re, w_im).squeeze(-1)  # (m*k, n)
        w = w.reshape(self.m_slots, self.k_streams, self.n_elements)
        return w.conj().transpose(1, 2)

    def forward(self, h: torch.Tensor, noise: torch.Tensor | None = None) -> torch.Tensor:
        """Measure a batch of channels: (B, n, k_users) -> (B, m, k_streams, k_users).

        ``noise`` is an optional per-slot antenna-domain tensor of shape
        (B, m, n, k_users); it is combined by the same kernels, never added
        after combining.
        """
        b, n, k_users = h.shape
        x = h.unsqueeze(1).expand(b, self.m_slots, n, k_users)
        if noise is not None:
            x = x + noise
        x = x.reshape(b, self.m_slots * n, k_users)
        w_re, w_im = self._normalized_weights()
        y_re = F.conv1d(x.real, w_re, groups=self.m_slots) - F.conv1d(x.imag, w_im, groups=self.m_slots)
        y_im = F.conv1d(x.real, w_im, groups=self.m_slots) + F.conv1d(x.imag, w_re, groups=self.m_slots)
        y = torch.complex(y_re, y_im)
        return y.reshape(b, self.m_slots, self.k_streams, k_users)
