"""Network and training hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass
class NetworkConfig:
    """Everything needed to build and train the beam predictor.

    The prediction head assigns one token per subarray, which ties the
    subarray count to the user count; configs with ``n_sub != k_users`` are
    rejected when a dataset is attached.
    """

    k_users: int
    n_a: int
    n_q: int
    m_slots: int = 8
    encoder_dims: tuple[int, ...] = (512, 256, 128)
    tfm_layers: int = 2
    heads: int = 2
    dropout: float = 0.3
    tau_start: float = 1.0
    tau_end: float = 0.1
    lr: float = 5e-4
    weight_decay: float = 2e-3
    batch_size: int = 1024
    epochs: int = 100
    snr_db: float = 10.0
    p_t: float = 1.0
    val_frac: float = 0.1
    holdout_frac: float = 0.1

    def __post_init__(self):
        if min(self.k_users, self.n_a, self.n_q, self.m_slots) < 1:
            raise ValueError("k_users, n_a, n_q and m_slots must all be >= 1")
        if len(self.encoder_dims) < 1:
            raise ValueError("encoder needs at least one layer")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must be in [0, 1)")
        if self.tau_start <= 0 or self.tau_end <= 0:
            raise ValueError("temperatures must be positive")

    @property
    def d(self) -> int:
        return self.encoder_dims[-1]

    @property
    def d_model(self) -> int:
        # Real token width: concatenated real and imaginary parts.
        return 2 * self.d

    @property
    def noise_var(self) -> float:
        return self.p_t / 10.0 ** (self.snr_db / 10.0)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["encoder_dims"] = list(self.encoder_dims)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        data = dict(data)
        data["encoder_dims"] = tuple(data["encoder_dims"])
        return cls(**data)
