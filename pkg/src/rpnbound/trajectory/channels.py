"""Loss channels of the two-mode condensate as (p, q, rate) triples.

A channel removes p atoms from mode 1 and q from mode 2 with jump operator
sqrt(gamma) a1^p a2^q. On |k, n-k> its weight <L^dag L> is
gamma * (k)_p * (n-k)_q with falling factorials.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

# name -> (atoms from mode 1, atoms from mode 2)
CHANNEL_SHAPES = {
    "gamma1": (1, 0),
    "gamma2": (0, 1),
    "gamma11": (2, 0),
    "gamma12": (1, 1),
    "gamma22": (0, 2),
    "gamma111": (3, 0),
    "gamma112": (2, 1),
    "gamma122": (1, 2),
    "gamma222": (0, 3),
}


@dataclass(frozen=True)
class LossRates:
    """Loss rates [1/s] for one-, two- and three-body processes."""

    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma11: float = 0.0
    gamma12: float = 0.0
    gamma22: float = 0.0
    gamma111: float = 0.0
    gamma112: float = 0.0
    gamma122: float = 0.0
    gamma222: float = 0.0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v >= 0:
                raise ValueError(f"{k} must be non-negative")

    def active(self) -> list[str]:
        return [k for k, v in asdict(self).items() if v > 0]


@dataclass(frozen=True)
class ChannelTable:
    names: tuple[str, ...]
    p: np.ndarray
    q: np.ndarray
    gamma: np.ndarray

    @property
    def body_order(self) -> np.ndarray:
        return self.p + self.q

    def __len__(self):
        return len(self.names)


def channel_table(rates: LossRates) -> ChannelTable:
    names = tuple(rates.active())
    p = np.array([CHANNEL_SHAPES[k][0] for k in names], dtype=np.int64)
    q = np.array([CHANNEL_SHAPES[k][1] for k in names], dtype=np.int64)
    g = np.array([getattr(rates, k) for k in names], dtype=float)
    return ChannelTable(names, p, q, g)


def falling(x: np.ndarray, p: int) -> np.ndarray:
    out = np.ones_like(x, dtype=float)
    for i in range(p):
        out = out * np.maximum(x - i, 0)
    return out


def channel_weights(table: ChannelTable, n: int) -> np.ndarray:
    """weights[j, k] = <k, n-k| L_j^dag L_j |k, n-k>."""
    k = np.arange(n + 1, dtype=float)
    return np.array(
        [g * falling(k, p) * falling(n - k, q) for p, q, g in zip(table.p, table.q, table.gamma)]
    ).reshape(len(table), n + 1)
