"""Two-body loss rates of trapped condensates and the resulting bound versus N.

Rates follow gamma_ee' = K_ee' / 2 * integral |psi_e|^2 |psi_e'|^2 with
normalised orbitals. In a spherical harmonic trap the Thomas-Fermi profile
gives gamma ~ N^(-3/5); in a box the orbital is flat and gamma = K / (2V).
All inputs and outputs are SI.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import hbar, physical_constants

from .bounds.analytic import analytic_two_body_bound
from .bounds.sdp import solve_sdp
from .model import TwoModeLossModel
from .rpn import assemble_two_mode

TF_EXPONENT = -3 / 5
TF_CONSTANT = 15 ** (2 / 5) / (28 * math.pi)
PAIRS = ((0, 0), (0, 1), (1, 1))
BOHR = physical_constants["Bohr radius"][0]


class TrapKind(enum.Enum):
    HARMONIC_TF = "harmonic_tf"
    BOX = "box"


@dataclass(frozen=True)
class TrapSpec:
    kind: TrapKind
    K: np.ndarray  # 2x2 symmetric inelastic constants, m^3/s
    omega: float | None = None  # rad/s, harmonic
    volume: float | None = None  # m^3, box
    scattering_length: float | None = None  # m
    mass: float | None = None  # kg

    def __post_init__(self):
        K = np.array(self.K, dtype=float)
        if K.shape != (2, 2) or not np.allclose(K, K.T) or np.any(K < 0):
            raise ValueError("K must be a symmetric non-negative 2x2 matrix")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "kind", TrapKind(self.kind))
        if self.kind is TrapKind.HARMONIC_TF:
            for name in ("omega", "scattering_length", "mass"):
                v = getattr(self, name)
                if v is None or not v > 0:
                    raise ValueError(f"harmonic trap needs positive {name}")
        elif self.volume is None or not self.volume > 0:
            raise ValueError("box trap needs a positive volume")

    @property
    def l_osc(self) -> float:
        return math.sqrt(hbar / (self.mass * self.omega))


def tf_prefactor(trap: TrapSpec, pair: tuple[int, int]) -> float:
    """c in gamma = c * N^(-3/5) for a spherical harmonic trap."""
    if trap.kind is not TrapKind.HARMONIC_TF:
        raise ValueError("tf_rate needs a harmonic trap; use box_rate")
    l = trap.l_osc
    return TF_CONSTANT * trap.K[pair] / l**3 * (l / trap.scattering_length) ** 0.6


def tf_rate(trap: TrapSpec, pair: tuple[int, int], N: float) -> float:
    if N < 1:
        raise ValueError("N must be >= 1")
    return tf_prefactor(trap, pair) * N**TF_EXPONENT


def box_rate(trap: TrapSpec, pair: tuple[int, int], N: float | None = None) -> float:
    """K / (2V); independent of N."""
    if trap.kind is not TrapKind.BOX:
        raise ValueError("box_rate needs a box trap; use tf_rate")
    return trap.K[pair] / (2 * trap.volume)


def two_body_rates(trap: TrapSpec, N: float) -> dict[tuple[int, int], float]:
    rate = tf_rate if trap.kind is TrapKind.HARMONIC_TF else box_rate
    return {p: rate(trap, p, N) for p in PAIRS}


def rb87_placeholder_trap(kind: TrapKind | str = TrapKind.HARMONIC_TF) -> TrapSpec:
    """Order-of-magnitude 87Rb numbers for the |F=2,m=1>, |F=1,m=-1> pair.

    The loss constants are placeholders, not reference values; only ratios
    and slopes computed from them are meaningful.
    """
    K = np.array([[8.1e-20, 1.51e-20], [1.51e-20, 0.0]])
    kind = TrapKind(kind)
    if kind is TrapKind.BOX:
        return TrapSpec(kind, K, volume=1e-15)
    return TrapSpec(kind, K, omega=2 * math.pi * 100, scattering_length=100 * BOHR, mass=1.443e-25)


@dataclass
class RateTable:
    N: np.ndarray
    gamma: dict[tuple[int, int], np.ndarray]
    gamma_single: tuple[float, float] = (0.0, 0.0)
    fq_per_time: np.ndarray | None = field(default=None)

    def rows(self):
        for i, N in enumerate(self.N):
            yield {
                "N": float(N),
                "gamma1": self.gamma_single[0],
                "gamma2": self.gamma_single[1],
                "gamma11": float(self.gamma[(0, 0)][i]),
                "gamma12": float(self.gamma[(0, 1)][i]),
                "gamma22": float(self.gamma[(1, 1)][i]),
                "fq_per_time": None if self.fq_per_time is None else float(self.fq_per_time[i]),
            }


def point_bound(spec: TwoModeLossModel, n: int = 2, superselect: bool = True, method: str = "sdp") -> float:
    """Bound on QFI per unit time for one set of rates.

    ``sdp`` solves the rescaled n-particle problem exactly; ``analytic`` uses
    the large-N closed forms and keeps the tighter one when both single- and
    two-body losses are present (dropping a noise channel only loosens a bound).
    """
    if method == "sdp":
        ch = assemble_two_mode(spec, n, superselect)
        return solve_sdp(ch.model, ch.subchannel_count).fq_per_time
    if method != "analytic":
        raise ValueError(f"unknown method {method!r}")
    cands = []
    g1, g2 = spec.gamma1, spec.gamma2
    if g1 > 0 and g2 > 0:
        cands.append(4 * spec.N / (math.sqrt(g1) + math.sqrt(g2)) ** 2)
    if sum(g > 0 for g in (spec.gamma11, spec.gamma22, spec.gamma12)) >= 2:
        cands.append(analytic_two_body_bound(spec.gamma11, spec.gamma22, spec.gamma12).fq_per_time)
    if not cands:
        raise ValueError("no closed form applies to these rates; use method='sdp'")
    return min(cands)


def qfi_vs_n_curve(
    trap: TrapSpec | None,
    gamma_single: tuple[float, float],
    N_values,
    n: int = 2,
    superselect: bool = True,
    method: str = "sdp",
) -> RateTable:
    """Rates and bound for each N. ``trap=None`` means no two-body losses."""
    Ns = np.asarray(list(N_values), dtype=float)
    gam = {p: np.zeros(len(Ns)) for p in PAIRS}
    fq = np.zeros(len(Ns))
    for i, N in enumerate(Ns):
        rates = two_body_rates(trap, N) if trap is not None else {p: 0.0 for p in PAIRS}
        for p in PAIRS:
            gam[p][i] = rates[p]
        spec = TwoModeLossModel(*gamma_single, rates[(0, 0)], rates[(0, 1)], rates[(1, 1)], N)
        fq[i] = point_bound(spec, n, superselect, method)
    return RateTable(Ns, gam, tuple(gamma_single), fq)
