"""Two-stage Ramsey protocol simulated with quantum trajectories.

Stage one (preparation) twists a spin coherent state with chi S_z^2 while the
clouds are separated; an optional rotation about x turns the squeezed
quadrature; stage two (Ramsey) imprints the phase omega S_z for time t.
Both stages share the generator

    H = omega S_z + chi S_z^2 + chi_tilde N S_z

with omega = 0 during preparation. The number-dependent constant u(N) is a
phase per sector and is dropped. Each trajectory lives in one total-number
sector at a time, so a state is a vector over n1 = 0..n plus the current n.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, jv
from scipy.stats import poisson

from ..fock import build_basis
from .channels import LossRates, channel_table
from .kernel import evolve

PREP_STAGE, RAMSEY_STAGE = 0, 1
POISSON_WINDOW = 4.0


class NumberDistribution(enum.Enum):
    FIXED = "fixed"
    POISSONIAN = "poissonian"


@dataclass(frozen=True)
class StageParams:
    chi: float = 0.0  # rad/s
    chi_tilde: float = 0.0  # rad/s
    rates: LossRates = field(default_factory=LossRates)


@dataclass(frozen=True)
class ProtocolSpec:
    N_mean: float
    omega: float = 0.0
    T_prep: float = 0.0
    T_ramsey: float = 0.0
    prep: StageParams = field(default_factory=StageParams)
    ramsey: StageParams = field(default_factory=StageParams)
    distribution: NumberDistribution = NumberDistribution.FIXED
    rotation: float | str = "auto"  # angle about x after preparation, or "auto"

    def __post_init__(self):
        object.__setattr__(self, "distribution", NumberDistribution(self.distribution))
        if self.N_mean < 2:
            raise ValueError("N_mean must be >= 2")
        if self.T_prep < 0 or self.T_ramsey < 0:
            raise ValueError("times must be non-negative")
        if self.distribution is NumberDistribution.FIXED and not float(self.N_mean).is_integer():
            raise ValueError("a fixed atom number must be an integer")
        if isinstance(self.rotation, str) and self.rotation != "auto":
            raise ValueError("rotation must be an angle or 'auto'")

    def replace(self, **kw) -> "ProtocolSpec":
        return replace(self, **kw)


def number_sectors(spec: ProtocolSpec) -> list[tuple[int, float]]:
    """(N, probability) pairs; Poissonian weights are truncated to +-4 sigma and renormalised."""
    if spec.distribution is NumberDistribution.FIXED:
        return [(int(spec.N_mean), 1.0)]
    mu = spec.N_mean
    sig = math.sqrt(mu)
    lo = max(2, int(math.floor(mu - POISSON_WINDOW * sig)))
    hi = int(math.ceil(mu + POISSON_WINDOW * sig))
    Ns = np.arange(lo, hi + 1)
    w = poisson.pmf(Ns, mu)
    w /= w.sum()
    return list(zip(Ns.tolist(), w.tolist()))


def allocate(sectors, count: int) -> list[int]:
    """Trajectories per sector, proportional to weight and at least one each."""
    return [max(1, int(round(count * w))) for _, w in sectors]


def coherent_state(n: int) -> np.ndarray:
    """Spin coherent state along +x in the n-atom sector, indexed by n1."""
    k = np.arange(n + 1)
    logc = 0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) - 0.5 * n * math.log(2)
    return np.exp(logc).astype(complex)


@lru_cache(maxsize=64)
def _sx_eig(n: int):
    k = np.arange(n)
    off = 0.5 * np.sqrt((k + 1) * (n - k))
    return eigh_tridiagonal(np.zeros(n + 1), off)


def rotation_x(n: int, theta: float) -> np.ndarray:
    """exp(-i theta S_x) on the n-atom sector."""
    lam, V = _sx_eig(n)
    return (V * np.exp(-1j * theta * lam)) @ V.T


@dataclass
class TrajectoryEnsemble:
    n_tot: np.ndarray  # current atom number per trajectory
    amps: np.ndarray  # (count, width) amplitudes over n1, zero beyond n_tot
    weights: np.ndarray  # probability weight per trajectory, summing to 1
    origin: np.ndarray  # (count, 2): initial sector and index within it
    jump_logs: list = field(default_factory=list)  # per trajectory [(time, "stage:channel")]
    seed: int = 0
    rotation: float = 0.0

    @property
    def count(self) -> int:
        return len(self.n_tot)

    @property
    def width(self) -> int:
        return self.amps.shape[1]

    def copy(self) -> "TrajectoryEnsemble":
        return TrajectoryEnsemble(
            self.n_tot.copy(),
            self.amps.copy(),
            self.weights.copy(),
            self.origin.copy(),
            [list(l) for l in self.jump_logs],
            self.seed,
            self.rotation,
        )

    def subset(self, idx) -> "TrajectoryEnsemble":
        idx = np.asarray(idx)
        w = self.weights[idx]
        return TrajectoryEnsemble(
            self.n_tot[idx], self.amps[idx], w / w.sum(), self.origin[idx],
            [self.jump_logs[i] for i in idx], self.seed, self.rotation,
        )

    def blocks(self) -> dict[int, np.ndarray]:
        """Per atom number n, columns sqrt(w) |psi> so that rho_n = A A^dag."""
        out = {}
        for n in np.unique(self.n_tot):
            sel = np.flatnonzero(self.n_tot == n)
            out[int(n)] = (self.amps[sel, : n + 1] * np.sqrt(self.weights[sel])[:, None]).T
        return out

    def density_blocks(self) -> dict[int, np.ndarray]:
        return {n: A @ A.conj().T for n, A in self.blocks().items()}

    def to_dense(self, max_total: int | None = None):
        """Full density matrix on the two-mode basis with at most ``max_total`` atoms."""
        max_total = int(self.origin[:, 0].max()) if max_total is None else max_total
        basis = build_basis(2, max_total)
        rho = np.zeros((basis.dim, basis.dim), dtype=complex)
        for n, blk in self.density_blocks().items():
            idx = [basis.index[(k, n - k)] for k in range(n + 1)]
            rho[np.ix_(idx, idx)] += blk
        return basis, rho

    def expect_diag(self, f) -> float:
        """Ensemble mean of a Fock-diagonal observable f(n1, n)."""
        total = 0.0
        for n, A in self.blocks().items():
            k = np.arange(n + 1)
            total += float(np.sum(np.abs(A) ** 2 * f(k, n)[:, None]))
        return total

    def mean_atom_number(self) -> float:
        return float(np.dot(self.weights, self.n_tot))


def initial_ensemble(spec: ProtocolSpec, count: int, seed: int) -> TrajectoryEnsemble:
    if count < 1:
        raise ValueError("count must be >= 1")
    sectors = number_sectors(spec)
    per = allocate(sectors, count)
    width = max(N for N, _ in sectors) + 1
    n_tot, amps, weights, origin = [], [], [], []
    for (N, w), m in zip(sectors, per):
        psi = np.zeros(width, dtype=complex)
        psi[: N + 1] = coherent_state(N)
        for i in range(m):
            n_tot.append(N)
            amps.append(psi)
            weights.append(w / m)
            origin.append((N, i))
    weights = np.array(weights)
    return TrajectoryEnsemble(
        np.array(n_tot, dtype=np.int64),
        np.array(amps),
        weights / weights.sum(),
        np.array(origin, dtype=np.int64),
        [[] for _ in n_tot],
        seed,
    )


def _bitgens(ens: TrajectoryEnsemble, stage: int):
    return [np.random.PCG64(np.random.SeedSequence([ens.seed, stage, int(N), int(i)])) for N, i in ens.origin]


def evolve_stage(
    ens: TrajectoryEnsemble,
    params: StageParams,
    T: float,
    omega: float,
    stage: int,
    t_offset: float = 0.0,
) -> TrajectoryEnsemble:
    """New ensemble after evolving every trajectory for time T.

    Random streams depend on (seed, stage, initial sector, index) only, so
    runs that differ in omega or T share their randomness.
    """
    out = ens.copy()
    if T == 0:
        return out
    table = channel_table(params.rates)
    logs = evolve(
        out.n_tot, out.amps, float(T), float(omega), float(params.chi), float(params.chi_tilde),
        table.p, table.q, table.gamma, _bitgens(out, stage),
    )
    tag = "prep" if stage == PREP_STAGE else "ramsey"
    for log, new in zip(out.jump_logs, logs):
        log.extend((t_offset + t, f"{tag}:{table.names[j]}") for t, j in new)
    return out


def _rotate_block(n: int, theta: float, block: np.ndarray) -> np.ndarray:
    """exp(-i theta S_x) applied to the columns of block, by Chebyshev expansion.

    S_x is tridiagonal with spectrum in [-n/2, n/2], so this costs O(n theta n)
    and never forms the n x n unitary.
    """
    if n == 0:
        return block.copy()
    k = np.arange(n)
    off = (np.sqrt((k + 1) * (n - k)) / n)[:, None]  # S_x / (n/2)

    def X(v):
        out = np.zeros_like(v)
        out[:-1] += off * v[1:]
        out[1:] += off * v[:-1]
        return out

    a = theta * n / 2
    kmax = int(abs(a) + 10 * abs(a) ** (1 / 3) + 30)
    coef = jv(np.arange(kmax + 1), a) * (-1j) ** np.arange(kmax + 1)
    prev, cur = block, X(block)
    out = coef[0] * prev + 2 * coef[1] * cur
    for c in coef[2:]:
        prev, cur = cur, 2 * X(cur) - prev
        out += 2 * c * cur
    return out


def rotate(ens: TrajectoryEnsemble, theta: float) -> TrajectoryEnsemble:
    out = ens.copy()
    out.rotation = float(theta)
    if theta == 0:
        return out
    for n in np.unique(out.n_tot):
        sel = np.flatnonzero(out.n_tot == n)
        n = int(n)
        out.amps[sel, : n + 1] = _rotate_block(n, theta, out.amps[sel, : n + 1].T).T
    return out


def _moments(ens: TrajectoryEnsemble):
    """Ensemble means of S_y, S_z, S_y^2, S_z^2 and the symmetrised S_y S_z."""
    m = np.zeros(5)
    for n, A in ens.blocks().items():
        k = np.arange(n + 1)
        sz = (k - n / 2)[:, None]
        up = np.sqrt((k[:-1] + 1) * (n - k[:-1]))[:, None]  # <k+1| a1^dag a2 |k>
        # S_y A with S_y = (S+ - S-) / 2i, applied through the two off-diagonals
        Sy = np.zeros_like(A)
        Sy[1:] += up * A[:-1]
        Sy[:-1] -= up * A[1:]
        Sy /= 2j
        m += [
            np.real(np.vdot(A, Sy)),
            np.sum(sz * np.abs(A) ** 2),
            np.sum(np.abs(Sy) ** 2),
            np.sum(sz**2 * np.abs(A) ** 2),
            np.real(np.vdot(Sy, sz * A)),
        ]
    return m


def auto_rotation(ens: TrajectoryEnsemble) -> float:
    """Angle about x that maximises Var(S_z) of the ensemble after rotation."""
    my, mz, yy, zz, yz = _moments(ens)
    a = zz - mz * mz
    b = yy - my * my
    c = yz - my * mz
    # exp(i t S_x) S_z exp(-i t S_x) = cos t S_z + sin t S_y
    return 0.5 * math.atan2(2 * c, a - b)


def prepare(spec: ProtocolSpec, count: int, seed: int) -> TrajectoryEnsemble:
    """Initial coherent states after the preparation stage and rotation."""
    ens = initial_ensemble(spec, count, seed)
    ens = evolve_stage(ens, spec.prep, spec.T_prep, 0.0, PREP_STAGE)
    theta = spec.rotation
    if theta == "auto":
        theta = auto_rotation(ens) if spec.T_prep > 0 else 0.0
    return rotate(ens, float(theta))


def ramsey(
    prepared: TrajectoryEnsemble,
    spec: ProtocolSpec,
    t: float | None = None,
    omega: float | None = None,
) -> TrajectoryEnsemble:
    t = spec.T_ramsey if t is None else t
    omega = spec.omega if omega is None else omega
    return evolve_stage(prepared, spec.ramsey, t, omega, RAMSEY_STAGE, spec.T_prep)


def run_trajectories(spec: ProtocolSpec, count: int, seed: int) -> TrajectoryEnsemble:
    """Full protocol: preparation, rotation and a Ramsey stage of length spec.T_ramsey."""
    return ramsey(prepare(spec, count, seed), spec)
