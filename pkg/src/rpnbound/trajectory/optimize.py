"""Choice of preparation time and Ramsey segment length for a total time T.

ShortSegments repeats a Ramsey stage of length t a total of T/t times and
scores (T/t) F_Q(t); SingleShot runs one Ramsey stage of length T and scores
F_Q(T). Both maximise over the preparation time. The search is a grid scan
followed by golden-section refinement inside the neighbouring grid cells.
Random streams are shared across all evaluations, so the objective is a
deterministic function of (T_prep, t) for a fixed seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .qfi import simulate_qfi
from .sim import ProtocolSpec, prepare


class OptimizationMode(enum.Enum):
    SHORT_SEGMENTS = "short_segments"
    SINGLE_SHOT = "single_shot"


@dataclass(frozen=True)
class OptimizedProtocol:
    T_prep: float
    t: float
    F_s: float
    F_q: float
    grid: np.ndarray  # objective on prep_grid x t_grid
    mode: OptimizationMode


class _Objective:
    def __init__(self, spec, T, mode, count, seed):
        self.spec, self.T, self.mode = spec, T, mode
        self.count, self.seed = count, seed
        self._prepared = {}

    def prepared(self, Tp):
        if Tp not in self._prepared:
            self._prepared[Tp] = prepare(self.spec.replace(T_prep=Tp), self.count, self.seed)
        return self._prepared[Tp]

    def fq(self, Tp, t):
        s = self.spec.replace(T_prep=Tp)
        return simulate_qfi(s, self.count, self.seed, t=t, prepared=self.prepared(Tp), bootstrap=0).value

    def __call__(self, Tp, t):
        f = self.fq(Tp, t)
        return (self.T / t) * f if self.mode is OptimizationMode.SHORT_SEGMENTS else f


def _bracket(grid, i):
    return grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]


def _golden(f, lo, hi, x0, f0, tol):
    if hi - lo <= tol:
        return x0, f0
    res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": tol})
    return (res.x, -res.fun) if -res.fun > f0 else (x0, f0)


def optimize_protocol(
    spec: ProtocolSpec,
    T: float,
    mode: OptimizationMode | str,
    prep_grid,
    t_grid=None,
    count: int = 1000,
    seed: int = 0,
    refine: bool = True,
    xtol: float = 1e-3,
) -> OptimizedProtocol:
    """Maximise the score over T_prep (and over t in ShortSegments mode)."""
    mode = OptimizationMode(mode)
    if not T > 0:
        raise ValueError("T must be positive")
    prep_grid = np.unique(np.asarray(prep_grid, dtype=float))
    if mode is OptimizationMode.SINGLE_SHOT:
        t_grid = np.array([T])
    else:
        if t_grid is None:
            raise ValueError("ShortSegments needs a t grid")
        t_grid = np.unique(np.asarray(t_grid, dtype=float))
        t_grid = t_grid[(t_grid > 0) & (t_grid <= T)]
    if prep_grid.size == 0 or t_grid.size == 0:
        raise ValueError("empty search grid")
    if np.any(prep_grid < 0):
        raise ValueError("preparation times must be non-negative")

    obj = _Objective(spec, T, mode, count, seed)
    grid = np.array([[obj(Tp, t) for t in t_grid] for Tp in prep_grid])
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    Tp, t, best = float(prep_grid[i]), float(t_grid[j]), float(grid[i, j])

    if refine:
        if t_grid.size > 1:
            lo, hi = _bracket(t_grid, j)
            t, best = _golden(lambda x: obj(Tp, x), lo, hi, t, best, xtol * T)
        if prep_grid.size > 1:
            lo, hi = _bracket(prep_grid, i)
            Tp, best = _golden(lambda x: obj(x, t), lo, hi, Tp, best, xtol * max(hi, 1e-12))
    return OptimizedProtocol(float(Tp), float(t), float(best), obj.fq(Tp, t), grid, mode)
