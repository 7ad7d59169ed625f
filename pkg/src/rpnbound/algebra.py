"""Dense operator algebra on small Hilbert spaces.

Operators are thin wrappers around complex numpy arrays that remember which
basis they were built on, so that products of operators from unrelated spaces
fail loudly instead of silently broadcasting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
SPAN_TOL = 1e-8


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Square complex matrix tagged with the basis it acts on."""

    data: np.ndarray
    basis: str = "qudit"
    label: str = field(default="", compare=False)

    # Make numpy scalars defer to our __rmul__ instead of broadcasting.
    __array_ufunc__ = None

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"operator must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("operator entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def _check(self, other: "OperatorMatrix"):
        if self.dim != other.dim or self.basis != other.basis:
            raise DimensionMismatch(
                f"incompatible operators: {self.dim} on {self.basis!r} vs "
                f"{other.dim} on {other.basis!r}"
            )

    def _wrap(self, arr, label=""):
        return OperatorMatrix(arr, self.basis, label)

    def dag(self) -> "OperatorMatrix":
        return self._wrap(self.data.conj().T, self.label + "^dag" if self.label else "")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return self._wrap(self.data @ other.data)
        return self.data @ other

    def __add__(self, other):
        self._check(other)
        return self._wrap(self.data + other.data)

    def __sub__(self, other):
        self._check(other)
        return self._wrap(self.data - other.data)

    def __neg__(self):
        return self._wrap(-self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, OperatorMatrix):
            raise TypeError("use @ for operator products")
        return self._wrap(complex(scalar) * self.data, self.label)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._wrap(self.data / complex(scalar), self.label)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T), initial=0.0) <= tol)

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.data), initial=0.0) <= tol)

    def __repr__(self):
        name = self.label or "OperatorMatrix"
        return f"<{name} dim={self.dim} basis={self.basis!r}>"


def identity(dim: int, basis: str = "qudit") -> OperatorMatrix:
    return OperatorMatrix(np.eye(dim), basis, "1")


def adjoint(a: OperatorMatrix) -> OperatorMatrix:
    return a.dag()


def matmul(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    return a @ b


def hermitian_part(a: OperatorMatrix) -> OperatorMatrix:
    """(A + A^dag) / 2."""
    return a._wrap((a.data + a.data.conj().T) / 2)


def antihermitian_part(a: OperatorMatrix) -> OperatorMatrix:
    """(A - A^dag) / 2."""
    return a._wrap((a.data - a.data.conj().T) / 2)


def operator_norm(a: OperatorMatrix | np.ndarray) -> float:
    """Largest singular value."""
    arr = a.data if isinstance(a, OperatorMatrix) else np.asarray(a)
    if arr.size == 0:
        return 0.0
    if not np.all(np.isfinite(arr)):
        raise ValueError("operator_norm requires finite entries")
    return float(np.linalg.norm(arr, 2))


def hermitian_to_real(arr: np.ndarray) -> np.ndarray:
    """Real vector of a Hermitian matrix preserving the Hilbert-Schmidt inner product.

    Layout is the real diagonal followed by sqrt(2)-scaled real and imaginary
    parts of the strict upper triangle.
    """
    arr = np.asarray(arr)
    iu = np.triu_indices(arr.shape[-1], 1)
    diag = np.real(np.diagonal(arr, axis1=-2, axis2=-1))
    upper = arr[..., iu[0], iu[1]]
    return np.concatenate(
        [diag, np.sqrt(2) * upper.real, np.sqrt(2) * upper.imag], axis=-1
    )


def real_to_hermitian(vec: np.ndarray, dim: int) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    iu = np.triu_indices(dim, 1)
    m = len(iu[0])
    out = np.zeros((dim, dim), dtype=complex)
    out[np.diag_indices(dim)] = vec[:dim]
    upper = (vec[dim : dim + m] + 1j * vec[dim + m : dim + 2 * m]) / np.sqrt(2)
    out[iu] = upper
    out[iu[1], iu[0]] = upper.conj()
    return out


@dataclass(frozen=True)
class SpanResult:
    inside: bool
    coefficients: np.ndarray
    residual: float


def span_membership(
    target: OperatorMatrix,
    generators: Sequence[OperatorMatrix],
    tol: float = SPAN_TOL,
) -> SpanResult:
    """Test whether a Hermitian ``target`` lies in the real span of Hermitian generators.

    Solves the least-squares problem over Hermitian-vectorized matrices and
    returns the minimal-norm coefficients. ``inside`` holds when the residual
    Frobenius norm is at most ``tol * max(1, ||target||_F)``.
    """
    t = hermitian_to_real(target.data)
    scale = max(1.0, float(np.linalg.norm(t)))
    if not generators:
        resid = float(np.linalg.norm(t))
        return SpanResult(resid <= tol * scale, np.zeros(0), resid)
    for g in generators:
        target._check(g)
    G = np.stack([hermitian_to_real(g.data) for g in generators], axis=1)
    # Column equilibration keeps weak generators from being cut as rank noise.
    norms = np.linalg.norm(G, axis=0)
    live = norms > 0
    coef = np.zeros(G.shape[1])
    if live.any():
        sol, *_ = np.linalg.lstsq(G[:, live] / norms[live], t, rcond=None)
        coef[live] = sol / norms[live]
    resid = float(np.linalg.norm(G @ coef - t))
    return SpanResult(resid <= tol * scale, coef, resid)
