import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpnbound.algebra import (
    DimensionMismatch,
    OperatorMatrix,
    antihermitian_part,
    hermitian_part,
    hermitian_to_real,
    operator_norm,
    real_to_hermitian,
    span_membership,
)
from rpnbound.combinatorics import binom, rescale_factor, rescale_factor_real
from rpnbound.fock import (
    annihilation,
    build_basis,
    creation,
    number_op,
    sector_projector,
    total_number_op,
)


@pytest.mark.parametrize("modes,n", [(1, 5), (2, 4), (3, 3)])
def test_basis_dimension(modes, n):
    b = build_basis(modes, n)
    assert b.dim == math.comb(n + modes, modes)
    shell = build_basis(modes, n, "exactly")
    assert shell.dim == math.comb(n + modes - 1, modes - 1)
    assert list(b.states) == sorted(b.states)


def test_ladder_matrix_elements():
    b = build_basis(2, 3)
    a1 = annihilation(b, 0)
    v = a1.data @ b.ket(2, 1)
    assert np.allclose(v, math.sqrt(2) * b.ket(1, 1))
    assert np.allclose(a1.data @ b.ket(0, 3), 0)
    assert np.allclose(creation(b, 1).data, annihilation(b, 1).data.conj().T)


def test_commutator_below_truncation():
    n = 4
    b = build_basis(2, n)
    a = annihilation(b, 0)
    comm = (a @ a.dag() - a.dag() @ a).data
    inner = b.totals() < n
    assert np.allclose(comm[np.ix_(inner, inner)], np.eye(inner.sum()))


def test_number_ops_and_projector():
    b = build_basis(2, 3)
    N = total_number_op(b).data
    assert np.allclose(np.diag(N), b.totals())
    assert np.allclose(number_op(b, 0).data + number_op(b, 1).data, N)
    P = sector_projector(b, 2).data
    assert np.allclose(P @ P, P)
    assert np.trace(P).real == pytest.approx(3)


def test_exact_sector_rejects_ladder():
    with pytest.raises(ValueError):
        annihilation(build_basis(2, 3, "exactly"), 0)


def test_operator_basis_mismatch():
    a = OperatorMatrix(np.eye(3), "fock(m=2,n=1,at_most)")
    b = OperatorMatrix(np.eye(3), "qudit")
    with pytest.raises(DimensionMismatch):
        a @ b
    with pytest.raises(DimensionMismatch):
        OperatorMatrix(np.zeros((2, 3)))


def test_scalar_multiplication_keeps_type():
    a = OperatorMatrix(np.eye(2))
    for s in (2, 2.0, np.float64(2.0), np.complex128(2.0)):
        assert isinstance(s * a, OperatorMatrix)
        assert isinstance(a * s, OperatorMatrix)


def test_parts_and_norm():
    m = OperatorMatrix(np.array([[0, 1], [0, 0]]))
    h, ah = hermitian_part(m), antihermitian_part(m)
    assert np.allclose((h + ah).data, m.data)
    assert h.is_hermitian() and (1j * ah).is_hermitian()
    assert operator_norm(m) == pytest.approx(1.0)


def _hermitian(draw_vals, d):
    A = np.array(draw_vals[: d * d]).reshape(d, d) + 1j * np.array(draw_vals[d * d : 2 * d * d]).reshape(d, d)
    return (A + A.conj().T) / 2


floats = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(floats, min_size=18, max_size=18))
def test_hermitian_vectorisation_roundtrip(vals):
    H = _hermitian(vals, 3)
    v = hermitian_to_real(H)
    assert v.shape == (9,)
    assert np.allclose(real_to_hermitian(v, 3), H)
    assert np.linalg.norm(v) == pytest.approx(np.linalg.norm(H), rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(floats, min_size=54, max_size=54), st.lists(floats, min_size=3, max_size=3))
def test_span_membership_finds_combinations(vals, coef):
    gens = [OperatorMatrix(_hermitian(vals[18 * i : 18 * (i + 1)], 3)) for i in range(3)]
    target = OperatorMatrix(sum(c * g.data for c, g in zip(coef, gens)))
    res = span_membership(target, gens)
    assert res.inside
    rebuilt = sum(c * g.data for c, g in zip(res.coefficients, gens))
    assert np.allclose(rebuilt, target.data, atol=1e-8)


def test_span_membership_rejects_outside():
    sx = OperatorMatrix(np.array([[0, 1], [1, 0]]))
    sz = OperatorMatrix(np.diag([1.0, -1.0]))
    res = span_membership(sz, [OperatorMatrix(np.eye(2)), sx])
    assert not res.inside
    assert res.residual == pytest.approx(math.sqrt(2))


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 60), st.integers(2, 4), st.integers(1, 4))
def test_rescale_factor_counts_subsets(N, n, k):
    if not k <= n <= N:
        return
    # each k-subset sits in C(N-k, n-k) of the n-subsets
    chi = rescale_factor(N, n, k)
    assert chi == math.comb(N, n) * math.comb(n, k) / math.comb(N, k)
    assert chi == math.comb(N - k, n - k)
    assert rescale_factor_real(N, n, k) == pytest.approx(float(chi), rel=1e-12)


def test_real_binomial_is_smooth():
    assert binom(10, 2) == 45
    assert binom(10.5, 2) == pytest.approx(10.5 * 9.5 / 2, rel=1e-12)
    assert rescale_factor_real(100.5, 2, 1) == pytest.approx(99.5, rel=1e-12)
