import numpy as np
import pytest

from rpnbound.bounds import solve_sdp
from rpnbound.model import TwoModeLossModel, build_two_mode_model, check_hls, qubit_model
from rpnbound.rpn import assemble, assemble_two_mode, embed, hls_n_range, symmetrizer, two_mode_elementary


@pytest.mark.parametrize(
    "noise,inside",
    [("dephasing", True), ("amplitude_damping", True), ("depolarizing", True), ("transversal", False)],
)
def test_qubit_hls(noise, inside):
    r = check_hls(qubit_model(noise, 0.7))
    assert r.satisfied is inside
    if inside:
        assert r.residual < 1e-10
    else:
        assert r.residual > 0.1


def test_noiseless_qubit_fails_hls():
    assert not check_hls(qubit_model("dephasing", 0.0)).satisfied


def test_two_mode_single_body_hls():
    m = build_two_mode_model(TwoModeLossModel(gamma1=0.2, gamma2=0.1, N=50), superselect=True, n=1)
    assert check_hls(m).satisfied


def test_single_two_body_channel_fails_hls():
    spec = TwoModeLossModel(gamma11=1.0, N=100)
    assert not check_hls(build_two_mode_model(spec, True, 2)).satisfied


def test_two_body_channels_need_superselection():
    spec = TwoModeLossModel(gamma11=1.0, gamma12=0.5, N=100)
    assert check_hls(build_two_mode_model(spec, True, 2)).satisfied
    assert not check_hls(build_two_mode_model(spec, False, 2)).satisfied


def test_restricting_noise_orders():
    spec = TwoModeLossModel(gamma1=0.3, gamma11=1.0, gamma12=0.5, N=100)
    m = build_two_mode_model(spec, True, 2)
    assert check_hls(m, orders=[1]).satisfied
    assert check_hls(m, orders=[2]).satisfied
    assert check_hls(m, orders=[]).satisfied is False


def test_model_validation():
    with pytest.raises(ValueError):
        TwoModeLossModel(gamma1=-1, N=10)
    with pytest.raises(ValueError):
        build_two_mode_model(TwoModeLossModel(gamma11=1, N=10), n=1)
    with pytest.raises(ValueError):
        build_two_mode_model(TwoModeLossModel(gamma1=1, N=3), n=4)


def test_symmetrizer_is_projector():
    S = symmetrizer(3, 2)
    assert np.allclose(S @ S, S)
    assert np.allclose(S, S.conj().T)
    assert np.trace(S).real == pytest.approx(4)  # symmetric states of 3 qubits


def test_embed_places_operator():
    sz = np.diag([1.0, -1.0])
    full = embed(sz, (1,), 2, 2)
    assert np.allclose(full, np.kron(np.eye(2), sz))
    swap_test = embed(np.kron(sz, np.eye(2)), (1, 0), 2, 2)
    assert np.allclose(swap_test, np.kron(np.eye(2), sz))


def test_hls_n_range():
    assert hls_n_range(1, 2) == (2, 4)
    with pytest.raises(ValueError):
        hls_n_range(0, 1)


@pytest.mark.parametrize(
    "rates,n",
    [((0, 0, 1, 1, 1), 2), ((0, 0, 1, 0.2, 0), 2), ((0.3, 0.1, 1, 0.5, 0.2), 2), ((0, 0, 1, 0.2, 0), 3)],
)
def test_distinguishable_embedding_matches_bosonic(rates, n):
    spec = TwoModeLossModel(*rates, N=1000)
    bos = assemble_two_mode(spec, n, True)
    dis = assemble(two_mode_elementary(spec), spec.N, n, superselect=True, symmetric=True)
    assert dis.subchannel_count == bos.subchannel_count
    a = solve_sdp(bos.model, bos.subchannel_count).fq_per_time
    b = solve_sdp(dis.model, dis.subchannel_count).fq_per_time
    assert b == pytest.approx(a, rel=1e-6)


def test_embedding_without_superselection_counts_vacuum():
    spec = TwoModeLossModel(0.3, 0.1, N=1000)
    bos = assemble_two_mode(spec, 1, False)
    dis = assemble(two_mode_elementary(spec), spec.N, 1, superselect=False, symmetric=True)
    a = solve_sdp(bos.model, bos.subchannel_count).fq_per_time
    b = solve_sdp(dis.model, dis.subchannel_count).fq_per_time
    assert a == pytest.approx(b, rel=1e-6)
    assert a == pytest.approx(1000 / 0.1, rel=1e-6)


def test_rescaling_factors_in_channel():
    ch = assemble_two_mode(TwoModeLossModel(gamma11=1, gamma12=1, N=10), 2)
    assert ch.chi == {1: 9.0, 2: 1.0}
    assert ch.subchannel_count == 45
