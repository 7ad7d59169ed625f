import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rpnbound.bec import (
    TF_CONSTANT,
    TrapKind,
    TrapSpec,
    box_rate,
    point_bound,
    qfi_vs_n_curve,
    rb87_placeholder_trap,
    tf_rate,
)
from rpnbound.model import TwoModeLossModel


def tf_overlap_numeric(N, trap):
    """Integral of n^2 for a normalised Thomas-Fermi profile, done by quadrature."""
    from scipy.constants import hbar

    g = 4 * math.pi * hbar**2 * trap.scattering_length / trap.mass
    mu = 0.5 * hbar * trap.omega * (15 * N * trap.scattering_length / trap.l_osc) ** 0.4
    R = math.sqrt(2 * mu / (trap.mass * trap.omega**2))

    def dens(r):
        return max(mu - 0.5 * trap.mass * trap.omega**2 * r * r, 0.0) / g

    norm = quad(lambda r: 4 * math.pi * r * r * dens(r), 0, R)[0]
    return quad(lambda r: 4 * math.pi * r * r * (dens(r) / norm) ** 2, 0, R)[0]


def test_tf_rate_matches_profile_integral():
    trap = rb87_placeholder_trap()
    for N in (1e4, 1e5):
        expected = trap.K[0, 0] / 2 * tf_overlap_numeric(N, trap)
        assert tf_rate(trap, (0, 0), N) == pytest.approx(expected, rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e3, 1e7), st.floats(1.5, 100))
def test_tf_power_law(N, f):
    trap = rb87_placeholder_trap()
    ratio = tf_rate(trap, (0, 1), f * N) / tf_rate(trap, (0, 1), N)
    assert ratio == pytest.approx(f ** (-0.6), rel=1e-10)


def test_box_rate_constant():
    trap = rb87_placeholder_trap("box")
    assert box_rate(trap, (0, 0)) == pytest.approx(8.1e-20 / 2e-15)
    with pytest.raises(ValueError):
        tf_rate(trap, (0, 0), 1e4)


def test_trap_validation():
    K = np.array([[1e-20, 0], [0, 1e-20]])
    with pytest.raises(ValueError):
        TrapSpec(TrapKind.HARMONIC_TF, K, omega=1.0)
    with pytest.raises(ValueError):
        TrapSpec(TrapKind.BOX, K)
    with pytest.raises(ValueError):
        TrapSpec(TrapKind.BOX, np.array([[1, 2], [3, 4]]), volume=1.0)


def _slope(table):
    return np.polyfit(np.log(table.N), np.log(table.fq_per_time), 1)[0]


def test_thomas_fermi_slope():
    Ns = np.geomspace(1e4, 1e6, 5)
    trap = rb87_placeholder_trap()
    assert _slope(qfi_vs_n_curve(trap, (0, 0), Ns)) == pytest.approx(0.6, abs=0.02)
    assert _slope(qfi_vs_n_curve(trap, (0, 0), Ns, method="analytic")) == pytest.approx(0.6, abs=1e-9)


def test_box_and_single_body_slopes():
    Ns = np.geomspace(1e4, 1e6, 5)
    assert _slope(qfi_vs_n_curve(rb87_placeholder_trap("box"), (0, 0), Ns)) == pytest.approx(0.0, abs=0.02)
    assert _slope(qfi_vs_n_curve(None, (0.1, 0.1), Ns, n=1)) == pytest.approx(1.0, abs=1e-6)


def test_single_body_dominates_at_large_n():
    # adding single-body loss to the TF two-body rates can only lower the bound
    trap = rb87_placeholder_trap()
    Ns = [1e4, 1e5]
    both = qfi_vs_n_curve(trap, (0.05, 0.05), Ns).fq_per_time
    two = qfi_vs_n_curve(trap, (0, 0), Ns).fq_per_time
    assert np.all(both <= two * (1 + 1e-6))


def test_point_bound_methods():
    spec = TwoModeLossModel(0.1, 0.1, 1.0, 0.5, 0.2, N=1e4)
    sdp = point_bound(spec, method="sdp")
    ana = point_bound(spec, method="analytic")
    assert ana <= sdp * (1 + 1e-6)
    with pytest.raises(ValueError):
        point_bound(TwoModeLossModel(gamma11=1, N=100), method="analytic")
    with pytest.raises(ValueError):
        point_bound(spec, method="nope")


def test_analytic_monotone_in_n_for_tf_rates():
    trap = rb87_placeholder_trap()
    t = qfi_vs_n_curve(trap, (0, 0), np.geomspace(1e3, 1e6, 7), method="analytic")
    assert np.all(np.diff(t.fq_per_time) > 0)


def test_rate_table_rows():
    t = qfi_vs_n_curve(rb87_placeholder_trap(), (0.1, 0.0), [1e4, 2e4], method="analytic")
    rows = list(t.rows())
    assert len(rows) == 2
    assert rows[0]["gamma22"] == 0.0 and rows[0]["gamma1"] == 0.1
    assert TF_CONSTANT > 0
