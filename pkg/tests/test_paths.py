import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from snacsim.models import COUPLING_J, IDLE_DETUNING, MHZ, NS, ControlModel
from snacsim.paths import (
    PathSchedule,
    inject_phase_errors,
    iswap_schedule,
    jumping_schedule,
    lzt_schedule,
    phase_ledger,
    pi_phase_durations,
    snac_metric,
    snac_running_integral,
    snac_schedule,
    traditional_metric,
    traditional_metric_max,
)

LAT = ControlModel("latitude", Omega0=10 * MHZ)
TWO = ControlModel("two-qubit-varphi", J=COUPLING_J)


def test_staircase_holds():
    s = jumping_schedule(-math.pi, 0.0, 5, 1.0, 250 * NS)
    np.testing.assert_allclose(s.midpoints / math.pi, [-0.9, -0.7, -0.5, -0.3, -0.1])
    assert all(seg.is_hold for seg in s.segments)
    assert s.T == pytest.approx(250 * NS)


@given(st.integers(1, 12), st.floats(0.0, 1.0))
def test_ramps_cover_complement_of_jumps(N, gamma):
    s = jumping_schedule(-math.pi, 0.0, N, gamma, 100 * NS)
    ramped = sum(abs(seg.lambda_end - seg.lambda_start) for seg in s.segments)
    assert ramped == pytest.approx((1 - gamma) * math.pi, abs=1e-12)
    np.testing.assert_allclose(s.midpoints, -math.pi + math.pi * (2 * np.arange(N) + 1) / (2 * N), atol=1e-12)


def test_ramp_is_continuous():
    s = jumping_schedule(-math.pi, 0.0, 5, 0.0, 250 * NS)
    t = np.linspace(0, 250 * NS, 1001)
    np.testing.assert_allclose(s.lambda_at(t), -math.pi + math.pi * t / (250 * NS), atol=1e-12)


def test_schedule_validation():
    with pytest.raises(ValueError):
        jumping_schedule(0, 1, 5, 1.5, 1e-7)
    with pytest.raises(ValueError):
        jumping_schedule(0, 1, 0, 1.0, 1e-7)
    with pytest.raises(ValueError):
        jumping_schedule(0, 1, 5, 1.0, 0.0)
    with pytest.raises(ValueError):
        jumping_schedule(1, 1, 5, 1.0, 1e-7)


def test_pi_phase_durations_two_qubit():
    s = snac_schedule(0.0, math.pi, 5, TWO)
    expected = math.pi * np.sin(s.midpoints) / (2 * COUPLING_J)
    np.testing.assert_allclose(s.durations, expected, rtol=1e-12)
    np.testing.assert_allclose(phase_ledger(s, TWO.gap).chi, math.pi, rtol=1e-12)
    with pytest.raises(ValueError):
        pi_phase_durations([1.0], lambda lam: 0.0)


def test_json_round_trip():
    for s in (snac_schedule(0.0, math.pi, 5, TWO), lzt_schedule(IDLE_DETUNING, -IDLE_DETUNING, 88 * NS, 20)):
        back = PathSchedule.from_json(s.to_json())
        np.testing.assert_allclose(back.durations, s.durations, rtol=1e-12)
        np.testing.assert_allclose([g.lambda_start for g in back.segments], [g.lambda_start for g in s.segments], rtol=1e-12)
        assert back.path_kind == s.path_kind and back.gamma == s.gamma


@given(st.lists(st.floats(-0.5, 0.5), min_size=5, max_size=5))
def test_inject_phase_errors(deltas):
    s = snac_schedule(0.0, math.pi, 5, TWO)
    d = np.array(deltas) * math.pi
    out = inject_phase_errors(s, phase_ledger(s, TWO.gap), d)
    np.testing.assert_allclose(phase_ledger(out, TWO.gap).chi, math.pi + d, rtol=1e-10)


def test_inject_rejects_wrong_length():
    s = snac_schedule(0.0, math.pi, 5, TWO)
    with pytest.raises(ValueError):
        inject_phase_errors(s, phase_ledger(s, TWO.gap), [0.1])


def test_lzt_and_iswap_schedules():
    s = lzt_schedule(IDLE_DETUNING, -IDLE_DETUNING, 88 * NS, 100)
    assert s.N == 100 and s.T == pytest.approx(88 * NS)
    assert s.lambda_at(0.0) == pytest.approx(IDLE_DETUNING)
    i = iswap_schedule(COUPLING_J, 27 * NS)
    assert i.T == pytest.approx(27 * NS) and i.segments[0].lambda_start == 0.0


def metric_by_quadrature(s, gap_fn, n=20000):
    # dense grid on t; jumps added explicitly where lambda is discontinuous
    t = np.linspace(0, s.T, n + 1)
    lam = s.lambda_at(t)
    chi = np.concatenate([[0.0], np.cumsum([gap_fn(0.5 * (a + b)) for a, b in zip(lam[:-1], lam[1:])] * np.diff(t))])
    z = np.cumsum(np.concatenate([[lam[0] - s.lambda0], np.diff(lam), [s.lambdaT - lam[-1]]]) * np.exp(1j * np.concatenate([chi, [chi[-1]]])))
    return np.abs(z).max() / abs(s.lambdaT - s.lambda0)


@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0])
def test_snac_metric_matches_quadrature(gamma):
    s = jumping_schedule(-math.pi, 0.0, 5, gamma, 250 * NS)
    assert snac_metric(s, LAT.gap, 512) == pytest.approx(metric_by_quadrature(s, LAT.gap), abs=2e-3)


def test_snac_metric_ideal_schedule():
    # pi phases make successive jumps alternate in sign: +h, -2h, +2h, ..., -h
    s = jumping_schedule(-math.pi, 0.0, 5, 1.0, 250 * NS)
    z = snac_running_integral(s, LAT.gap)
    assert abs(z[-1]) < 1e-12
    assert snac_metric(s, LAT.gap) == pytest.approx(0.1, rel=1e-9)


def test_traditional_metric_values():
    lat = traditional_metric_max(jumping_schedule(-math.pi, 0.0, 5, 0.0, 250 * NS), LAT)
    assert lat.angular_rate == pytest.approx(0.2, rel=1e-12)
    assert lat.direct == pytest.approx(0.1, rel=1e-6)
    hold = traditional_metric(jumping_schedule(-math.pi, 0.0, 5, 1.0, 250 * NS), LAT, 10 * NS)
    assert hold.direct == 0.0 and hold.angular_rate == 0.0
