import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from snacsim.models import COUPLING_J, MHZ, NS, ControlModel
from snacsim.noise import (
    NoiseConfig,
    WaveformTrace,
    apply_gaussian_noise,
    read_trace_csv,
    realized_snr,
    sample_schedule,
    write_trace_csv,
)
from snacsim.paths import jumping_schedule, snac_schedule

LAT = ControlModel("latitude", Omega0=10 * MHZ)


@pytest.fixture(scope="module")
def clean():
    return sample_schedule(jumping_schedule(-math.pi, 0.0, 5, 1.0, 250 * NS), LAT)


def test_sampling_grid(clean):
    assert clean.M == 250 and clean.dt == pytest.approx(1 * NS)
    # first hold sits at phi = -0.9 pi
    ox, oy = clean.channels["omega_x"][0], clean.channels["omega_y"][0]
    assert math.atan2(oy, ox) == pytest.approx(-0.9 * math.pi)
    assert clean.channels["omega_z"] == pytest.approx(0.0, abs=1e-6 * MHZ)


def test_trace_is_read_only(clean):
    with pytest.raises(ValueError):
        clean.channels["omega_x"][0] = 0.0


def test_unequal_channels_rejected():
    with pytest.raises(ValueError):
        WaveformTrace(1e9, {"a": np.zeros(3), "b": np.zeros(4)})


@given(snr=st.floats(0.0, 40.0), eta=st.sampled_from([1, 2, 5]))
def test_calibrated_snr_monte_carlo(clean, snr, eta):
    vals = [realized_snr(clean, apply_gaussian_noise(clean, NoiseConfig(snr, eta * NS, seed))) for seed in range(200)]
    # average noise power, not average dB, is calibrated
    mean_power = np.mean([10 ** (-v / 10) for v in vals])
    assert -10 * math.log10(mean_power) == pytest.approx(snr, abs=0.35 * math.sqrt(eta))


def test_noise_is_block_held(clean):
    noisy = apply_gaussian_noise(clean, NoiseConfig(10.0, 5 * NS, seed=3))
    d = (noisy.channels["omega_x"] - clean.channels["omega_x"]).reshape(-1, 5)
    np.testing.assert_allclose(d, d[:, :1].repeat(5, axis=1), atol=1e-9)
    assert np.unique(np.round(d[:, 0], 3)).size > 40
    np.testing.assert_array_equal(noisy.channels["omega_z"], clean.channels["omega_z"])


def test_seeded_and_reproducible(clean):
    a = apply_gaussian_noise(clean, NoiseConfig(10.0, seed=7))
    b = apply_gaussian_noise(clean, NoiseConfig(10.0, seed=7))
    c = apply_gaussian_noise(clean, NoiseConfig(10.0, seed=8))
    np.testing.assert_array_equal(a.channels["omega_x"], b.channels["omega_x"])
    assert not np.array_equal(a.channels["omega_x"], c.channels["omega_x"])


def test_infinite_snr_is_noiseless(clean):
    out = apply_gaussian_noise(clean, NoiseConfig(math.inf))
    assert realized_snr(clean, out) == math.inf


def test_literal_mode(clean):
    out = apply_gaussian_noise(clean, NoiseConfig(10.0, 5 * NS, mode="literal", seed=1))
    # multiplicative: relative deviation is constant over each holding block
    rel = (out.channels["omega_x"] / clean.channels["omega_x"]).reshape(-1, 5)
    np.testing.assert_allclose(rel, rel[:, :1].repeat(5, axis=1), rtol=1e-9)
    np.testing.assert_array_equal(out.channels["omega_z"], clean.channels["omega_z"])
    with pytest.raises(ValueError):
        NoiseConfig(0.0, mode="literal")


def test_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig(10.0, mode="pink")
    with pytest.raises(ValueError):
        NoiseConfig(10.0, eta=1.5 * NS).block_samples(1e9)


def test_two_qubit_channel():
    m = ControlModel("two-qubit-varphi", J=COUPLING_J)
    tr = sample_schedule(snac_schedule(0.0, math.pi, 5, m), m)
    noisy = apply_gaussian_noise(tr, NoiseConfig(20.0, seed=0))
    assert noisy.names == ("delta",) and np.isfinite(realized_snr(tr, noisy))


def test_csv_round_trip(clean, tmp_path):
    path = tmp_path / "trace.csv"
    write_trace_csv(clean, path)
    back = read_trace_csv(path)
    assert back.sample_rate == pytest.approx(clean.sample_rate, rel=1e-9)
    np.testing.assert_allclose(back.stacked(), clean.stacked(), rtol=1e-12, atol=1e-6)
    assert path.read_text().splitlines()[0] == "time_ns,omega_x_mhz,omega_y_mhz,omega_z_mhz"
