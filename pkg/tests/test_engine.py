import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from snacsim import core
from snacsim.engine import (
    DecoherenceParams,
    liouvillian,
    project_physical,
    propagate_lindblad,
    propagate_unitary,
    tomography_1q,
    tomography_2q,
    transferred_population,
)
from snacsim.models import COUPLING_J, IDLE_DETUNING, MHZ, NS, US, ControlModel
from snacsim.noise import NoiseConfig, apply_gaussian_noise, sample_schedule
from snacsim.paths import iswap_schedule, jumping_schedule, lzt_schedule

LAT = ControlModel("latitude", Omega0=10 * MHZ)
LON = ControlModel("longitude", Omega0=10 * MHZ)
ISW = ControlModel("iswap", J=COUPLING_J)


@given(st.floats(1.0, 60.0))
def test_iswap_rabi_closed_form(T_ns):
    traj = propagate_unitary(iswap_schedule(COUPLING_J, T_ns * NS), ISW, core.ket("10"), record=False)
    assert transferred_population(traj, "Q4") == pytest.approx(math.sin(COUPLING_J * T_ns * NS) ** 2, abs=1e-10)


def test_single_qubit_rabi():
    # resonant drive about x from |0>: P1 = sin^2(Omega0 t / 2)
    s = jumping_schedule(-0.1, 0.1, 1, 1.0, 37 * NS, "latitude")
    traj = propagate_unitary(s, ControlModel("latitude", Omega0=10 * MHZ), core.ket("0"))
    assert traj.populations()[-1, 1] == pytest.approx(math.sin(0.5 * 10 * MHZ * 37 * NS) ** 2, abs=1e-10)


def test_latitude_transfer_and_norm():
    s = jumping_schedule(-math.pi, 0.0, 5, 1.0, 250 * NS)
    traj = propagate_unitary(s, LAT, LAT.eigenstates(-math.pi)[1])
    assert core.fidelity(LAT.eigenstates(0.0)[1], traj.final) > 0.999
    assert traj.diagnostics["norm_drift"] < 1e-9
    assert traj.times[-1] == pytest.approx(250 * NS)
    assert np.all(np.diff(traj.times) > 0)


@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0])
def test_dt_halving(gamma):
    s = jumping_schedule(-math.pi, 0.0, 5, gamma, 200 * NS, "longitude")
    psi0 = LON.eigenstates(-math.pi)[1]
    a = propagate_unitary(s, LON, psi0, dt=0.1 * NS, record=False).final
    b = propagate_unitary(s, LON, psi0, dt=0.05 * NS, record=False).final
    assert core.fidelity(a, b) == pytest.approx(1.0, abs=1e-9)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        propagate_unitary(iswap_schedule(COUPLING_J, 10 * NS), ISW, core.ket("0"))


def test_t1_decay_exact():
    T1 = 5 * US
    dec = DecoherenceParams((T1,), (2 * T1,))
    s = jumping_schedule(-0.1, 0.1, 1, 1.0, 2 * US, "longitude")  # hold at theta = 0, H diagonal
    traj = propagate_lindblad(s, LON, core.ket("1"), dec, dt=1 * NS)
    np.testing.assert_allclose(traj.populations()[:, 1], np.exp(-traj.times / T1), rtol=1e-6)


def test_pure_dephasing_coherence():
    T1, T2 = 20 * US, 4 * US
    dec = DecoherenceParams((T1,), (T2,))
    s = jumping_schedule(-0.1, 0.1, 1, 1.0, 1 * US, "longitude")
    traj = propagate_lindblad(s, LON, np.array([1, 1], dtype=complex) / math.sqrt(2), dec, dt=1 * NS)
    coh = np.abs(traj.density_matrices()[:, 0, 1])
    np.testing.assert_allclose(coh, 0.5 * np.exp(-traj.times / T2), rtol=1e-6)


def test_lindblad_without_rates_matches_unitary():
    s = lzt_schedule(IDLE_DETUNING, -IDLE_DETUNING, 88 * NS, 200)
    m = ControlModel("lzt-delta", J=COUPLING_J)
    u = propagate_unitary(s, m, core.ket("10"), record=False).final
    r = propagate_lindblad(s, m, core.ket("10"), DecoherenceParams.none(2), record=False).final
    np.testing.assert_allclose(r, core.dm(u), atol=1e-10)


def test_lindblad_invariants_two_qubit():
    s = lzt_schedule(IDLE_DETUNING, -IDLE_DETUNING, 300 * NS, 300)
    m = ControlModel("lzt-delta", J=COUPLING_J)
    dec = DecoherenceParams((13.4 * US, 22.1 * US), (10.8 * US, 4.5 * US))
    traj = propagate_lindblad(s, m, core.ket("10"), dec)
    assert traj.diagnostics["trace_drift"] < 1e-9
    assert traj.diagnostics["min_eigenvalue"] > -1e-7
    assert 0.0 < transferred_population(traj) < 1.0


def test_liouvillian_trace_preserving(rng):
    A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = A + A.conj().T
    ops = DecoherenceParams((1e-5, 2e-5), (1e-5, 3e-5)).collapse_operators()
    L = liouvillian(H, ops)
    # trace functional vec(I)^T annihilates the generator
    np.testing.assert_allclose(np.eye(4).reshape(-1, order="F") @ L, 0.0, atol=1e-6)


def test_decoherence_params_validation():
    with pytest.raises(ValueError):
        DecoherenceParams((1e-6,), (3e-6,))
    with pytest.raises(ValueError):
        DecoherenceParams((1e-6,), (1e-6, 1e-6))
    assert DecoherenceParams((1e-6,), (2e-6,)).Tphi[0] == math.inf


def test_noisy_trace_drive():
    s = jumping_schedule(-math.pi, 0.0, 5, 1.0, 250 * NS)
    clean = sample_schedule(s, LAT)
    psi0, target = LAT.eigenstates(-math.pi)[1], LAT.eigenstates(0.0)[1]
    f_clean = core.fidelity(target, propagate_unitary(clean, LAT, psi0, dt=None).final)
    assert f_clean > 0.999
    noisy = apply_gaussian_noise(clean, NoiseConfig(0.0, seed=0))
    assert core.fidelity(target, propagate_unitary(noisy, LAT, psi0, dt=None).final) < f_clean


def test_tomography_exact_and_shots(rng):
    psi = LAT.eigenstates(-0.3)[1]
    np.testing.assert_allclose(tomography_1q(psi), core.dm(psi), atol=1e-12)
    est = tomography_1q(psi, shots=2000, seed=5)
    core.validate_density(est)
    assert core.fidelity(psi, est) > 0.97
    rho = project_physical(np.diag([1.2, -0.2]).astype(complex))
    np.testing.assert_allclose(rho, np.diag([1.0, 0.0]), atol=1e-12)
    bell = (core.ket("01") - core.ket("10")) / math.sqrt(2)
    np.testing.assert_allclose(tomography_2q(bell), core.dm(bell), atol=1e-12)
    core.validate_density(tomography_2q(bell, shots=500, seed=1))


def test_transferred_population_labels():
    assert transferred_population(core.ket("01"), "Q4") == pytest.approx(1.0)
    assert transferred_population(core.ket("01"), "Q3") == pytest.approx(0.0)
    assert transferred_population(core.ket("01"), "01") == pytest.approx(1.0)


def test_trajectory_outputs(tmp_path):
    s = jumping_schedule(-math.pi, 0.0, 5, 1.0, 250 * NS)
    traj = propagate_unitary(s, LAT, LAT.eigenstates(-math.pi)[1], dt=1 * NS)
    traj.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == len(traj.times) + 1
    summary = traj.summary(LAT.eigenstates(0.0)[1])
    assert summary["fidelity"] > 0.999
    assert '"fidelity"' in traj.summary_json(LAT.eigenstates(0.0)[1])
