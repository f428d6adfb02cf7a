import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from snacsim import core

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
PLUS_X = np.array([1, 1], dtype=complex) / math.sqrt(2)
MINUS_X = np.array([1, -1], dtype=complex) / math.sqrt(2)
PLUS_Y = np.array([1, 1j], dtype=complex) / math.sqrt(2)


def random_hermitian(rng, d, scale=1.0):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (A + A.conj().T)


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    A = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def taylor_expm(A, terms=30):
    # scaling and squaring with a plain Taylor series
    norm = np.abs(A).sum(axis=1).max()
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    B = A / 2**s
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ B / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


@given(seed=st.integers(0, 2**31), d=st.sampled_from([2, 4]), t=st.floats(0, 3))
def test_mat_exp_matches_taylor(seed, d, t):
    H = random_hermitian(np.random.default_rng(seed), d)
    U = core.mat_exp(H, t)
    np.testing.assert_allclose(U, taylor_expm(-1j * H * t), atol=1e-10)
    assert core.is_unitary(U)


@given(seed=st.integers(0, 2**31), t=st.floats(0, 2))
def test_expm_batch_matches_scalar(seed, t):
    rng = np.random.default_rng(seed)
    Hs = np.array([random_hermitian(rng, 2) for _ in range(4)])
    U = core.expm_2x2_batch(Hs, t)
    for H, u in zip(Hs, U):
        np.testing.assert_allclose(u, core.mat_exp(H, t), atol=1e-12)


def test_mat_exp_rejects_bad_input(rng):
    H = random_hermitian(rng, 2)
    with pytest.raises(ValueError):
        core.mat_exp(H, -1.0)
    with pytest.raises(ValueError):
        core.mat_exp(H, float("nan"))
    bad = H.copy()
    bad[0, 1] += 0.1
    with pytest.raises(core.NotHermitianError) as err:
        core.mat_exp(bad, 1.0)
    assert err.value.residual > 1e-3


def test_zero_time_is_identity(rng):
    np.testing.assert_allclose(core.mat_exp(random_hermitian(rng, 4), 0.0), np.eye(4), atol=1e-15)


def test_eig_hermitian_phase_convention(rng):
    w, V = core.eig_hermitian(random_hermitian(rng, 4))
    assert np.all(np.diff(w) >= 0)
    for k in range(4):
        j = np.argmax(np.abs(V[:, k]))
        assert abs(V[j, k].imag) < 1e-12 and V[j, k].real > 0


def test_ket_labels():
    np.testing.assert_array_equal(core.ket("01"), [0, 1, 0, 0])
    np.testing.assert_array_equal(core.ket("1"), [0, 1])
    with pytest.raises(ValueError):
        core.ket("0x")


def test_fidelity_pure_and_mixed(rng):
    psi = PLUS_X
    assert core.fidelity(psi, psi) == pytest.approx(1.0)
    assert core.fidelity(core.ket("0"), core.ket("1")) == pytest.approx(0.0, abs=1e-12)
    assert core.fidelity(psi, core.ket("0")) == pytest.approx(math.sqrt(0.5))
    rho = random_density(rng, 4)
    assert core.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)


@given(seed=st.integers(0, 2**31))
def test_fidelity_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    a, b = random_density(rng, 2), random_density(rng, 2)
    f = core.fidelity(a, b)
    assert -1e-12 <= f <= 1 + 1e-12
    assert f == pytest.approx(core.fidelity(b, a), abs=1e-8)


def test_fidelity_pure_shortcut_agrees_with_general(rng):
    psi = PLUS_Y
    rho = random_density(rng, 2)
    assert core.fidelity(psi, rho) == pytest.approx(core.fidelity(core.dm(psi), rho), abs=1e-9)


def test_invalid_states_raise():
    with pytest.raises(core.InvalidStateError):
        core.validate_density(np.diag([0.7, 0.7]).astype(complex))
    with pytest.raises(core.InvalidStateError):
        core.validate_pure(np.array([1.0, 1.0], dtype=complex))


def partial_trace_oracle(rho, keep):
    r = rho.reshape(2, 2, 2, 2)
    out = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                out[i, j] += r[i, k, j, k] if keep == 0 else r[k, i, k, j]
    return out


@given(seed=st.integers(0, 2**31), keep=st.sampled_from([0, 1]))
def test_partial_trace_matches_index_sum(seed, keep):
    rho = random_density(np.random.default_rng(seed), 4)
    np.testing.assert_allclose(core.partial_trace(rho, keep), partial_trace_oracle(rho, keep), atol=1e-14)


def test_partial_trace_of_product():
    a, b = core.dm(PLUS_X), core.dm(core.ket("1"))
    np.testing.assert_allclose(core.partial_trace(np.kron(a, b), 0), a, atol=1e-15)
    np.testing.assert_allclose(core.partial_trace(np.kron(a, b), 1), b, atol=1e-15)


@given(arrays(float, 3, elements=finite))
def test_pauli_round_trip(c):
    H = core.pauli_reassemble(c)
    np.testing.assert_allclose(core.pauli_components(H), c, atol=1e-12)


def test_bloch_and_embed():
    np.testing.assert_allclose(core.bloch_vector(MINUS_X), [-1, 0, 0], atol=1e-15)
    Z1 = core.embed(core.SIGMA_Z, 1, 2)
    np.testing.assert_allclose(Z1, np.kron(np.eye(2), core.SIGMA_Z))
    assert core.expectation(Z1, core.ket("01")) == pytest.approx(-1.0)
