"""Dense linear algebra and quantum-information primitives for 2- and 4-level systems.

Operators and states are plain complex ``numpy`` arrays: a Hamiltonian or
unitary is a ``(d, d)`` array, a pure state a ``(d,)`` array and a mixed
state a ``(d, d)`` density matrix.  Hamiltonians are angular frequencies
(rad/s) and times are seconds throughout.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

HERMITIAN_RTOL = 1e-12
UNITARY_ATOL = 1e-10

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |0> is the ground state; lowering maps |1> -> |0>.
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class NotHermitianError(ValueError):
    """Raised when an operator expected to be Hermitian is not."""

    def __init__(self, residual: float):
        super().__init__(f"operator is not Hermitian: relative ||H - H^dag||_F = {residual:.3e}")
        self.residual = residual


class InvalidStateError(ValueError):
    pass


def hermiticity_residual(H: np.ndarray) -> float:
    """Relative Frobenius norm of the anti-Hermitian part of ``H``."""
    H = np.asarray(H)
    scale = np.linalg.norm(H)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(H - H.conj().T) / scale)


def check_hermitian(H: np.ndarray, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    residual = hermiticity_residual(H)
    if residual > rtol:
        raise NotHermitianError(residual)
    return H


def is_unitary(U: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    U = np.asarray(U)
    return bool(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])) <= atol)


def _expm_2x2(H: np.ndarray, t: float) -> np.ndarray:
    # exp(-i t (a0 I + a.sigma)) = e^{-i a0 t} (cos(|a| t) I - i sin(|a| t) a.sigma / |a|)
    a0 = 0.5 * (H[0, 0] + H[1, 1]).real
    ax = H[1, 0].real
    ay = H[1, 0].imag
    az = 0.5 * (H[0, 0] - H[1, 1]).real
    norm = np.sqrt(ax * ax + ay * ay + az * az)
    c = np.cos(norm * t)
    # sinc form keeps the norm -> 0 limit exact
    s = t * np.sinc(norm * t / np.pi)
    U = np.array(
        [
            [c - 1j * s * az, -1j * s * (ax - 1j * ay)],
            [-1j * s * (ax + 1j * ay), c + 1j * s * az],
        ],
        dtype=complex,
    )
    return np.exp(-1j * a0 * t) * U


def expm_2x2_batch(H: np.ndarray, dt: np.ndarray | float) -> np.ndarray:
    """Vectorised ``exp(-i H_k dt_k)`` for a stack of 2x2 Hermitian matrices.

    ``H`` has shape ``(n, 2, 2)``; ``dt`` is a scalar or an array of length n.
    No Hermiticity check is performed.
    """
    H = np.asarray(H, dtype=complex)
    dt = np.broadcast_to(np.asarray(dt, dtype=float), H.shape[:1])
    a0 = 0.5 * (H[:, 0, 0] + H[:, 1, 1]).real
    ax = H[:, 1, 0].real
    ay = H[:, 1, 0].imag
    az = 0.5 * (H[:, 0, 0] - H[:, 1, 1]).real
    norm = np.sqrt(ax**2 + ay**2 + az**2)
    c = np.cos(norm * dt)
    s = dt * np.sinc(norm * dt / np.pi)
    U = np.empty(H.shape, dtype=complex)
    U[:, 0, 0] = c - 1j * s * az
    U[:, 0, 1] = -1j * s * (ax - 1j * ay)
    U[:, 1, 0] = -1j * s * (ax + 1j * ay)
    U[:, 1, 1] = c + 1j * s * az
    return U * np.exp(-1j * a0 * dt)[:, None, None]


def mat_exp(H: np.ndarray, t: float) -> np.ndarray:
    """Propagator ``U = exp(-i H t)`` for a Hermitian ``H``.

    Uses the closed-form SU(2) expression for 2x2 inputs and a Hermitian
    eigendecomposition otherwise.

    Raises:
        NotHermitianError: ``H`` deviates from Hermiticity beyond tolerance.
        ValueError: ``t`` is negative or not finite.
    """
    H = check_hermitian(H)
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"evolution time must be finite and >= 0, got {t!r}")
    if H.shape == (2, 2):
        return _expm_2x2(H, t)
    H = 0.5 * (H + H.conj().T)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def _fix_phase(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        mags = np.abs(col)
        # first component within rounding of the maximum, so ties resolve stably
        idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        V[:, k] = col * np.conj(col[idx]) / mags[idx]
    return V


def eig_hermitian(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns of ``H``.

    Each eigenvector is rotated so that its largest-magnitude component is
    real and positive.
    """
    H = check_hermitian(H)
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    return w, _fix_phase(V)


def ket(label: str) -> np.ndarray:
    """Computational basis state from a bit string, e.g. ``ket("01")``."""
    if not label or any(ch not in "01" for ch in label):
        raise ValueError(f"basis label must be a non-empty bit string, got {label!r}")
    psi = np.zeros(2 ** len(label), dtype=complex)
    psi[int(label, 2)] = 1.0
    return psi


def dm(state: np.ndarray) -> np.ndarray:
    """Density matrix of a pure state vector (density matrices pass through)."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def validate_density(rho: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    if hermiticity_residual(rho) > 1e-10:
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-9:
        raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lam_min < -atol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho


def validate_pure(psi: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise InvalidStateError(f"state vector must be 1-D, got shape {psi.shape}")
    n = np.linalg.norm(psi)
    if abs(n - 1.0) > atol:
        raise InvalidStateError(f"state vector norm is {n!r}, expected 1")
    return psi


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T


def fidelity(rho_ideal: np.ndarray, rho_exp: np.ndarray, atol: float = 1e-9) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` (not squared).

    Either argument may be a state vector or a density matrix.  When the
    ideal state is pure the shortcut ``sqrt(<psi|sigma|psi>)`` is used.
    """
    a = np.asarray(rho_ideal, dtype=complex)
    b = np.asarray(rho_exp, dtype=complex)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.ndim == 1 and b.ndim == 1:
        return float(min(1.0, abs(np.vdot(validate_pure(a), validate_pure(b)))))
    if b.ndim == 1:
        a, b = b, a
    if a.ndim == 1:
        psi = validate_pure(a)
        overlap = np.vdot(psi, validate_density(b, atol) @ psi).real
        return float(np.sqrt(np.clip(overlap, 0.0, 1.0)))
    a = validate_density(a, atol)
    b = validate_density(b, atol)
    w, V = np.linalg.eigh(0.5 * (a + a.conj().T))
    if w[-1] > 1.0 - 1e-12:
        psi = V[:, -1]
        overlap = np.vdot(psi, b @ psi).real
        return float(np.sqrt(np.clip(overlap, 0.0, 1.0)))
    s = _psd_sqrt(a)
    m = s @ b @ s
    ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(np.clip(np.sqrt(np.clip(ev, 0.0, None)).sum(), 0.0, 1.0))


def partial_trace(rho: np.ndarray, keep: int | Sequence[int], dims: Sequence[int] = (2, 2)) -> np.ndarray:
    """Reduced density matrix on the subsystems listed in ``keep``.

    Subsystem 0 is the leftmost tensor factor (the first bit of a basis label).
    """
    rho = dm(rho)
    dims = list(dims)
    n = len(dims)
    keep = [keep] if isinstance(keep, (int, np.integer)) else list(keep)
    if not keep or any(not 0 <= k < n for k in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"invalid subsystem index {keep!r} for {n} subsystems")
    if rho.shape != (int(np.prod(dims)),) * 2:
        raise ValueError(f"matrix of shape {rho.shape} does not match factors {dims}")
    keep = sorted(keep)
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(dims + dims)
    # contract each traced subsystem's row index with its column index
    for offset, k in enumerate(traced):
        axis = k - offset
        t = np.trace(t, axis1=axis, axis2=axis + t.ndim // 2)
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


def pauli_components(H: np.ndarray) -> np.ndarray:
    """Coefficients ``(Ox, Oy, Oz)`` with ``H = Tr(H) I / 2 + Ox X + Oy Y + Oz Z``."""
    H = check_hermitian(H)
    if H.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {H.shape}")
    return np.array([0.5 * np.trace(H @ P).real for P in PAULIS])


def pauli_reassemble(components: Sequence[float], trace: float = 0.0) -> np.ndarray:
    ox, oy, oz = components
    return 0.5 * trace * SIGMA_I + ox * SIGMA_X + oy * SIGMA_Y + oz * SIGMA_Z


def bloch_vector(state: np.ndarray) -> np.ndarray:
    """``(<X>, <Y>, <Z>)`` of a single-qubit state vector or density matrix."""
    rho = dm(state)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a single-qubit state, got shape {rho.shape}")
    return np.array([np.trace(rho @ P).real for P in PAULIS])


def expectation(op: np.ndarray, state: np.ndarray) -> float:
    return float(np.trace(op @ dm(state)).real)


def embed(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """Single-qubit ``op`` acting on qubit ``site`` of an ``n_qubits`` register."""
    out = np.array([[1.0 + 0j]])
    for k in range(n_qubits):
        out = np.kron(out, op if k == site else SIGMA_I)
    return out
