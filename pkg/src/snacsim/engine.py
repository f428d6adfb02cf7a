"""Time propagation of qubit states under piecewise-defined Hamiltonians.

Both solvers share one stepping scheme.  Holds and waveform samples are
constant over a step and are exponentiated exactly; linear ramps use the
fourth-order Magnus expansion with two Gauss-Legendre nodes per step.  For
the open system the same expansion is applied to the Lindblad generator in
column-stacked superoperator form, so with all rates zero the two solvers
agree to rounding error.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg

from . import core
from .models import NS, ControlModel, DeviceParams
from .noise import WaveformTrace
from .paths import PathSchedule

DEFAULT_DT = 0.1 * NS
_GAUSS = 0.5 / math.sqrt(3.0)
_MAGNUS_C = math.sqrt(3.0) / 12.0


@dataclass(frozen=True)
class _Piece:
    duration: float
    H_a: np.ndarray  # Hamiltonian at the first Gauss node (or the constant value)
    H_b: np.ndarray | None  # second node; None for constant pieces
    steps: int


def _pieces(drive: PathSchedule | WaveformTrace, model: ControlModel, dt: float | None) -> list[_Piece]:
    if dt is not None and not dt > 0:
        raise ValueError(f"time step must be positive, got {dt!r}")
    out: list[_Piece] = []
    if isinstance(drive, WaveformTrace):
        Hs = model.hamiltonians_from_channels(drive.stacked(model.channel_names))
        n = 1 if dt is None else max(1, math.ceil(drive.dt / dt - 1e-9))
        return [_Piece(drive.dt, H, None, n) for H in Hs]
    step = DEFAULT_DT if dt is None else dt
    for seg in drive.segments:
        n = max(1, math.ceil(seg.duration / step - 1e-9))
        if seg.is_hold:
            out.append(_Piece(seg.duration, model.hamiltonian(seg.lambda_start), None, n))
            continue
        # each ramp step becomes its own piece carrying both Gauss-node Hamiltonians
        tau = seg.duration / n
        dl = (seg.lambda_end - seg.lambda_start) / n
        for j in range(n):
            lam = seg.lambda_start + (j + 0.5) * dl
            out.append(_Piece(tau, model.hamiltonian(lam - _GAUSS * dl), model.hamiltonian(lam + _GAUSS * dl), 1))
    return out


def _effective_h(p: _Piece, tau: float) -> np.ndarray:
    if p.H_b is None:
        return p.H_a
    comm = p.H_b @ p.H_a - p.H_a @ p.H_b
    return 0.5 * (p.H_a + p.H_b) - 1j * _MAGNUS_C * tau * comm


def _step_unitaries(pieces: Sequence[_Piece]) -> Iterator[tuple[float, np.ndarray, int]]:
    """Yield ``(tau, U, repeats)`` for every piece, batching the exponentials."""
    if not pieces:
        return
    d = pieces[0].H_a.shape[0]
    taus = np.array([p.duration / p.steps for p in pieces])
    Heff = np.stack([_effective_h(p, t) for p, t in zip(pieces, taus)])
    if d == 2:
        Us = core.expm_2x2_batch(Heff, taus)
    else:
        Heff = 0.5 * (Heff + np.conj(np.swapaxes(Heff, 1, 2)))
        w, V = np.linalg.eigh(Heff)
        Us = (V * np.exp(-1j * w * taus[:, None])[:, None, :]) @ np.conj(np.swapaxes(V, 1, 2))
    for p, tau, U in zip(pieces, taus, Us):
        yield tau, U, p.steps


@dataclass
class Trajectory:
    """Recorded states along a propagation.

    ``states`` holds state vectors ``(n, d)`` for unitary runs and density
    matrices ``(n, d, d)`` for open-system runs.
    """

    times: np.ndarray
    states: np.ndarray
    dims: tuple[int, ...]
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_pure(self) -> bool:
        return self.states.ndim == 2

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def density_matrices(self) -> np.ndarray:
        if self.is_pure:
            return np.einsum("ni,nj->nij", self.states, self.states.conj())
        return self.states

    def populations(self) -> np.ndarray:
        if self.is_pure:
            return np.abs(self.states) ** 2
        return np.real(np.einsum("nii->ni", self.states))

    def bloch_vectors(self) -> np.ndarray:
        if self.dims != (2,):
            raise ValueError("Bloch vectors are defined for single-qubit runs only")
        return np.array([core.bloch_vector(s) for s in self.states])

    def qubit_excitations(self) -> np.ndarray:
        """Excited-state population of each qubit at every recorded time."""
        pops = self.populations()
        n = len(self.dims)
        labels = [format(i, f"0{n}b") for i in range(2**n)]
        return np.column_stack([pops[:, [i for i, b in enumerate(labels) if b[q] == "1"]].sum(axis=1) for q in range(n)])

    def to_csv(self, path: str | Path) -> None:
        n = len(self.dims)
        labels = [format(i, f"0{n}b") for i in range(2**n)]
        pops = self.populations()
        header = ["time_ns", *(f"p_{b}" for b in labels)]
        cols = [self.times / NS, *pops.T]
        if self.dims == (2,):
            bv = self.bloch_vectors()
            header += ["bloch_x", "bloch_y", "bloch_z"]
            cols += list(bv.T)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in zip(*cols):
                w.writerow([repr(float(v)) for v in row])

    def summary(self, target: np.ndarray | None = None) -> dict:
        out = {"duration_ns": float(self.times[-1] / NS), "n_records": int(len(self.times))}
        if len(self.dims) == 2:
            out["population_Q4"] = transferred_population(self, "Q4")
        if target is not None:
            out["fidelity"] = core.fidelity(target, self.final)
        out.update({k: v for k, v in self.diagnostics.items() if np.isscalar(v)})
        return out

    def summary_json(self, target: np.ndarray | None = None) -> str:
        return json.dumps(self.summary(target), indent=2)


def _dims_for(d: int) -> tuple[int, ...]:
    return (2,) if d == 2 else (2, 2)


def propagate_unitary(
    drive: PathSchedule | WaveformTrace,
    model: ControlModel,
    psi0: np.ndarray,
    dt: float | None = DEFAULT_DT,
    record: bool = True,
) -> Trajectory:
    """Integrate the Schrodinger equation.

    ``psi0`` may also be a density matrix, which is then evolved as ``U rho U^dag``.
    With ``record=False`` only the initial and final states are kept.
    """
    state = np.array(psi0, dtype=complex)
    if state.shape[0] != model.dim:
        raise ValueError(f"state dimension {state.shape[0]} does not match model dimension {model.dim}")
    if state.ndim == 1:
        core.validate_pure(state)
    else:
        core.validate_density(state)
    pieces = _pieces(drive, model, dt)
    t = 0.0
    times, states = [0.0], [state.copy()]
    for tau, U, reps in _step_unitaries(pieces):
        for _ in range(reps):
            state = U @ state if state.ndim == 1 else U @ state @ U.conj().T
            t += tau
            if record:
                times.append(t)
                states.append(state)
    if not record and t > 0:
        times.append(t)
        states.append(state)
    norm = np.linalg.norm(state) if state.ndim == 1 else np.trace(state).real
    diag = {"norm_drift": float(abs(norm - 1.0))}
    return Trajectory(np.array(times), np.array(states), _dims_for(model.dim), diag)


# ----------------------------------------------------------------------------
# Open system
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DecoherenceParams:
    """Per-qubit relaxation and Ramsey times (s); ``inf`` switches a channel off."""

    T1: tuple[float, ...]
    T2: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "T1", tuple(float(x) for x in self.T1))
        object.__setattr__(self, "T2", tuple(float(x) for x in self.T2))
        if len(self.T1) != len(self.T2):
            raise ValueError("T1 and T2 need one entry per qubit")
        for t1, t2 in zip(self.T1, self.T2):
            if not t1 > 0 or not t2 > 0:
                raise ValueError(f"coherence times must be positive, got T1={t1!r}, T2={t2!r}")
            if t2 > 2 * t1 * (1 + 1e-12):
                raise ValueError(f"unphysical T2={t2!r} > 2 T1={2 * t1!r}")

    @property
    def Tphi(self) -> tuple[float, ...]:
        out = []
        for t1, t2 in zip(self.T1, self.T2):
            rate = 1.0 / t2 - 0.5 / t1
            out.append(math.inf if rate <= 1e-15 / t2 else 1.0 / rate)
        return tuple(out)

    @classmethod
    def from_devices(cls, devices: Sequence[DeviceParams], T2_override: Sequence[float | None] | None = None) -> "DecoherenceParams":
        T2 = []
        for k, dev in enumerate(devices):
            value = T2_override[k] if T2_override is not None and T2_override[k] is not None else dev.T2
            if value is None:
                raise ValueError(f"{dev.name} has no T2 at this bias point; supply an override")
            T2.append(value)
        return cls(tuple(d.T1 for d in devices), tuple(T2))

    @classmethod
    def none(cls, n_qubits: int) -> "DecoherenceParams":
        return cls((math.inf,) * n_qubits, (math.inf,) * n_qubits)

    def collapse_operators(self) -> list[np.ndarray]:
        n = len(self.T1)
        ops = []
        for q, (t1, tphi) in enumerate(zip(self.T1, self.Tphi)):
            if math.isfinite(t1):
                ops.append(math.sqrt(1.0 / t1) * core.embed(core.SIGMA_MINUS, q, n))
            if math.isfinite(tphi):
                ops.append(math.sqrt(0.5 / tphi) * core.embed(core.SIGMA_Z, q, n))
        return ops


def liouvillian(H: np.ndarray, collapse_ops: Sequence[np.ndarray] = ()) -> np.ndarray:
    """Lindblad generator acting on column-stacked ``vec(rho)``."""
    d = H.shape[0]
    eye = np.eye(d)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for c in collapse_ops:
        cdc = c.conj().T @ c
        L = L + np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye)
    return L


def _dissipator(collapse_ops: Sequence[np.ndarray], d: int) -> np.ndarray:
    return liouvillian(np.zeros((d, d), dtype=complex), collapse_ops)


def propagate_lindblad(
    drive: PathSchedule | WaveformTrace,
    model: ControlModel,
    rho0: np.ndarray,
    dec: DecoherenceParams,
    dt: float | None = DEFAULT_DT,
    record: bool = True,
) -> Trajectory:
    """Integrate the Lindblad master equation with relaxation and pure dephasing.

    Trace drift and the most negative eigenvalue of the recorded states are
    reported in ``diagnostics``; states are never renormalised.
    """
    d = model.dim
    n_qubits = 1 if d == 2 else 2
    if len(dec.T1) != n_qubits:
        raise ValueError(f"decoherence parameters for {len(dec.T1)} qubits, model has {n_qubits}")
    rho = core.validate_density(core.dm(rho0))
    if rho.shape[0] != d:
        raise ValueError(f"state dimension {rho.shape[0]} does not match model dimension {d}")
    D = _dissipator(dec.collapse_operators(), d)
    pieces = _pieces(drive, model, dt)
    ad = lambda H: -1j * (np.kron(np.eye(d), H) - np.kron(H.T, np.eye(d)))  # noqa: E731
    gens = []
    taus = []
    for p in pieces:
        tau = p.duration / p.steps
        # Magnus terms on the full generator; D commutes out of the commutator only when H is constant
        if p.H_b is None:
            G = ad(p.H_a) + D
        else:
            La, Lb = ad(p.H_a) + D, ad(p.H_b) + D
            G = 0.5 * (La + Lb) + _MAGNUS_C * tau * (Lb @ La - La @ Lb)
        gens.append(G * tau)
        taus.append(tau)
    props = scipy.linalg.expm(np.array(gens)) if gens else []
    v = rho.reshape(-1, order="F")
    t = 0.0
    times, states = [0.0], [rho.copy()]
    for P, tau, p in zip(props, taus, pieces):
        for _ in range(p.steps):
            v = P @ v
            t += tau
            if record:
                times.append(t)
                states.append(v.reshape(d, d, order="F"))
    final = v.reshape(d, d, order="F")
    if not record and t > 0:
        times.append(t)
        states.append(final)
    states = np.array(states)
    trace_drift = float(np.abs(np.real(np.einsum("nii->n", states)) - 1.0).max())
    min_eig = float(min(np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min() for s in states))
    if trace_drift > 1e-6:
        raise RuntimeError(f"trace drifted by {trace_drift:.2e}; reduce the time step")
    diag = {"trace_drift": trace_drift, "min_eigenvalue": min_eig}
    return Trajectory(np.array(times), states, _dims_for(d), diag)


# ----------------------------------------------------------------------------
# Tomography and read-out
# ----------------------------------------------------------------------------


def project_physical(rho: np.ndarray) -> np.ndarray:
    """Nearest valid density matrix by eigenvalue clipping and renormalisation."""
    rho = 0.5 * (rho + rho.conj().T)
    w, V = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(rho.shape[0], dtype=complex) / rho.shape[0]
    w = w / w.sum()
    return (V * w) @ V.conj().T


def _estimate(expectations: np.ndarray, shots: int | None, rng: np.random.Generator) -> np.ndarray:
    if shots is None:
        return expectations
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p_plus = np.clip(0.5 * (1.0 + expectations), 0.0, 1.0)
    return 2.0 * rng.binomial(shots, p_plus) / shots - 1.0


def tomography_1q(state: np.ndarray, shots: int | None = None, seed: int | None = None) -> np.ndarray:
    """Linear-inversion reconstruction from the three Pauli expectations."""
    rho = core.dm(state)
    if rho.shape != (2, 2):
        raise ValueError("tomography_1q needs a single-qubit state")
    rng = np.random.default_rng(seed)
    e = _estimate(core.bloch_vector(rho), shots, rng)
    est = 0.5 * (core.SIGMA_I + sum(c * P for c, P in zip(e, core.PAULIS)))
    return project_physical(est)


_P1 = (core.SIGMA_I, *core.PAULIS)
_PAULI_2Q = [(i, j, np.kron(_P1[i], _P1[j])) for i in range(4) for j in range(4) if (i, j) != (0, 0)]


def tomography_2q(state: np.ndarray, shots: int | None = None, seed: int | None = None) -> np.ndarray:
    """Linear inversion from the 15 non-trivial two-qubit Pauli expectations."""
    rho = core.dm(state)
    if rho.shape != (4, 4):
        raise ValueError("tomography_2q needs a two-qubit state")
    rng = np.random.default_rng(seed)
    e = _estimate(np.array([np.trace(P @ rho).real for _, _, P in _PAULI_2Q]), shots, rng)
    est = np.eye(4, dtype=complex) / 4 + sum(c * P for c, (_, _, P) in zip(e, _PAULI_2Q)) / 4
    return project_physical(est)


QUBIT_LABELS = {"Q3": 0, "Q4": 1}


def transferred_population(traj: Trajectory | np.ndarray, target: str = "Q4") -> float:
    """Final population of ``target``.

    ``target`` is a qubit name (``"Q3"``/``"Q4"``: excited-state population of
    that qubit after tracing out the other) or a computational basis label
    such as ``"01"`` or ``"1"``.
    """
    state = traj.final if isinstance(traj, Trajectory) else np.asarray(traj)
    rho = core.dm(state)
    d = rho.shape[0]
    if target in QUBIT_LABELS:
        if d != 4:
            raise ValueError(f"qubit label {target!r} needs a two-qubit state")
        reduced = core.partial_trace(rho, QUBIT_LABELS[target], (2, 2))
        return float(np.clip(reduced[1, 1].real, 0.0, 1.0))
    if target and set(target) <= {"0", "1"} and 2 ** len(target) == d:
        return float(np.clip(rho[int(target, 2), int(target, 2)].real, 0.0, 1.0))
    raise ValueError(f"bad target label {target!r} for dimension {d}")
