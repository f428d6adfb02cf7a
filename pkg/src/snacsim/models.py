"""Effective rotating-frame Hamiltonians and their laboratory parameterisation.

Single qubit (driven transmon, two lowest levels)::

    H1 = (Omega0 / 2) [[cos th,            sin th e^{-i ph}],
                       [sin th e^{i ph},   -cos th         ]]

Two coupled qubits in the basis |00>, |01>, |10>, |11>::

    H2 = J0 [[0, 0, 0, 0], [0, cos vp, sin vp, 0], [0, sin vp, -cos vp, 0], [0, 0, 0, 0]]

with J0 = sqrt(delta^2 / 4 + J^2) and vp = arctan(2J / delta) taken in (0, pi).
All frequencies are angular (rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6  # rad/s per MHz of linear frequency
GHZ = TWO_PI * 1e9
NS = 1e-9
US = 1e-6


@dataclass(frozen=True)
class SingleQubitParams:
    Omega0: float
    theta: float
    phi: float
    Delta: float
    Omega: float

    @classmethod
    def from_angles(cls, Omega0: float, theta: float, phi: float = 0.0) -> "SingleQubitParams":
        return cls(Omega0, theta, phi, Omega0 * math.cos(theta), Omega0 * math.sin(theta))


def single_qubit_params(Delta: float, Omega: float, phi: float = 0.0) -> SingleQubitParams:
    """Gap and mixing angle from detuning ``Delta`` and drive amplitude ``Omega``."""
    if Delta == 0 and Omega == 0:
        raise ValueError("degenerate drive: Delta and Omega are both zero")
    return SingleQubitParams(math.hypot(Delta, Omega), math.atan2(Omega, Delta), phi, Delta, Omega)


def _h1(Omega0: float, theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    off = s * complex(math.cos(phi), -math.sin(phi))
    return 0.5 * Omega0 * np.array([[c, off], [off.conjugate(), -c]], dtype=complex)


def h1_build(p: SingleQubitParams) -> np.ndarray:
    if not p.Omega0 > 0:
        raise ValueError(f"gap Omega0 must be positive, got {p.Omega0!r}")
    return _h1(p.Omega0, p.theta, p.phi)


def h1_eigenstates(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``(psi_plus, psi_minus)`` of ``H1(theta, phi)``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([c, s * e], dtype=complex), np.array([s, -c * e], dtype=complex)


@dataclass(frozen=True)
class TwoQubitParams:
    J: float
    delta: float
    J0: float
    varphi: float

    @classmethod
    def from_angle(cls, J: float, varphi: float) -> "TwoQubitParams":
        if not 0.0 < varphi < math.pi:
            raise ValueError(f"varphi must lie in (0, pi), got {varphi!r}")
        return cls(J, delta_for_phi(varphi, J), J / math.sin(varphi), varphi)


def two_qubit_params(delta: float, J: float) -> TwoQubitParams:
    if not J > 0:
        raise ValueError(f"coupling J must be positive, got {J!r}")
    # atan2 keeps varphi continuous in (0, pi): delta=+inf -> 0, 0 -> pi/2, -inf -> pi
    return TwoQubitParams(J, delta, math.sqrt(0.25 * delta * delta + J * J), math.atan2(2.0 * J, delta))


def delta_for_phi(varphi: float, J: float) -> float:
    return 2.0 * J * math.cos(varphi) / math.sin(varphi)


def _h2_delta(delta: float, J: float) -> np.ndarray:
    H = np.zeros((4, 4), dtype=complex)
    H[1, 1] = 0.5 * delta
    H[2, 2] = -0.5 * delta
    H[1, 2] = H[2, 1] = J
    return H


def h2_build(p: TwoQubitParams) -> np.ndarray:
    if not p.J > 0:
        raise ValueError(f"coupling J must be positive, got {p.J!r}")
    c, s = math.cos(p.varphi), math.sin(p.varphi)
    H = np.zeros((4, 4), dtype=complex)
    H[1, 1], H[1, 2], H[2, 1], H[2, 2] = c, s, s, -c
    return p.J0 * H


def h2_eigenstates(varphi: float) -> tuple[np.ndarray, np.ndarray]:
    """``(|E+>, |E->)`` in the single-excitation block, embedded in 4 dimensions."""
    c, s = math.cos(varphi / 2), math.sin(varphi / 2)
    plus = np.zeros(4, dtype=complex)
    minus = np.zeros(4, dtype=complex)
    plus[1], plus[2] = c, s
    minus[1], minus[2] = s, -c
    return plus, minus


def avoided_crossing_gap(delta: float, J: float) -> float:
    """Splitting ``2 J0 = sqrt(4 J^2 + delta^2)`` of the |01>, |10> doublet."""
    if not J > 0:
        raise ValueError(f"coupling J must be positive, got {J!r}")
    return math.sqrt(4.0 * J * J + delta * delta)


# ----------------------------------------------------------------------------
# Device parameters
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DeviceParams:
    """One qubit's frequencies (rad/s) and coherence times (s).

    ``T2`` is the Ramsey time; ``None`` means not measured at this bias point.
    Readout rows are carried as metadata only.
    """

    name: str
    omega_q: float
    alpha: float
    T1: float
    T2: float | None
    omega_r: float | None = None
    kappa_r: float | None = None
    chi_r: float | None = None

    def __post_init__(self):
        if not self.T1 > 0:
            raise ValueError(f"{self.name}: T1 must be positive, got {self.T1!r}")
        if self.T2 is not None and not 0 < self.T2 <= 2 * self.T1 * (1 + 1e-12):
            raise ValueError(f"{self.name}: unphysical T2={self.T2!r} for T1={self.T1!r} (need 0 < T2 <= 2 T1)")

    def with_T2(self, T2: float) -> "DeviceParams":
        return DeviceParams(self.name, self.omega_q, self.alpha, self.T1, T2, self.omega_r, self.kappa_r, self.chi_r)


TABLE_I: dict[str, DeviceParams] = {
    "Q3": DeviceParams("Q3", 4.9559 * GHZ, -0.286 * GHZ, 13.4 * US, 10.8 * US, 6.9099 * GHZ, 4.189 * MHZ, 0.044 * MHZ),
    "Q4": DeviceParams("Q4", 5.1866 * GHZ, -0.268 * GHZ, 22.1 * US, None, 7.0655 * GHZ, 1.750 * MHZ, 0.168 * MHZ),
    "Q4-sweet": DeviceParams("Q4-sweet", 5.8428 * GHZ, -0.268 * GHZ, 26.4 * US, 45.4 * US, 7.0655 * GHZ, 1.750 * MHZ, 0.259 * MHZ),
}
# Average dephasing time of the tunable qubit, used for the two-qubit decoherence studies.
TUNABLE_T2_AVG = 4.5 * US
COUPLING_J = 9.2 * MHZ
IDLE_DETUNING = 230.7 * MHZ


def device_from_mapping(name: str, spec: Mapping[str, float | None]) -> DeviceParams:
    """Build a :class:`DeviceParams` from config units (GHz, MHz, us).

    Recognised keys: ``freq_ghz``, ``anharm_ghz``, ``T1_us``, ``T2_us``,
    ``readout_ghz``, ``kappa_mhz``, ``chi_mhz``.  A key may be omitted to keep
    the Table I value when ``name`` is one of its qubits.
    """
    base = TABLE_I.get(name)
    known = {"freq_ghz", "anharm_ghz", "T1_us", "T2_us", "readout_ghz", "kappa_mhz", "chi_mhz"}
    unknown = set(spec) - known
    if unknown:
        raise ValueError(f"unknown device keys for {name}: {sorted(unknown)}")

    def pick(key, scale, attr):
        if key in spec:
            return None if spec[key] is None else float(spec[key]) * scale
        if base is None:
            if attr in ("omega_q", "alpha", "T1"):
                raise ValueError(f"device {name}: missing required key {key}")
            return None
        return getattr(base, attr)

    return DeviceParams(
        name,
        pick("freq_ghz", GHZ, "omega_q"),
        pick("anharm_ghz", GHZ, "alpha"),
        pick("T1_us", US, "T1"),
        pick("T2_us", US, "T2"),
        pick("readout_ghz", GHZ, "omega_r"),
        pick("kappa_mhz", MHZ, "kappa_r"),
        pick("chi_mhz", MHZ, "chi_r"),
    )


# ----------------------------------------------------------------------------
# Control models: path parameter lambda -> H(lambda)
# ----------------------------------------------------------------------------

SINGLE_QUBIT_KINDS = ("latitude", "longitude")
TWO_QUBIT_KINDS = ("two-qubit-varphi", "lzt-delta", "iswap")
PATH_KINDS = SINGLE_QUBIT_KINDS + TWO_QUBIT_KINDS


@dataclass(frozen=True)
class ControlModel:
    """Maps a scalar path parameter to a Hamiltonian.

    ``latitude``: lambda is the drive phase, mixing angle fixed at ``theta``.
    ``longitude``: lambda is the mixing angle, drive phase fixed at ``phi``.
    ``two-qubit-varphi``: lambda is the two-qubit mixing angle.
    ``lzt-delta`` / ``iswap``: lambda is the qubit-qubit detuning in rad/s.
    """

    kind: str
    Omega0: float = 0.0
    J: float = 0.0
    theta: float = math.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in PATH_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {PATH_KINDS}")
        if self.kind in SINGLE_QUBIT_KINDS and not self.Omega0 > 0:
            raise ValueError("single-qubit models need Omega0 > 0")
        if self.kind in TWO_QUBIT_KINDS and not self.J > 0:
            raise ValueError("two-qubit models need J > 0")

    @property
    def dim(self) -> int:
        return 2 if self.kind in SINGLE_QUBIT_KINDS else 4

    @property
    def channel_names(self) -> tuple[str, ...]:
        return ("omega_x", "omega_y", "omega_z") if self.dim == 2 else ("delta",)

    def angles(self, lam: float) -> tuple[float, float]:
        if self.kind == "latitude":
            return self.theta, lam
        if self.kind == "longitude":
            return lam, self.phi
        if self.kind == "two-qubit-varphi":
            return lam, 0.0
        return two_qubit_params(lam, self.J).varphi, 0.0

    def hamiltonian(self, lam: float) -> np.ndarray:
        if self.dim == 2:
            return _h1(self.Omega0, *self.angles(lam))
        if self.kind == "two-qubit-varphi":
            return h2_build(TwoQubitParams.from_angle(self.J, lam))
        return _h2_delta(lam, self.J)

    def gap(self, lam: float) -> float:
        """Eigenenergy difference of the driven doublet (rad/s)."""
        if self.dim == 2:
            return self.Omega0
        if self.kind == "two-qubit-varphi":
            return 2.0 * self.J / math.sin(lam)
        return avoided_crossing_gap(lam, self.J)

    def eigenstates(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """``(upper, lower)`` instantaneous eigenstates of the driven doublet."""
        if self.dim == 2:
            return h1_eigenstates(*self.angles(lam))
        return h2_eigenstates(self.angles(lam)[0])

    def channels(self, lam: float) -> tuple[float, ...]:
        """Control-line values at ``lam``: Pauli components (1q) or detuning (2q)."""
        if self.dim == 2:
            th, ph = self.angles(lam)
            r = 0.5 * self.Omega0
            return (r * math.sin(th) * math.cos(ph), r * math.sin(th) * math.sin(ph), r * math.cos(th))
        if self.kind == "two-qubit-varphi":
            return (delta_for_phi(lam, self.J),)
        return (lam,)

    def hamiltonians_from_channels(self, values: np.ndarray) -> np.ndarray:
        """Stack of Hamiltonians from an ``(n, n_channels)`` array of channel samples."""
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        if self.dim == 2:
            ox, oy, oz = values.T
            H = np.empty((n, 2, 2), dtype=complex)
            H[:, 0, 0] = oz
            H[:, 1, 1] = -oz
            H[:, 0, 1] = ox - 1j * oy
            H[:, 1, 0] = ox + 1j * oy
            return H
        H = np.zeros((n, 4, 4), dtype=complex)
        H[:, 1, 1] = 0.5 * values[:, 0]
        H[:, 2, 2] = -0.5 * values[:, 0]
        H[:, 1, 2] = H[:, 2, 1] = self.J
        return H
