"""Control-parameter schedules and adiabaticity metrics.

A :class:`PathSchedule` is a list of segments, each a linear ramp of the path
parameter ``lam`` from ``lambda_start`` to ``lambda_end`` over ``duration``
seconds (a hold when the two coincide).  Whenever one segment ends at a
different value than the next one starts, the parameter jumps
instantaneously; the same holds for the step from ``lambda0`` into the first
segment and from the last segment out to ``lambdaT``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .models import MHZ, NS, PATH_KINDS, ControlModel

GapFn = Callable[[float], float]


@dataclass(frozen=True)
class Segment:
    lambda_start: float
    lambda_end: float
    duration: float

    @property
    def is_hold(self) -> bool:
        return self.lambda_start == self.lambda_end

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lambda_start + self.lambda_end)


@dataclass(frozen=True)
class PathSchedule:
    segments: tuple[Segment, ...]
    lambda0: float
    lambdaT: float
    gamma: float
    path_kind: str

    def __post_init__(self):
        if self.path_kind not in PATH_KINDS:
            raise ValueError(f"unknown path kind {self.path_kind!r}")
        for k, seg in enumerate(self.segments):
            if not seg.duration > 0:
                raise ValueError(f"segment {k} has non-positive duration {seg.duration!r}")

    @property
    def N(self) -> int:
        return len(self.segments)

    @property
    def T(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    @property
    def durations(self) -> np.ndarray:
        return np.array([s.duration for s in self.segments])

    @property
    def midpoints(self) -> np.ndarray:
        return np.array([s.midpoint for s in self.segments])

    @property
    def boundaries(self) -> np.ndarray:
        """Segment start times followed by the total duration."""
        return np.concatenate([[0.0], np.cumsum(self.durations)])

    def with_durations(self, durations: Sequence[float]) -> "PathSchedule":
        if len(durations) != self.N:
            raise ValueError(f"need {self.N} durations, got {len(durations)}")
        segs = tuple(replace(s, duration=float(d)) for s, d in zip(self.segments, durations))
        return replace(self, segments=segs)

    def lambda_at(self, t: float | np.ndarray) -> np.ndarray:
        """Path parameter at time(s) ``t``; right-continuous at segment boundaries."""
        t = np.asarray(t, dtype=float)
        if self.N == 0:
            return np.full(t.shape, self.lambda0)
        b = self.boundaries
        k = np.clip(np.searchsorted(b, t, side="right") - 1, 0, self.N - 1)
        start = np.array([s.lambda_start for s in self.segments])[k]
        end = np.array([s.lambda_end for s in self.segments])[k]
        frac = np.clip((t - b[k]) / self.durations[k], 0.0, 1.0)
        return start + (end - start) * frac

    def to_dict(self) -> dict:
        scale, unit = (MHZ, "MHz") if self.path_kind in ("lzt-delta", "iswap") else (1.0, "rad")
        return {
            "path_kind": self.path_kind,
            "lambda_unit": unit,
            "lambda0": self.lambda0 / scale,
            "lambdaT": self.lambdaT / scale,
            "gamma": self.gamma,
            "N": self.N,
            "T_ns": self.T / NS,
            "segments": [
                {"lambda_start": s.lambda_start / scale, "lambda_end": s.lambda_end / scale, "duration_ns": s.duration / NS}
                for s in self.segments
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "PathSchedule":
        scale = MHZ if d.get("lambda_unit", "rad") == "MHz" else 1.0
        segs = tuple(
            Segment(s["lambda_start"] * scale, s["lambda_end"] * scale, s["duration_ns"] * NS) for s in d["segments"]
        )
        return cls(segs, d["lambda0"] * scale, d["lambdaT"] * scale, d["gamma"], d["path_kind"])

    @classmethod
    def from_json(cls, text: str) -> "PathSchedule":
        return cls.from_dict(json.loads(text))


def jumping_schedule(
    lambda0: float, lambdaT: float, N: int, gamma: float, T: float, path_kind: str = "latitude"
) -> PathSchedule:
    """Staircase of ``N`` equal-time segments with jumping ratio ``gamma``.

    Each segment is centred on ``lambda0 + (lambdaT - lambda0)(2k + 1) / (2N)``
    and ramps linearly over ``(1 - gamma)`` of its share of the displacement;
    the remaining ``gamma`` share is taken as two equal instantaneous jumps,
    one on each side.  ``gamma = 1`` gives pure holds, ``gamma = 0`` a single
    continuous ramp.
    """
    if N < 1:
        raise ValueError(f"need at least one segment, got N={N}")
    if not T > 0:
        raise ValueError(f"total time must be positive, got {T!r}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"jumping ratio must lie in [0, 1], got {gamma!r}")
    if lambda0 == lambdaT:
        raise ValueError("lambda0 and lambdaT coincide")
    step = (lambdaT - lambda0) / N
    half_ramp = 0.5 * (1.0 - gamma) * step
    segs = []
    for k in range(N):
        mid = lambda0 + step * (2 * k + 1) / 2
        if gamma == 1.0:
            segs.append(Segment(mid, mid, T / N))
        else:
            segs.append(Segment(mid - half_ramp, mid + half_ramp, T / N))
    return PathSchedule(tuple(segs), lambda0, lambdaT, gamma, path_kind)


def pi_phase_durations(midpoints: Sequence[float], gap_fn: GapFn) -> np.ndarray:
    """Hold times ``pi / gap(lam_k)`` that make each segment accumulate a pi phase."""
    gaps = np.array([gap_fn(float(m)) for m in midpoints])
    if np.any(~np.isfinite(gaps)) or np.any(gaps <= 0):
        raise ValueError(f"gap must be positive and finite at every midpoint, got {gaps}")
    return math.pi / gaps


def snac_schedule(lambda0: float, lambdaT: float, N: int, model: ControlModel) -> PathSchedule:
    """Pure-jump schedule (gamma = 1) with a pi dynamic phase on every hold."""
    base = jumping_schedule(lambda0, lambdaT, N, 1.0, 1.0, model.kind)
    return base.with_durations(pi_phase_durations(base.midpoints, model.gap))


def lzt_schedule(delta_start: float, delta_end: float, T: float, steps: int = 2000) -> PathSchedule:
    """Linear detuning sweep split into ``steps`` equal ramp pieces."""
    if not T > 0:
        raise ValueError(f"sweep time must be positive, got {T!r}")
    if steps < 2:
        raise ValueError(f"need at least 2 steps, got {steps}")
    edges = np.linspace(delta_start, delta_end, steps + 1)
    segs = tuple(Segment(float(a), float(b), T / steps) for a, b in zip(edges[:-1], edges[1:]))
    return PathSchedule(segs, float(delta_start), float(delta_end), 0.0, "lzt-delta")


def iswap_schedule(J: float, T: float) -> PathSchedule:
    """Resonant hold at zero detuning; ``T = pi / (2J)`` completes the swap."""
    if not J > 0:
        raise ValueError(f"coupling J must be positive, got {J!r}")
    if T < 0:
        raise ValueError(f"hold time must be >= 0, got {T!r}")
    segs = (Segment(0.0, 0.0, float(T)),) if T > 0 else ()
    return PathSchedule(segs, 0.0, 0.0, 1.0, "iswap")


# ----------------------------------------------------------------------------
# Dynamic phases
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DynamicPhaseLedger:
    chi: np.ndarray
    delta_chi: np.ndarray | None = None

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=float)
        object.__setattr__(self, "chi", chi)
        dchi = chi - math.pi if self.delta_chi is None else np.asarray(self.delta_chi, dtype=float)
        object.__setattr__(self, "delta_chi", dchi)


def _segment_phase(seg: Segment, gap_fn: GapFn, n: int = 64) -> float:
    if seg.is_hold:
        return gap_fn(seg.lambda_start) * seg.duration
    # Gauss-Legendre over the ramp; gap is smooth within a segment
    x, w = np.polynomial.legendre.leggauss(n)
    lam = seg.midpoint + 0.5 * (seg.lambda_end - seg.lambda_start) * x
    return 0.5 * seg.duration * float(np.dot(w, [gap_fn(v) for v in lam]))


def phase_ledger(schedule: PathSchedule, gap_fn: GapFn) -> DynamicPhaseLedger:
    """Accumulated eigenenergy-difference phase of every segment."""
    return DynamicPhaseLedger(np.array([_segment_phase(s, gap_fn) for s in schedule.segments]))


def inject_phase_errors(
    schedule: PathSchedule, ledger: DynamicPhaseLedger, deltas: Sequence[float]
) -> PathSchedule:
    """Rescale segment durations so segment ``k`` accumulates ``pi + deltas[k]``."""
    deltas = np.asarray(deltas, dtype=float)
    if deltas.shape != (schedule.N,):
        raise ValueError(f"need {schedule.N} phase errors, got {deltas.shape}")
    target = math.pi + deltas
    # gap_k = chi_k / tau_k, so tau_k' = (pi + d_k) / gap_k
    new = schedule.durations * target / ledger.chi
    if np.any(new <= 0):
        raise ValueError(f"phase errors {deltas} give non-positive durations")
    return schedule.with_durations(new)


# ----------------------------------------------------------------------------
# Adiabaticity metrics
# ----------------------------------------------------------------------------


def snac_running_integral(schedule: PathSchedule, gap_fn: GapFn, samples_per_ramp: int = 256) -> np.ndarray:
    """Running value of the phase-weighted path integral ``int e^{i chi} d lam``.

    Jumps contribute ``e^{i chi} * (jump size)`` at the instant they happen.
    Returns the complex partial sums after each jump and each ramp sub-step.
    """
    z = 0j
    chi = 0.0
    out = [z]
    prev = schedule.lambda0
    for seg in schedule.segments:
        if seg.lambda_start != prev:
            z += (seg.lambda_start - prev) * complex(math.cos(chi), math.sin(chi))
            out.append(z)
        if seg.is_hold:
            chi += gap_fn(seg.lambda_start) * seg.duration
        else:
            n = samples_per_ramp
            dlam = (seg.lambda_end - seg.lambda_start) / n
            dt = seg.duration / n
            for j in range(n):
                lam = seg.lambda_start + (j + 0.5) * dlam
                g = gap_fn(lam)
                c = chi + 0.5 * g * dt
                z += dlam * complex(math.cos(c), math.sin(c))
                chi += g * dt
                out.append(z)
        prev = seg.lambda_end
    if schedule.lambdaT != prev:
        z += (schedule.lambdaT - prev) * complex(math.cos(chi), math.sin(chi))
        out.append(z)
    return np.array(out)


def snac_metric(schedule: PathSchedule, gap_fn: GapFn, samples_per_ramp: int = 256) -> float:
    """Maximum running magnitude of the phase-weighted path integral over ``|lambdaT - lambda0|``."""
    span = abs(schedule.lambdaT - schedule.lambda0)
    if span == 0:
        raise ValueError("schedule has zero parameter displacement")
    return float(np.abs(snac_running_integral(schedule, gap_fn, samples_per_ramp)).max() / span)


@dataclass(frozen=True)
class TraditionalMetric:
    direct: float  # |<E+| dH/dt |E->| / (E+ - E-)^2
    angular_rate: float  # |d lam / dt| / gap


def traditional_metric(schedule: PathSchedule, model: ControlModel, t: float, h: float | None = None) -> TraditionalMetric:
    """Conventional adiabaticity parameter at time ``t`` (finite-difference dH/dt).

    Inside holds both numbers are zero; jumps are not resolved.
    """
    if h is None:
        h = 1e-4 * min(schedule.durations)
    b = schedule.boundaries
    k = int(np.clip(np.searchsorted(b, t, side="right") - 1, 0, schedule.N - 1))
    seg = schedule.segments[k]
    rate = (seg.lambda_end - seg.lambda_start) / seg.duration
    lam = float(schedule.lambda_at(t))
    # central difference along the segment's own ramp, never across a jump
    dH = (model.hamiltonian(lam + rate * h) - model.hamiltonian(lam - rate * h)) / (2 * h)
    plus, minus = model.eigenstates(lam)
    gap = model.gap(lam)
    if not gap > 0:
        raise ValueError("vanishing gap")
    direct = abs(np.vdot(plus, dH @ minus)) / gap**2
    return TraditionalMetric(float(direct), float(abs(rate) / gap))


def traditional_metric_max(schedule: PathSchedule, model: ControlModel, samples: int = 200) -> TraditionalMetric:
    """Maximum over the path of both forms of the conventional metric."""
    ts = (np.arange(samples) + 0.5) * schedule.T / samples
    vals = [traditional_metric(schedule, model, float(t)) for t in ts]
    return TraditionalMetric(max(v.direct for v in vals), max(v.angular_rate for v in vals))
