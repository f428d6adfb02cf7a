"""Uniformly clocked control waveforms and digitally synthesised Gaussian noise."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .models import MHZ, NS, ControlModel
from .paths import PathSchedule

DEFAULT_SAMPLE_RATE = 1e9
NOISE_MODES = ("calibrated", "literal")


@dataclass(frozen=True)
class WaveformTrace:
    """Sample-and-hold control channels (rad/s) on a uniform clock.

    Sample ``i`` covers ``[i, i + 1) / sample_rate`` and is evaluated at the
    bin centre.
    """

    sample_rate: float
    channels: Mapping[str, np.ndarray]

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate!r}")
        frozen = {}
        lengths = set()
        for name, values in self.channels.items():
            arr = np.array(values, dtype=float)
            arr.flags.writeable = False
            frozen[name] = arr
            lengths.add(arr.shape)
        if len(lengths) > 1:
            raise ValueError(f"channels have unequal lengths: {sorted(lengths)}")
        object.__setattr__(self, "channels", frozen)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.channels)

    @property
    def M(self) -> int:
        return len(next(iter(self.channels.values()))) if self.channels else 0

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return self.M / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) / self.sample_rate

    def stacked(self, names: Iterable[str] | None = None) -> np.ndarray:
        """``(M, n_channels)`` array in the given channel order."""
        names = self.names if names is None else tuple(names)
        return np.column_stack([self.channels[n] for n in names])


def sample_schedule(schedule: PathSchedule, model: ControlModel, sample_rate: float = DEFAULT_SAMPLE_RATE) -> WaveformTrace:
    """Evaluate the control channels of ``model`` along ``schedule`` at bin centres."""
    M = int(round(schedule.T * sample_rate))
    if M < 1:
        raise ValueError(f"schedule of {schedule.T:.3e} s is shorter than one sample at {sample_rate:.3e} Sa/s")
    times = (np.arange(M) + 0.5) / sample_rate
    lams = schedule.lambda_at(times)
    values = np.array([model.channels(float(v)) for v in lams])
    return WaveformTrace(sample_rate, {name: values[:, j] for j, name in enumerate(model.channel_names)})


@dataclass(frozen=True)
class NoiseConfig:
    snr_db: float
    eta: float = 1 * NS
    seed: int = 0
    mode: str = "calibrated"
    smooth_edges: bool = False

    def __post_init__(self):
        if self.mode not in NOISE_MODES:
            raise ValueError(f"unknown noise mode {self.mode!r}; expected one of {NOISE_MODES}")
        if self.mode == "literal" and not self.snr_db > 0:
            raise ValueError(f"literal noise scales with 1/SNR in dB and needs snr_db > 0, got {self.snr_db!r}")
        if not self.eta > 0:
            raise ValueError(f"holding time must be positive, got {self.eta!r}")

    def block_samples(self, sample_rate: float) -> int:
        n = self.eta * sample_rate
        k = int(round(n))
        if k < 1 or abs(n - k) > 1e-6 * max(1.0, n):
            raise ValueError(f"holding time {self.eta!r} s is not a multiple of the sample period {1 / sample_rate!r} s")
        return k


def default_noise_channels(trace: WaveformTrace) -> tuple[str, ...]:
    if "delta" in trace.channels:
        return ("delta",)
    return tuple(n for n in ("omega_x", "omega_y") if n in trace.channels)


def _held(draws: np.ndarray, block: int, M: int, smooth: bool) -> np.ndarray:
    out = np.repeat(draws, block)[:M]
    if smooth and block > 1:
        # one-sample linear edge at every block boundary
        b = np.arange(block, M, block)
        out = out.copy()
        out[b] = 0.5 * (out[b - 1] + out[b])
    return out


def apply_gaussian_noise(trace: WaveformTrace, cfg: NoiseConfig, channels: Iterable[str] | None = None) -> WaveformTrace:
    """Add zero-order-held Gaussian noise with one draw per holding block.

    ``calibrated`` adds ``sigma * aleph_l`` with
    ``sigma = sqrt(sum(V^2) 10^(-SNR/10) / M)`` so the realised SNR of each
    channel equals ``snr_db`` in expectation.  ``literal`` multiplies
    each sample by ``1 + aleph_l sqrt(10 |sum V| / SNR)``, with ``V``
    expressed in full-scale units (peak |V| of the channel = 1).
    """
    block = cfg.block_samples(trace.sample_rate)
    names = default_noise_channels(trace) if channels is None else tuple(channels)
    M = trace.M
    L = -(-M // block)
    rng = np.random.default_rng(cfg.seed)
    out = dict(trace.channels)
    for name in names:
        V = trace.channels[name]
        draws = rng.standard_normal(L)
        held = _held(draws, block, M, cfg.smooth_edges)
        if math.isinf(cfg.snr_db) and cfg.snr_db > 0:
            continue
        if cfg.mode == "calibrated":
            sigma = math.sqrt(float(np.dot(V, V)) * 10 ** (-cfg.snr_db / 10) / M)
            out[name] = V + sigma * held
        else:
            peak = float(np.abs(V).max())
            if peak == 0.0:
                continue
            scale = math.sqrt(10.0 * abs(float(np.sum(V / peak))) / cfg.snr_db)
            out[name] = V * (1.0 + held * scale)
    return WaveformTrace(trace.sample_rate, out)


def realized_snr(clean: WaveformTrace, noisy: WaveformTrace, channels: Iterable[str] | None = None) -> float:
    """``10 log10(sum V^2 / sum (A - V)^2)`` over the selected channels, in dB.

    Returns ``inf`` when the two traces are identical.
    """
    if clean.M != noisy.M:
        raise ValueError(f"length mismatch: {clean.M} vs {noisy.M}")
    names = clean.names if channels is None else tuple(channels)
    p_sig = sum(float(np.dot(clean.channels[n], clean.channels[n])) for n in names)
    if p_sig == 0.0:
        raise ValueError("clean trace has zero power")
    p_noise = sum(float(np.sum((noisy.channels[n] - clean.channels[n]) ** 2)) for n in names)
    if p_noise == 0.0:
        return math.inf
    return 10.0 * math.log10(p_sig / p_noise)


def write_trace_csv(trace: WaveformTrace, path: str | Path) -> None:
    """CSV with ``time_ns`` then one column per channel in MHz (linear frequency)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_ns", *(f"{n}_mhz" for n in trace.names)])
        data = trace.stacked() / MHZ
        for t, row in zip(trace.times / NS, data):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in row)])


def read_trace_csv(path: str | Path) -> WaveformTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    if header[0] != "time_ns" or not all(h.endswith("_mhz") for h in header[1:]):
        raise ValueError(f"unexpected trace header {header}")
    if len(body) > 1:
        sample_rate = 1.0 / (float(np.mean(np.diff(body[:, 0]))) * NS)
    else:
        sample_rate = 1.0 / (2 * body[0, 0] * NS)
    channels = {h[: -len("_mhz")]: body[:, j + 1] * MHZ for j, h in enumerate(header[1:])}
    return WaveformTrace(sample_rate, channels)
