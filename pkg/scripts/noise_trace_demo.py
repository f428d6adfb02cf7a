"""Write a clean and a noisy latitude waveform to CSV and report the realised SNR."""

import math
import sys

from snacsim.models import MHZ, NS, ControlModel
from snacsim.noise import NoiseConfig, apply_gaussian_noise, realized_snr, sample_schedule, write_trace_csv
from snacsim.paths import jumping_schedule

snr = float(sys.argv[1]) if len(sys.argv) > 1 else 10.0
eta = float(sys.argv[2]) if len(sys.argv) > 2 else 1.0

model = ControlModel("latitude", Omega0=10 * MHZ)
clean = sample_schedule(jumping_schedule(-math.pi, 0.0, 5, 1.0, 250 * NS), model)
for mode in ("calibrated", "literal"):
    noisy = apply_gaussian_noise(clean, NoiseConfig(snr, eta * NS, seed=0, mode=mode))
    write_trace_csv(noisy, f"trace_{mode}.csv")
    print(f"{mode:14s} target {snr:5.1f} dB  realised {realized_snr(clean, noisy):6.2f} dB")
write_trace_csv(clean, "trace_clean.csv")
