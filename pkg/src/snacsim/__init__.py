"""Jump-along-geodesics adiabatic transfer: pulse design and qubit dynamics."""

__version__ = "0.1.0"

from .core import fidelity, ket, partial_trace  # noqa: E402
from .engine import DecoherenceParams, Trajectory, propagate_lindblad, propagate_unitary  # noqa: E402
from .models import TABLE_I, ControlModel  # noqa: E402
from .paths import PathSchedule, jumping_schedule, lzt_schedule, snac_schedule  # noqa: E402

__all__ = [
    "ControlModel",
    "DecoherenceParams",
    "PathSchedule",
    "TABLE_I",
    "Trajectory",
    "fidelity",
    "jumping_schedule",
    "ket",
    "lzt_schedule",
    "partial_trace",
    "propagate_lindblad",
    "propagate_unitary",
    "snac_schedule",
]
