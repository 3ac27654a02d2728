"""Figure rendering for simulator campaign logs."""

from .figures import PlotJob, plot_gain, plot_spectrum, plot_streams
from .io import PlotInputError, read_summary, read_trials

__version__ = "0.1.0"

__all__ = [
    "PlotInputError",
    "PlotJob",
    "plot_gain",
    "plot_spectrum",
    "plot_streams",
    "read_summary",
    "read_trials",
]
