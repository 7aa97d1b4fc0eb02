"""Plotting tool for the weak-measurement simulator's outputs.

Consumes the runner's trajectories.csv and summary.json files and emits
publication-style figures: the coherency-band plot (min-max envelope over
trajectories with one highlighted realization) and the infidelity-vs-N
plot with the optimal-tomography bound overlay.
"""

from .plots import PlotSpec, plot_coherency_band, plot_infidelity_vs_n

__all__ = ["PlotSpec", "plot_coherency_band", "plot_infidelity_vs_n"]
