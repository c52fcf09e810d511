"""Report figures for the beam laboratory's CSV artifacts.

Reads the CSV files the laboratory CLI emits (spectrum.csv,
resolvent.csv, energy.csv) and renders the three standard figures:
eigenvalue scatter, resolvent decay on log-log axes with the reference
slope, and the energy decay with its fitted rate.
"""

from .figures import FigureSpec, RenderResult, read_artifact_csv, render

__all__ = ["FigureSpec", "RenderResult", "read_artifact_csv", "render"]

__version__ = "0.1.0"
