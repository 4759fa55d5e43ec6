"""Log-log convergence figures from converge CSV reports."""

__version__ = "0.1.0"

from .figure import FigureSpec, fit_slope, render
from .reader import ConvergeRow, SchemaError, read_converge_csv
