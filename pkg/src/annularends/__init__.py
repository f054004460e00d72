"""Numerical lab for harmonic functions on annular ends.

Level-set end counting, pole order of ``omega = df + i df*``, harmonic
measure of the ideal boundary, and minimal-surface ends from Weierstrass
data.  See ``annularends.cli`` for the command line.
"""

from .annulus import AnnulusDomain, LaurentSeries, PolarGrid, laurent_from_circles
from .errors import *  # noqa: F401,F403
from .harmonic import ClosedFormField, SampledField, flux, omega_of
from .levelset import count_ends, trace_level
from .meromorphic import arc_df_integral, classify_boundedness, pole_order, pole_report
from .weierstrass import Plane, WeierstrassData, immerse, total_curvature

__version__ = "0.1.0"
