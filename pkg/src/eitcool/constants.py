"""Pinned physical constants (SI, CODATA 2018) used at the unit boundary.

All model building happens in units of the cantilever frequency omega_m;
these constants enter only when converting to/from SI (zero-point motion,
thermal occupation, kHz-valued rates).
"""

import math

HBAR = 1.054571817e-34      # J s
K_B = 1.380649e-23          # J / K
MU_B = 9.2740100783e-24     # J / T
G_E_DEFAULT = 2.0028        # NV electron g-factor

TWO_PI = 2.0 * math.pi
