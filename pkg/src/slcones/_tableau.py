"""DOP853 Butcher tableau shared by both integrator backends.

The coefficient table is taken from scipy so that the two backends and
scipy's own ``solve_ivp`` agree on every constant.
"""

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dc

N_STAGES = _dc.N_STAGES
N_STAGES_EXTENDED = _dc.N_STAGES_EXTENDED
INTERPOLATOR_POWER = _dc.INTERPOLATOR_POWER

A = np.ascontiguousarray(_dc.A, dtype=float)
B = np.ascontiguousarray(_dc.B, dtype=float)
C = np.ascontiguousarray(_dc.C, dtype=float)
E3 = np.ascontiguousarray(_dc.E3, dtype=float)
E5 = np.ascontiguousarray(_dc.E5, dtype=float)
D = np.ascontiguousarray(_dc.D, dtype=float)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERROR_EXPONENT = -1.0 / 8.0

# status codes returned by the kernels
DONE = 0
ESCAPED = 1
MAX_STEPS = 2
STEP_TOO_SMALL = 3
