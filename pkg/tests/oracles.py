"""Expected values fixed before the implementation was run.

Exact rationals come from symbolic integration; the rest were evaluated
with 30-digit arithmetic from the closed-form expressions.
"""

import math

SIGMA_2_3_1 = 83 / 1120
TALENTI_K_N3_P2_MEAS1 = 0.128278243853042
K_CONST_P2_N3_TAU1_K1 = 0.00104864890967928
PHI_U_DELTA_P2_N3_TAU1_DELTA1 = 476.804005024828
# f == 1, N = 3, tau = 1, delta = 1: int of u_delta over the annulus
ANNULUS_ONE = 4 * math.pi * 33 / 280
# linear oracle: Delta^2 u = 1 on the unit ball of R^3, Navier conditions
LINEAR_U0 = 7 / 360
