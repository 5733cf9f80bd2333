"""
Shifting a feature along its quantile scale
===========================================

A feature vector with five distinct values, two of which occur twice, is
moved up and down by two rank steps. Ties move together, and the downward
shift is built from the upward one so both directions cover the same
distance.
"""
# %%
import numpy as np

from qsm import ecdf_build, shift_negative, shift_positive

x = np.array([1, 2, 2, 3, 4, 4, 5], dtype=float)
e = ecdf_build(x)
print("ecdf at each value:", [str(e.eval(v)) for v in x])

# %%
# With ``v = 2`` the shift size is ``2/(n+1)``. An upward shift of a tied
# value jumps past its whole tie group.
up = shift_positive(x, 2)
down = shift_negative(x, 2)
for before, a, b in zip(x, up, down):
    print(f"{before:g} -> up {a:g}, down {b:g}")

# %%
# The same shift given as a quantile fraction converts to the same steps.
from qsm import steps_from_q

print("2/8 ->", steps_from_q(2 / 8, x.size), "rank steps")

# %%
# Shifting far enough saturates at the extremes of the observed sample.
print(shift_positive(x, x.size), shift_negative(x, x.size))
