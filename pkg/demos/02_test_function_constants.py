# %% [markdown]
# # The radial test functions and their constants
#
# u_delta is flat (= delta) on B(x0, tau/2) and a quartic on the annulus;
# v_delta does the same with free radii r1 < r2.  The energy of u_delta has
# a closed form which we compare against brute-force radial quadrature.

# %%
import numpy as np

from pbiharm import testfun as tf

tau, delta = 1.0, 8.0
ls = np.linspace(0, tau, 11)
print(" l     u_delta     Laplacian (N=3)")
for l, u, lap in zip(ls, tf.u_delta_profile(ls, tau, delta), tf.u_delta_laplacian(ls, tau, delta, 3)):
    print(f"{l:4.1f}  {u:10.6f}  {lap:12.4f}")

# %% [markdown]
# sigma(2, 3, 1) is a rational number, 83/1120.

# %%
print(f"sigma(2,3,1) = {tf.sigma(2, 3, 1):.17g}  vs 83/1120 = {83 / 1120:.17g}")

# %%
print(" p    N  tau  delta   closed form        quadrature        rel diff")
for p in (2.0, 2.5, 3.0):
    for N in (3, 5):
        for tau in (0.5, 2.0):
            closed = tf.phi_u_delta(p, N, tau, 3.0)
            params = tf.TestFnParams(tau, 3.0, (0.0,) * N, N, p)
            num = tf.radial_energy_quadrature(params)
            print(f"{p:3} {N:3d} {tau:4} {3.0:5}  {closed:17.10e} {num:17.10e}"
                  f"  {abs(closed - num) / closed:.1e}")

# %% [markdown]
# With r1 = tau/2 and r2 = tau the two-radius function is u_delta again, and
# its constant K_general collapses onto K.

# %%
k = 0.16
for p, N in [(2.0, 3), (2.7, 4), (4.0, 6)]:
    print(f"p={p}, N={N}: K = {tf.K_const(p, N, 1.0, k):.12e}, "
          f"K_general = {tf.K_general(p, N, 0.5, 1.0, k):.12e}")

# %% [markdown]
# Shrinking the inner radius trades a smaller flat core for a gentler slope.

# %%
for r1 in (0.1, 0.3, 0.5, 0.7, 0.9):
    print(f"r1 = {r1}: Phi(v_delta) with k=0.16 = {tf.phi_v_delta(2.0, 3, r1, 1.0, 8.0, k):.6g}")
