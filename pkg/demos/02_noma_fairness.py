# Min-max fair power split for two-user NOMA.
#
# The base station gives a fraction alpha of its power to the central user
# (CU) and the rest to the edge user (EU).  We want the alpha that makes the
# worse of the two outage probabilities as small as possible.

import warnings

import numpy as np

from fasfair import Scenario, noma_outage_pair
from fasfair.noma import solve_general_bisection, solve_special_case, solve_theorem1

equal = Scenario()                                      # N_c = N_e = 4
uneven = Scenario(n_c=2, n_e=6, w_c=1.0, w_e=5.0)       # CU has fewer, closer ports
cu_starved = Scenario(n_c=2, n_e=20, w_c=1.0, w_e=5.0)  # EU far better equipped

# Scan alpha by hand first for the uneven case.
alphas = np.linspace(0.05, 0.45, 9)
print(" alpha    P_cu      P_eu      max")
for a in alphas:
    p = noma_outage_pair(uneven, a)
    print(f" {a:.3f}  {p.p_cu:.5f}  {p.p_eu:.5f}  {p.p_max:.5f}")

# The three solvers.  The closed form is only optimal for equal users, so it
# warns on the other two scenarios.
warnings.simplefilter("ignore")
for name, sc in (("equal", equal), ("uneven", uneven), ("cu_starved", cu_starved)):
    print(f"\n{name}: alpha_B = {sc.params.alpha_boundary:.4f}")
    for solver in (solve_special_case, solve_general_bisection, solve_theorem1):
        rep = solver(sc)
        print(f"  {rep.method:16s} alpha = {rep.alpha:.6f}  max outage = {rep.outage.p_max:.6f}"
              f"  {' '.join(rep.flags)}")

# When the EU is much better off, the optimum sits on the regime boundary and
# bisection stops immediately.
