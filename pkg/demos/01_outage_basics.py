# Best-port outage for a fluid-antenna receiver, step by step.
#
# A receiver with N ports spread over an aperture of W wavelengths picks the
# strongest port.  All ports share one reference channel, and the amount of
# sharing is the single correlation coefficient mu(W).

import numpy as np

from fasfair import FasSide, Scenario, best_port_outage, correlation_mu
from fasfair.montecarlo import McConfig, chunk_generator, sample_port_gains
from fasfair.specfun import marcum_q1

# Wider apertures decorrelate the ports.
for w in (0.5, 1.0, 2.0, 5.0):
    print(f"W = {w:3.1f} wavelengths -> mu = {correlation_mu(w):.4f}")

# The outage integral is built on the first-order Marcum Q function.
print("Q1(1, 1) =", marcum_q1(1.0, 1.0))
print("Q1 on a small grid:\n", marcum_q1(np.array([[0.5], [2.0]]), np.array([0.5, 1.0, 3.0])))

# The central user sits 400 m away with a path-loss exponent of 3.
sc = Scenario()
s2 = sc.cu.sigma2
print(f"\nmean channel gain sigma^2 = {s2:.3e}")

# More ports help, and uncorrelated ports help the most.
thr = 0.5 * s2
print("\n N   correlated   uncorrelated")
for n in (1, 2, 4, 8, 16):
    side = FasSide.from_geometry(n, 5.0, 400.0, 3.0)
    iid = FasSide(n, None, 0.0, s2)
    print(f"{n:2d}   {best_port_outage(side, thr):.6f}     {best_port_outage(iid, thr):.6f}")

# Cross-check one value by simulation.  Each chunk of trials has its own
# counter-based random stream, so this number never changes.
g = sample_port_gains(sc.cu, chunk_generator(McConfig().seed, 0), 200_000)
p_mc = np.mean(g <= thr)
se = np.sqrt(p_mc * (1 - p_mc) / g.size)
print(f"\nN=4: analytic {best_port_outage(sc.cu, thr):.5f}, simulated {p_mc:.5f} +- {se:.5f}")
