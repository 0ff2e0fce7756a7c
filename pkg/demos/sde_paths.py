"""
Sampling the limit diffusion
============================

Integrates dN = drift(N) dt + sqrt(2) dB for the jsq drift and compares the
long-run histogram with the closed-form density.
"""
import numpy as np
from scipy import stats

from ndsqueue import diffusion
from ndsqueue.distributions import RandomStream

alpha = 0.5
spec = diffusion.DriftSpec.of("jsq", alpha)
path = diffusion.euler_maruyama(spec, n0=2.0, dt=1e-4, horizon=1e4, stream=RandomStream(3),
                                record_every=100, burn_in=1e3)
x = path.after(1e3)
dens = diffusion.closed_form("jsq", alpha)

print(f"time average {path.time_average:.4f}  vs mean {dens.mean():.4f}")
print(f"path minimum {path.minimum:.6f} (the drift pushes away from 1)")
print(f"KS distance {stats.kstest(x, dens.cdf).statistic:.4f}")

edges = np.linspace(1.0, 8.0, 15)
counts, _ = np.histogram(x, bins=edges)
emp = counts / (len(x) * np.diff(edges))
mid = 0.5 * (edges[1:] + edges[:-1])
print("\n   n    empirical   density")
for m_, e, d in zip(mid, emp, dens.pdf(mid)):
    print(f"{m_:5.2f}  {e:9.4f}  {d:9.4f}")

# without noise the path slides to the point where the drift vanishes
quiet = diffusion.euler_maruyama(spec, 3.0, 1e-3, 30.0, noise=False)
print(f"\nnoise-free path ends at {quiet.values[-1]:.5f}; (2 + a)/(1 + a) = {(2 + alpha) / (1 + alpha):.5f}")

# a central queue path is reflected at 1
cq = diffusion.euler_maruyama(diffusion.DriftSpec.of("cq", 1.0), 2.0, 0.1, 1.5, noise=False)
print("cq, no noise:", np.round(cq.values, 2))
