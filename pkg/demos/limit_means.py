"""
Mean queue length in the many-server limit
==========================================

With lam = (k - alpha) servers' worth of work arriving, the number of jobs
per server N/k settles to a law that depends only on alpha and the
dispatch rule.  This script tabulates the limit means and the cost of
dispatching immediately instead of holding jobs centrally.
"""
import numpy as np

from ndsqueue import diffusion

alphas = np.array([0.05, 0.1, 0.2, 0.4, 1.0, 2.0, 5.0])

print(f"{'alpha':>6} {'cq':>9} {'jsq':>9} {'iqf':>9} {'jsq/cq':>7} {'iqf/cq':>7}")
for a in alphas:
    cq, jsq, iqf = (diffusion.mean_of(p, a) for p in ("cq", "jsq", "iqf"))
    print(f"{a:6.2f} {cq:9.4f} {jsq:9.4f} {iqf:9.4f} {jsq / cq:7.4f} {iqf / cq:7.4f}")

# the jsq penalty is bounded; find where it peaks
alpha_star, worst = diffusion.ratio_sup("jsq", "cq")
print(f"\njsq is never more than {100 * (worst - 1):.2f}% worse than a central queue "
      f"(worst at alpha = {alpha_star:.4f}, theta = e^-alpha = {np.exp(-alpha_star):.4f})")

# iqf has no such bound: as alpha -> 0 it holds twice as many jobs
print(f"iqf/cq at alpha = 1e-3: {diffusion.mean_ratio('iqf', 'cq', 1e-3):.4f}")

# densities on a few points, and the stochastic ordering behind the table
grid = np.array([1.05, 1.5, 2.0, 3.0, 5.0])
for pol in ("cq", "jsq", "iqf"):
    d = diffusion.closed_form(pol, 0.4)
    print(f"{pol:>4} pdf:", " ".join(f"{v:.4f}" for v in d.pdf(grid)), "  P(N/k > 3):", f"{d.ccdf(3.0):.4f}")

cq, jsq, iqf = (diffusion.closed_form(p, 0.4) for p in ("cq", "jsq", "iqf"))
print("cq <=st jsq:", bool(diffusion.check_stochastic_dominance(cq, jsq)),
      " jsq <=st iqf:", bool(diffusion.check_stochastic_dominance(jsq, iqf)))

# the same density, rebuilt from nothing but the drift
num = diffusion.density_from_drift(diffusion.DriftSpec.of("jsq", 0.4))
x = np.linspace(1.001, 20, 5000)
print("max |numeric - closed form| =", f"{np.abs(num.pdf(x) - jsq.pdf(x)).max():.2e}")
