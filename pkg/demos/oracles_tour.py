"""
Exact reference values
======================

The small exact computations used to check the simulators.
"""
import math

import numpy as np

from ndsqueue import oracles
from ndsqueue.distributions import RandomStream
from ndsqueue.sim import SimConfig, simulate

# gambler's ruin, and a chain with random rates checked against its first-step equations
print("fair walk to 4:", oracles.hitting_probability(oracles.BirthDeathChain.constant(4, 1, 1)))
gen = RandomStream(0).generator
chain = oracles.BirthDeathChain(12, gen.uniform(0.1, 10, 12), gen.uniform(0.1, 10, 12))
print("random chain: formula", oracles.hitting_probability(chain), " solve", oracles.hitting_probability_linear(chain))

# the central queue is an M/M/k queue
k, lam = 10, 9.5
pi, mean = oracles.mmk_stationary(lam, 1.0, k)
runs = [simulate(SimConfig(k=k, lam=lam, policy="cq", horizon_arrivals=1_000_000, stream_id=r),
                 stream=RandomStream(1, r)).time_avg_N for r in range(5)]
print(f"\nM/M/{k} at lam={lam}: exact E[N] = {mean:.3f}, simulated {np.mean(runs):.3f} +- {np.std(runs, ddof=1):.3f}")
print("detailed balance residual:", f"{oracles.detailed_balance_residual(pi, lam, 1.0, k):.1e}")

# M/M/1 renewal cycles: length tail and the centring that makes the area mean zero
st = oracles.ExcursionStats(1.0, 2.0)
cyc = oracles.simulate_excursions(st, 100_000, RandomStream(5))
t = np.array([1.0, 2.0, 4.0, 8.0])
print("\ncycle length tail:", np.round(cyc.tail(t), 5))
print("bound:           ", np.round(oracles.excursion_tail_bound(st, t), 5))
for form in ("stationary", "negated"):
    c = oracles.excursion_area_center(st, form)
    print(f"centre {form:>10} c={c:+.1f}: mean centred area {cyc.centred_areas(c).mean():+.4f}")

# Poisson tails
for mean_, x in [(1.0, 10.0), (0.1, 1.0), (5.0, 40.0)]:
    print(f"\nP(Po({mean_}) >= {x}) = {oracles.poisson_tail_exact(mean_, x):.3e} <= {oracles.poisson_tail_bound(mean_, x):.3e}", end="")
print(f"\n(the bound needs x >= mean e^2 = {math.e ** 2:.3f} mean)")
