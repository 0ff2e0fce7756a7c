"""
JSQ with many servers
=====================

Simulates join-the-shortest-queue at alpha = 0.4 for growing k and compares
E[N]/k with the limit mean.  Along the way it shows the two structural
facts the limit rests on: queue lengths stay within a narrow band, and the
idle-server count averages (2 - n)/(n - 1) when N/k = n.
"""
import time

import numpy as np

from ndsqueue import diffusion
from ndsqueue.distributions import RandomStream
from ndsqueue.sim import SimConfig, expected_idle_given, idle_conditional_mean, merge_metrics, simulate

alpha = 0.4
target = diffusion.mean_jsq(alpha)
print(f"limit mean E[N/k] = {target:.4f}\n")

for k, arrivals in [(4, 1_000_000), (16, 4_000_000), (64, 10_000_000)]:
    t0 = time.time()
    reps = [simulate(SimConfig.nds(k, alpha, horizon_arrivals=arrivals, stream_id=r), stream=RandomStream(0, r))
            for r in range(4)]
    m = merge_metrics(reps)
    est = np.mean([r.mean_per_server for r in reps])
    idle = idle_conditional_mean(m, [1.4, 1.6])[(1.4, 1.6)]
    print(f"k={k:4d}  E[N]/k={est:.4f} ({100 * (est - target) / target:+.1f}%)  "
          f"time with max - min > 2: {m.spread_gt2_fraction:.3f}  "
          f"E[I | N/k~1.5]={idle:.3f}  ssc sup={m.ssc_sup:.3f}  [{time.time() - t0:.1f}s]")

print("\nleading-order idle mean at N/k = 1.5:", expected_idle_given(1.5))

# the other policies at k = 64
for pol in ("cq", "iqf", "i1f", "pod:2"):
    m = simulate(SimConfig.nds(64, alpha, policy=pol, horizon_arrivals=5_000_000), stream=RandomStream(0))
    lim = diffusion.mean_of(pol, alpha) if pol != "pod:2" else float("nan")
    print(f"{pol:>6}: E[N]/k = {m.mean_per_server:.3f}   limit {lim:.3f}")
