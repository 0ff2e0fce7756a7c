"""
Processor sharing and job-size variability
==========================================

Under processor sharing, JSQ only looks at queue lengths and its mean
occupancy barely moves when the job-size law changes.  LWL looks at the
work itself and is sensitive to it.  All job-size presets have mean one.
"""
import numpy as np

from ndsqueue.distributions import PRESETS, RandomStream, moments
from ndsqueue.sim import SimConfig, simulate

k, alpha, arrivals, reps = 16, 0.4, 2_000_000, 3

print(f"k={k}, alpha={alpha}, PS, {reps} x {arrivals:.0e} arrivals\n")
print(f"{'dist':>6} {'var':>6} {'jsq':>8} {'lwl':>8} {'random':>8}")
for name in PRESETS:
    row = []
    for pol in ("jsq", "lwl", "random"):
        vals = [simulate(SimConfig.nds(k, alpha, service_dist=name, discipline="ps", policy=pol,
                                       horizon_arrivals=arrivals, stream_id=r), stream=RandomStream(2, r)).mean_per_server
                for r in range(reps)]
        row.append(np.mean(vals))
    print(f"{name:>6} {moments(name)[1]:6.2f} " + " ".join(f"{v:8.3f}" for v in row))
