import math, time
import numpy as np
from qmpemba.config import config_from_dict
from qmpemba.experiments import run_quench_pair

for hz in [0.5, 2.0, 5.0, 10.0, 20.0]:
    t1 = time.time()
    cfg = config_from_dict({
        "model": {"jx": -0.5, "jy": -1.5, "jz": -0.75, "hz": hz, "alpha": 4.0, "n": 12},
        "states": {"family": "tilted_product", "angles": [math.pi/4, math.pi/8]},
        "engine": {"kind": "ed", "dt": 0.025, "t_max": 30.0},
        "analysis": {"window": 4, "trace_distance": True, "thermal_reference_n": 12},
    })
    res = run_quench_pair(cfg)
    t = res.records[0].times
    d1 = np.asarray(res.records[0].series["trace_dist"])
    d2 = np.asarray(res.records[1].series["trace_dist"])
    r = d1 / d2
    below = np.where(r < 1)[0]
    first_sustained = None
    run = 0
    for k in range(len(r)):
        run = run + 1 if r[k] < 1 else 0
        if run >= 3:
            first_sustained = t[k - 2]
            break
    print(f"hz={hz}: r0={r[0]:.4f} min_r={r.min():.4f}@t={t[np.argmin(r)]:.2f} "
          f"sustained_cross={first_sustained} r(30)={r[-1]:.4f} "
          f"asym={res.report.verdict}/{res.report.tau_m} wall={time.time()-t1:.0f}s", flush=True)
