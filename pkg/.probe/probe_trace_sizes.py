import math, time
import numpy as np
from qmpemba.config import config_from_dict
from qmpemba.experiments import run_quench_pair

for n in [8, 10, 12, 14]:
    t1 = time.time()
    cfg = config_from_dict({
        "model": {"jx": -0.5, "jy": -1.5, "jz": -0.75, "hz": 10.0, "alpha": 4.0, "n": n},
        "states": {"family": "tilted_product", "angles": [math.pi/4, math.pi/8]},
        "engine": {"kind": "ed", "dt": 0.025, "t_max": 20.0},
        "analysis": {"window": 4, "trace_distance": True, "thermal_reference_n": n},
    })
    res = run_quench_pair(cfg)
    t = res.records[0].times
    d1 = np.asarray(res.records[0].series["trace_dist"])
    d2 = np.asarray(res.records[1].series["trace_dist"])
    r = d1 / d2
    print(f"n={n}: r0={r[0]:.4f} min_r={r.min():.4f}@t={t[np.argmin(r)]:.2f} "
          f"D1(20)={d1[-1]:.4f} D2(20)={d2[-1]:.4f} wall={time.time()-t1:.0f}s", flush=True)
