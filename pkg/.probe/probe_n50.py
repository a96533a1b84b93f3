import math, time, sys
import numpy as np
from qmpemba.longrange import assemble_longrange_mpo, fit_power_law
from qmpemba.model import D_EFFECTIVE, ModelSpec
from qmpemba.states import build_tilted_product
from qmpemba.tdvp import tdvp_evolve

alpha = float(sys.argv[1]); theta_num = float(sys.argv[2]); t_max = float(sys.argv[3])
n, chi = 50, 100
spec = ModelSpec(j_x=-1, j_y=-1, j_z=-0.75, alpha=alpha, n=n, variant=D_EFFECTIVE)
fit = fit_power_law(alpha, n, 8)
mpo = assemble_longrange_mpo(fit, spec)
state = build_tilted_product(theta_num * math.pi, n).to_mps()
t_start = time.time()
last = [t_start]
def prog(step, n_steps, st):
    now = time.time()
    if step % 20 == 0 or step == n_steps:
        print(f"step {step}/{n_steps} t={step*0.05:.2f} maxchi={st.max_bond_dim()} "
              f"wall={now-t_start:.0f}s (+{now-last[0]:.1f}s)", flush=True)
    last[0] = now
rec = tdvp_evolve(state, mpo, dt=0.05, t_max=t_max, chi_max=chi, cutoff=1e-12,
                  window=(23, 4), progress=prog)
np.savez("/root/pkg/.probe/probe_a%s_th%s.npz" % (alpha, theta_num),
         times=rec.times, rdms=rec.rdms, energy=rec.series["energy"],
         norm=rec.series["norm"], entropy=rec.series["entropy_center"],
         discard=rec.series["truncation_discard"])
print("DONE warmup_steps=", rec.meta["warmup_steps"], "final dims:", max(rec.meta["final_bond_dims"]),
      "Edrift", rec.energy_drift(), "normdrift", rec.norm_drift())
