import sys, time
from qmpemba.experiments import ssb_diagnostics
from qmpemba.model import ModelSpec

sizes = (int(sys.argv[1]), int(sys.argv[2]))
chi = int(sys.argv[3])
for alpha in [6.0, 1.5]:
    t0 = time.time()
    spec = ModelSpec(j_x=-1, j_y=-1, j_z=-0.75, alpha=alpha, n=sizes[0])
    diag = ssb_diagnostics(spec, sizes, chi=chi, sweeps=10, cutoff=1e-12)
    print(f"alpha={alpha}: c_eff={diag['c_eff']:.4f} dev={diag['c_eff_deviation']:.3f} "
          f"flag={diag['ssb_flag']} gap={diag['es_gap']} S=({diag['entropies'][0]:.5f},{diag['entropies'][1]:.5f}) "
          f"conv={diag['converged']} wall={time.time()-t0:.0f}s", flush=True)
