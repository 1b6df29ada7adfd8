"""The three-group drift demonstration: recursive learning vs plain SGD.

One hundred linear tasks are generated around three meta parameters, so no
single parameter is optimal for every task; the analytic compromise is the
meta average [25/6, -1/6].  The gain-scheduled recursive learner settles on
that point in both visitation orders.  Fine-tuning with SGD instead chases
whichever group it saw last and never settles.

Writes harness outputs under demos/out/ so the plotting package can render
them, e.g.:

    clplots render --kind trajectory --in demos/out/alg2_random/trajectory_404.csv \
        --summary demos/out/alg2_random/summary.json --out traj.png
"""

import math
from pathlib import Path

import numpy as np

from conlearn.harness import DEMO_ROUNDED_REFERENCE, demo_config, run_config

OUT = Path(__file__).resolve().parent / "out"
SEED = 404

target = np.array([25 / 6, -1 / 6])
reference = np.array(DEMO_ROUNDED_REFERENCE)

print(f"analytic target {np.round(target, 4).tolist()}   "
      f"(secondary reference point {np.round(reference, 4).tolist()})")
print()

for learner in ("alg2", "sgd"):
    for order in ("sequential", "random"):
        outdir = OUT / f"{learner}_{order}"
        cfg = demo_config(order, learner, SEED, output_dir=str(outdir))
        result = run_config(cfg)[0]
        w = result.final_state.w
        d_target = float(np.linalg.norm(w - target))
        d_ref = float(np.linalg.norm(w - reference))
        swings = sum(1 for t, wt in result.trajectory
                     if t > 50 and np.linalg.norm(wt - target) > 0.5)
        w_txt = str(np.round(w, 3).tolist())
        print(f"{learner:>4} / {order:<10}  final w = {w_txt:<18}"
              f"  dist to target {d_target:.3f}   to reference {d_ref:.3f}"
              f"   late stages >0.5 away: {swings}/50")

print()
print(f"outputs (metrics/trajectory CSVs, summary.json) under {OUT}/")
