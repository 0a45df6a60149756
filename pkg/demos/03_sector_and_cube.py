"""SPInS beyond the simplex: a sphere sector and a hypercube.

On the nonnegative sector of the unit 3-ball, SPInS is compared with
uniform proposals from the bounding box. In the 10-D cube [0, 3]^10 it is
compared with joint and componentwise uniform proposals. Both posteriors
come from additive Gaussian data.
"""
import sys
import tempfile
from pathlib import Path

from spins.experiments import format_table, load_config, run_experiment

root = Path(sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="spins_geo_"))

for name in ("sector.json", "cube.json"):
    cfg = load_config(name)
    report = run_experiment(cfg, out_dir=root / cfg.name)
    print(f"\n== {cfg.name}: truth {cfg.model['params']['theta']}, ball radius {report['ball']['radius']}")
    print(format_table({k: v["diagnostics"] for k, v in report["samplers"].items()}))

# In the cube the posterior sd is about 0.03 per coordinate. With d = 30 the
# SPInS step is of the same order, so the chain drifts from 1 toward 2 in a
# few hundred iterations. A componentwise uniform sweep makes ten
# independent redraws per iteration and gets there sooner; the joint uniform
# sampler almost never proposes a point near the mode.
print(f"\noutputs under {root}")
