"""Four samplers on a skew-normal posterior over the 3-simplex.

A thousand observations are simulated from an additive multivariate
skew-normal model with location theta = (1/3, 1/3, 1/3). All four simplex
samplers start from a corner, where one weight is almost 1, and we compare
how quickly each one reaches a small ball around the posterior mode.
"""
import sys
import tempfile

from spins.experiments import format_table, load_config, run_experiment

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="spins_msn_")
cfg = load_config("msn.json")
print(f"running {[s['name'] for s in cfg.samplers]} for {cfg.chain['iterations']} iterations")
report = run_experiment(cfg, out_dir=out, log=print)

print()
print(format_table({k: v["diagnostics"] for k, v in report["samplers"].items()}))
print(f"\nball: radius {report['ball']['radius']} around the posterior mode {report['ball']['center']}")

# The componentwise samplers move one weight at a time and leave the corner
# quickly. The joint samplers have to shrink their steps near the corner.
hits = {k: v["diagnostics"]["iterations_to_ball"] for k, v in report["samplers"].items()}
print("iterations to reach the ball:", hits)
print(f"traces and report written to {out}")
