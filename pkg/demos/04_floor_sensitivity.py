"""
How the density floor biases the covariance estimate
====================================================

The floor keeps r = phi / f finite where the density estimate is tiny, at
the price of shrinking r there. With a floor that is too high the error
stops decreasing with n. Compare floor scales and the two floor variants.
"""

from spatialkir import BandwidthSchedule, KernelConfig, SingleIndexSpec
from spatialkir.bench import run_rate_experiment

template = SingleIndexSpec(d=3, noise_std=1.0)
sizes = (400, 900, 1600, 3600)

for e_scale in (0.1, 0.01):
    for variant in ("max", "add"):
        cfg = KernelConfig(schedule=BandwidthSchedule(e_scale=e_scale), floor=variant)
        rep = run_rate_experiment(template, sizes, 5, cfg, master_seed=1, oracle="closed")
        meds = "  ".join("%.4f" % m for m in rep.medians)
        print(f"e_scale={e_scale:<5} floor={variant:<4} medians {meds}  slope {rep.slope:+.3f}")
