"""
Predicting a lattice field from its neighbors
=============================================

Fit the dimension-reduction predictor on half of the sites (checkerboard)
and compare it with a full kernel regression on all neighbor values and
with the plain mean.
"""

import numpy as np

from spatialkir import FieldSpec, fit, generate_field
from spatialkir.bench import run_predictor_benchmark

for d in (4, 8):
    bench = run_predictor_benchmark(FieldSpec("moving-average", (50, 50), window="cross"),
                                    d=d, D=1, seeds=5, master_seed=3)
    print(f"d = {d}")
    for row in bench.rows:
        print("   reduced %.3f   full kernel %.3f   mean %.3f" %
              (row["mse_reduced"], row["mse_baseline"], row["mse_mean"]))
    agg = bench.aggregate
    print("   median MSE: reduced %.3f, full kernel %.3f, mean %.3f" %
          (agg["mse_reduced"], agg["mse_baseline"], agg["mse_mean"]))

# the fitted direction weights the four axis neighbors about equally
model = fit(generate_field(FieldSpec("moving-average", (50, 50), seed=4, window="cross")),
            d=4, D=1)
print("direction on the 4 axis neighbors:", np.round(model.directions[0], 3))
