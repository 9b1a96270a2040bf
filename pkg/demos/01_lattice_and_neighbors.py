"""
Lattice fields, vicinities and the neighbor-count scan
======================================================

Simulate a moving-average field, look at how a site's vicinity is ordered,
build the associated regression dataset and estimate how many neighbors
carry information about a site.
"""

import numpy as np

from spatialkir import FieldSpec, LatticeRegion, build_associated_process, generate_field
from spatialkir.lattice import neighbor_ordering
from spatialkir.predictor import NeighborScanConfig, neighbor_scan

# nearest neighbors of an interior site: the four axis neighbors, then the diagonals
region = LatticeRegion((10, 10))
print("8 nearest neighbors of (5, 5):", neighbor_ordering((5, 5), region, 8))

# cross-shaped moving average: each value mixes a site and its four axis neighbors
field = generate_field(FieldSpec("moving-average", (40, 40), seed=1, window="cross"))
print("field shape", field.values.shape, "sample variance %.3f" % field.values.var())

# associated process: one sample per site whose whole vicinity is observed
ds = build_associated_process(field, 4)
print("d=4 associated process: %d samples of %d covariates" % (ds.n, ds.d))
print("corr(Y, first neighbor) = %.3f" % np.corrcoef(ds.y, ds.x[:, 0])[0, 1])

# scan k = 1, 2, ... until E(xi_{i(k)} | xi_i = y) looks flat
for kind in ("white-noise", "moving-average"):
    fld = generate_field(FieldSpec(kind, (40, 40), seed=2, window="cross"))
    res = neighbor_scan(fld, None, NeighborScanConfig(delta=0.1))
    stats = ", ".join("%.3f" % s for s in res.statistics)
    print(f"{kind:>15}: d = {res.d} (cap reached: {res.cap_reached}); statistics {stats}")
