"""Kernel inverse regression for lattice random fields.

Estimates the effective dimension-reduction space from the covariance of a
kernel estimate of ``E(X | Y)``, estimates how many nearest neighbors matter
for predicting a site, and builds the dimension-reduction spatial predictor.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .lattice import (LatticeRegion, RegressionDataset, ScalarField, Site,  # noqa: E402
                      build_associated_process, center_dataset, neighbor_ordering)
from .fieldsim import (FieldSpec, SingleIndexSpec, generate_field,  # noqa: E402
                       generate_single_index, ground_truth_sigma_e)
from .kernelest import (BandwidthSchedule, KernelConfig, density_estimate,  # noqa: E402
                        evaluate_on_grid, inverse_regression, numerator_estimate,
                        scalar_kernel_regression)
from .edr import (edr_directions, empirical_covariance,  # noqa: E402
                  inverse_regression_covariance, select_dimension, subspace_distance)
from .predictor import (NeighborScanConfig, baseline_full_kernel_predict,  # noqa: E402
                        estimate_neighbor_count, fit, predict_site)
