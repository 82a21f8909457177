"""Simulation and verification lab for directed last-passage percolation."""

from .env import (DistributionSpec, RngStream, WeightField, crop, moments,
                  sample_field, sample_iid, sample_window_row, shift_view)
from .errors import (CapacityError, ParameterError, RangeError, StabilityError,
                     TieError)
from .passage import (Convention, Orientation, PassageTable, brute_force_passage,
                      compute_forward, compute_reverse, rost_shape,
                      shape_estimate, shape_value)

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "Convention", "DistributionSpec", "Orientation",
    "ParameterError", "PassageTable", "RangeError", "RngStream",
    "StabilityError", "TieError", "WeightField", "brute_force_passage",
    "compute_forward", "compute_reverse", "crop", "moments", "rost_shape",
    "sample_field", "sample_iid", "sample_window_row", "shape_estimate",
    "shape_value", "shift_view",
]
