"""Instance boundary explicit errors, center/offset codecs, mask perturbation
and object-size-normalized metrics for unseen object instance segmentation."""

from .core import ImageSize, connected_components, make_rng, relabel_canonical
from .error_maps import (
    BoundaryConfig,
    ErrorMaps,
    binary_error,
    boundary_explicit_error,
    extract_boundary,
    mask_explicit_error,
)
from .felzenszwalb import FelzParams, felzenszwalb
from .hungarian import Assignment, hungarian_max
from .losses import LossBreakdown, LossWeights, cross_entropy_fg, dice_loss, l1_offset, mse_center, total_loss
from .metrics import MetricsReport, evaluate_pair, f_at_75, osn_boundary, osn_overlap, pairwise_prf
from .perturb import PerturbConfig, add_false_positive, perturb, perturb_boundary, split_instance
from .represent import DecodeConfig, decode, encode, encode_centers, encode_offsets, instance_center, nms_centers

__version__ = "0.1.0"
