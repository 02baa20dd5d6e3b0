"""Scene I/O, prediction bundles, post-processing filters, evaluation runner and CLI."""

from .bundle import PredictionBundle, read_bundle, write_bundle
from .config import RunConfig
from .pipeline import (
    bundle_from_labels,
    evaluate_dataset,
    filter_foreground,
    refine_from_bundle,
    refine_planes,
    remove_small,
)
from .render import render_overlay
from .scene import Scene, load_scene, save_scene
