"""Tumor saliency estimation for breast-ultrasound-like grayscale images.

Pipeline: lesion existence check on a reference-point weighted map, then
superpixel over-segmentation, boundary-connectedness and prior maps, and a
convex energy over the simplex solved with a primal-dual interior-point
method. Ships with a seeded synthetic-phantom generator and a full
evaluation/tuning harness.
"""

from .connectedness import (
    ConnectednessResult,
    edge_confidence,
    edge_truth,
    geodesic_background,
    propagate,
)
from .image import (
    BinaryMask,
    GrayImage,
    load_image,
    load_mask,
    save_image,
    save_mask,
)
from .metrics import (
    EvalReport,
    PrPoint,
    adaptive_threshold,
    binarize,
    f_measure,
    grid_search,
    mae,
    pr_curve,
    precision_recall,
)
from .phantom import PhantomSpec, ShadowSpec, TumorSpec, generate_phantom, suite_specs
from .pipeline import (
    Diagnostics,
    PipelineConfig,
    SaliencyResult,
    estimate,
    evaluate_dataset,
    tune_parameters,
)
from .priors import (
    ExistenceFeatures,
    PriorBundle,
    center_costs,
    existence_features,
    foreground_costs,
    has_tumor,
    reference_point,
    weighted_map,
)
from .solver import (
    EnergySpec,
    SolverNonconvergence,
    SolverReport,
    assemble,
    proximity,
    similarity,
    solve,
)
from .superpixel import QuickShiftParams, RegionGraph, inhomogeneity, oversegment

__version__ = "0.1.0"
