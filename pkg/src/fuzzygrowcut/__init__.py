"""Seeded mass segmentation on grayscale ROI patches.

A cellular-automaton segmenter (classical two-class GrowCut and an
object-seeds-only fuzzy variant), simulated-annealing seed selection,
Zernike shape descriptors, a small MLP classifier, and the evaluation
pipeline tying them together on synthetic phantoms.
"""

from .annealing import SAConfig, SeedCandidate, anneal, fitness, metropolis_accept, sa_neighbor
from .evaluation import CVReport, SelectionReport, dice, kfold_cv, t_test, well_segmented
from .fuzzy import (
    FuzzyParams,
    GaussianModel,
    alpha_for_halfwidth,
    center_of_mass,
    fit_gaussian,
    fuzzy_run,
    fuzzy_step,
    init_fuzzy,
    membership,
    model_strength,
)
from .growcut import (
    BACKGROUND,
    OBJECT,
    UNLABELED,
    CellGrid,
    Seed,
    SeedSet,
    SegmentationResult,
    attenuation_g,
    growcut_run,
    growcut_step,
    init_grid,
)
from .imaging import (
    BinaryMask,
    GrayImage,
    ImageFormatError,
    PhantomSpec,
    contour_overlay,
    load_image,
    load_mask,
    mask_contour,
    sample_phantom_spec,
    save_image,
    save_mask,
    save_overlay,
    synth_phantom,
)
from .mlp import MLPModel, TrainConfig, forward, gradient_check, load_model, save_model, train
from .pipeline import PipelineConfig, RunManifest, report, roi_sa_config, run_pipeline
from .zernike import descriptor, moment_indices, radial_poly, zernike_moment

__version__ = "0.1.0"
