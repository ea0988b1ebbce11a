"""Tensor-based multi-view kernel spectral clustering with a shared latent space."""
from ._accel import HAVE_NUMBA, default_backend
from .data import (
    SynthSpec,
    ViewDataset,
    generate_synth,
    load_csv_views,
    load_model,
    save_model,
)
from .encoding import ClusterAssignment, Codebook, assign, build_codebook, scores, sign_encode
from .errors import *  # noqa: F401,F403
from .kernels import (
    Centering,
    KernelKind,
    KernelSpec,
    center_gram,
    center_gram_test,
    degree_matrix,
    eval_kernel,
    gram_cross,
    gram_matrix,
)
from .metrics import ari, contingency, nmi
from .model import TmvkscrModel, explained_variance, fit, fit_fixed_size, predict, predict_per_view
from .spectral import FusionConfig, fuse_kernels, hadamard_equals_tensor_oracle, objective_value, solve_latent

__version__ = "0.1.0"
