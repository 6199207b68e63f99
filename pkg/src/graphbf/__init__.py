"""Bilateral filtering as graph spectral filtering.

Build the bilateral-filter graph of an image (:mod:`graphbf.graph`), pick a
spectral response (:mod:`graphbf.kernels`), and apply it as a short sequence
of bilateral passes (:mod:`graphbf.engine`). :mod:`graphbf.oracle` holds the
dense eigendecomposition used to check the fast paths.
"""

__version__ = "0.1.0"

from .engine import (
    FilterPlan,
    apply_cascade,
    apply_chebyshev,
    apply_plan,
    conjugate_pair_stage,
    filter_image,
    iterate_bf,
    iterate_bf_reweighted,
    make_plan,
    partial_bf_stage,
)
from .graph import (
    BilateralGraph,
    GraphParams,
    apply_bf,
    apply_normalized_laplacian,
    apply_randomwalk_laplacian,
    build_graph,
    count_sparse_passes,
    denormalize_signal,
    normalize_signal,
)
from .imageio import (
    ImageFormatError,
    ImageGrid,
    NoiseSpec,
    add_white_noise,
    calibrate_noise_to_snr,
    load_image,
    save_image,
    snr_db,
)
from .kernels import (
    PolyFilter,
    SpectralKernel,
    bf_kernel,
    denoise_kernel,
    eval_kernel,
    eval_poly,
    fit_chebyshev,
    iterated_bf_kernel,
    make_regularized_kernel,
    make_sharp_lowpass,
    poly_sup_error,
    roots_to_coeffs,
    tabulated_kernel,
)
from .oracle import (
    DenseSpectrum,
    eigendecompose,
    empirical_spectral_response,
    energy_compaction,
    exact_spectral_filter,
    gft,
    igft,
)
