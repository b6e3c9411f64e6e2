"""prfilter: blind image denoising through a coupled photoreceptor grid.

The filter drives one model photoreceptor per pixel, couples neighbours
with gap junctions, and reads out normalized peak voltage deflections.
Alongside it: classic filter baselines, seeded noise synthesis (five
families + calibrated blind mixtures), PSNR/SSIM, receptive-field
estimation by spike-triggered averaging, residual-noise mixture profiling,
and a benchmark CLI (`prf`).
"""

from .classic_filters import (
    FILTERS,
    FilterKind,
    adaptive_median_filter,
    average_filter,
    gaussian_filter,
    gaussian_kernel,
    max_filter,
    mean_filter,
    median_filter,
    min_filter,
)
from .core_model import (
    DEFAULT_PARAMS,
    NetworkParams,
    grid_laplacian,
    kernel_peak_time,
    peak_deflections,
    photocurrent_kernel,
    simulate,
    simulate_timevarying,
)
from .corpus import make_default_corpus, make_texture_corpus
from .image_io import (
    ImageIOError,
    read_image,
    read_sidecar,
    write_image,
    write_pgm,
    write_png,
    write_sidecar,
)
from .metrics import psnr, quantize8, ssim
from .noise_forge import (
    CalibrationError,
    NoiseSpec,
    add_noise,
    blind_mixture,
    blind_mixture_info,
)
from .noise_profiler import (
    DegenerateSamplesError,
    MixtureFit,
    fit_gmm,
    regularization_report,
    residual,
)
from .pr_filter import impulse_kernel, minmax_normalize, pr_denoise
from .sta_lab import (
    NoSpikeletsError,
    StaConfig,
    StaResult,
    StimulusMovie,
    compute_sta,
    detect_spikelets,
    fit_gaussian_to_map,
    gaussian_white_movie,
    laplacian_white_movie,
    natural_patch_movie,
    run_sta,
    zca_whiten,
)

__version__ = "0.1.0"
