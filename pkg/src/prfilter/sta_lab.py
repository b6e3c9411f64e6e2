"""Receptive-field estimation on the coupled grid by spike-triggered averaging.

Pipeline: synthesize a stimulus movie (white Gaussian, white Laplacian, or
whitened natural patches), drive the grid with it, detect spikelets
(prominent local maxima) in one cell's voltage trace, and average the
stimulus frames preceding each event:

    STA[j] = (1/n_s) sum_i frames[f_i - j]

where f_i is the frame during which event i occurs and j indexes lag bins
of one frame each. The temporal filter is the probed cell's lag profile
(max-abs normalized); the spatial map is the raw STA frame at the lag of
the temporal filter's extremum.

Stimulus contrast is the per-pixel standard deviation in drive units (pA
of sensitivity); frames are zero-mean, so the movie modulates around the
dark operating point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal
from scipy.optimize import minimize_scalar

from .core_model import DEFAULT_PARAMS, NetworkParams, simulate_timevarying

ZCA_EPS = 1e-5
# white dither added to natural patches (variance, unit-std patch scale);
# keeps the patch covariance well-conditioned so whitening can reach
# Frobenius error < 1e-3 with the pinned eps
NATURAL_DITHER_VAR = 0.15

SPIKELET_PROMINENCE = 0.5   # mV
SPIKELET_REFRACTORY = 5.0   # ms

MOVIE_FAMILIES = ("gaussian_white", "laplacian_white", "natural_patches")


class NoSpikeletsError(RuntimeError):
    """The probed cell produced no detectable spikelets."""


@dataclass
class StimulusMovie:
    frames: np.ndarray   # (n_frames, h, w), zero-mean drive contrast (pA)
    frame_dt: float      # ms
    family: str
    whitened: bool = False

    @property
    def shape(self):
        return self.frames.shape[1:]

    @property
    def n_frames(self):
        return self.frames.shape[0]

    @property
    def duration(self):
        return self.n_frames * self.frame_dt


@dataclass
class StaResult:
    temporal_filter: np.ndarray  # (bins,), max-abs normalized
    spatial_map: np.ndarray      # (h, w), raw STA at selected_lag
    selected_lag: float          # ms before the event
    n_spikes: int
    sta: np.ndarray              # (bins, h, w), raw


# ---------------------------------------------------------------- stimuli

def gaussian_white_movie(n_frames, shape, contrast, frame_dt, seed) -> StimulusMovie:
    rng = np.random.default_rng(seed)
    frames = contrast * rng.standard_normal((n_frames, *shape))
    return StimulusMovie(frames, frame_dt, "gaussian_white")


def laplacian_white_movie(n_frames, shape, contrast, frame_dt, seed) -> StimulusMovie:
    rng = np.random.default_rng(seed)
    # Laplace(0, b) has std b*sqrt(2); contrast is the per-pixel std
    frames = rng.laplace(0.0, contrast / np.sqrt(2.0), (n_frames, *shape))
    return StimulusMovie(frames, frame_dt, "laplacian_white")


def natural_patch_movie(images, n_frames, shape, contrast, frame_dt, seed,
                        dither_var=NATURAL_DITHER_VAR) -> StimulusMovie:
    """Random patches from a corpus, mean-removed, unit-std, dithered.

    Raw patch ensembles are heavily correlated and can be near rank
    deficient (flat patches), so white dither of variance dither_var is
    mixed in before the movie is used or whitened.
    """
    rng = np.random.default_rng(seed)
    ph, pw = shape
    usable = [np.asarray(im, dtype=float) for im in images
              if im.shape[0] >= ph and im.shape[1] >= pw]
    if not usable:
        raise ValueError(f"no corpus image fits a {ph}x{pw} patch")
    frames = np.empty((n_frames, ph, pw))
    which = rng.integers(0, len(usable), size=n_frames)
    for i in range(n_frames):
        im = usable[which[i]]
        y = rng.integers(0, im.shape[0] - ph + 1)
        x = rng.integers(0, im.shape[1] - pw + 1)
        frames[i] = im[y : y + ph, x : x + pw]
    frames -= frames.mean(axis=0)
    std = frames.std()
    if std > 0:
        frames /= std
    frames += np.sqrt(dither_var) * rng.standard_normal(frames.shape)
    frames -= frames.mean(axis=0)
    return StimulusMovie(contrast * frames, frame_dt, "natural_patches")


def zca_matrix(frames: np.ndarray, eps: float = ZCA_EPS):
    """Whitening transform for mean-removed flattened frames.

    Returns (W, mean, fro) with W = E diag(1/sqrt(lam + eps)) E^T symmetric
    and fro the Frobenius distance of the whitened covariance from I,
    computable from the spectrum alone.
    """
    n, d = frames.shape[0], int(np.prod(frames.shape[1:]))
    if n < d:
        raise ValueError(f"need at least {d} frames to whiten, got {n}")
    x = frames.reshape(n, d)
    mean = x.mean(axis=0)
    x = x - mean
    cov = (x.T @ x) / n
    lam, evec = np.linalg.eigh(cov)
    lam = np.maximum(lam, 0.0)
    fro = float(np.linalg.norm(lam / (lam + eps) - 1.0))
    wmat = (evec / np.sqrt(lam + eps)) @ evec.T
    return wmat, mean, fro


def zca_whiten(movie: StimulusMovie, eps: float = ZCA_EPS) -> StimulusMovie:
    """Symmetric whitening of a stimulus movie.

    If regularization cannot push the whitened covariance within Frobenius
    1e-3 of I, the covariance is effectively rank deficient and we refuse
    rather than emit a half-white movie.
    """
    frames = np.asarray(movie.frames, dtype=float)
    n, h, w = frames.shape
    wmat, mean, fro = zca_matrix(frames, eps)
    if fro >= 1e-3:
        raise ValueError(
            f"covariance rank deficient beyond regularization (residual {fro:.2e})"
        )
    white = ((frames.reshape(n, h * w) - mean) @ wmat).reshape(n, h, w)
    return replace(movie, frames=white, whitened=True)


# ---------------------------------------------------------------- events

def detect_spikelets(trace, dt: float = 1.0,
                     prominence: float = SPIKELET_PROMINENCE,
                     refractory: float = SPIKELET_REFRACTORY) -> np.ndarray:
    """Times (ms) of prominent strict local maxima, refractory-thinned."""
    trace = np.asarray(trace, dtype=float)
    if trace.ndim != 1 or trace.size < 3:
        raise ValueError("trace must be 1-D with at least 3 samples")
    idx, _ = signal.find_peaks(
        trace, prominence=prominence, distance=max(1, int(round(refractory / dt)))
    )
    return idx * dt


# ---------------------------------------------------------------- estimator

def compute_sta(movie: StimulusMovie, events, window: float, bins: int,
                cell: tuple | None = None) -> StaResult:
    """Event-triggered mean over the window preceding each event.

    Lag bin j (one frame wide) holds the frame j frames before the one the
    event falls in; events too early to have a full window are dropped.
    """
    events = np.asarray(events, dtype=float)
    if events.size == 0:
        raise ValueError("no events supplied")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if window + 1e-9 < bins * movie.frame_dt:
        raise ValueError(
            f"window {window} ms shorter than bins*frame_dt = {bins * movie.frame_dt} ms"
        )
    if window > movie.duration + 1e-9:
        raise ValueError(f"window {window} ms exceeds recording {movie.duration} ms")
    n_frames, h, w = movie.frames.shape
    f_idx = np.floor(events / movie.frame_dt + 1e-9).astype(int)
    f_idx = f_idx[(f_idx >= bins - 1) & (f_idx < n_frames)]
    if f_idx.size == 0:
        raise ValueError("no events with a full stimulus window")
    sta = np.zeros((bins, h, w))
    for j in range(bins):
        sta[j] = movie.frames[f_idx - j].mean(axis=0)
    cy, cx = (h // 2, w // 2) if cell is None else cell
    tf_raw = sta[:, cy, cx]
    peak = np.abs(tf_raw).max()
    tf = tf_raw / peak if peak > 0 else tf_raw.copy()
    lag_idx = int(np.argmax(np.abs(tf_raw)))
    return StaResult(
        temporal_filter=tf,
        spatial_map=sta[lag_idx].copy(),
        selected_lag=lag_idx * movie.frame_dt,
        n_spikes=int(f_idx.size),
        sta=sta,
    )


# ---------------------------------------------------------------- map fit

@dataclass
class GaussianFit:
    sigma: float        # cell units
    amplitude: float
    center: tuple       # (row, col) of the map extremum
    residual: float     # sqrt SSE of the fit
    rel_residual: float # residual / map norm
    poor: bool          # sub-cell sigma or large relative residual

    def surface(self, shape) -> np.ndarray:
        yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
        d2 = (yy - self.center[0]) ** 2.0 + (xx - self.center[1]) ** 2.0
        return self.amplitude * np.exp(-d2 / (2.0 * self.sigma ** 2))


def fit_gaussian_to_map(spatial_map) -> GaussianFit:
    """Least-squares isotropic Gaussian centered on the map extremum."""
    m = np.asarray(spatial_map, dtype=float)
    if m.ndim != 2:
        raise ValueError("spatial map must be 2-D")
    if np.ptp(m) < 1e-15:
        raise ValueError("flat map; nothing to fit")
    mag = np.abs(m)
    peak = mag.max()
    if np.count_nonzero(mag == peak) != 1:
        raise ValueError("map extremum is not unique")
    r0, c0 = np.unravel_index(np.argmax(mag), m.shape)
    yy, xx = np.mgrid[0 : m.shape[0], 0 : m.shape[1]]
    d2 = ((yy - r0) ** 2 + (xx - c0) ** 2).astype(float)

    def sse(sig):
        phi = np.exp(-d2 / (2.0 * sig * sig))
        amp = (m * phi).sum() / (phi * phi).sum()
        return ((m - amp * phi) ** 2).sum()

    res = minimize_scalar(sse, bounds=(0.05, 2.0 * max(m.shape)), method="bounded",
                          options={"xatol": 1e-7})
    sig = float(res.x)
    phi = np.exp(-d2 / (2.0 * sig * sig))
    amp = float((m * phi).sum() / (phi * phi).sum())
    residual = float(np.sqrt(((m - amp * phi) ** 2).sum()))
    rel = residual / float(np.linalg.norm(m))
    return GaussianFit(
        sigma=sig,
        amplitude=amp,
        center=(int(r0), int(c0)),
        residual=residual,
        rel_residual=rel,
        poor=bool(sig < 0.3 or rel > 0.25),
    )


# ---------------------------------------------------------------- pipeline

@dataclass(frozen=True)
class StaConfig:
    height: int = 10
    width: int = 10
    family: str = "gaussian_white"
    n_frames: int = 20000
    frame_dt: float = 10.0          # ms
    contrast: float = 4.0           # pA std per pixel (0.1 * default i_dark)
    seed: int = 42
    bins: int = 8
    prominence: float = SPIKELET_PROMINENCE
    refractory: float = SPIKELET_REFRACTORY
    whiten: bool = False            # natural patches are always whitened

    def __post_init__(self):
        if self.family not in MOVIE_FAMILIES:
            raise ValueError(f"unknown stimulus family {self.family!r}")
        if self.n_frames < 1 or self.bins < 1:
            raise ValueError("n_frames and bins must be positive")


def make_movie(config: StaConfig, images=None) -> StimulusMovie:
    shape = (config.height, config.width)
    if config.family == "gaussian_white":
        movie = gaussian_white_movie(config.n_frames, shape, config.contrast,
                                     config.frame_dt, config.seed)
    elif config.family == "laplacian_white":
        movie = laplacian_white_movie(config.n_frames, shape, config.contrast,
                                      config.frame_dt, config.seed)
    else:
        if images is None:
            from .corpus import make_default_corpus

            images = make_default_corpus()
        movie = natural_patch_movie(images, config.n_frames, shape,
                                    config.contrast, config.frame_dt, config.seed)
    if config.whiten or config.family == "natural_patches":
        movie = zca_whiten(movie)
    return movie


def run_sta(config: StaConfig, params: NetworkParams = DEFAULT_PARAMS,
            images=None, cell: tuple | None = None):
    """Full experiment: movie -> trace -> spikelets -> STA (+ Gaussian fit).

    Returns (StaResult, info dict with the trace std, event count, latency
    and fit when available).
    """
    movie = make_movie(config, images)
    h, w = config.height, config.width
    cy, cx = (h // 2, w // 2) if cell is None else cell
    flat = cy * w + cx
    trace = simulate_timevarying(movie.frames, movie.frame_dt, params,
                                 cells=np.array([flat]))[:, 0]
    events = detect_spikelets(trace, params.dt, config.prominence, config.refractory)
    if events.size == 0:
        raise NoSpikeletsError(
            f"no spikelets above {config.prominence} mV in {trace.size} samples"
        )
    result = compute_sta(movie, events, config.bins * movie.frame_dt, config.bins,
                         cell=(cy, cx))
    info = {
        "trace_std_mv": float(np.std(trace)),
        "n_events": int(events.size),
        "latency_ms": float(result.selected_lag),
        "movie": movie,
        "events": events,
    }
    try:
        info["gaussian_fit"] = fit_gaussian_to_map(result.spatial_map)
    except ValueError:
        info["gaussian_fit"] = None
    return result, info


def write_sta_outputs(outdir, result: StaResult, info: dict | None = None) -> list:
    """Emit temporal_filter.csv, spatial_map.csv, spatial_map.pgm, summary.csv."""
    import os

    from .image_io import write_pgm
    from .pr_filter import minmax_normalize

    os.makedirs(outdir, exist_ok=True)
    written = []

    movie = (info or {}).get("movie")
    frame_dt = movie.frame_dt if movie is not None else None
    path = os.path.join(outdir, "temporal_filter.csv")
    with open(path, "w") as fh:
        fh.write("lag_bin,lag_ms,weight\n")
        for j, wgt in enumerate(result.temporal_filter):
            ms = f"{j * frame_dt!r}" if frame_dt is not None else ""
            fh.write(f"{j},{ms},{wgt!r}\n")
    written.append(path)

    path = os.path.join(outdir, "spatial_map.csv")
    np.savetxt(path, result.spatial_map, delimiter=",")
    written.append(path)

    path = os.path.join(outdir, "spatial_map.pgm")
    norm = minmax_normalize(result.spatial_map)
    write_pgm(path, norm if norm is not None else np.zeros_like(result.spatial_map))
    written.append(path)

    path = os.path.join(outdir, "summary.csv")
    fit = (info or {}).get("gaussian_fit")
    with open(path, "w") as fh:
        fh.write("selected_lag_ms,n_spikes,sigma_cells,fit_rel_residual\n")
        sig = f"{fit.sigma!r}" if fit else ""
        rel = f"{fit.rel_residual!r}" if fit else ""
        fh.write(f"{result.selected_lag!r},{result.n_spikes},{sig},{rel}\n")
    written.append(path)
    return written
