"""Noise synthesis: five regular families plus calibrated blind mixtures.

Regular families are additive (or replacement, for salt & pepper) and
clamped to [0, 1]. A blind mixture partitions pixels uniformly among
families, draws per-image family parameters from fixed ranges, and
bisects a global amplitude multiplier until the noisy image hits the
requested PSNR. All randomness flows through one numpy Generator per
call, so (image, spec, seed) fully determines the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .metrics import psnr

REGULAR_FAMILIES = (
    "gaussian",
    "intensity_dependent_gaussian",
    "laplacian",
    "salt_pepper",
    "uniform",
)
# families eligible for blind mixing without the Gaussian-type pair
NONGAUSSIAN_FAMILIES = ("laplacian", "salt_pepper", "uniform")

_FAMILY_PARAMS = {
    "gaussian": ("sigma",),
    "intensity_dependent_gaussian": ("sigma0", "k"),
    "laplacian": ("b",),
    "salt_pepper": ("p_salt", "p_pepper"),
    "uniform": ("a",),
    "blind": ("include_gaussian", "target_psnr"),
}


class CalibrationError(RuntimeError):
    """Blind-mixture bisection could not reach the target PSNR."""


@dataclass(frozen=True)
class NoiseSpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _FAMILY_PARAMS:
            raise ValueError(f"unknown noise family {self.family!r}")
        required = set(_FAMILY_PARAMS[self.family])
        got = set(self.params)
        optional = {"seed"} if self.family == "blind" else set()
        if got - required - optional or required - got:
            raise ValueError(
                f"{self.family} expects parameters {sorted(required)}, got {sorted(got)}"
            )
        p = self.params
        for key in ("sigma", "sigma0", "k", "b", "a"):
            if key in p and not p[key] >= 0:
                raise ValueError(f"{key} must be >= 0")
        if self.family == "salt_pepper":
            ps, pp = p["p_salt"], p["p_pepper"]
            if not (0 <= ps <= 1 and 0 <= pp <= 1 and ps + pp <= 1):
                raise ValueError("salt/pepper probabilities must lie in [0,1] and sum <= 1")
        if self.family == "blind" and not np.isfinite(p["target_psnr"]):
            raise ValueError("target_psnr must be finite")

    # -- constructors -------------------------------------------------
    @classmethod
    def gaussian(cls, sigma):
        return cls("gaussian", {"sigma": float(sigma)})

    @classmethod
    def intensity_dependent_gaussian(cls, sigma0, k):
        return cls("intensity_dependent_gaussian", {"sigma0": float(sigma0), "k": float(k)})

    @classmethod
    def laplacian(cls, b):
        return cls("laplacian", {"b": float(b)})

    @classmethod
    def salt_pepper(cls, p_salt, p_pepper):
        return cls("salt_pepper", {"p_salt": float(p_salt), "p_pepper": float(p_pepper)})

    @classmethod
    def uniform(cls, a):
        return cls("uniform", {"a": float(a)})

    @classmethod
    def blind(cls, include_gaussian, target_psnr, seed=None):
        params = {"include_gaussian": bool(include_gaussian), "target_psnr": float(target_psnr)}
        if seed is not None:
            params["seed"] = int(seed)
        return cls("blind", params)

    # -- key=value round trip ------------------------------------------
    def to_config(self) -> str:
        lines = [f"family={self.family}"]
        for key in sorted(self.params):
            lines.append(f"{key}={self.params[key]}")
        return "\n".join(lines)

    @classmethod
    def from_config(cls, text: str) -> "NoiseSpec":
        kv = {}
        for raw in text.replace(",", "\n").splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {line!r}")
            kv[key.strip()] = val.strip()
        family = kv.pop("family", None)
        if family is None:
            raise ValueError("noise config missing family=")
        params = {}
        for key, val in kv.items():
            if key == "include_gaussian":
                low = val.lower()
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(f"include_gaussian must be boolean, got {val!r}")
                params[key] = low in ("true", "1", "yes")
            elif key == "seed":
                params[key] = int(val)
            else:
                params[key] = float(val)
        return cls(family, params)


def _prep(img) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D grayscale")
    return img


def add_noise(img, spec: NoiseSpec, seed) -> np.ndarray:
    img = _prep(img)
    if spec.family == "blind":
        use = spec.params.get("seed", seed)
        return blind_mixture(
            img, spec.params["include_gaussian"], spec.params["target_psnr"], use
        )
    rng = np.random.default_rng(seed)
    p = spec.params
    if spec.family == "gaussian":
        out = img + p["sigma"] * rng.standard_normal(img.shape)
    elif spec.family == "intensity_dependent_gaussian":
        out = img + (p["sigma0"] + p["k"] * img) * rng.standard_normal(img.shape)
    elif spec.family == "laplacian":
        out = img + rng.laplace(0.0, p["b"], img.shape)
    elif spec.family == "uniform":
        out = img + rng.uniform(-p["a"], p["a"], img.shape)
    else:  # salt_pepper
        u = rng.uniform(size=img.shape)
        out = img.copy()
        out[u < p["p_salt"]] = 1.0
        out[(u >= p["p_salt"]) & (u < p["p_salt"] + p["p_pepper"])] = 0.0
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class BlindRanges:
    """Per-family parameter ranges for blind draws (not claimed faithful)."""

    sigma: tuple = (0.05, 0.3)
    sigma0: tuple = (0.05, 0.2)
    k: tuple = (0.05, 0.3)
    b: tuple = (0.05, 0.25)
    a: tuple = (0.1, 0.5)
    p: tuple = (0.02, 0.15)


DEFAULT_BLIND_RANGES = BlindRanges()


def blind_mixture_info(
    img,
    include_gaussian: bool,
    target_psnr: float,
    seed,
    tol: float = 0.5,
    ranges: BlindRanges = DEFAULT_BLIND_RANGES,
    max_iter: int = 50,
):
    """Blind mixture returning (noisy, info dict).

    Draw order is fixed (assignment, then the five noise fields, then the
    six family parameters) and independent of include_gaussian, so the
    with/without variants share fields at equal seeds.
    """
    img = _prep(img)
    rng = np.random.default_rng(seed)
    fams = REGULAR_FAMILIES if include_gaussian else NONGAUSSIAN_FAMILIES
    assign = rng.integers(0, len(fams), size=img.shape)
    z_g = rng.standard_normal(img.shape)
    z_i = rng.standard_normal(img.shape)
    lap = rng.laplace(0.0, 1.0, img.shape)
    uni = rng.uniform(-1.0, 1.0, img.shape)
    usp = rng.uniform(size=img.shape)
    par = {
        "sigma": rng.uniform(*ranges.sigma),
        "sigma0": rng.uniform(*ranges.sigma0),
        "k": rng.uniform(*ranges.k),
        "b": rng.uniform(*ranges.b),
        "a": rng.uniform(*ranges.a),
        # one shared salt/pepper rate: asymmetric rates skew the residual
        "p": rng.uniform(*ranges.p),
    }

    def apply(m):
        out = img.copy()
        for fi, fam in enumerate(fams):
            mask = assign == fi
            if fam == "gaussian":
                out[mask] = img[mask] + m * par["sigma"] * z_g[mask]
            elif fam == "intensity_dependent_gaussian":
                out[mask] = img[mask] + m * (par["sigma0"] + par["k"] * img[mask]) * z_i[mask]
            elif fam == "laplacian":
                out[mask] = img[mask] + m * par["b"] * lap[mask]
            elif fam == "uniform":
                out[mask] = img[mask] + m * par["a"] * uni[mask]
            else:
                p = min(m * par["p"], 0.5)
                out[mask & (usp < p)] = 1.0
                out[mask & (usp >= p) & (usp < 2 * p)] = 0.0
        return np.clip(out, 0.0, 1.0)

    lo, hi = 1e-3, 1.0
    while psnr(img, apply(hi)) > target_psnr and hi < 4096:
        hi *= 2
    if psnr(img, apply(hi)) > target_psnr:
        raise CalibrationError(f"cannot reach {target_psnr} dB even at multiplier {hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if psnr(img, apply(mid)) > target_psnr:
            lo = mid
        else:
            hi = mid
    m = 0.5 * (lo + hi)
    out = apply(m)
    achieved = psnr(img, out)
    if abs(achieved - target_psnr) > tol:
        raise CalibrationError(
            f"bisection stuck at {achieved:.2f} dB for target {target_psnr} dB"
        )
    info = {
        "families": fams,
        "assignment": assign,
        "params": par,
        "multiplier": m,
        "achieved_psnr": achieved,
    }
    return out, info


def blind_mixture(img, include_gaussian, target_psnr, seed, **kw) -> np.ndarray:
    noisy, _ = blind_mixture_info(img, include_gaussian, target_psnr, seed, **kw)
    return noisy
