"""Benchmark orchestration: (noise level x filter) grid over an image corpus.

Each cell of the grid is computed independently (worker pool, PRF_THREADS
caps the size) and lands in its own fragment CSV under out/cells/, written
atomically. A finished fragment is skipped on the next run, so a killed
benchmark resumes where it stopped and still assembles the identical final
report: per-image rows live in report.csv, per-cell means in summary.csv,
and all numbers are formatted with repr so reruns are byte-identical.

Noise is seeded per (noise entry, image): seed + 9973 * noise_index +
image_index, so rows are reproducible in isolation.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import classic_filters
from .core_model import DEFAULT_PARAMS
from .image_io import read_image
from .metrics import psnr, ssim
from .noise_forge import NoiseSpec, add_noise
from .pr_filter import pr_denoise

_NOISE_SEED_STRIDE = 9973

FILTER_NAMES = ("noisy", "pr") + tuple(classic_filters.FILTERS)


@dataclass(frozen=True)
class FilterEntry:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in FILTER_NAMES:
            raise ValueError(f"unknown filter {self.name!r} (known: {', '.join(FILTER_NAMES)})")

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ";".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.name}[{inner}]"

    def apply(self, img: np.ndarray) -> np.ndarray:
        if self.name == "noisy":
            return img
        if self.name == "pr":
            return pr_denoise(img, params=DEFAULT_PARAMS.with_g_gap(
                float(self.params.get("g_gap", DEFAULT_PARAMS.g_gap))))
        return classic_filters.FILTERS[self.name](img, **self.params)


def _noise_label(spec: NoiseSpec) -> str:
    inner = ";".join(f"{k}={spec.params[k]}" for k in sorted(spec.params))
    return f"{spec.family}[{inner}]" if inner else spec.family


@dataclass
class BenchConfig:
    corpus: str = "synthetic"          # directory of images, or synthetic | texture
    out: str = "bench_out"
    metric_mode: str = "float"
    seed: int = 1000
    noises: list = field(default_factory=list)    # [NoiseSpec]
    filters: list = field(default_factory=list)   # [FilterEntry]

    def validate(self):
        if self.metric_mode not in ("float", "8bit"):
            raise ValueError(f"metric_mode must be float or 8bit, got {self.metric_mode!r}")
        if not self.noises:
            raise ValueError("config needs at least one noise entry")
        if not self.filters:
            raise ValueError("config needs at least one filter entry")

    def describe(self) -> str:
        lines = [
            f"corpus = {self.corpus}",
            f"out = {self.out}",
            f"metric_mode = {self.metric_mode}",
            f"seed = {self.seed}",
        ]
        for spec in self.noises:
            lines.append("noise = " + spec.to_config().replace("\n", " ").replace("family=", "", 1))
        for ent in self.filters:
            parts = [ent.name] + [f"{k}={v}" for k, v in sorted(ent.params.items())]
            lines.append("filter = " + " ".join(parts))
        return "\n".join(lines)


def default_config() -> BenchConfig:
    """Desk-scale sweep: 3 Gaussian levels x (PR sweep + baselines)."""
    return BenchConfig(
        noises=[
            NoiseSpec.gaussian(0.335),
            NoiseSpec.gaussian(0.18),
            NoiseSpec.gaussian(0.10),
        ],
        filters=[
            FilterEntry("noisy"),
            FilterEntry("pr", {"g_gap": 5.0}),
            FilterEntry("pr", {"g_gap": 10.0}),
            FilterEntry("pr", {"g_gap": 20.0}),
            FilterEntry("gaussian", {"sigma": 2.0, "ksize": 9}),
            FilterEntry("average", {}),
            FilterEntry("median", {"ksize": 3}),
            FilterEntry("adaptive_median", {}),
        ],
    )


def _parse_entry_line(value: str):
    """'gaussian sigma=0.335' -> (head, {param: float|bool})."""
    parts = value.split()
    if not parts:
        raise ValueError("empty entry")
    head, params = parts[0], {}
    for tok in parts[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {tok!r}")
        low = val.lower()
        if low in ("true", "false", "yes", "no"):
            params[key] = low in ("true", "yes")
        elif key == "ksize" or key == "max_window":
            params[key] = int(val)
        else:
            params[key] = float(val)
    return head, params


def parse_config(text: str, base: BenchConfig | None = None) -> BenchConfig:
    """Flat key=value config; repeated noise=/filter= lines accumulate."""
    cfg = base if base is not None else BenchConfig()
    noises = list(cfg.noises)
    filters = list(cfg.filters)
    fresh_noise = fresh_filter = True
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected key = value, got {line!r}")
        key = key.strip()
        value = value.strip()
        if key == "corpus":
            cfg = replace(cfg, corpus=value)
        elif key == "out":
            cfg = replace(cfg, out=value)
        elif key == "metric_mode":
            cfg = replace(cfg, metric_mode=value)
        elif key == "seed":
            cfg = replace(cfg, seed=int(value))
        elif key == "noise":
            if fresh_noise:
                noises, fresh_noise = [], False
            family, params = _parse_entry_line(value)
            noises.append(NoiseSpec(family, params))
        elif key == "filter":
            if fresh_filter:
                filters, fresh_filter = [], False
            name, params = _parse_entry_line(value)
            if name == "pr" and isinstance(params.get("g_gap", 0.0), bool):
                raise ValueError("g_gap must be numeric")
            filters.append(FilterEntry(name, params))
        else:
            raise ValueError(f"unknown config key {key!r}")
    return replace(cfg, noises=noises, filters=filters)


def load_corpus(corpus: str) -> list:
    if corpus == "synthetic":
        from .corpus import make_default_corpus

        return make_default_corpus()
    if corpus == "texture":
        from .corpus import make_texture_corpus

        return make_texture_corpus()
    if not os.path.isdir(corpus):
        raise IOError(f"{corpus}: not a directory")
    names = sorted(
        f for f in os.listdir(corpus)
        if os.path.splitext(f)[1].lower() in (".pgm", ".png", ".prf1")
    )
    if not names:
        raise IOError(f"{corpus}: no .pgm/.png/.prf1 images found")
    return [read_image(os.path.join(corpus, f)) for f in names]


def n_workers() -> int:
    env = os.environ.get("PRF_THREADS", "")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _fragment_name(ni: int, fi: int) -> str:
    return f"cell_{ni:02d}_{fi:02d}.csv"


def _run_cell(args):
    """One (noise, filter) cell over all images; returns CSV body lines."""
    images, spec, entry, seed, ni, metric_mode = args
    lines = []
    for ii, img in enumerate(images):
        try:
            noisy = add_noise(img, spec, seed + _NOISE_SEED_STRIDE * ni + ii)
            out = entry.apply(noisy)
            p = psnr(img, out, metric_mode)
            s = ssim(img, out, metric_mode)
            lines.append(f"{ii},{p!r},{s!r},")
        except Exception as exc:  # recorded, run continues
            lines.append(f"{ii},,,{type(exc).__name__}: {exc}")
    return lines


def run_benchmark(config: BenchConfig, images: list | None = None) -> str:
    """Execute all cells (resuming finished ones) and assemble the report.

    Returns the report.csv path.
    """
    config.validate()
    if images is None:
        images = load_corpus(config.corpus)
    if not images:
        raise ValueError("corpus is empty")
    cells_dir = os.path.join(config.out, "cells")
    os.makedirs(cells_dir, exist_ok=True)

    tasks = []
    for ni, spec in enumerate(config.noises):
        for fi, entry in enumerate(config.filters):
            frag = os.path.join(cells_dir, _fragment_name(ni, fi))
            if os.path.exists(frag):
                with open(frag) as fh:
                    if sum(1 for _ in fh) == len(images) + 1:
                        continue  # finished cell, resume skips it
            tasks.append((ni, fi, frag,
                          (images, spec, entry, config.seed, ni, config.metric_mode)))

    workers = n_workers()
    if tasks:
        if workers == 1 or len(tasks) == 1:
            results = [(t[0], t[1], t[2], _run_cell(t[3])) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                bodies = list(pool.map(_run_cell, [t[3] for t in tasks]))
            results = [(t[0], t[1], t[2], body) for t, body in zip(tasks, bodies)]
        for ni, fi, frag, body in results:
            tmp = frag + ".tmp"
            with open(tmp, "w") as fh:
                fh.write("image,psnr,ssim,error\n")
                fh.write("\n".join(body) + "\n")
            os.replace(tmp, frag)

    # ordered, single-threaded assembly from fragments only
    report_path = os.path.join(config.out, "report.csv")
    summary_path = os.path.join(config.out, "summary.csv")
    with open(report_path, "w") as rep, open(summary_path, "w") as summ:
        rep.write("noise,filter,image,psnr,ssim,error\n")
        summ.write("noise,filter,mean_psnr,mean_ssim,n_ok,n_failed\n")
        for ni, spec in enumerate(config.noises):
            nlabel = _noise_label(spec)
            for fi, entry in enumerate(config.filters):
                frag = os.path.join(cells_dir, _fragment_name(ni, fi))
                with open(frag) as fh:
                    rows = fh.read().splitlines()[1:]
                ps, ss, failed = [], [], 0
                for row in rows:
                    ii, p, s, err = row.split(",", 3)
                    rep.write(f"{nlabel},{entry.label},{ii},{p},{s},{err}\n")
                    if err:
                        failed += 1
                    else:
                        ps.append(float(p))
                        ss.append(float(s))
                mp = repr(float(np.mean(ps))) if ps else ""
                ms = repr(float(np.mean(ss))) if ss else ""
                summ.write(f"{nlabel},{entry.label},{mp},{ms},{len(ps)},{failed}\n")
    return report_path
