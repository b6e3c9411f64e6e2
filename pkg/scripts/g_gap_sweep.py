"""Sweep the one tunable: PSNR/SSIM of the PR filter vs g_gap under heavy
calibrated Gaussian noise (noisy PSNR pinned near 9.4 dB).

Usage: python scripts/g_gap_sweep.py
"""

import numpy as np

from prfilter.corpus import make_default_corpus
from prfilter.metrics import psnr, ssim
from prfilter.noise_forge import NoiseSpec, add_noise
from prfilter.pr_filter import pr_denoise

G_GAPS = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0)


def calibrated_gaussian(img, target, seed):
    """Bisect sigma so the clamped noisy image hits the target PSNR."""
    lo, hi = 1e-3, 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        p = psnr(img, add_noise(img, NoiseSpec.gaussian(mid), seed))
        if p > target:
            lo = mid
        else:
            hi = mid
    return add_noise(img, NoiseSpec.gaussian(0.5 * (lo + hi)), seed)


def main():
    images = make_default_corpus()
    noisy = [calibrated_gaussian(im, 9.4, 1000 + i) for i, im in enumerate(images)]
    base_p = np.mean([psnr(c, n) for c, n in zip(images, noisy)])
    base_s = np.mean([ssim(c, n) for c, n in zip(images, noisy)])
    print(f"noisy:        PSNR {base_p:6.2f} dB  SSIM {base_s:.4f}")
    for g in G_GAPS:
        den = [pr_denoise(n, g_gap=g) for n in noisy]
        mp = np.mean([psnr(c, d) for c, d in zip(images, den)])
        ms = np.mean([ssim(c, d) for c, d in zip(images, den)])
        print(f"pr g={g:5.1f} nS: PSNR {mp:6.2f} dB  SSIM {ms:.4f}")


if __name__ == "__main__":
    main()
