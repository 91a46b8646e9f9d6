"""Fidelity time series, seeded sample streams and ratio-estimator reductions."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

METHODS = ("exact", "dr_general", "dr_pos_form", "dr_mom_form", "dr_no_interference", "wigner_overlap")

# Samples are generated in fixed-size blocks; block b always draws from the
# stream spawned as child b of the global seed, so the worker count never
# changes which numbers a sample sees.
BLOCK_SIZE = 256


@dataclass
class FidelitySeries:
    times: np.ndarray
    amplitude: np.ndarray
    fidelity: np.ndarray
    std_error: np.ndarray
    n_samples: int
    method_tag: str
    amplitude_std_error: np.ndarray | None = None

    @classmethod
    def exact(cls, amplitude: np.ndarray, n_components: int) -> "FidelitySeries":
        zeros = np.zeros(len(amplitude))
        return cls(
            times=np.arange(len(amplitude)),
            amplitude=amplitude,
            fidelity=np.abs(amplitude) ** 2,
            std_error=zeros,
            n_samples=n_components,
            method_tag="exact",
            amplitude_std_error=zeros.copy(),
        )

    @property
    def t_max(self) -> int:
        return len(self.times) - 1

    def retag(self, tag: str) -> "FidelitySeries":
        return FidelitySeries(
            self.times, self.amplitude, self.fidelity, self.std_error, self.n_samples, tag, self.amplitude_std_error
        )


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(block,)))


def map_blocks(fn, seed: int, n_samples: int, workers: int = 1) -> list:
    """Call ``fn(rng, size)`` on every sample block and return results in block order."""
    if n_samples < 1:
        raise ValueError("at least one sample is required")
    sizes = [min(BLOCK_SIZE, n_samples - start) for start in range(0, n_samples, BLOCK_SIZE)]
    jobs = [(block_rng(seed, b), size) for b, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(min(workers, len(jobs))) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(*job) for job in jobs]


def ratio_estimate(num: np.ndarray, den: np.ndarray):
    """Self-normalized mean sum(num[i, t]) / sum(den[i]) with delta-method errors.

    ``num`` has shape (N, T) and may be complex; ``den`` has shape (N,).
    Returns (estimate, var_re, var_im, cov_re_im) per column.
    """
    num = np.asarray(num)
    den = np.asarray(den, dtype=float)
    N = num.shape[0]
    # one reduction over all columns so numerator and denominator share the
    # summation order (zero phases then give exactly 1)
    sums = np.column_stack([num, den]).sum(axis=0)
    total = sums[-1].real
    if total == 0.0 or not np.isfinite(total):
        raise ValueError("sample weights sum to zero; no effective samples")
    est = sums[:-1] / total
    if N < 2:
        zeros = np.zeros(num.shape[1])
        return est, zeros, zeros.copy(), zeros.copy()
    resid = (num - den[:, None] * est[None, :]) / (total / N)
    re, im = resid.real, resid.imag
    scale = 1.0 / (N * (N - 1))
    var_re = (re**2).sum(axis=0) * scale
    var_im = (im**2).sum(axis=0) * scale
    cov = (re * im).sum(axis=0) * scale
    return est, var_re, var_im, cov


def series_from_samples(num: np.ndarray, den: np.ndarray, tag: str) -> FidelitySeries:
    """Build a FidelitySeries from per-sample complex summands and weights."""
    amp, var_re, var_im, cov = ratio_estimate(num, den)
    a, b = amp.real, amp.imag
    var_m = 4.0 * (a**2 * var_re + b**2 * var_im + 2.0 * a * b * cov)
    return FidelitySeries(
        times=np.arange(len(amp)),
        amplitude=amp,
        fidelity=np.abs(amp) ** 2,
        std_error=np.sqrt(np.maximum(var_m, 0.0)),
        n_samples=num.shape[0],
        method_tag=tag,
        amplitude_std_error=np.sqrt(var_re + var_im),
    )
