"""Attention-weighted color GMMs and the foreground/background appearance
posterior they induce per superpixel."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .superpixel import SuperpixelPartition

VAR_FLOOR = 1e-4
EPS_POSTERIOR = 1e-6
DEFAULT_COMPONENTS = 5
DEFAULT_EM_ITERS = 20
ATTENTION_SPLIT = 0.5  # normalized-attention threshold for fg/bg samples


@dataclass
class GmmModel:
    """Diagonal-covariance RGB mixture."""

    weights: np.ndarray  # (K,), positive, sums to 1
    means: np.ndarray  # (K, 3)
    variances: np.ndarray  # (K, 3), each >= VAR_FLOOR

    @property
    def n_components(self) -> int:
        return len(self.weights)


def _log_gauss(samples: np.ndarray, means: np.ndarray,
               variances: np.ndarray) -> np.ndarray:
    """Per-sample, per-component diagonal Gaussian log density, (n, K)."""
    diff = samples[:, None, :] - means[None, :, :]
    return -0.5 * (
        np.sum(diff * diff / variances[None], axis=2)
        + np.sum(np.log(2.0 * np.pi * variances), axis=1)[None, :]
    )


def log_density(model: GmmModel, samples: np.ndarray) -> np.ndarray:
    """Mixture log density per sample, (n,)."""
    lg = _log_gauss(samples, model.means, model.variances)
    lg = lg + np.log(model.weights)[None, :]
    peak = lg.max(axis=1, keepdims=True)
    return peak[:, 0] + np.log(np.exp(lg - peak).sum(axis=1))


def weighted_loglik(model: GmmModel, samples: np.ndarray,
                    weights: np.ndarray) -> float:
    return float(np.dot(weights, log_density(model, samples)))


def _weighted_draw(probs, rng):
    # CDF inversion keeps the draw a function of the weight distribution
    # over sample *values*, so duplicating samples with split weights
    # selects the same seed values
    cdf = np.cumsum(probs)
    return min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")),
               len(probs) - 1)


def _kmeanspp_init(samples, weights, k, rng):
    """Weighted k-means++ seeding; deterministic for a fixed rng state."""
    probs = weights / weights.sum()
    idx = [_weighted_draw(probs, rng)]
    for _ in range(1, k):
        d2 = np.min(
            ((samples[:, None, :] - samples[idx][None, :, :]) ** 2).sum(axis=2),
            axis=1,
        )
        score = probs * d2
        if score.sum() <= 0:
            # all remaining mass on already-chosen points
            idx.append(_weighted_draw(probs, rng))
        else:
            idx.append(_weighted_draw(score, rng))
    return samples[idx].copy()


def fit_weighted_gmm(samples: np.ndarray, weights: np.ndarray,
                     n_components: int = DEFAULT_COMPONENTS,
                     iters: int = DEFAULT_EM_ITERS,
                     seed: int = 0, return_loglik: bool = False):
    """Weighted EM with diagonal covariances.

    Initialized by weighted k-means++; empty components are re-seeded onto
    the lowest-likelihood sample. Weighted log-likelihood is non-decreasing
    across iterations (within 1e-9). With return_loglik, also returns the
    per-iteration weighted log-likelihood trace.
    """
    samples = np.asarray(samples, dtype=np.float64).reshape(-1, 3)
    weights = np.asarray(weights, dtype=np.float64).ravel()
    if len(samples) != len(weights):
        raise ValueError("samples and weights must align")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    active = weights > 0
    if not active.any():
        raise ValueError("all sample weights are zero")
    samples = samples[active]
    weights = weights[active]
    if n_components < 1:
        raise ValueError("need at least one component")
    distinct = len(np.unique(samples, axis=0))
    if n_components > distinct:
        warnings.warn(
            f"reducing components from {n_components} to {distinct} "
            "(not enough distinct samples)"
        )
        n_components = distinct

    rng = np.random.default_rng(seed)
    means = _kmeanspp_init(samples, weights, n_components, rng)
    variances = np.tile(
        np.maximum(
            np.average((samples - np.average(samples, axis=0,
                                             weights=weights)) ** 2,
                       axis=0, weights=weights),
            VAR_FLOOR,
        ),
        (n_components, 1),
    )
    mix = np.full(n_components, 1.0 / n_components)

    wsum = weights.sum()
    loglik = []
    for _ in range(iters):
        # E step
        lg = _log_gauss(samples, means, variances) + np.log(mix)[None, :]
        peak = lg.max(axis=1, keepdims=True)
        resp = np.exp(lg - peak)
        resp /= resp.sum(axis=1, keepdims=True)
        resp *= weights[:, None]
        # M step
        nk = resp.sum(axis=0)
        empty = nk <= 1e-12 * wsum
        if empty.any():
            # re-seed dead components onto the worst-explained sample
            model = GmmModel(np.maximum(nk, 1e-12) / np.maximum(nk, 1e-12).sum(),
                             means, variances)
            worst = int(np.argmin(log_density(model, samples)))
            for k in np.flatnonzero(empty):
                means[k] = samples[worst]
                variances[k] = VAR_FLOOR
                nk[k] = 1e-12
        keep = ~empty
        if keep.any():
            means[keep] = (resp.T[keep] @ samples) / nk[keep, None]
            sq = resp.T[keep] @ (samples * samples)
            variances[keep] = np.maximum(
                sq / nk[keep, None] - means[keep] ** 2, VAR_FLOOR
            )
        mix = nk / nk.sum()
        if return_loglik:
            loglik.append(weighted_loglik(
                GmmModel(mix, means, variances), samples, weights))
    model = GmmModel(weights=mix, means=means, variances=variances)
    return (model, loglik) if return_loglik else model


def appearance_term(fg: GmmModel, bg: GmmModel, p: SuperpixelPartition
                    ) -> np.ndarray:
    """Foreground posterior at each region's mean color, clamped away from
    {0, 1}; both-densities-underflow falls back to 0.5."""
    colors = p.mean_rgb
    log_fg = log_density(fg, colors)
    log_bg = log_density(bg, colors)
    # posterior via the log-sum trick; exact 0.5 when densities match
    m = np.maximum(log_fg, log_bg)
    pf = np.exp(log_fg - m)
    pb = np.exp(log_bg - m)
    post = pf / (pf + pb)
    post[~np.isfinite(post)] = 0.5
    return np.clip(post, EPS_POSTERIOR, 1.0 - EPS_POSTERIOR)


def split_by_attention(colors: np.ndarray, attention: np.ndarray,
                       threshold: float = ATTENTION_SPLIT):
    """Partition region colors into (fg samples, fg weights, bg samples,
    bg weights) by thresholding normalized attention."""
    attention = np.asarray(attention, dtype=np.float64)
    fg_sel = attention >= threshold
    bg_sel = ~fg_sel
    return (colors[fg_sel], attention[fg_sel],
            colors[bg_sel], 1.0 - attention[bg_sel])
