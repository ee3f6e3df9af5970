"""Weight-initialization variance rules and their signal-gain verification.

A convolution preserves signal magnitude in the forward pass when its weight
variance is ``2 / (k^2 * c_in)`` (fan-in; the factor 2 compensates the
halving a ReLU applies to second moments). The backward pass is a convolution
with the transposed kernel, so preserving gradient magnitude instead wants
``2 / (k^2 * c_out)`` (fan-out). For ordinary layers c_in and c_out are close
and either rule works; a strongly asymmetric channel-compression layer (say
256 -> 8) makes them differ by c_in/c_out = 32x and no single rule fixes both
directions. The geometric rule ``2 / (k^2 * sqrt(c_in * c_out))`` splits the
difference in log space: its forward gain is sqrt(c_in/c_out), its backward
gain sqrt(c_out/c_in), and their product is exactly 1.

``gain_mc`` checks these analytic gains by Monte Carlo: it pushes
ReLU-rectified unit-normal signals through explicit dense convolutions (and
their transposes) with freshly drawn weights each trial. This is a numerics
check, not a performance path, hence plain dense contractions with small
kernels and spatial extents.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["SCHEMES", "variance", "gain_mc", "analytic_gains"]

SCHEMES = ("kaiming_fan_in", "kaiming_fan_out", "xavier", "geometric")


def variance(scheme: str, k: int, c_in: int, c_out: int) -> float:
    """Weight variance prescribed by an initialization scheme (ReLU networks)."""
    if min(k, c_in, c_out) < 1:
        raise ValueError("k, c_in and c_out must be >= 1")
    kk = k * k
    if scheme == "kaiming_fan_in":
        return 2.0 / (kk * c_in)
    if scheme == "kaiming_fan_out":
        return 2.0 / (kk * c_out)
    if scheme == "xavier":
        return 2.0 / (kk * (c_in + c_out) / 2.0)
    if scheme == "geometric":
        return 2.0 / (kk * math.sqrt(c_in * c_out))
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def analytic_gains(scheme: str, k: int, c_in: int, c_out: int) -> tuple[float, float]:
    """Expected (forward, backward) variance gains at initialization."""
    var = variance(scheme, k, c_in, c_out)
    forward = k * k * c_in * var / 2.0
    backward = k * k * c_out * var / 2.0
    return forward, backward


def _conv_all_shifts(x: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    """Valid-padding stride-1 convolution, per-trial weights.

    x: (t, c_in, s, s), w: (t, c_out, c_in, k, k) -> (t, c_out, s-k+1, s-k+1).
    Implemented as a sum of k^2 shifted 1x1 contractions.
    """
    s = x.shape[-1]
    so = s - k + 1
    out = np.zeros((x.shape[0], w.shape[1], so, so))
    for a in range(k):
        for b in range(k):
            patch = x[:, :, a:a + so, b:b + so]
            out += np.einsum("toc,tcij->toij", w[:, :, :, a, b], patch)
    return out


def gain_mc(scheme: str, k: int, c_in: int, c_out: int, spatial: int = 6,
            trials: int = 10000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo (forward_gain, backward_gain) of an initialization scheme.

    Each trial draws fresh weights ~ N(0, variance(scheme, ...)) and a fresh
    rectified unit-normal input; the gain is the pooled output variance
    relative to the unit pre-rectification input. The backward gain runs the
    transposed kernel over a rectified unit-normal upstream signal (rectifying
    models the ReLU mask a gradient passes on the way back). Deterministic
    for a given seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if spatial < k:
        raise ValueError("spatial extent must cover the kernel")
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(variance(scheme, k, c_in, c_out))

    fwd_sq_sum = 0.0
    fwd_n = 0
    bwd_sq_sum = 0.0
    bwd_n = 0
    chunk = max(1, min(trials, 4_000_000 // (max(c_in, c_out) * spatial * spatial)))
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        w = rng.standard_normal((t, c_out, c_in, k, k)) * sigma
        x = np.maximum(rng.standard_normal((t, c_in, spatial, spatial)), 0.0)
        y = _conv_all_shifts(x, w, k)
        fwd_sq_sum += float(np.sum(y * y))
        fwd_n += y.size

        g = np.maximum(rng.standard_normal((t, c_out, spatial, spatial)), 0.0)
        w_t = w.transpose(0, 2, 1, 3, 4)  # swap in/out channel axes
        dx = _conv_all_shifts(g, w_t, k)
        bwd_sq_sum += float(np.sum(dx * dx))
        bwd_n += dx.size
        done += t

    # Outputs are zero-mean by symmetry; the second moment is the variance.
    return fwd_sq_sum / fwd_n, bwd_sq_sum / bwd_n
