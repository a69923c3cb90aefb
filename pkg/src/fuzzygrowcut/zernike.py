"""Zernike-moment shape descriptors.

Projects an image (or a binary mask) onto the orthogonal Zernike basis
over the unit disk and keeps the magnitudes, which are invariant to
rotation. The fixed descriptor is the 64 magnitudes for all (n, m) with
0 <= n <= 14, m >= 0, n - m even, in (n, m)-lexicographic order; the
first 32 are the low-order group, the rest the high-order group.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .imaging import BinaryMask, GrayImage

MAX_ORDER = 14
DESCRIPTOR_LENGTH = 64
LOW_ORDER_COUNT = 32


def validate_index(n: int, m: int) -> None:
    """Check a (order, repetition) pair: |m| <= n and n - |m| even."""
    if n < 0:
        raise ValueError(f"order n must be >= 0, got {n}")
    if abs(m) > n:
        raise ValueError(f"repetition |m| must be <= n, got (n={n}, m={m})")
    if (n - abs(m)) % 2 != 0:
        raise ValueError(f"n - |m| must be even, got (n={n}, m={m})")


def moment_indices(max_order: int = MAX_ORDER) -> list[tuple[int, int]]:
    """All valid (n, m) with m >= 0 up to ``max_order``, lexicographic."""
    return [
        (n, m)
        for n in range(max_order + 1)
        for m in range(n + 1)
        if (n - m) % 2 == 0
    ]


MOMENT_INDICES = tuple(moment_indices())
assert len(MOMENT_INDICES) == DESCRIPTOR_LENGTH


def feature_names() -> list[str]:
    return [f"z_{n}_{m}" for n, m in MOMENT_INDICES]


def split_low_high(vector: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Partition a descriptor into its low- and high-order halves."""
    v = np.asarray(vector)
    if v.shape != (DESCRIPTOR_LENGTH,):
        raise ValueError(f"expected a {DESCRIPTOR_LENGTH}-vector, got {v.shape}")
    return v[:LOW_ORDER_COUNT], v[LOW_ORDER_COUNT:]


@lru_cache(maxsize=None)
def _radial_terms(n: int, m: int) -> tuple[tuple[int, int], ...]:
    """Exact integer coefficients of the radial polynomial as
    (power, coefficient) pairs."""
    m = abs(m)
    terms = []
    for s in range((n - m) // 2 + 1):
        coeff = (-1) ** s * math.factorial(n - s) // (
            math.factorial(s)
            * math.factorial((n + m) // 2 - s)
            * math.factorial((n - m) // 2 - s)
        )
        terms.append((n - 2 * s, coeff))
    return tuple(terms)


def radial_poly(n: int, m: int, rho):
    """Radial polynomial R_{n,m} evaluated at rho (scalar or array)."""
    validate_index(n, m)
    rho = np.asarray(rho, dtype=np.float64)
    out = np.zeros_like(rho)
    for power, coeff in _radial_terms(n, m):
        out = out + coeff * rho ** power
    if out.ndim == 0:
        return float(out)
    return out


def _basis_conj(n: int, m: int, rho: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Zernike basis with the conjugate phase convention R * exp(-j*m*theta)."""
    return radial_poly(n, abs(m), rho) * np.exp(-1j * m * theta)


def _moment_sum(f, rho, theta, n, m, side):
    inside = rho <= 1.0
    v = _basis_conj(n, m, rho[inside], theta[inside])
    return (n + 1) / (math.pi * (side - 1)) * np.sum(f[inside] * v)


def zernike_moment(image, n: int, m: int) -> complex:
    """Moment of a square image under the centered unit-disk mapping.

    The disk center is the image center; radii are normalized by the side
    length N, so every pixel lies inside the disk. ``image`` may be a
    GrayImage, BinaryMask, or bare 2-D array.
    """
    validate_index(n, m)
    if isinstance(image, GrayImage):
        f = image.pixels
    elif isinstance(image, BinaryMask):
        f = image.values.astype(np.float64)
    else:
        f = np.asarray(image, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError(f"zernike_moment needs a square image, got {f.shape}")
    side = f.shape[0]
    center = (side - 1) / 2.0
    yy, xx = np.mgrid[0:side, 0:side]
    dx = xx - center
    dy = yy - center
    rho = np.hypot(dx, dy) / side
    theta = np.arctan2(dy, dx)
    return complex(_moment_sum(f, rho, theta, n, m, side))


def descriptor(mask: BinaryMask, intensities: np.ndarray | None = None) -> np.ndarray:
    """64-element Zernike magnitude vector of a mask's shape and margin.

    The mask is translated to its centroid and scaled so its farthest
    pixel sits on the unit circle, which makes the magnitudes invariant
    to translation and (up to rasterization) rotation. By default the
    projected function is the binary mask itself; pass ``intensities``
    (same shape) to project the masked grayscale values instead.
    """
    values = mask.values if isinstance(mask, BinaryMask) else np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(values)
    if len(xs) == 0:
        raise ValueError("descriptor of an empty mask is undefined")
    if intensities is not None:
        inten = np.asarray(intensities, dtype=np.float64)
        if inten.shape != values.shape:
            raise ValueError("intensities shape must match the mask")
        f = inten[ys, xs]
    else:
        f = np.ones(len(xs), dtype=np.float64)
    cx = xs.mean()
    cy = ys.mean()
    dx = xs - cx
    dy = ys - cy
    r = np.hypot(dx, dy)
    r_max = r.max()
    if r_max == 0.0:
        r_max = 1.0  # single-pixel mask sits at the disk center
    rho = r / r_max
    theta = np.arctan2(dy, dx)
    side = max(values.shape)

    powers = {k: rho ** k for k in range(MAX_ORDER + 1)}
    out = np.empty(DESCRIPTOR_LENGTH, dtype=np.float64)
    for i, (n, m) in enumerate(MOMENT_INDICES):
        radial = np.zeros_like(rho)
        for power, coeff in _radial_terms(n, m):
            radial = radial + coeff * powers[power]
        v = radial * np.exp(-1j * m * theta)
        z = (n + 1) / (math.pi * (side - 1)) * np.sum(f * v)
        out[i] = abs(z)
    return out
