"""Image feature extraction: resize-flatten vectors and bag-of-words histograms.

The raw-intensity route bilinearly resizes a gray image to a fixed square and
flattens it.  The bag-of-words route tiles the image with half-overlapping
square patches, quantizes each patch against a k-means codebook, and returns
the L1-normalized histogram of codeword counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FeatureVector, _frozen_array
from .errors import (
    DimensionMismatch,
    ImageSmallerThanPatch,
    InvalidImage,
    NonFiniteData,
    TooFewPatches,
)


@dataclass(frozen=True)
class GrayImage:
    """H x W gray image, intensities in [0, 1], both sides >= 3."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = _frozen_array(self.pixels)
        if pixels.ndim != 2:
            raise InvalidImage("image must be a 2-D array")
        if pixels.shape[0] < 3 or pixels.shape[1] < 3:
            raise InvalidImage(f"image must be at least 3x3, got {pixels.shape}")
        if not np.all(np.isfinite(pixels)):
            raise NonFiniteData("image contains NaN or infinity")
        if np.any(pixels < 0) or np.any(pixels > 1):
            raise InvalidImage("intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


@dataclass(frozen=True)
class Codebook:
    """k centroids of flattened s x s patches, pairwise distinct."""

    centroids: np.ndarray
    patch_size: int

    def __post_init__(self):
        centroids = _frozen_array(self.centroids)
        s = int(self.patch_size)
        if centroids.ndim != 2 or centroids.shape[0] < 1:
            raise DimensionMismatch("centroids must be a nonempty 2-D array")
        if s < 1 or centroids.shape[1] != s * s:
            raise DimensionMismatch(
                f"centroid length {centroids.shape[1]} does not match "
                f"patch_size {s}"
            )
        if not np.all(np.isfinite(centroids)):
            raise NonFiniteData("centroids contain NaN or infinity")
        # Pairwise distinct, otherwise assignments would be ambiguous.
        ordered = centroids[np.lexsort(centroids.T[::-1])]
        if centroids.shape[0] > 1 and np.any(
            np.all(ordered[1:] == ordered[:-1], axis=1)
        ):
            raise DimensionMismatch("centroids must be pairwise distinct")
        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "patch_size", s)

    @property
    def n_codewords(self) -> int:
        return self.centroids.shape[0]


def _bilinear_resize(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Half-pixel-center bilinear resampling with edge clamping."""
    in_h, in_w = pixels.shape
    rows = (np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5
    cols = (np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5
    rows = np.clip(rows, 0.0, in_h - 1.0)
    cols = np.clip(cols, 0.0, in_w - 1.0)
    r0 = np.floor(rows).astype(int)
    c0 = np.floor(cols).astype(int)
    r1 = np.minimum(r0 + 1, in_h - 1)
    c1 = np.minimum(c0 + 1, in_w - 1)
    fr = (rows - r0)[:, None]
    fc = (cols - c0)[None, :]
    top = pixels[np.ix_(r0, c0)] * (1.0 - fc) + pixels[np.ix_(r0, c1)] * fc
    bottom = pixels[np.ix_(r1, c0)] * (1.0 - fc) + pixels[np.ix_(r1, c1)] * fc
    return top * (1.0 - fr) + bottom * fr


def resize_flatten(image: GrayImage, side: int = 50) -> FeatureVector:
    """Bilinearly resize to side x side and flatten row-major.

    Resizing to the image's own size is the exact identity.
    """
    if int(side) < 1:
        raise InvalidImage("side must be >= 1")
    side = int(side)
    resized = _bilinear_resize(image.pixels, side, side)
    # Interpolation of values in [0, 1] stays in [0, 1] up to rounding.
    return FeatureVector(np.clip(resized, 0.0, 1.0).ravel())


def patch_grid_counts(height: int, width: int, patch_size: int) -> tuple[int, int]:
    """Number of half-overlapping patches per axis: floor((side-s)/stride)+1
    with stride = ceil(s/2)."""
    stride = -(-patch_size // 2)
    return (
        (height - patch_size) // stride + 1,
        (width - patch_size) // stride + 1,
    )


def extract_patches(image: GrayImage, patch_size: int = 3) -> np.ndarray:
    """All half-overlapping s x s patches, flattened row-major.

    Patches are taken on a stride-ceil(s/2) grid, scanning rows first; the
    result has one patch per row.
    """
    s = int(patch_size)
    if s < 1:
        raise ImageSmallerThanPatch("patch_size must be >= 1")
    h, w = image.shape
    if h < s or w < s:
        raise ImageSmallerThanPatch(
            f"image {h}x{w} is smaller than patch size {s}"
        )
    stride = -(-s // 2)
    n_r, n_c = patch_grid_counts(h, w, s)
    out = np.empty((n_r * n_c, s * s))
    k = 0
    for i in range(n_r):
        for j in range(n_c):
            r, c = i * stride, j * stride
            out[k] = image.pixels[r : r + s, c : c + s].ravel()
            k += 1
    return out


def build_codebook(patches, k: int, seed: int, patch_size: int | None = None) -> Codebook:
    """k-means codebook over patch vectors, deterministic for a fixed seed.

    Seeding is k-means++ (distance-squared sampling); Lloyd iterations run to
    an assignment fixpoint or 300 rounds, with empty clusters keeping their
    previous centroid.
    """
    pts = np.asarray(patches, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise DimensionMismatch("patches must be a nonempty 2-D array")
    if patch_size is None:
        patch_size = math.isqrt(pts.shape[1])
    if patch_size * patch_size != pts.shape[1]:
        raise DimensionMismatch(
            f"patch vectors of length {pts.shape[1]} are not square patches"
        )
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    if pts.shape[0] < k:
        raise TooFewPatches(f"need at least k={k} patches, got {pts.shape[0]}")

    rng = np.random.default_rng(seed)
    n = pts.shape[0]
    centroids = np.empty((k, pts.shape[1]))
    centroids[0] = pts[int(rng.integers(n))]
    d2 = np.sum((pts - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = float(d2.sum())
        if total == 0.0:
            raise TooFewPatches(
                f"fewer than k={k} distinct patches; cannot build a codebook"
            )
        centroids[i] = pts[int(rng.choice(n, p=d2 / total))]
        d2 = np.minimum(d2, np.sum((pts - centroids[i]) ** 2, axis=1))

    assign = np.full(n, -1)
    for _ in range(300):
        d = _sq_distances(pts, centroids)
        new_assign = np.argmin(d, axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        dist_own = d[np.arange(n), assign]
        for j in range(k):
            members = assign == j
            if np.any(members):
                centroids[j] = pts[members].mean(axis=0)
            else:
                # Revive an empty cluster at the currently worst-served point.
                worst = int(np.argmax(dist_own))
                centroids[j] = pts[worst]
                assign[worst] = j
                dist_own[worst] = 0.0
    return Codebook(centroids, patch_size)


def _sq_distances(pts: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # ||p - c||^2 expanded; the -2 p.c term dominates the cost.
    return (
        np.sum(pts * pts, axis=1)[:, None]
        - 2.0 * pts @ centroids.T
        + np.sum(centroids * centroids, axis=1)[None, :]
    )


def bow_histogram(image: GrayImage, codebook: Codebook) -> FeatureVector:
    """L1-normalized histogram of nearest-codeword counts.

    Every patch votes for its closest centroid (Euclidean; ties go to the
    lowest index), so the histogram entries are nonnegative and sum to 1.
    """
    patches = extract_patches(image, codebook.patch_size)
    d = _sq_distances(patches, codebook.centroids)
    votes = np.argmin(d, axis=1)
    counts = np.bincount(votes, minlength=codebook.n_codewords).astype(float)
    return FeatureVector(counts / counts.sum())
