"""
From pixels to bag-of-words feature vectors
===========================================

The grading pipeline for texture-like inputs: slice each image into
half-overlapping patches, cluster a training set of patches into a
codebook, then describe any image by the histogram of nearest-codeword
assignments.  Everything here is deterministic for a fixed seed.
"""

import numpy as np

from srcl.features import (GrayImage, bow_histogram, build_codebook,
                           extract_patches, patch_grid_counts)

rng = np.random.default_rng(5)

# Three toy "images": dark-textured, bright-textured, and half-and-half.
dark = GrayImage(np.clip(rng.normal(0.25, 0.05, (20, 20)), 0, 1))
bright = GrayImage(np.clip(rng.normal(0.75, 0.05, (20, 20)), 0, 1))
mixed_pixels = np.vstack([
    np.clip(rng.normal(0.25, 0.05, (10, 20)), 0, 1),
    np.clip(rng.normal(0.75, 0.05, (10, 20)), 0, 1),
])
mixed = GrayImage(mixed_pixels)

# Patch layout: 3x3 patches at stride 2 (half-overlapping).
rows, cols = patch_grid_counts(20, 20, 3)
print(f"20x20 image, 3x3 patches, stride 2 -> {rows} x {cols} "
      f"= {rows * cols} patches")

# Pool training patches from the two pure images and cluster them.
train = np.vstack([extract_patches(dark, 3), extract_patches(bright, 3)])
codebook = build_codebook(train, k=4, seed=9)
print(f"codebook: {codebook.n_codewords} centroids of length "
      f"{codebook.patch_size ** 2}")
print("centroid mean intensities:",
      np.round(codebook.centroids.mean(axis=1), 3))

# Histograms are probability vectors over codewords; the mixed image
# lands between the two pure ones.
for name, img in (("dark", dark), ("bright", bright), ("mixed", mixed)):
    h = bow_histogram(img, codebook)
    print(f"{name:7s} histogram {np.round(h.values, 3)} "
          f"(sum {h.values.sum():.3f})")
