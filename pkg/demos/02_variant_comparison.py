"""
Six grading variants on one synthetic cohort
============================================

Runs the three plain reconstruction methods (l1 path, distance-weighted
l1 path, sparse group lasso) and their range-constrained versions over
the same generated cohort, then prints the error table.  A desk-size
version of the full benchmark the acceptance tests run.
"""

import time

import numpy as np

from srcl.core import Dictionary, FeatureVector, Hyperparameters
from srcl.data import generate_synthetic
from srcl.distances import euclidean_distances
from srcl.grading import (MethodKind, MethodVariant, grade_bin_partition,
                          solve_variant)
from srcl.metrics import mean_absolute_error, pearson_correlation

data = generate_synthetic(80, 40, 900, 0.15, seed=23, nuisance_scale=2.0)
atoms = data.dictionary.atoms / np.linalg.norm(
    data.dictionary.atoms, axis=0, keepdims=True
)
dictionary = Dictionary(atoms, data.dictionary.grades)
tests = data.test_features / np.linalg.norm(
    data.test_features, axis=1, keepdims=True
)
partition = grade_bin_partition(dictionary.grades)

# Hyperparameters for unit-norm pixel features; the range-constraint
# strength gamma = 10 is shared by all three constrained variants.
hyper = {
    "sc": Hyperparameters(lars_steps=100),
    "sc+rc": Hyperparameters(lars_steps=100, gamma=10.0,
                             max_outer_iterations=10),
    "sdc": Hyperparameters(lambda2=5.0, lars_steps=100),
    "sdc+rc": Hyperparameters(lambda2=5.0, lars_steps=100, gamma=10.0,
                              max_outer_iterations=8),
    "ssgl": Hyperparameters(lambda1=0.01, lambda2=1.0, lambda3=0.05),
    "ssgl+rc": Hyperparameters(lambda1=0.01, lambda2=1.0, lambda3=0.05,
                               gamma=10.0, max_outer_iterations=5),
}

print(f"{'variant':10s} {'mae':>8s} {'pearson':>8s} {'seconds':>8s}")
for name in ("sc", "sc+rc", "sdc", "sdc+rc", "ssgl", "ssgl+rc"):
    kind = MethodKind(name)
    predictions = []
    t0 = time.perf_counter()
    for row in tests:
        y = FeatureVector(row)
        distances = (euclidean_distances(y, dictionary)
                     if kind.requires_distances else None)
        variant = MethodVariant(
            kind, hyper[name], distances,
            partition if kind.requires_partition else None,
        )
        predictions.append(solve_variant(y, dictionary, variant).grade)
    seconds = time.perf_counter() - t0
    mae = mean_absolute_error(data.test_grades, predictions)
    r = pearson_correlation(data.test_grades, predictions)
    print(f"{name:10s} {mae:8.4f} {r:8.4f} {seconds:8.1f}")

print("\neach +rc row should sit at or below its plain counterpart's mae.")
