"""Synthetic distribution-labeled datasets with a linear-softmax ground truth.

Features are i.i.d. standard normal; each label distribution is the
normalization of exp(x @ beta) for a seeded random coefficient matrix, so
a linear first-order model is exactly well specified on this data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import LabeledExample, examples_from_arrays


@dataclass(frozen=True)
class GeneratorSpec:
    k: int
    d: int = 10
    n: int = 1500
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.k <= 16:
            raise ValueError(f"k must be in 2..16, got {self.k}")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")


def labels_from_features(x: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Ground-truth conditional distributions: normalized exp(x @ beta).

    The exponent is shifted by its row maximum before exponentiation; the
    normalized ratio is invariant and cannot overflow.
    """
    z = x @ beta
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def generate(spec: GeneratorSpec) -> tuple[np.ndarray, list[LabeledExample]]:
    """Draw (beta, dataset) deterministically from the spec's seed."""
    rng = np.random.default_rng(spec.seed)
    beta = rng.standard_normal((spec.d, spec.k))
    x = rng.standard_normal((spec.n, spec.d))
    labels = labels_from_features(x, beta)
    return beta, examples_from_arrays(x, labels)
