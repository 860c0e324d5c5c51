"""Probability-simplex primitives.

Validated categorical distributions, lattice discretizations of the
simplex, the distances/divergences used as nonconformity functions, and
Dirichlet densities for the second-order route.

Scalar distance functions delegate to the batch kernels in
:mod:`credalcp.kernels` on single-row arrays, so a score computed one
point at a time is bit-identical to the same score computed over a grid.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import gammaln

from . import kernels
from .errors import (
    DimensionMismatch,
    InvalidConcentration,
    NegativeMass,
    NotNormalized,
    ResourceLimit,
)

NEGATIVE_TOLERANCE = 1e-12
NORMALIZATION_TOLERANCE = 1e-6
DEFAULT_POINT_CAP = 10**7


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A categorical distribution over K >= 2 classes.

    Construction clamps entries in [-1e-12, 0) to zero and renormalizes
    when the sum deviates from 1 by at most 1e-6; larger deviations or
    more negative entries are rejected.
    """

    probs: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.probs, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise DimensionMismatch(
                f"a simplex point needs a 1-d vector of K >= 2 entries, got shape {values.shape}"
            )
        if np.any(values < -NEGATIVE_TOLERANCE):
            raise NegativeMass(f"entries must be >= -{NEGATIVE_TOLERANCE}: {values}")
        values = np.maximum(values, 0.0)
        total = values.sum()
        if not abs(total - 1.0) <= NORMALIZATION_TOLERANCE:
            raise NotNormalized(f"entries sum to {total}, expected 1 within {NORMALIZATION_TOLERANCE}")
        if abs(total - 1.0) > 1e-9:
            values = values / total
        values.flags.writeable = False
        object.__setattr__(self, "probs", values)

    @property
    def k(self) -> int:
        return self.probs.size

    def __repr__(self):
        return f"SimplexPoint({np.array2string(self.probs, separator=', ')})"


def make_point(values) -> SimplexPoint:
    """Validate and renormalize a vector into a SimplexPoint."""
    return SimplexPoint(np.asarray(values, dtype=np.float64))


def uniform_point(k: int) -> SimplexPoint:
    return SimplexPoint(np.full(k, 1.0 / k))


def grid_size(k: int, n: int) -> int:
    """Number of lattice points i/n on the (K-1)-simplex: C(n+k-1, k-1)."""
    return math.comb(n + k - 1, k - 1)


def _point_cap(cap: int | None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("CREDAL_RESOURCE_CAP")
    return int(env) if env else DEFAULT_POINT_CAP


@dataclass(frozen=True, eq=False)
class SimplexGrid:
    """Lattice discretization of the simplex at resolution 1/n.

    ``points`` is an (M, K) float64 array whose rows are the lattice
    points, enumerated in ascending lexicographic order of their integer
    compositions; M = C(n+k-1, k-1).
    """

    k: int
    n: int
    points: np.ndarray

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def point(self, i: int) -> SimplexPoint:
        return SimplexPoint(self.points[i])

    def __repr__(self):
        return f"SimplexGrid(k={self.k}, n={self.n}, size={self.size})"


def build_grid(k: int, n: int, cap: int | None = None) -> SimplexGrid:
    """Enumerate all points of the 1/n lattice on the (K-1)-simplex.

    Raises ResourceLimit when C(n+k-1, k-1) exceeds ``cap`` (default
    10**7, overridable via the CREDAL_RESOURCE_CAP environment variable).
    """
    if k < 2:
        raise DimensionMismatch(f"need k >= 2 classes, got {k}")
    if n < 1:
        raise ValueError(f"need n >= 1 subdivisions, got {n}")
    size = grid_size(k, n)
    limit = _point_cap(cap)
    if size > limit:
        raise ResourceLimit(
            f"grid for k={k}, n={n} has {size} points, exceeding the cap of {limit}"
        )
    # Stars and bars: k-1 bar positions among n+k-1 slots, in lexicographic
    # order, mapped to compositions by differencing.
    bars = np.fromiter(
        (b for combo in combinations(range(n + k - 1), k - 1) for b in combo),
        dtype=np.int64,
        count=size * (k - 1),
    ).reshape(size, k - 1)
    upper = np.column_stack([bars, np.full(size, n + k - 1, dtype=np.int64)])
    lower = np.column_stack([np.full(size, -1, dtype=np.int64), bars])
    compositions = upper - lower - 1
    points = np.ascontiguousarray(compositions / n, dtype=np.float64)
    points.flags.writeable = False
    return SimplexGrid(k=k, n=n, points=points)


def _check_same_k(p: SimplexPoint, q: SimplexPoint):
    if p.k != q.k:
        raise DimensionMismatch(f"distributions over {p.k} and {q.k} classes")


def tv_distance(p: SimplexPoint, q: SimplexPoint) -> float:
    """Total variation distance, half the L1 difference."""
    _check_same_k(p, q)
    return float(kernels.tv_scores(p.probs[None, :], q.probs)[0])


def kl_divergence(p: SimplexPoint, q: SimplexPoint) -> float:
    """KL divergence with 0*log(0) = 0 and q clamped at 1e-12."""
    _check_same_k(p, q)
    return float(kernels.kl_scores(p.probs[None, :], q.probs)[0])


def wasserstein1(p: SimplexPoint, q: SimplexPoint) -> float:
    """1-Wasserstein distance for classes ordered 1..K with ground metric |i-j|.

    Equals the sum of absolute CDF differences over the first K-1 classes.
    """
    _check_same_k(p, q)
    return float(kernels.ws_scores(p.probs[None, :], q.probs)[0])


def inner_score(p: SimplexPoint, q: SimplexPoint) -> float:
    """One minus the inner product of the two distributions."""
    _check_same_k(p, q)
    return float(kernels.inner_scores(p.probs[None, :], q.probs)[0])


@dataclass(frozen=True, eq=False)
class DirichletParams:
    """Dirichlet concentration vector with every entry strictly above 1.

    The restriction keeps the mode interior and unique, so the relative
    likelihood in the second-order nonconformity is always well defined.
    """

    theta: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.theta, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise DimensionMismatch(
                f"concentration must be a 1-d vector of K >= 2 entries, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)) or np.any(values <= 1.0):
            raise InvalidConcentration(f"every concentration must exceed 1 strictly: {values}")
        values.flags.writeable = False
        object.__setattr__(self, "theta", values)

    @property
    def k(self) -> int:
        return self.theta.size

    def __repr__(self):
        return f"DirichletParams({np.array2string(self.theta, separator=', ')})"


def log_beta(theta: DirichletParams) -> float:
    """Log of the multivariate beta function of the concentration vector."""
    return float(gammaln(theta.theta).sum() - gammaln(theta.theta.sum()))


def dirichlet_log_density(lam: SimplexPoint, theta: DirichletParams) -> float:
    """Log Dirichlet density at ``lam``; entries clamped at 1e-12 inside logs."""
    if lam.k != theta.k:
        raise DimensionMismatch(f"point over {lam.k} classes, concentration over {theta.k}")
    clamped = np.maximum(lam.probs, kernels.CLAMP)
    return float(-log_beta(theta) + ((theta.theta - 1.0) * np.log(clamped)).sum())


def dirichlet_mode(theta: DirichletParams) -> SimplexPoint:
    """Closed-form density maximizer (theta_k - 1) / (sum(theta) - K)."""
    excess = theta.theta - 1.0
    # summing the excesses directly avoids cancellation when theta is near 1
    return SimplexPoint(excess / excess.sum())


def so_kernel_args(theta: DirichletParams) -> tuple[np.ndarray, float]:
    """Precompute (theta - 1, log peak kernel) for the SO batch kernel.

    The beta-function normalizer cancels in the relative likelihood, so
    only the log density kernel at the clamped mode is needed.
    """
    coeff = np.ascontiguousarray(theta.theta - 1.0)
    mode = dirichlet_mode(theta)
    log_peak = float(coeff @ np.log(np.maximum(mode.probs, kernels.CLAMP)))
    return coeff, log_peak


def dirichlet_relative_nonconformity(lam: SimplexPoint, theta: DirichletParams) -> float:
    """One minus the Dirichlet likelihood relative to its simplex maximum."""
    if lam.k != theta.k:
        raise DimensionMismatch(f"point over {lam.k} classes, concentration over {theta.k}")
    coeff, log_peak = so_kernel_args(theta)
    return float(kernels.so_scores(lam.probs[None, :], coeff, log_peak)[0])
