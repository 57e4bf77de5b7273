"""Synthetic and image-derived barycenter instances.

Synthetic instances follow a Gaussian-mixture recipe: support
coordinates are i.i.d. draws from a five-component univariate mixture
(means -20, -10, 0, 10, 20, common variance 5, weights drawn uniformly
and normalized once per instance), atom weights and the distribution
weights ``omega`` are normalized uniforms, and the barycenter support is
picked by k-means on the pooled sample supports.  Ground costs are
squared Euclidean distances, normalized jointly so the largest entry
across all distributions is one, then scaled by ``omega_t`` to form the
instance cost matrices.
"""

import numpy as np

from .problem import DiscreteDistribution, WbpInstance

__all__ = [
    "SyntheticConfig",
    "generate_synthetic",
    "build_cost",
    "kmeans_select",
    "image_to_distribution",
]

_MIXTURE_MEANS = np.array([-20.0, -10.0, 0.0, 10.0, 20.0])
_MIXTURE_VAR = 5.0


class SyntheticConfig:
    """Shape and seed of a synthetic instance.

    Parameters
    ----------
    T : int
        Number of sample distributions.
    m : int
        Barycenter support size (at least 2).
    m_t : int or sequence of int
        Atoms per sample distribution; a scalar is shared by all.
    d : int
        Ambient dimension of the support points (default 3).
    seed : int
        Generator seed; equal seeds give bitwise-identical instances.
    """

    def __init__(self, T, m, m_t, d=3, seed=0):
        self.T = int(T)
        self.m = int(m)
        if np.isscalar(m_t):
            self.m_ts = tuple(int(m_t) for _ in range(self.T))
        else:
            self.m_ts = tuple(int(v) for v in m_t)
        if len(self.m_ts) != self.T:
            raise ValueError("m_t must be a scalar or length-T sequence")
        self.d = int(d)
        self.seed = int(seed)
        if self.T < 1 or self.m < 2 or min(self.m_ts) < 1 or self.d < 1:
            raise ValueError("invalid synthetic dimensions")


def _sample_mixture(rng, mix_weights, size):
    comps = rng.choice(_MIXTURE_MEANS.shape[0], size=size, p=mix_weights)
    return _MIXTURE_MEANS[comps] + np.sqrt(_MIXTURE_VAR) * rng.standard_normal(size)


def generate_synthetic(config):
    """Generate a random barycenter instance.

    Returns
    -------
    WbpInstance
        With ``bary_support`` filled in and cost matrices
        ``omega_t * build_cost(...)[t]``.
    """
    rng = np.random.default_rng(config.seed)
    mix_weights = rng.random(_MIXTURE_MEANS.shape[0])
    mix_weights /= mix_weights.sum()

    dists = []
    for mt in config.m_ts:
        support = _sample_mixture(rng, mix_weights, (mt, config.d))
        weights = rng.random(mt)
        weights /= weights.sum()
        dists.append(DiscreteDistribution(weights, support))

    omega = rng.random(config.T)
    omega /= omega.sum()

    pooled = np.vstack([d.support for d in dists])
    centers = kmeans_select(pooled, config.m, rng)

    ground = build_cost(centers, [d.support for d in dists])
    cost = [omega[t] * ground[t] for t in range(config.T)]
    return WbpInstance(dists, omega, cost, bary_support=centers)


def build_cost(bary_support, supports):
    """Jointly normalized squared-Euclidean ground costs.

    Parameters
    ----------
    bary_support : ndarray, shape (m, d)
    supports : sequence of ndarray, shapes (m_t, d)

    Returns
    -------
    list of ndarray
        Matrices ``C^t[i, j] = ||bary_i - support^t_j||^2`` scaled by one
        common factor so that the largest entry over all ``t`` is one.
        These carry no ``omega`` weighting.
    """
    bary_support = np.asarray(bary_support, dtype=np.float64)
    if bary_support.ndim == 1:
        bary_support = bary_support[:, None]
    mats = []
    for S in supports:
        S = np.asarray(S, dtype=np.float64)
        if S.ndim == 1:
            S = S[:, None]
        diff = bary_support[:, None, :] - S[None, :, :]
        mats.append(np.einsum("ijk,ijk->ij", diff, diff))
    top = max(float(C.max()) for C in mats)
    if top > 0.0:
        mats = [C / top for C in mats]
    return mats


def kmeans_select(points, m, rng, n_iters=100, tol=1e-9, return_wcss=False):
    """Pick ``m`` cluster centers from pooled points by Lloyd sweeps.

    Seeding picks the first center uniformly and subsequent ones with
    probability proportional to the squared distance from the chosen
    set.  Sweeps stop when the within-cluster sum of squares decreases
    by a relative factor below ``tol``; a cluster that empties is
    reseeded at a random pooled point.

    Parameters
    ----------
    points : ndarray, shape (n, d)
    m : int
        Number of centers (at most ``n``).
    rng : numpy.random.Generator
    return_wcss : bool
        Also return the per-sweep within-cluster sum of squares.

    Returns
    -------
    ndarray, shape (m, d)
        Or ``(centers, wcss_list)`` when ``return_wcss`` is set.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if m > n:
        raise ValueError(f"cannot pick {m} centers from {n} points")

    # Distance-squared proportional seeding.
    centers = np.empty((m, points.shape[1]))
    idx = rng.integers(n)
    centers[0] = points[idx]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, m):
        total = d2.sum()
        if total <= 0.0:
            centers[j] = points[rng.integers(n)]
        else:
            centers[j] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))

    prev_wcss = np.inf
    wcss_trace = []
    for _ in range(n_iters):
        # Assignment on squared distances, expanded to avoid the n*m*d
        # intermediate.
        cross = points @ centers.T
        sq = np.sum(centers ** 2, axis=1)[None, :] - 2.0 * cross
        labels = np.argmin(sq, axis=1)
        wcss = float(
            np.sum(np.sum(points ** 2, axis=1) + sq[np.arange(n), labels])
        )
        wcss_trace.append(wcss)
        for j in range(m):
            mask = labels == j
            if not np.any(mask):
                centers[j] = points[rng.integers(n)]
            else:
                centers[j] = points[mask].mean(axis=0)
        if prev_wcss - wcss <= tol * max(1.0, abs(prev_wcss)) and np.isfinite(prev_wcss):
            break
        prev_wcss = wcss
    if return_wcss:
        return centers, wcss_trace
    return centers


def image_to_distribution(image, drop_zero=True):
    """Turn a grayscale intensity image into a discrete distribution.

    Pixel intensities become weights (normalized to sum one) and pixel
    centers become support points on the unit square, row index first.

    Parameters
    ----------
    image : ndarray, shape (h, w)
        Nonnegative intensities.
    drop_zero : bool
        Skip zero-intensity pixels (default), keeping the support sparse.

    Returns
    -------
    DiscreteDistribution
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError("expected a 2-d intensity array")
    if np.any(image < 0):
        raise ValueError("negative intensity")
    h, w = image.shape
    rows, cols = np.indices((h, w))
    coords = np.column_stack([
        rows.ravel() / max(h - 1, 1),
        cols.ravel() / max(w - 1, 1),
    ])
    weights = image.ravel().copy()
    if drop_zero:
        keep = weights > 0
        weights = weights[keep]
        coords = coords[keep]
    total = weights.sum()
    if total <= 0:
        raise ValueError("image has no mass")
    weights /= total
    return DiscreteDistribution(weights, coords)
