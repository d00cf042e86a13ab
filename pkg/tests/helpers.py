"""Shared test utilities: synthetic geometry and small independent oracles."""

import numpy as np


def two_arm_spiral(m=100, seed=0, noise=0.0):
    """Two interleaved spiral arms; returns (points (m,2), arm labels).

    Arms are Archimedean spirals offset by pi, scaled so that the across-arm
    gap is several Gaussian-kernel bandwidths (sigma=1) while along-arm
    neighbors stay within about one bandwidth.
    """
    rng = np.random.default_rng(seed)
    per_arm = m // 2
    theta = np.linspace(0.5 * np.pi, 2.5 * np.pi, per_arm)
    radius = 1.3 * theta
    pts = []
    labels = []
    for arm, phase in enumerate((0.0, np.pi)):
        x = radius * np.cos(theta + phase)
        y = radius * np.sin(theta + phase)
        arm_pts = np.column_stack([x, y])
        if noise > 0:
            arm_pts = arm_pts + noise * rng.standard_normal(arm_pts.shape)
        pts.append(arm_pts)
        labels.extend([arm] * per_arm)
    return np.vstack(pts), np.asarray(labels, dtype=np.int64)


def enumerate_kl(params, i, j, horizon):
    """Brute-force KL divergence between trajectory laws by full enumeration.

    Independent of the dynamic-programming implementation: sums
    p_i(Y) log(p_i(Y)/p_j(Y)) over all s**(horizon+1) trajectories using
    plain Python products.
    """
    import itertools
    import math

    s = params.s
    nu_i, nu_j = params.nu[i], params.nu[j]
    P_i, P_j = params.P[i], params.P[j]
    total = 0.0
    for path in itertools.product(range(s), repeat=horizon + 1):
        p = nu_i[path[0]]
        q = nu_j[path[0]]
        for t in range(horizon):
            p *= P_i[path[t], path[t + 1]]
            q *= P_j[path[t], path[t + 1]]
        if p > 0:
            total += p * math.log(p / q)
    return total


def strictly_positive_params(k, s, seed, floor=0.05):
    """Random mixture params with every probability entry >= floor."""
    from chainmix import MixtureParams
    from chainmix.model_core import as_rng, uniform_simplex

    rng = as_rng(seed)

    def draw(*shape):
        x = uniform_simplex(rng, *shape)
        x = x + floor
        return x / x.sum(axis=-1, keepdims=True)

    return MixtureParams(mu=draw(k), nu=draw(k, s), P=draw(k, s, s))
