"""Independent reference values for tests and acceptance runs.

Everything here integrates by naive high-count summation on purpose: these
numbers cross-check the quadrature module, so they must not share code with
it.
"""

import math

import numpy as np

_CHUNK = 1_000_000


def linear_euclidean_density(matrix, p, nodes=1_000_000):
    """Average of |A nu|^p over unit directions nu, by dense midpoint sums.

    Supports domain dimension 2 (angle sweep) and 3 (latitude/longitude grid
    with the sin(theta) area factor). For p = 2 this equals the squared
    Frobenius norm of A divided by the domain dimension.
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("matrix must be 2-d")
    n = a.shape[1]
    if n == 2:
        total = 0.0
        done = 0
        while done < nodes:
            count = min(_CHUNK, nodes - done)
            theta = (done + np.arange(count) + 0.5) * (2.0 * math.pi / nodes)
            nu = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            total += float(np.sum(np.linalg.norm(nu @ a.T, axis=1) ** p))
            done += count
        return total / nodes
    if n == 3:
        side = max(int(round(math.sqrt(nodes / 2.0))), 64)
        theta = (np.arange(side) + 0.5) * (math.pi / side)  # polar
        phi = (np.arange(2 * side) + 0.5) * (math.pi / side)  # azimuth
        st, ct = np.sin(theta), np.cos(theta)
        total = 0.0
        weight = 0.0
        for i in range(side):
            nu = np.stack(
                [st[i] * np.cos(phi), st[i] * np.sin(phi), np.full(2 * side, ct[i])], axis=1
            )
            total += st[i] * float(np.sum(np.linalg.norm(nu @ a.T, axis=1) ** p))
            weight += st[i] * 2 * side
        return total / weight
    raise ValueError(f"unsupported domain dimension {n}")


def maxnorm_counterexample_constants(p, grad_rows=((1.0, 0.0), (0.0, 1.0)), nodes=10_000_000):
    """Frame sum and sphere average for a two-component map into the max-norm plane.

    For component gradients g1, g2 (rows), the directional modulus is
    max(|nu.g1|, |nu.g2|); the frame sum is sum_i max(|g1_i|, |g2_i|)^p and
    the sphere average comes from a dense trapezoid sweep. The defaults are
    the identity map, whose p = 2 constants are 2 and (2 + pi) / (2 pi).
    """
    g1 = np.asarray(grad_rows[0], dtype=np.float64)
    g2 = np.asarray(grad_rows[1], dtype=np.float64)
    frame_sum = float(sum(max(abs(g1[i]), abs(g2[i])) ** p for i in range(2)))

    total = 0.0
    done = 0
    while done < nodes:
        count = min(_CHUNK, nodes - done)
        theta = (done + np.arange(count)) * (2.0 * math.pi / nodes)
        nu1, nu2 = np.cos(theta), np.sin(theta)
        vals = np.maximum(np.abs(nu1 * g1[0] + nu2 * g1[1]), np.abs(nu1 * g2[0] + nu2 * g2[1]))
        total += float(np.sum(vals**p))
        done += count
    return frame_sum, total / nodes


def maxnorm_exact_p2():
    """Closed form of the p = 2 sphere average for the identity map."""
    return (2.0 + math.pi) / (2.0 * math.pi)
