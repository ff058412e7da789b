"""Independent brute-force oracles for the test suite.

Everything here is deliberately naive (recursive descents, dense sampling,
direct definitions) and shares no code path with the library's vectorized
implementations.
"""

import math


def leaves_under(tree, node, n):
    """(leaf, mass) pairs of generation-n descendants, by recursion."""
    if tree.depth_of[node] == n:
        return [(node, float(tree.measure[node]))]
    out = []
    for child in tree.children[node]:
        out.extend(leaves_under(tree, child, n))
    return out


def naive_point(phi, node):
    """Mass-weighted (mean, mean_sq) over generation-N descendants."""
    pairs = leaves_under(phi.tree, node, phi.depth)
    total = sum(m for _, m in pairs)
    m1 = sum(m * phi.value_at(leaf) for leaf, m in pairs) / total
    m2 = sum(m * phi.value_at(leaf) ** 2 for leaf, m in pairs) / total
    return m1, m2


def naive_delta1(phi, node):
    pairs = leaves_under(phi.tree, node, phi.depth)
    total = sum(m for _, m in pairs)
    m1, _ = naive_point(phi, node)
    return sum(m * abs(phi.value_at(leaf) - m1) for leaf, m in pairs) / total


def naive_delta2(phi, node):
    m1, m2 = naive_point(phi, node)
    return max(m2 - m1 * m1, 0.0)


def naive_norms(phi):
    nodes = [
        j for j in range(phi.tree.n_nodes) if phi.tree.depth_of[j] <= phi.depth
    ]
    norm2 = max(math.sqrt(naive_delta2(phi, j)) for j in nodes)
    norm1 = max(naive_delta1(phi, j) for j in nodes)
    return norm2, norm1


def in_strip(x1, x2, eps, tol=0.0):
    return x1 * x1 - tol <= x2 <= x1 * x1 + eps * eps + tol


def removable_indices(weights, points, eps, tol=1e-12):
    """All indices whose removal keeps the average in the strip."""
    cx = sum(w * p[0] for w, p in zip(weights, points))
    cy = sum(w * p[1] for w, p in zip(weights, points))
    out = []
    for j, (w, p) in enumerate(zip(weights, points)):
        rx = (cx - w * p[0]) / (1.0 - w)
        ry = (cy - w * p[1]) / (1.0 - w)
        if in_strip(rx, ry, eps, tol):
            out.append(j)
    return out


def sampled_outside_fraction(p, r, eps, samples=10**6):
    """Midpoint-rule measure of the chord part above the upper boundary."""
    count = 0
    for i in range(samples):
        t = (i + 0.5) / samples
        x1 = (1.0 - t) * p[0] + t * r[0]
        x2 = (1.0 - t) * p[1] + t * r[1]
        if x2 - x1 * x1 > eps * eps:
            count += 1
    return count / samples


def sampled_outside_fraction_np(p, r, eps, samples=10**6):
    """Vectorized midpoint-rule oracle (same quadrature, numpy arithmetic)."""
    import numpy as np

    t = (np.arange(samples) + 0.5) / samples
    x1 = (1.0 - t) * p[0] + t * r[0]
    x2 = (1.0 - t) * p[1] + t * r[1]
    return float(np.count_nonzero(x2 - x1 * x1 > eps * eps)) / samples
