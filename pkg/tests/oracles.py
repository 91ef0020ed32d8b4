"""Independent brute-force oracles for small instances."""

import numpy as np


def charpoly_bounds(t):
    """Extreme eigenvalues via Faddeev-LeVerrier coefficients and polynomial roots."""
    dim = t.shape[0]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(t)
    for k in range(1, dim + 1):
        m = t @ m + coeffs[-1] * np.eye(dim)
        coeffs.append(-np.trace(t @ m) / k)
    roots = np.roots(np.array(coeffs)).real
    return roots.min(), roots.max()


def normal_equations(basis, layer, samples):
    """Least-squares coefficients from normal equations summed node by node."""
    v = basis.vander(layer.nodes, basis.dim(layer.n))
    lhs = sum(t * np.outer(vk.conj(), vk) for t, vk in zip(layer.tau, v))
    rhs = sum(t * yk * vk.conj() for t, yk, vk in zip(layer.tau, samples, v))
    return np.linalg.solve(lhs, rhs)


def min_norm_weights(basis, layer):
    """argmin sum |w|^2 / tau subject to sum_k w_k phi_j(x_k) = delta_{j1}."""
    dim = basis.dim(layer.n)
    m = basis.vander(layer.nodes, dim).T * np.sqrt(layer.tau)
    e1 = np.zeros(dim)
    e1[0] = 1
    return np.sqrt(layer.tau) * (np.linalg.pinv(m) @ e1)
