"""Random test systems."""

import numpy as np

from conecert.cls import ConewiseSystem


def random_two_cone(rng, n, radius=None):
    """A continuous, invertible two-cone system: A1 = A2 + v K.

    With `radius`, both modes are rescaled to that spectral radius.
    """
    while True:
        a2 = rng.standard_normal((n, n))
        k = rng.standard_normal(n)
        v = rng.standard_normal(n)
        a1 = a2 + np.outer(v, k)
        if radius is not None:
            r1 = np.max(np.abs(np.linalg.eigvals(a1)))
            r2 = np.max(np.abs(np.linalg.eigvals(a2)))
            if min(r1, r2) < 1e-3:
                continue
            # a common factor keeps A1 - A2 of the form v K
            a1 = a1 * radius / max(r1, r2)
            a2 = a2 * radius / max(r1, r2)
        if min(abs(np.linalg.det(a1)), abs(np.linalg.det(a2))) > 1e-3:
            return ConewiseSystem.two_cone(a1, a2, k)


def boundary_point(rng, sys):
    """A random unit vector on the hyperplane K x = 0."""
    x = rng.standard_normal(sys.n)
    k = sys.K
    x -= (x @ k) / (k @ k) * k
    return x / np.linalg.norm(x)
