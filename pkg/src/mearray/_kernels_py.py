"""Pure numpy implementations of the hot kernels.

Reference semantics for :mod:`mearray._kernels_c`; both must agree to
rounding error.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def array_factor(phases, distances, wavenumber):
    """|sum_j exp(i (phases_j + wavenumber * distances_j))|^2."""
    theta = np.asarray(phases, dtype=float) + wavenumber * np.asarray(distances, dtype=float)
    re = np.cos(theta).sum()
    im = np.sin(theta).sum()
    return float(re * re + im * im)


def phasor_power(theta):
    """Row-wise |sum exp(i theta)|^2 for a (G, N) phase table."""
    theta = np.asarray(theta, dtype=float)
    re = np.cos(theta).sum(axis=-1)
    im = np.sin(theta).sum(axis=-1)
    return re * re + im * im


def sweep_linear(k1, k2, c_k1, c_k2, c_root, root_shift, comp, prop):
    """Array factor over a (k1, k2) grid for a linear phase family.

    Element e gets ``2 pi (c_k1 k1 + c_k2 k2 + c_root s) + comp_e`` with
    ``s = sqrt(k1^2 + (k2 + root_shift)^2)``; ``prop_e`` is then added before
    summing phasors, mirroring the phase assignment followed by propagation.
    """
    k1 = np.asarray(k1, dtype=float)[:, None, None]
    k2 = np.asarray(k2, dtype=float)[None, :, None]
    s = np.sqrt(k1 * k1 + (k2 + root_shift) * (k2 + root_shift))
    fam = TWO_PI * (c_k1 * k1 + c_k2 * k2 + c_root * s)
    theta = (fam + comp) + prop
    re = np.cos(theta).sum(axis=-1)
    im = np.sin(theta).sum(axis=-1)
    return re * re + im * im
