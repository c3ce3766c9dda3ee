"""Pure-numpy fallback for the dense-simulation kernels.

Same call signatures and index conventions as the compiled module: slot 0 is
the most significant bit; superoperators act on vectorized (row, col) bit
blocks flattened row-major.
"""

import numpy as np


def apply_superop_1q(rho, out, s, q, n):
    t = rho.reshape((2,) * (2 * n))
    r = np.tensordot(s.reshape(2, 2, 2, 2), t, axes=([2, 3], [q, n + q]))
    out.reshape((2,) * (2 * n))[...] = np.moveaxis(r, [0, 1], [q, n + q])


def apply_superop_2q(rho, out, s, q1, q2, n):
    t = rho.reshape((2,) * (2 * n))
    r = np.tensordot(s.reshape((2,) * 8), t,
                     axes=([4, 5, 6, 7], [q1, q2, n + q1, n + q2]))
    out.reshape((2,) * (2 * n))[...] = np.moveaxis(r, [0, 1, 2, 3],
                                                   [q1, q2, n + q1, n + q2])


def prob_zero(rho, q, n):
    diag = np.einsum("ii->i", rho).real
    idx = np.arange(1 << n)
    mask = ((idx >> (n - 1 - q)) & 1) == 0
    return float(diag[mask].sum())


def project_z(rho, q, outcome, n):
    idx = np.arange(1 << n)
    kill = ((idx >> (n - 1 - q)) & 1) != outcome
    rho[kill, :] = 0
    rho[:, kill] = 0
    return float(np.einsum("ii->i", rho).real.sum())


NAME = "python"
