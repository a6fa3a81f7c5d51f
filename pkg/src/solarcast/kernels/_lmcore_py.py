"""Pure-numpy fallback for the MLP forward/Jacobian kernels.

Parameter vector layout (P = H*In + 2H + 1):
    [w1 row-major (H*In), b1 (H), w2 (H), b2]
"""

import numpy as np

BACKEND = "python"


def mlp_forward(w1, b1, w2, b2, x):
    """Batch forward pass: returns predictions of shape (N,)."""
    hidden = np.tanh(x @ w1.T + b1)
    return hidden @ w2 + b2


def mlp_forward_jacobian(w1, b1, w2, b2, x):
    """Predictions plus d prediction / d parameter, shape (N, P)."""
    n, n_in = x.shape
    h = w1.shape[0]
    hidden = np.tanh(x @ w1.T + b1)
    y = hidden @ w2 + b2
    gate = (1.0 - hidden**2) * w2  # (N, H)
    p = h * n_in + 2 * h + 1
    jac = np.empty((n, p))
    jac[:, : h * n_in] = (gate[:, :, None] * x[:, None, :]).reshape(n, h * n_in)
    jac[:, h * n_in : h * n_in + h] = gate
    jac[:, h * n_in + h : h * n_in + 2 * h] = hidden
    jac[:, -1] = 1.0
    return y, jac
