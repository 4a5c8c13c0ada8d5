import logging

import numpy as np

from numerics.LinearAlgebra import as_matrix
from numerics.NumericsError import ShapeError, UnsupportedInitialState
from sensitivity.SensitivityBundle import SensitivityBundle

logger = logging.getLogger(__name__)


def _power_sequences(sys, horizon):
    """C A^s (horizon, m, p) and A^s B (horizon, p, l) for s = 0 .. horizon-1."""
    CA = np.zeros((horizon, sys.m, sys.p))
    AB = np.zeros((horizon, sys.p, sys.l))
    left, right = sys.C.copy(), sys.B.copy()
    for s in range(horizon):
        CA[s], AB[s] = left, right
        left, right = left @ sys.A, sys.A @ right
    return CA, AB


def derivative_sequence(sys, i, horizon, powers=None):
    """
    d(C A^d B)/d theta_i for d = 0 .. horizon-1, stacked (horizon, m, l).
    """
    if not 0 <= i < sys.n_params:
        raise ShapeError(f"parameter index {i} out of range for {sys.n_params} parameters")
    CA, AB = powers if powers is not None else _power_sequences(sys, horizon)
    matrix_id, row, col = sys.mask[i]
    G = np.zeros((horizon, sys.m, sys.l))
    if matrix_id == 'A':
        # product rule: sum_s C A^s E_rc A^(d-1-s) B
        for d in range(1, horizon):
            G[d] = np.einsum('sm,sl->ml', CA[:d, :, row], AB[d - 1::-1, col, :])
    elif matrix_id == 'B':
        G[:, :, col] = CA[:, :, row]
    else:
        G[:, row, :] = AB[:, col, :]
    return G


def g_ijk(sys, i, d):
    """Derivative of the Markov parameter C A^d B with respect to theta_i."""
    if d < 0:
        raise ShapeError(f"power must be non-negative, got {d}")
    return derivative_sequence(sys, i, d + 1)[d]


def derivative_stack(sys, horizon):
    powers = _power_sequences(sys, horizon)
    return np.stack([derivative_sequence(sys, i, horizon, powers) for i in range(sys.n_params)])


def _check_input(sys, u):
    if not sys.has_zero_initial_state:
        raise UnsupportedInitialState("Analytic sensitivities assume a zero initial state")
    u = as_matrix(u, 'u')
    if u.shape[1] != sys.l:
        raise ShapeError(f"u has {u.shape[1]} channels, system has {sys.l} inputs")
    return u


def sensitivity_matrix(sys, u):
    """
    W alone, by convolving the derivative sequences with u; skips building H.
    """
    u = _check_input(sys, u)
    T = u.shape[0]
    G = derivative_stack(sys, T)
    W3 = np.zeros((T, sys.m, sys.n_params))
    for d in range(T - 1):
        W3[d + 1:] += np.einsum('iol,kl->koi', G[:, d], u[:T - d - 1])
    return W3.reshape(T * sys.m, sys.n_params)


def build_bundle_lti(sys, u):
    u = _check_input(sys, u)
    T, l, m, n = u.shape[0], sys.l, sys.m, sys.n_params
    G = derivative_stack(sys, T)
    K, J = np.tril_indices(T, -1)
    D = K - J - 1

    H5 = np.zeros((T, T, l, m, n))
    H5[K, J] = G[:, D].transpose(1, 3, 2, 0)
    W3 = np.einsum('kjcoi,jc->koi', H5, u)

    Ja4 = np.zeros((T, m, T, l))
    Ja4[K, :, J, :] = sys.markov_params(T)[D]

    bundle = SensitivityBundle(
        horizon=T, output_dim=m, input_dim=l,
        W=W3.reshape(T * m, n), H=H5.reshape(T * T * l * m, n), Ja=Ja4.reshape(T * m, T * l))
    logger.debug(
        "Built analytic sensitivity bundle",
        extra={
            "json": {
                "horizon": T,
                "n": n,
                "W_norm": float(np.linalg.norm(bundle.W)),
                "H_norm": float(np.linalg.norm(bundle.H))
            }
        })
    return bundle
