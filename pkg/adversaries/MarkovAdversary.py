import numpy as np
import scipy.linalg as la

from adversaries.Adversary import Adversary
from adversaries.IdentResult import IdentResult, markov_error, relative_error
from numerics.LinearAlgebra import range_basis, svd_rank
from numerics.NumericsError import ConfigError
from numerics.Tolerances import DEFAULT_TOLERANCES

CONFIG = {
    'lags': 20,
    'ridge': 0.0,
}


def toeplitz_regressor(u, lags):
    """
    Row k holds [u(k-1), u(k-2), ..., u(k-lags)] with zeros before t = 0,
    so that y(k) = regressor[k] @ Theta with Theta = [M_0'; M_1'; ...].
    """
    T, l = u.shape
    Phi = np.zeros((T, lags * l))
    for i in range(min(lags, T - 1)):
        Phi[i + 1:, i * l:(i + 1) * l] = u[:T - i - 1]
    return Phi


class MarkovAdversary(Adversary):
    """
    Least-squares fit of the first `lags` Markov parameters to the
    convolution y(k) = sum_i M_i u(k-i-1), minimum-norm when the regressor
    is rank-deficient.
    """

    method = 'markov_ls'

    def __init__(self, logger, lags=None, ridge=None, tol=DEFAULT_TOLERANCES):
        self.logger = logger
        self.lags = CONFIG['lags'] if lags is None else lags
        self.ridge = CONFIG['ridge'] if ridge is None else ridge
        self.tol = tol
        if self.lags < 1 or self.ridge < 0:
            raise ConfigError("Markov identification needs lags >= 1 and ridge >= 0",
                              lags=self.lags, ridge=self.ridge)

    def fit(self, u, y):
        Phi = toeplitz_regressor(u, self.lags)
        if self.ridge > 0:
            gram = Phi.T @ Phi + self.ridge * np.eye(Phi.shape[1])
            Theta = la.solve(gram, Phi.T @ y, assume_a='pos')
        elif Phi.size:
            # same relative cutoff as svd_rank, so rounding-level directions are dropped
            Theta, *_ = la.lstsq(Phi, y, cond=self.tol.rank_eps * max(Phi.shape))
        else:
            Theta = np.zeros((Phi.shape[1], y.shape[1]))
        l, m = u.shape[1], y.shape[1]
        estimate = Theta.reshape(self.lags, l, m).transpose(0, 2, 1)
        return estimate, svd_rank(Phi, self.tol) if Phi.size else 0

    def predict(self, estimate, u):
        lags, m, l = estimate.shape
        Theta = estimate.transpose(0, 2, 1).reshape(lags * l, m)
        return toeplitz_regressor(u, lags) @ Theta

    def identify(self, traj, train=None, test=0, test_start=None, truth=None):
        train, scored = self.split(traj, train, test, test_start)
        u_train, y_train = traj.u[:train], traj.y[:train]
        estimate, regressor_rank = self.fit(u_train, y_train)
        y_hat = self.predict(estimate, traj.u)

        result = IdentResult(
            method=self.method,
            estimate=estimate,
            pred_error=relative_error(y_hat[scored], traj.y[scored]),
            regressor_rank=regressor_rank)
        if truth is not None:
            M = truth.markov_params(self.lags)
            result.markov_error = markov_error(estimate, M)
            result.restricted_markov_error = restricted_markov_error(estimate, M, u_train, self.tol)

        self.logger.info(
            "Markov identification",
            extra={
                "json": {
                    "train": train,
                    "lags": self.lags,
                    "ridge": self.ridge,
                    "regressor_rank": regressor_rank,
                    "pred_error": result.pred_error,
                    "markov_error": result.markov_error
                }
            })
        return result


def restricted_markov_error(estimate, truth, u_train, tol=DEFAULT_TOLERANCES):
    """
    max_k ||(M_hat_k - M_k) Pi|| with Pi the projector onto the span of the
    training inputs: the part of the dynamics the data could actually see.
    """
    U = range_basis(u_train.T, tol)
    projector = U @ U.T
    return float(np.max(np.linalg.norm((estimate - truth) @ projector, axis=(1, 2))))
