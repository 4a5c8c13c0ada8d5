import numpy as np
import scipy.linalg as la

from adversaries.Adversary import Adversary
from adversaries.IdentResult import IdentResult, markov_error, relative_error
from numerics.NumericsError import ConfigError, Diverged
from sensitivity.LtiSensitivity import sensitivity_matrix

CONFIG = {
    'lr': 1.0,
    'iters': 200,
    'init_radius': 0.1,
    'markov_lags': 20,
    'divergence_loss': 1e12,
    'armijo': 1e-4,
    'max_halvings': 60,
}


class GradientDescentAdversary(Adversary):
    """
    Fits the free parameters of a template system by descending the squared
    output error, using the analytic sensitivity matrix as the Jacobian.

    Without damping each step follows the plain gradient with Armijo
    backtracking from the initial step `lr`. With damping mu the gradient is
    scaled by (W'W + mu I)^-1, which turns the step into damped Gauss-Newton.
    """

    method = 'grad_descent'

    def __init__(self, logger, template, lr=None, iters=None, seed=0, init_radius=None, damping=None):
        self.logger = logger
        self.template = template
        self.lr = CONFIG['lr'] if lr is None else lr
        self.iters = CONFIG['iters'] if iters is None else iters
        self.seed = seed
        self.init_radius = CONFIG['init_radius'] if init_radius is None else init_radius
        self.damping = damping
        if self.lr <= 0 or self.iters < 0:
            raise ConfigError("gradient descent needs lr > 0 and iters >= 0", lr=self.lr, iters=self.iters)

    def initial_guess(self):
        theta_star = self.template.parameters()
        rng = np.random.default_rng(self.seed)
        return theta_star + self.init_radius * np.abs(theta_star) * rng.uniform(-1.0, 1.0, size=theta_star.shape)

    def _loss(self, theta, u, y):
        residual = self.template.apply_params(theta).simulate(u).y - y
        loss = float(np.sum(residual ** 2))
        if not np.isfinite(loss) or loss > CONFIG['divergence_loss']:
            raise Diverged(f"Output loss reached {loss:.3e}", loss=loss)
        return loss, residual

    def _direction(self, theta, u, residual):
        W = sensitivity_matrix(self.template.apply_params(theta), u)
        gradient = 2.0 * W.T @ residual.reshape(-1)
        if self.damping is None:
            return gradient, -gradient
        F = W.T @ W
        return gradient, -la.solve(F + self.damping * np.eye(F.shape[0]), W.T @ residual.reshape(-1),
                                   assume_a='pos')

    def descend(self, u, y):
        theta = self.initial_guess()
        loss, residual = self._loss(theta, u, y)
        iteration = 0
        for iteration in range(1, self.iters + 1):
            gradient, direction = self._direction(theta, u, residual)
            slope = float(gradient @ direction)
            if slope >= 0 or not np.any(direction):
                break
            step = self.lr
            for _ in range(CONFIG['max_halvings']):
                candidate = theta + step * direction
                try:
                    candidate_loss, candidate_residual = self._loss(candidate, u, y)
                except Diverged:
                    candidate_loss = np.inf
                if candidate_loss <= loss + CONFIG['armijo'] * step * slope:
                    break
                step *= 0.5
            else:
                break
            theta, loss, residual = candidate, candidate_loss, candidate_residual
        return theta, loss, iteration

    def predict(self, estimate, u):
        return self.template.apply_params(estimate).simulate(u).y

    def identify(self, traj, train=None, test=0, test_start=None, truth=None):
        train, scored = self.split(traj, train, test, test_start)
        theta, loss, iterations = self.descend(traj.u[:train], traj.y[:train])
        truth = self.template if truth is None else truth
        estimated = self.template.apply_params(theta)
        y_hat = estimated.simulate(traj.u).y
        lags = CONFIG['markov_lags']

        result = IdentResult(
            method=self.method,
            estimate=theta,
            pred_error=relative_error(y_hat[scored], traj.y[scored]),
            param_error=relative_error(theta, truth.parameters()),
            markov_error=markov_error(estimated.markov_params(lags), truth.markov_params(lags)),
            iterations=iterations,
            loss=loss)
        self.logger.info(
            "Gradient-descent identification",
            extra={
                "json": {
                    "train": train,
                    "n": int(theta.shape[0]),
                    "iterations": iterations,
                    "loss": loss,
                    "param_error": result.param_error,
                    "pred_error": result.pred_error,
                    "damping": self.damping
                }
            })
        return result
