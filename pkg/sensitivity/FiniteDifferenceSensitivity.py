import logging

import numpy as np

from numerics.LinearAlgebra import as_matrix
from numerics.NumericsError import EvalError, UnidentError
from sensitivity.SensitivityBundle import SensitivityBundle

logger = logging.getLogger(__name__)

CONFIG = {
    'step': 1e-6,
    # Mixed second differences divide by two steps at once, so they need a coarser step.
    'mixed_step': 1e-4,
}


class FiniteDifferenceSensitivity:
    """
    Central-difference sensitivities for any DynamicSystem evaluator.
    """

    def __init__(self, system, logger, step=None, mixed_step=None):
        self.system = system
        self.logger = logger
        self.step = CONFIG['step'] if step is None else step
        self.mixed_step = CONFIG['mixed_step'] if mixed_step is None else mixed_step

    def _evaluate(self, theta, u):
        try:
            y = np.asarray(self.system.evaluate(theta, u), dtype=float)
        except UnidentError:
            raise
        except Exception as e:
            raise EvalError(f"Evaluator failed: {e}") from e
        if not np.all(np.isfinite(y)):
            raise EvalError("Evaluator returned non-finite outputs")
        return y.reshape(u.shape[0], -1)

    def output_jacobian_theta(self, theta, u, step):
        columns = []
        for i in range(theta.shape[0]):
            h = step * (1.0 + abs(theta[i]))
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h
            columns.append(((self._evaluate(up, u) - self._evaluate(down, u)) / (2 * h)).reshape(-1))
        return np.stack(columns, axis=1)

    def input_jacobian(self, theta, u, step):
        """dy(k)/du(j) as a (T, m, T, l) array."""
        T, l = u.shape
        Ja4 = None
        for j in range(T):
            for c in range(l):
                h = step * (1.0 + abs(u[j, c]))
                up, down = u.copy(), u.copy()
                up[j, c] += h
                down[j, c] -= h
                column = (self._evaluate(theta, up) - self._evaluate(theta, down)) / (2 * h)
                if Ja4 is None:
                    Ja4 = np.zeros((T, column.shape[1], T, l))
                Ja4[:, :, j, c] = column
        return Ja4

    def build(self, theta_star, u):
        theta = np.asarray(theta_star, dtype=float).reshape(-1).copy()
        u = as_matrix(u, 'u')
        T, l = u.shape

        W = self.output_jacobian_theta(theta, u, self.step)
        Ja4 = self.input_jacobian(theta, u, self.step)
        m = Ja4.shape[1]

        H5 = np.zeros((T, T, l, m, theta.shape[0]))
        for i in range(theta.shape[0]):
            h = self.mixed_step * (1.0 + abs(theta[i]))
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h
            dJa = (self.input_jacobian(up, u, self.mixed_step)
                   - self.input_jacobian(down, u, self.mixed_step)) / (2 * h)
            H5[:, :, :, :, i] = dJa.transpose(0, 2, 3, 1)

        self.logger.debug(
            "Built finite-difference sensitivity bundle",
            extra={
                "json": {
                    "horizon": T,
                    "n": int(theta.shape[0]),
                    "step": self.step,
                    "mixed_step": self.mixed_step
                }
            })
        return SensitivityBundle(
            horizon=T, output_dim=m, input_dim=l,
            W=W, H=H5.reshape(T * T * l * m, -1), Ja=Ja4.reshape(T * m, T * l))


def build_bundle_fd(system, theta_star, u, step=None, mixed_step=None):
    return FiniteDifferenceSensitivity(system, logger, step, mixed_step).build(theta_star, u)
