from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la

from controllers.Controller import Controller
from numerics.LinearAlgebra import as_matrix, is_psd, spectral_radius, svd_rank
from numerics.NumericsError import ConfigError, RankError, ShapeError
from numerics.RiccatiSolver import riccati_gain, solve_dare
from numerics.Tolerances import DEFAULT_TOLERANCES

CONFIG = {
    'cost_steps': 2000,
}


@dataclass(frozen=True, eq=False)
class LqrCost:
    """J = sum y'Qy + u'Ru (+ y(T)'Q_T y(T) over a finite horizon T)."""
    Q: np.ndarray
    R: np.ndarray
    Q_T: Optional[np.ndarray] = None
    horizon: Optional[int] = None

    def __post_init__(self):
        for name in ('Q', 'R', 'Q_T'):
            value = getattr(self, name)
            if value is None:
                continue
            value = as_matrix(value, name)
            if not is_psd(value):
                raise ConfigError(f"{name} must be symmetric positive semidefinite")
            object.__setattr__(self, name, value)
        if self.horizon is not None and self.horizon < 1:
            raise ConfigError(f"finite horizon must be at least 1, got {self.horizon}")

    @classmethod
    def from_weights(cls, q, r, m, l, q_T=None, horizon=None):
        """Scalars expand to scaled identities; anything else is taken as a full matrix."""
        def expand(weight, size):
            if weight is None:
                return None
            weight = np.asarray(weight, dtype=float)
            return weight * np.eye(size) if weight.ndim == 0 else weight

        return cls(expand(q, m), expand(r, l), expand(q_T, m), horizon)

    def state_weight(self, C):
        return C.T @ self.Q @ C


class LqrController(Controller):
    """
    Static feedback u = -L x. With a column factor K (l x r) excitation enters as K e,
    so every applied input stays in range(K).
    """

    def __init__(self, L, K=None, riccati=None):
        self.L = as_matrix(L, 'L')
        self.K = None if K is None else as_matrix(K, 'K')
        self.riccati = riccati

    @property
    def input_dim(self):
        return self.L.shape[0]

    @property
    def excitation_dim(self):
        return self.input_dim if self.K is None else self.K.shape[1]

    def gain(self, t):
        return self.L

    def control(self, t, x, excitation=None):
        u = -self.L @ x
        if excitation is not None:
            u = u + (excitation if self.K is None else self.K @ excitation)
        return u

    def to_dict(self):
        return {
            'mode': 'lqr',
            'L': self.L.tolist(),
            'K': None if self.K is None else self.K.tolist(),
            'rank': int(svd_rank(self.L))
        }


class FiniteHorizonController(Controller):
    """Time-varying feedback u(t) = -L(t) x(t); the last gain is held past the horizon."""

    def __init__(self, gains, cost_to_go):
        self.gains = [as_matrix(g, 'L') for g in gains]
        self.cost_to_go = cost_to_go

    @property
    def horizon(self):
        return len(self.gains)

    @property
    def input_dim(self):
        return self.gains[0].shape[0]

    @property
    def excitation_dim(self):
        return self.input_dim

    def gain(self, t):
        return self.gains[min(t, self.horizon - 1)]

    def control(self, t, x, excitation=None):
        u = -self.gain(t) @ x
        return u if excitation is None else u + excitation

    def to_dict(self):
        return {
            'mode': 'finite_lqr',
            'horizon': self.horizon,
            'gains': [g.tolist() for g in self.gains]
        }


class LqrDesigner:
    def __init__(self, logger, tol=DEFAULT_TOLERANCES):
        self.logger = logger
        self.tol = tol

    def lqr_infinite(self, sys, cost):
        solution = solve_dare(sys.A, sys.B, cost.state_weight(sys.C), cost.R, self.tol)
        self.logger.info(
            "Solved infinite-horizon LQR",
            extra={
                "json": {
                    "iterations": solution.iterations,
                    "residual": solution.residual,
                    "closed_loop_radius": solution.closed_loop_radius,
                    "gain_rank": svd_rank(solution.L, self.tol)
                }
            })
        return LqrController(solution.L, riccati=solution)

    def lqr_finite(self, sys, cost, horizon=None):
        horizon = cost.horizon if horizon is None else horizon
        if horizon is None or horizon < 1:
            raise ConfigError("finite-horizon LQR needs a horizon of at least 1")
        Q_T = cost.Q if cost.Q_T is None else cost.Q_T
        Qx = cost.state_weight(sys.C)
        P = sys.C.T @ Q_T @ sys.C
        gains = [None] * horizon
        for t in reversed(range(horizon)):
            L = riccati_gain(sys.A, sys.B, cost.R, P)
            gains[t] = L
            P = Qx + sys.A.T @ P @ sys.A - sys.A.T @ P @ sys.B @ L
            P = 0.5 * (P + P.T)
        self.logger.info(
            "Solved finite-horizon LQR",
            extra={
                "json": {
                    "horizon": horizon,
                    "initial_gain_norm": float(np.linalg.norm(gains[0]))
                }
            })
        return FiniteHorizonController(gains, P)

    def gain_for_K(self, sys, cost, K):
        """
        Optimal v = -L(K) x when the input is restricted to u = K v.
        """
        K = as_matrix(K, 'K')
        if K.shape[0] != sys.l:
            raise ShapeError(f"K must have {sys.l} rows, got {K.shape}")
        if svd_rank(K, self.tol) != K.shape[1]:
            raise RankError(f"K must have full column rank {K.shape[1]}")
        solution = solve_dare(sys.A, sys.B @ K, cost.state_weight(sys.C), K.T @ cost.R @ K, self.tol)
        self.logger.info(
            "Solved restricted-input LQR",
            extra={
                "json": {
                    "rank": K.shape[1],
                    "closed_loop_radius": solution.closed_loop_radius
                }
            })
        return LqrController(K @ solution.L, K=K, riccati=solution)

    @staticmethod
    def analytic_cost(sys, cost, L, initial_states):
        """
        Mean infinite-horizon cost x0' P x0 of u = -L x from the closed-loop Lyapunov equation.
        """
        A_cl = sys.A - sys.B @ L
        if spectral_radius(A_cl) >= 1.0:
            return float('inf')
        P = la.solve_discrete_lyapunov(A_cl.T, cost.state_weight(sys.C) + L.T @ cost.R @ L)
        X0 = np.atleast_2d(initial_states)
        return float(np.mean(np.einsum('ip,pq,iq->i', X0, P, X0)))

    @staticmethod
    def simulated_cost(sys, cost, controller, initial_states, steps=None):
        """Mean cost accumulated over `steps` closed-loop steps from each initial state."""
        steps = CONFIG['cost_steps'] if steps is None else steps
        totals = []
        for x0 in np.atleast_2d(initial_states):
            traj = sys.simulate_closed_loop(controller, steps, x0=x0)
            totals.append(float(np.einsum('ti,ij,tj->', traj.y, cost.Q, traj.y)
                                + np.einsum('ti,ij,tj->', traj.u, cost.R, traj.u)))
        return float(np.mean(totals))
