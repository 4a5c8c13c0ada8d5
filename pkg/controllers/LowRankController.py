import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as la

from controllers.Controller import Controller
from controllers.LqrController import LqrDesigner
from numerics.LinearAlgebra import as_matrix, normalize_column_signs, spectral_radius, svd_rank
from numerics.NumericsError import (ConfigError, NotStabilizable, ParseError, RankError, ReducedLoopUnstable,
                                    ShapeError)
from numerics.RiccatiSolver import solve_dare
from numerics.Tolerances import DEFAULT_TOLERANCES

CONFIG = {
    # None means "derive from the state dimension p": p runs over the window [1, 5p].
    'snapshot_runs': None,
    'snapshot_window': None,
    'refine': True,
}

MODES = ('state_feedback_reduced', 'plain_lqr')


@dataclass(eq=False)
class LowRankController(Controller):
    """
    u(t) = K v(t),  v(t) = -Lr V1' x(t).

    K is l x r with orthonormal columns, so every applied input lies in an
    r-dimensional subspace of the input space.
    """
    K: np.ndarray
    Lr: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    r: int
    mode: str = 'state_feedback_reduced'
    seed: Optional[int] = None
    closed_loop_radius: Optional[float] = None
    riccati_residual: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.K, self.Lr = as_matrix(self.K, 'K'), as_matrix(self.Lr, 'Lr')
        self.V1, self.V2 = as_matrix(self.V1, 'V1'), as_matrix(self.V2, 'V2')
        if self.mode not in MODES:
            raise ConfigError(f"Unknown controller mode {self.mode!r}, expected one of {MODES}")
        if self.K.shape[1] != self.r or self.Lr.shape != (self.r, self.r) or self.V1.shape[1] != self.r:
            raise ShapeError(
                f"Inconsistent factor shapes K{self.K.shape} Lr{self.Lr.shape} V1{self.V1.shape} for rank {self.r}")
        if self.r >= self.K.shape[0]:
            raise RankError(f"controller rank {self.r} must be below the input dimension {self.K.shape[0]}")

    @property
    def input_dim(self):
        return self.K.shape[0]

    @property
    def excitation_dim(self):
        return self.r

    def gain(self, t=0):
        return self.K @ self.Lr @ self.V1.T

    def reduced_state(self, x):
        return self.V1.T @ x

    def control(self, t, x, excitation=None):
        v = -self.Lr @ self.reduced_state(x)
        if excitation is not None:
            v = v + excitation
        return self.K @ v

    def to_dict(self):
        return {
            'mode': self.mode,
            'K': self.K.tolist(),
            'Lr': self.Lr.tolist(),
            'V1': self.V1.tolist(),
            'V2': self.V2.tolist(),
            'r': self.r,
            'seed': self.seed,
            'closed_loop_radius': self.closed_loop_radius,
            **self.extra
        }

    def to_json(self, path):
        with open(path, 'w') as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                K=np.array(data['K'], dtype=float), Lr=np.array(data['Lr'], dtype=float),
                V1=np.array(data['V1'], dtype=float), V2=np.array(data.get('V2', data['V1']), dtype=float),
                r=int(data['r']), mode=data.get('mode', 'state_feedback_reduced'), seed=data.get('seed'),
                closed_loop_radius=data.get('closed_loop_radius'))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Controller description is incomplete: {e}") from e

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ParseError(f"Unable to read controller JSON {path}: {e}") from e
        return cls.from_dict(data)


def input_rank(u, tol=DEFAULT_TOLERANCES):
    """Rank of the l x T input matrix."""
    u = as_matrix(u, 'u')
    if u.shape[0] < u.shape[1]:
        raise ShapeError(f"need at least as many steps as channels, got {u.shape}")
    return svd_rank(u.T, tol)


def excitation_rank(u, x, tol=DEFAULT_TOLERANCES):
    """Rank of the stacked (l + p) x T matrix [u; x]; full rank means persistently exciting data."""
    u, x = as_matrix(u, 'u'), as_matrix(x, 'x')
    if u.shape[0] != x.shape[0]:
        raise ShapeError(f"u has {u.shape[0]} steps but x has {x.shape[0]}")
    return svd_rank(np.hstack([u, x]).T, tol)


def pod_basis(X, r, tol=DEFAULT_TOLERANCES):
    """
    Galerkin POD: V1 = V2 = leading r left singular vectors of the snapshot matrix.
    """
    X = as_matrix(X, 'X')
    if r < 1 or X.shape[1] < r:
        raise RankError(f"POD needs 1 <= r <= snapshots, got r={r} with {X.shape[1]} snapshots")
    if r > svd_rank(X, tol):
        raise RankError(f"snapshot matrix has rank {svd_rank(X, tol)}, below the requested r={r}")
    U, _, _ = la.svd(X, full_matrices=False)
    V = normalize_column_signs(U[:, :r])
    return V, V.copy()


def _factor(L, r):
    """L (l x r') = K @ G with K l x r orthonormal and G r x r'."""
    U, sigma, Vh = la.svd(L, full_matrices=False)
    K = U[:, :r]
    G = sigma[:r, None] * Vh[:r]
    return normalize_column_signs(K, G)


def _split_feedback(L):
    """L (r x p) = Lr @ V' with V p x r orthonormal and Lr r x r."""
    Q, R = la.qr(L.T, mode='economic')
    V, R = normalize_column_signs(Q, R)
    return V, R.T


class LowRankDesigner:
    def __init__(self, logger, tol=DEFAULT_TOLERANCES):
        self.logger = logger
        self.tol = tol
        self.lqr = LqrDesigner(logger, tol)

    def snapshots(self, sys, runs=None, window=None, seed=0):
        runs = sys.p if runs is None else runs
        t1, tT = (1, 5 * sys.p) if window is None else window
        if runs < 1 or not 0 <= t1 <= tT:
            raise ConfigError("snapshots need runs >= 1 and a window 0 <= t1 <= tT", runs=runs, window=window)
        columns = []
        for run in range(runs):
            rng = np.random.default_rng([seed, run])
            direction = rng.standard_normal(sys.p)
            x0 = direction / np.linalg.norm(direction) * rng.uniform() ** (1.0 / sys.p)
            traj = sys.with_initial_state(x0).simulate(np.zeros((tT + 1, sys.l)))
            columns.append(traj.x[t1:tT + 1].T)
        return np.hstack(columns)

    def design_low_rank(self, sys, cost, r=None, snapshot_runs=None, snapshot_window=None, seed=0,
                        force_pod=False, refine=None):
        """
        Low-rank state feedback u = K v from a POD-reduced Riccati design.

        With `refine` (the default) the POD design is done once at the top
        admissible rank min(l - 1, p), K keeps the leading r columns of its
        input factor and the feedback is re-solved for inputs restricted to
        range(K). Designs for different r on the same plant and seed then
        use nested input subspaces, so their cost is non-increasing in r.
        """
        refine = CONFIG['refine'] if refine is None else refine
        p, l = sys.p, sys.l
        if r is None:
            r = l - 1 if p >= l else p
        if not 1 <= r < l:
            raise RankError(f"controller rank must satisfy 1 <= r < l = {l}, got {r}")
        if r > p:
            raise RankError(f"controller rank {r} exceeds the state dimension {p}")

        if p < l and r == p and not force_pod:
            controller = self._plain_lqr(sys, cost, seed)
        else:
            controller = self._reduced(sys, cost, r, snapshot_runs, snapshot_window, seed, refine)

        radius = spectral_radius(sys.A - sys.B @ controller.gain())
        controller.closed_loop_radius = radius
        self.logger.info(
            "Designed low-rank controller",
            extra={
                "json": {
                    "mode": controller.mode,
                    "r": controller.r,
                    "l": l,
                    "p": p,
                    "closed_loop_radius": radius,
                    "seed": seed
                }
            })
        if radius >= 1.0:
            raise ReducedLoopUnstable(
                f"Reduced-order gain leaves the full plant unstable (spectral radius {radius:.4f}); "
                f"increase the rank or the number of snapshots",
                closed_loop_radius=radius)
        return controller

    def _plain_lqr(self, sys, cost, seed):
        # With fewer states than inputs the optimal gain already has rank <= p < l.
        full = self.lqr.lqr_infinite(sys, cost)
        K, Lr = _factor(full.L, sys.p)
        eye = np.eye(sys.p)
        return LowRankController(K=K, Lr=Lr, V1=eye, V2=eye.copy(), r=sys.p, mode='plain_lqr', seed=seed,
                                 riccati_residual=full.riccati.residual)

    def _reduced(self, sys, cost, r, runs, window, seed, refine):
        runs = CONFIG['snapshot_runs'] if runs is None else runs
        window = CONFIG['snapshot_window'] if window is None else window
        X = self.snapshots(sys, runs, window, seed)
        pod_rank = min(sys.l - 1, sys.p) if refine else r
        V1, V2 = pod_basis(X, pod_rank, self.tol)

        A_r = V1.T @ sys.A @ V2
        B_r = V1.T @ sys.B
        C_r = sys.C @ V2
        try:
            solution = solve_dare(A_r, B_r, C_r.T @ cost.Q @ C_r, cost.R, self.tol)
        except NotStabilizable as e:
            raise ReducedLoopUnstable(
                f"reduced model of rank {pod_rank} has no stabilizing Riccati solution; increase the snapshots",
                pod_rank=pod_rank) from e
        K, Lr = _factor(solution.L, pod_rank)
        extra = {'snapshots': int(X.shape[1]), 'pod_rank': pod_rank, 'refined': bool(refine)}
        if not refine:
            return LowRankController(K=K, Lr=Lr, V1=V1, V2=V2, r=r, seed=seed,
                                     riccati_residual=solution.residual, extra=extra)

        K = K[:, :r]
        try:
            restricted = self.lqr.gain_for_K(sys, cost, K)
        except NotStabilizable as e:
            raise ReducedLoopUnstable(
                f"no stabilizing feedback with inputs restricted to the rank-{r} subspace; increase the rank",
                r=r) from e
        V, Lr = _split_feedback(restricted.riccati.L)
        return LowRankController(K=K, Lr=Lr, V1=V, V2=V.copy(), r=r, seed=seed,
                                 riccati_residual=restricted.riccati.residual, extra=extra)
