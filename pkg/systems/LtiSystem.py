import json
from dataclasses import dataclass, field

import numpy as np

from numerics.LinearAlgebra import as_matrix, controllability_matrix, observability_matrix, svd_rank
from numerics.NumericsError import ConfigError, ParseError, ShapeError
from systems.DynamicSystem import DynamicSystem
from systems.Trajectory import NoiseSpec, Trajectory

MATRIX_IDS = ('A', 'B', 'C')

@dataclass(frozen=True, eq=False)
class LtiSystem(DynamicSystem):
    """
    x(t+1) = A x(t) + B u(t),  y(t) = C x(t),  with the free parameters
    theta picked out of A, B, C by mask entries (matrix_id, row, col).
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    mask: tuple = ()
    x0: np.ndarray = field(default=None)

    def __post_init__(self):
        A, B, C = as_matrix(self.A, 'A'), as_matrix(self.B, 'B'), as_matrix(self.C, 'C')
        p = A.shape[0]
        if A.shape != (p, p):
            raise ShapeError(f"A must be square, got {A.shape}")
        if B.shape[0] != p:
            raise ShapeError(f"B must have {p} rows, got {B.shape}")
        if C.shape[1] != p:
            raise ShapeError(f"C must have {p} columns, got {C.shape}")
        x0 = np.zeros(p) if self.x0 is None else np.asarray(self.x0, dtype=float).reshape(-1)
        if x0.shape != (p,) or not np.all(np.isfinite(x0)):
            raise ShapeError(f"x0 must be a finite {p}-vector")

        mask = tuple((str(mid), int(row), int(col)) for mid, row, col in self.mask)
        if not mask:
            raise ConfigError("The parameter mask must select at least one entry")
        if len(set(mask)) != len(mask):
            raise ConfigError("The parameter mask contains duplicate entries")
        shapes = {'A': A.shape, 'B': B.shape, 'C': C.shape}
        for mid, row, col in mask:
            if mid not in shapes:
                raise ConfigError(f"Unknown matrix id {mid!r} in mask, expected one of {MATRIX_IDS}")
            rows, cols = shapes[mid]
            if not (0 <= row < rows and 0 <= col < cols):
                raise ConfigError(f"Mask entry ({mid}, {row}, {col}) is out of range for shape {shapes[mid]}")

        for name, value in (('A', A), ('B', B), ('C', C), ('x0', x0), ('mask', mask)):
            object.__setattr__(self, name, value)

    @property
    def p(self):
        return self.A.shape[0]

    @property
    def l(self):
        return self.B.shape[1]

    @property
    def m(self):
        return self.C.shape[0]

    @property
    def n_params(self):
        return len(self.mask)

    @property
    def input_dim(self):
        return self.l

    @property
    def output_dim(self):
        return self.m

    @property
    def has_zero_initial_state(self):
        return not np.any(self.x0)

    def matrix(self, matrix_id):
        return {'A': self.A, 'B': self.B, 'C': self.C}[matrix_id]

    @staticmethod
    def full_mask(p, l, m):
        return tuple(
            [('A', i, j) for i in range(p) for j in range(p)]
            + [('B', i, j) for i in range(p) for j in range(l)]
            + [('C', i, j) for i in range(m) for j in range(p)])

    def parameters(self):
        return np.array([self.matrix(mid)[row, col] for mid, row, col in self.mask])

    extract_params = parameters

    def apply_params(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape[0] != self.n_params:
            raise ShapeError(f"theta has {theta.shape[0]} entries, mask selects {self.n_params}")
        updated = {'A': self.A.copy(), 'B': self.B.copy(), 'C': self.C.copy()}
        for value, (mid, row, col) in zip(theta, self.mask):
            updated[mid][row, col] = value
        return LtiSystem(updated['A'], updated['B'], updated['C'], self.mask, self.x0)

    def with_mask(self, mask):
        return LtiSystem(self.A, self.B, self.C, mask, self.x0)

    def with_initial_state(self, x0):
        return LtiSystem(self.A, self.B, self.C, self.mask, x0)

    def evaluate(self, theta, u):
        return self.apply_params(theta).simulate(u).y

    def simulate(self, u, noise=None):
        u = as_matrix(u, 'u')
        if u.shape[1] != self.l:
            raise ShapeError(f"u has {u.shape[1]} channels, system has {self.l} inputs")
        steps = u.shape[0]
        noise = noise or NoiseSpec()
        w, v = noise.draw(steps, self.p, self.m)

        x = np.zeros((steps, self.p))
        state = self.x0.copy()
        for t in range(steps):
            x[t] = state
            state = self.A @ state + self.B @ u[t] + w[t]
        y = x @ self.C.T + v
        return Trajectory(u=u, y=y, x=x, noise_seed=None if noise.is_silent else noise.seed)

    def simulate_closed_loop(self, controller, steps, x0=None, noise=None, dither=0.0, seed=0):
        """
        Run the plant under a state-feedback controller.

        A non-zero dither adds uniform excitation in the controller's
        excitation coordinates, so the applied inputs stay in the set the
        controller can produce.
        """
        noise = noise or NoiseSpec()
        w, v = noise.draw(steps, self.p, self.m)
        rng = np.random.default_rng(seed)
        excitation = rng.uniform(-dither, dither, size=(steps, controller.excitation_dim)) \
            if dither else np.zeros((steps, controller.excitation_dim))

        x = np.zeros((steps, self.p))
        u = np.zeros((steps, self.l))
        state = self.x0.copy() if x0 is None else np.asarray(x0, dtype=float).reshape(-1)
        for t in range(steps):
            x[t] = state
            u[t] = controller.control(t, state, excitation[t])
            state = self.A @ state + self.B @ u[t] + w[t]
        y = x @ self.C.T + v
        return Trajectory(u=u, y=y, x=x, noise_seed=None if noise.is_silent else noise.seed)

    def markov_params(self, horizon):
        """Impulse-response coefficients C A^k B for k = 0 .. horizon-1, stacked (horizon, m, l)."""
        if horizon < 1:
            raise ConfigError(f"horizon must be at least 1, got {horizon}")
        out = np.zeros((horizon, self.m, self.l))
        AkB = self.B.copy()
        for k in range(horizon):
            out[k] = self.C @ AkB
            AkB = self.A @ AkB
        return out

    def is_controllable(self, tol=None):
        args = () if tol is None else (tol,)
        return svd_rank(controllability_matrix(self.A, self.B), *args) == self.p

    def is_observable(self, tol=None):
        args = () if tol is None else (tol,)
        return svd_rank(observability_matrix(self.A, self.C), *args) == self.p

    def to_dict(self):
        return {
            'A': self.A.tolist(),
            'B': self.B.tolist(),
            'C': self.C.tolist(),
            'mask': [list(entry) for entry in self.mask],
            'x0': self.x0.tolist()
        }

    def to_json(self, path):
        with open(path, 'w') as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_dict(cls, data):
        try:
            A, B, C = (np.array(data[k], dtype=float) for k in MATRIX_IDS)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"System description needs numeric A, B and C matrices: {e}") from e
        if A.ndim != 2 or B.ndim != 2 or C.ndim != 2:
            raise ParseError("A, B and C must be nested row-major arrays")
        mask = data.get('mask') or cls.full_mask(A.shape[0], B.shape[1], C.shape[0])
        return cls(A, B, C, tuple(tuple(entry) for entry in mask), data.get('x0'))

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ParseError(f"Unable to read system JSON {path}: {e}") from e
        return cls.from_dict(data)

    def __eq__(self, other):
        if not isinstance(other, LtiSystem):
            return NotImplemented
        return (self.mask == other.mask
                and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in ('A', 'B', 'C', 'x0')))
