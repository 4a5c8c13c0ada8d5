from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from numerics.LinearAlgebra import as_matrix
from numerics.NumericsError import ConfigError, ParseError, ShapeError

CSV_FLOAT_FORMAT = '%.17g'

@dataclass(frozen=True)
class NoiseSpec:
    """Uniform additive process (w) and measurement (v) noise on [-amp, amp]."""
    w_amp: float = 0.0
    v_amp: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.w_amp < 0 or self.v_amp < 0:
            raise ConfigError("Noise amplitudes must be non-negative", w_amp=self.w_amp, v_amp=self.v_amp)

    @property
    def is_silent(self):
        return self.w_amp == 0 and self.v_amp == 0

    def draw(self, steps, p, m):
        rng = np.random.default_rng(self.seed)
        w = rng.uniform(-self.w_amp, self.w_amp, size=(steps, p)) if self.w_amp else np.zeros((steps, p))
        v = rng.uniform(-self.v_amp, self.v_amp, size=(steps, m)) if self.v_amp else np.zeros((steps, m))
        return w, v

@dataclass(frozen=True)
class Trajectory:
    u: np.ndarray
    y: np.ndarray
    x: Optional[np.ndarray] = None
    noise_seed: Optional[int] = None

    def __post_init__(self):
        u, y = as_matrix(self.u, 'u'), as_matrix(self.y, 'y')
        if u.shape[0] != y.shape[0]:
            raise ShapeError(f"u has {u.shape[0]} steps but y has {y.shape[0]}")
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'y', y)
        if self.x is not None:
            x = as_matrix(self.x, 'x')
            if x.shape[0] != u.shape[0]:
                raise ShapeError(f"x has {x.shape[0]} steps but u has {u.shape[0]}")
            object.__setattr__(self, 'x', x)

    @property
    def horizon(self):
        return self.u.shape[0]

    @property
    def input_dim(self):
        return self.u.shape[1]

    @property
    def output_dim(self):
        return self.y.shape[1]

    def head(self, steps):
        return Trajectory(
            u=self.u[:steps], y=self.y[:steps],
            x=None if self.x is None else self.x[:steps],
            noise_seed=self.noise_seed)

    def to_frame(self):
        columns = {'t': np.arange(self.horizon)}
        for name, data in (('u', self.u), ('y', self.y), ('x', self.x)):
            if data is None:
                continue
            for j in range(data.shape[1]):
                columns[f'{name}_{j + 1}'] = data[:, j]
        return pd.DataFrame(columns)

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)

    @classmethod
    def from_frame(cls, frame):
        def block(prefix):
            names = [c for c in frame.columns if c.startswith(f'{prefix}_')]
            names.sort(key=lambda c: int(c.split('_', 1)[1]))
            return frame[names].to_numpy(dtype=float) if names else None

        u, y = block('u'), block('y')
        if u is None or y is None:
            raise ParseError("Trajectory CSV needs u_* and y_* columns",
                             columns=list(frame.columns))
        return cls(u=u, y=y, x=block('x'))

    @classmethod
    def from_csv(cls, path):
        try:
            frame = pd.read_csv(path, float_precision='round_trip')
        except (OSError, ValueError, pd.errors.ParserError) as e:
            raise ParseError(f"Unable to read trajectory CSV {path}: {e}") from e
        return cls.from_frame(frame)

    @staticmethod
    def random_input(steps, l, rank=None, rng=None, amplitude=1.0):
        """
        I.i.d. uniform input whose trailing l - rank channels are random
        combinations of the leading rank channels.
        """
        rng = rng if rng is not None else np.random.default_rng()
        rank = l if rank is None else rank
        if not 0 <= rank <= l:
            raise ConfigError(f"input rank must lie in [0, {l}], got {rank}")
        leading = rng.uniform(-amplitude, amplitude, size=(steps, rank))
        if rank == l:
            return leading
        mixing = rng.standard_normal((rank, l - rank))
        return np.hstack([leading, leading @ mixing])
