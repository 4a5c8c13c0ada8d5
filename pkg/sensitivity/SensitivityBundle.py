import json
import logging
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import pandas as pd

from numerics.NumericsError import ShapeError

logger = logging.getLogger(__name__)

INDEX_CONVENTIONS = {
    'W': {'rows': ['output_time', 'output_channel'], 'cols': ['theta']},
    'F': {'rows': ['theta'], 'cols': ['theta']},
    'Ja': {'rows': ['output_time', 'output_channel'], 'cols': ['input_time', 'input_channel']},
    'H': {'rows': ['output_time', 'input_time', 'input_channel', 'output_channel'], 'cols': ['theta'],
          'note': 'rows with input_time >= output_time are zero'},
}


@dataclass(frozen=True, eq=False)
class SensitivityBundle:
    """
    Finite-horizon derivatives of the output sequence at theta*.

    W  (T*m) x n           dy(k)/dtheta
    F  n x n               W'W
    H  (T*T*l*m) x n       d2y(k)/du(j)dtheta
    Ja (T*m) x (T*l)       dy(k)/du(j)
    """
    horizon: int
    output_dim: int
    input_dim: int
    W: np.ndarray
    H: np.ndarray
    Ja: np.ndarray

    def __post_init__(self):
        T, m, l = self.horizon, self.output_dim, self.input_dim
        n = self.W.shape[1]
        expected = {'W': (T * m, n), 'H': (T * T * l * m, n), 'Ja': (T * m, T * l)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ShapeError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def n(self):
        return self.W.shape[1]

    @cached_property
    def F(self):
        return self.W.T @ self.W

    def H_blocks(self):
        """H as a (k, j, input channel, output channel, theta) array."""
        T = self.horizon
        return self.H.reshape(T, T, self.input_dim, self.output_dim, self.n)

    def W_blocks(self):
        return self.W.reshape(self.horizon, self.output_dim, self.n)

    def export(self, directory):
        os.makedirs(directory, exist_ok=True)
        for name in ('W', 'F', 'H', 'Ja'):
            pd.DataFrame(getattr(self, name)).to_csv(
                os.path.join(directory, f'{name}.csv'), index=False, header=False, float_format='%.17g')
        sidecar = {
            'horizon': self.horizon,
            'output_dim': self.output_dim,
            'input_dim': self.input_dim,
            'n': self.n,
            'index_conventions': INDEX_CONVENTIONS
        }
        with open(os.path.join(directory, 'bundle.json'), 'w') as fh:
            json.dump(sidecar, fh, indent=2)
        logger.info(
            "Exported sensitivity bundle",
            extra={
                "json": {
                    "directory": str(directory),
                    "horizon": self.horizon,
                    "n": self.n
                }
            })
