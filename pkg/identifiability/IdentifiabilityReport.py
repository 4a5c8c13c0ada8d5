from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class ParamVerdict:
    i: int
    identifiable: bool


@dataclass
class IdentifiabilityReport:
    n: int
    horizon: int
    rank_F: int
    per_param: List[ParamVerdict]
    param_identifiable: bool
    dynamic_identifiable: bool
    witness_v: Optional[np.ndarray] = None
    null_basis: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    residual_Wv: Optional[float] = None
    residual_Hv_rel: Optional[float] = None
    rank_constancy_ok: Optional[bool] = None

    @property
    def unidentifiable_params(self):
        return [verdict.i for verdict in self.per_param if not verdict.identifiable]

    def to_dict(self):
        return {
            'rank_F': self.rank_F,
            'n': self.n,
            'T': self.horizon,
            'per_param': [{'i': v.i, 'identifiable': v.identifiable} for v in self.per_param],
            'param_identifiable': self.param_identifiable,
            'dynamic_identifiable': self.dynamic_identifiable,
            'witness': None if self.witness_v is None else self.witness_v.tolist(),
            'null_dim': int(self.null_basis.shape[1]),
            'residuals': {
                'Wv': self.residual_Wv,
                'Hv_rel': self.residual_Hv_rel
            },
            'theorem1_hypothesis_ok': self.rank_constancy_ok
        }


@dataclass
class Reparameterization:
    """
    phi = P' theta; the first r coordinates of phi are identifiable, the rest are not.
    """
    P: np.ndarray
    r: int
    note: str = 'svd'

    @property
    def identifiable_block(self):
        return self.P[:, :self.r]

    @property
    def unidentifiable_block(self):
        return self.P[:, self.r:]

    def transform(self, theta):
        return self.P.T @ np.asarray(theta, dtype=float)

    def to_dict(self):
        return {'P': self.P.tolist(), 'r': self.r, 'note': self.note}
