import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(eq=False)
class IdentResult:
    method: str
    estimate: np.ndarray
    pred_error: float
    param_error: Optional[float] = None
    markov_error: Optional[float] = None
    restricted_markov_error: Optional[float] = None
    regressor_rank: Optional[int] = None
    iterations: Optional[int] = None
    loss: Optional[float] = None

    def __post_init__(self):
        for name in ('pred_error', 'param_error', 'markov_error', 'restricted_markov_error'):
            value = getattr(self, name)
            if value is not None and (value < 0 or not math.isfinite(value)):
                raise ValueError(f"{name} must be finite and non-negative, got {value}")

    def metrics(self):
        return {name: getattr(self, name)
                for name in ('param_error', 'markov_error', 'pred_error')
                if getattr(self, name) is not None}

    def to_dict(self):
        return {
            'method': self.method,
            'estimate': np.asarray(self.estimate).tolist(),
            'param_error': self.param_error,
            'markov_error': self.markov_error,
            'restricted_markov_error': self.restricted_markov_error,
            'pred_error': self.pred_error,
            'regressor_rank': self.regressor_rank,
            'iterations': self.iterations,
            'loss': self.loss
        }


def relative_error(estimate, truth):
    """||estimate - truth|| / ||truth||, or the absolute error when truth is zero."""
    scale = np.linalg.norm(truth)
    error = np.linalg.norm(np.asarray(estimate) - np.asarray(truth))
    return float(error / scale) if scale > 0 else float(error)


def markov_error(estimate, truth):
    """max_k ||M_hat_k - M_k||_F / (1 + ||M_k||_F)."""
    diffs = np.linalg.norm(estimate - truth, axis=(1, 2))
    scales = 1.0 + np.linalg.norm(truth, axis=(1, 2))
    return float(np.max(diffs / scales))
