from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

from numerics.Tolerances import Tolerances


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    output: Optional[str] = None
    system: Optional[str] = None
    trajectory: Optional[str] = None
    controller: Optional[str] = None
    horizon: int = 50
    random_input: bool = False
    rank_input: Optional[int] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    q: object = 1.0
    r: object = 1.0
    q_terminal: object = None
    finite_horizon: Optional[int] = None
    rank: Optional[int] = None
    snapshot_runs: Optional[int] = None
    snapshot_window: Optional[Tuple[int, int]] = None
    force_pod: bool = False
    refine: bool = True
    steps: int = 1000
    dither: float = 0.0
    w_amp: float = 0.0
    v_amp: float = 0.0
    method: str = 'markov'
    train: Optional[int] = None
    test: Optional[int] = None
    lags: Optional[int] = None
    ridge: Optional[float] = None
    lr: Optional[float] = None
    iters: Optional[int] = None
    damping: Optional[float] = None
    family: str = 'first_row'
    runs: int = 100
    sizes: Optional[List[int]] = None
    ranks: Optional[List[int]] = None
    dims: Tuple[int, int, int] = (4, 4, 4)
    jobs: int = 1
    rank_check: bool = True
    export_bundle: Optional[str] = None

    def summary(self):
        data = asdict(self)
        return {key: value for key, value in data.items() if value not in (None, False)}
