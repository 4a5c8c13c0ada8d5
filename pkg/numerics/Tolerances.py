from dataclasses import dataclass

from numerics.NumericsError import ConfigError


@dataclass(frozen=True)
class Tolerances:
    """
    Numerical cutoffs shared by the rank, null-space and Riccati routines.

    rank_eps is relative to sigma_max * max(rows, cols); residual_eps is relative
    to the Frobenius norm of the matrix a direction is tested against.
    """
    rank_eps: float = 1e-9
    residual_eps: float = 1e-7
    dare_eps: float = 1e-10
    dare_max_iter: int = 10_000

    def __post_init__(self):
        if min(self.rank_eps, self.residual_eps, self.dare_eps) <= 0:
            raise ConfigError("Tolerances must be strictly positive",
                              rank_eps=self.rank_eps, residual_eps=self.residual_eps, dare_eps=self.dare_eps)
        if self.dare_max_iter < 1:
            raise ConfigError("dare_max_iter must be at least 1", dare_max_iter=self.dare_max_iter)


DEFAULT_TOLERANCES = Tolerances()
