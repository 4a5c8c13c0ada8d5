from abc import ABC, abstractmethod

from numerics.NumericsError import ConfigError


class Adversary(ABC):
    """
    An attacker that sees logged inputs and outputs and tries to recover the dynamics.
    """

    method = None

    @abstractmethod
    def identify(self, traj, train=None, test=0, test_start=None, truth=None):
        """
        Fit on the first `train` rows of traj and score predictions on
        `test` rows starting at `test_start` (default: right after training).
        """
        pass

    @abstractmethod
    def predict(self, estimate, u):
        pass

    @staticmethod
    def split(traj, train, test, test_start):
        train = traj.horizon - test if train is None else train
        test_start = train if test_start is None else test_start
        if train < 1 or test < 0 or test_start + test > traj.horizon:
            raise ConfigError(f"split train={train}, test={test} at {test_start} does not fit {traj.horizon} steps")
        return train, slice(test_start, test_start + test) if test else slice(0, train)
