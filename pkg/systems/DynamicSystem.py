from abc import ABC, abstractmethod


class DynamicSystem(ABC):
    """
    Anything that maps a parameter vector and an input history to an output history.

    The finite-difference sensitivity path only needs this interface.
    """

    @property
    @abstractmethod
    def n_params(self):
        pass

    @property
    @abstractmethod
    def input_dim(self):
        pass

    @property
    @abstractmethod
    def output_dim(self):
        pass

    @abstractmethod
    def parameters(self):
        """
        Current value of the free parameter vector.
        """
        pass

    @abstractmethod
    def evaluate(self, theta, u):
        """
        Output sequence y (T x output_dim) for parameters theta under input u (T x input_dim).
        """
        pass
