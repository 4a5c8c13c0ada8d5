from abc import ABC, abstractmethod


class Controller(ABC):
    @property
    @abstractmethod
    def input_dim(self):
        pass

    @property
    @abstractmethod
    def excitation_dim(self):
        """
        Dimension of the coordinates an external excitation is injected in.
        """
        pass

    @abstractmethod
    def gain(self, t):
        """
        Effective state-feedback gain L(t), so that u(t) = -L(t) x(t) without excitation.
        """
        pass

    @abstractmethod
    def control(self, t, x, excitation=None):
        """
        Input u(t) for state x(t), plus the excitation mapped into input space.
        """
        pass

    @abstractmethod
    def to_dict(self):
        pass
