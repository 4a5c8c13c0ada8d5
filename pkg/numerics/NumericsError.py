class UnidentError(Exception):
    code = 'UnidentError'

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def __str__(self):
        return f'{self.code}: {self.message}'

    def to_dict(self):
        return {'error': self.code, 'detail': self.message}


class InvalidMatrix(UnidentError):
    code = 'InvalidMatrix'


class ShapeError(UnidentError):
    code = 'ShapeError'


class NotStabilizable(UnidentError):
    code = 'NotStabilizable'


class SingularGain(UnidentError):
    code = 'SingularGain'


class RankError(UnidentError):
    code = 'RankError'


class UnsupportedInitialState(UnidentError):
    code = 'UnsupportedInitialState'


class EvalError(UnidentError):
    code = 'EvalError'


class ReducedLoopUnstable(UnidentError):
    code = 'ReducedLoopUnstable'


class Diverged(UnidentError):
    code = 'Diverged'


class ParseError(UnidentError):
    code = 'ParseError'


class ConfigError(UnidentError):
    code = 'ConfigError'


class FileError(UnidentError):
    code = 'FileError'
