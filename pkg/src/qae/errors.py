class QaeError(Exception):
    """Base class for errors raised by qae."""


class ConvergenceError(QaeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class TrivialSolutionError(QaeError, ValueError):
    pass


class AllTrivialError(TrivialSolutionError):
    pass


class ProblemTooLargeError(QaeError, ValueError):
    pass
