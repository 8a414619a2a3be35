"""Exception hierarchy.

Each class carries the exit code the command-line driver reports for it.
"""


class QSimError(Exception):
    exit_code = 2


class ParseError(QSimError, ValueError):
    """Malformed input text. ``line`` is 1-based when known."""

    exit_code = 1

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantError(QSimError, ValueError):
    exit_code = 2


class HermiticityError(InvariantError):
    pass


class UnitarityError(InvariantError):
    pass


class SparsityError(InvariantError):
    pass


class UncomputeError(InvariantError):
    """An ancilla was not returned to |0> at the end of a circuit."""


class SingularityError(InvariantError):
    pass


class ResourceCapError(QSimError, ValueError):
    exit_code = 3
