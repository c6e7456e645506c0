"""Exception types shared across the package."""


class MuStipulaError(Exception):
    """Base class for all errors raised by this package."""


class StipulaSyntaxError(MuStipulaError):
    """Contract source text does not conform to the grammar.

    Carries the 1-based line and column of the offending token.
    """

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class MultipleEventsPerLineError(StipulaSyntaxError):
    """Two event declarations share one physical source line."""


class DuplicateClauseError(MuStipulaError):
    """Two functions share the same (source, name, target) tuple."""


class InvalidContractError(MuStipulaError):
    """A programmatically built contract violates a structural invariant."""


class NotDIError(MuStipulaError):
    """The complete decision procedure was asked about a contract outside
    the determinate-instantaneous fragment."""


class DifferentContractsError(MuStipulaError):
    """Two configurations of different contracts were compared."""


class MinskySyntaxError(MuStipulaError):
    """Counter-machine source text does not conform to the format."""


class FinalHasInstructionError(MinskySyntaxError):
    """The final state of a counter machine carries an instruction."""


class DanglingStateError(MinskySyntaxError):
    """An instruction jumps to a non-final state that has no instruction."""
