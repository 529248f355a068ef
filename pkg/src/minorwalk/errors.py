"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid arguments or parameters supplied by the caller."""


class GraphFormatError(InputError):
    """A graph file could not be parsed."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class MinorBudgetExceeded(RuntimeError):
    """The exact minor search ran out of budget before reaching an answer.

    Raised instead of guessing; callers report the result as inconclusive.
    """


class StrandedComponentError(ValueError):
    """Part of the graph outside ``S`` never returns to ``S``."""

    def __init__(self, component):
        self.component = sorted(component)
        preview = self.component[:10]
        more = "" if len(self.component) <= 10 else f" ... ({len(self.component)} vertices)"
        super().__init__(f"component {preview}{more} has no edge into S; projected chain is undefined")
