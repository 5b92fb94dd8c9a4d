from __future__ import annotations


class LangError(Exception):
    """Frontend diagnostic with a source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class ContractSyntaxError(LangError, SyntaxError):
    pass


class ScopeError(LangError):
    pass


class ContractTypeError(LangError, TypeError):
    pass
