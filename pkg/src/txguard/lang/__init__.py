"""Frontend for the core contract language."""

from txguard.lang.ast import *  # noqa: F401,F403
from txguard.lang.errors import ContractSyntaxError, ContractTypeError, LangError, ScopeError
from txguard.lang.parser import parse, parse_file

__all__ = [
    "ContractSyntaxError",
    "ContractTypeError",
    "LangError",
    "ScopeError",
    "parse",
    "parse_file",
]
