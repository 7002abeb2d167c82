"""Command parser for finite-ages command lines."""

import shlex
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Union

from finite_ages.errors import InputError


@dataclass
class ParsedCommand:
    """A parsed command with name and arguments."""

    name: str
    args: List[str] = field(default_factory=list)
    flags: Dict[str, str] = field(default_factory=dict)
    raw: str = ""

    @property
    def first_arg(self) -> str:
        """Get the first argument or empty string."""
        return self.args[0] if self.args else ""

    @property
    def rest_args(self) -> List[str]:
        """Arguments after the first one."""
        return self.args[1:]

    def flag(self, name: str, default: str = "") -> str:
        """Value of a flag, or the default."""
        return self.flags.get(name, default)

    def has(self, name: str) -> bool:
        """Whether a flag was given."""
        return name in self.flags


# Command aliases
COMMAND_ALIASES: Dict[str, str] = {
    "h": "help",
    "e": "embed",
    "emb": "embed",
    "c": "canon",
    "a": "age",
    "am": "amalgams",
    "ci": "check-ideal",
    "g": "grow",
    "m": "metric",
    "e3": "encode3",
}

# Flags that take a value; "--flag value" and "--flag=value" are both accepted
VALUE_FLAGS = frozenset(
    {
        "max-size",
        "bound",
        "seed",
        "jobs",
        "tolerance",
        "out",
        "ideal",
        "size",
        "check",
        "log",
        "dim",
        "t",
        "forbid",
        "window",
        "flavor",
        "parts",
        "part-size",
        "cap",
        "bound-limit",
        "truncation",
        "nat",
        "thresholds",
        "mode",
        "signature",
    }
)

BOOLEAN_FLAGS = frozenset({"auto", "decode", "join", "rigidity", "copy", "verbose", "no-check"})


def _tokens(command: Union[str, Sequence[str]]) -> List[str]:
    if not isinstance(command, str):
        return list(command)
    try:
        # Use shlex for proper quote handling
        return shlex.split(command)
    except ValueError:
        # Fallback for unbalanced quotes
        return command.split()


def parse_command(command: Union[str, Sequence[str]]) -> ParsedCommand:
    """Parse a command line into a ParsedCommand.

    Supports:
    - Simple commands: help
    - Commands with args: embed a.rst b.rst
    - Flags: grow --ideal=linear-orders --size 8
    - Quoted args: canon "my structure.rst"

    Args:
        command: Raw command string or an argv list

    Returns:
        ParsedCommand instance

    Raises:
        InputError: unknown flag or value flag without a value
    """
    tokens = _tokens(command)
    raw = command if isinstance(command, str) else " ".join(tokens)
    if not tokens:
        return ParsedCommand(name="", raw=raw)

    # First token is the command name
    name = tokens[0].lower()

    # Resolve aliases
    name = COMMAND_ALIASES.get(name, name)

    args: List[str] = []
    flags: Dict[str, str] = {}

    i = 1
    while i < len(tokens):
        token = tokens[i]
        if token.startswith("--") and len(token) > 2:
            if "=" in token:
                key, value = token[2:].split("=", 1)
            else:
                key, value = token[2:], None
            if key in VALUE_FLAGS:
                if value is None:
                    if i + 1 >= len(tokens):
                        raise InputError(f"vlag --{key} verwacht een waarde")
                    i += 1
                    value = tokens[i]
                flags[key] = value
            elif key in BOOLEAN_FLAGS:
                flags[key] = value if value is not None else "true"
            else:
                raise InputError(f"onbekende vlag --{key}")
        elif token == "-v":
            flags["verbose"] = "true"
        else:
            args.append(token)
        i += 1

    return ParsedCommand(name=name, args=args, flags=flags, raw=raw)


def get_command_names() -> List[str]:
    """Get list of available command names.

    Returns:
        List of command names
    """
    return [
        "embed",
        "canon",
        "age",
        "amalgams",
        "check-ideal",
        "grow",
        "metric",
        "ash",
        "encode3",
        "help",
    ]
