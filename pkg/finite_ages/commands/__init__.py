"""Command parsing and handling for finite-ages."""

from finite_ages.commands.parser import parse_command, ParsedCommand
from finite_ages.commands.handlers import CommandHandler, CommandResult

__all__ = ["parse_command", "ParsedCommand", "CommandHandler", "CommandResult"]
