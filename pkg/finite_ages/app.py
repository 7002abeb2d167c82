"""Command line application for finite-ages."""

import logging
import sys
from typing import Optional, Sequence, TextIO

from finite_ages.commands import CommandHandler, CommandResult, parse_command
from finite_ages.commands.handlers import EXIT_INPUT
from finite_ages.config import Config
from finite_ages.errors import InputError

log = logging.getLogger(__name__)


def configure_logging(level: str, verbose: bool = False) -> None:
    """Send log records to stderr; --verbose forces DEBUG."""
    if verbose:
        level = "DEBUG"
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        numeric = logging.WARNING
    logging.basicConfig(
        level=numeric,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def copy_to_clipboard(text: str) -> str:
    """Copy text and return a status line for stderr."""
    try:
        import pyperclip

        pyperclip.copy(text)
        return "Gekopieerd naar klembord"
    except ImportError:
        return "pyperclip niet beschikbaar"
    except pyperclip.PyperclipException as exc:
        return f"Kopiëren mislukt: {exc}"


class AgesApp:
    """Runs one command line against a handler."""

    def __init__(self, config: Optional[Config] = None) -> None:
        self.config = config or Config.load()
        self.handler = CommandHandler(self.config)

    def execute(self, argv: Sequence[str]) -> CommandResult:
        """Parse and execute one command line."""
        if not argv:
            argv = ["help"]
        try:
            cmd = parse_command(list(argv))
        except InputError as exc:
            return CommandResult(success=False, message=f"Fout: {exc}", status=EXIT_INPUT)
        configure_logging(self.config.log_level, cmd.has("verbose"))
        log.debug("command %s args %s flags %s", cmd.name, cmd.args, cmd.flags)
        return self.handler.execute(cmd)

    def run(self, argv: Sequence[str], out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
        """Execute and print; returns the exit status."""
        out = out or sys.stdout
        err = err or sys.stderr
        result = self.execute(argv)
        if result.message:
            stream = out if result.status in (0, 1) else err
            print(result.message, file=stream)
        if result.action == "copy" and result.message:
            print(copy_to_clipboard(result.message), file=err)
        return result.status


def run(argv: Sequence[str]) -> int:
    """Run the command line and return the process exit status."""
    return AgesApp().run(argv)
