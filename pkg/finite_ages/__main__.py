"""Entry point for finite-ages."""

import sys

from finite_ages.app import run


def main() -> None:
    """Run the finite-ages command line."""
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
