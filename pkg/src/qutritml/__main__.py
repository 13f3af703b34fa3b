"""Module entry point so `python -m qutritml` matches the installed CLI."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
