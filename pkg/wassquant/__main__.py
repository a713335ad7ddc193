"""
Main entry point for the wassquant package.

This module allows the package to be executed with `python -m wassquant`.
"""

from wassquant.cli import main

if __name__ == "__main__":
    main()
