"""
Command modules for the wassquant CLI.

Each command is implemented as a separate module that defines a Command class.
"""

from typing import Dict, Type

from .base import BaseCommand
from .decompose import DecomposeCommand
from .examples import ExamplesCommand
from .ot import OtCommand
from .quantize import QuantizeCommand
from .rates import RatesCommand

# Map of command names to their corresponding command classes
COMMANDS: Dict[str, Type[BaseCommand]] = {
    "ot": OtCommand,
    "quantize": QuantizeCommand,
    "rates": RatesCommand,
    "decompose": DecomposeCommand,
    "examples": ExamplesCommand,
}


def get_command_class(command_name: str) -> Type[BaseCommand]:
    """Get the command class for the given command name.

    Raises:
        KeyError: If the command is not found
    """
    return COMMANDS[command_name]
