"""Logging functions.

MkDocs' `get_plugin_logger` files loggers under `mkdocs.plugins`, where its build handlers pick them up.
tetrafold is not a plugin, so its loggers live under `tetrafold` and the same message prefixing
is done by [`PrefixedLogger`][tetrafold.loggers.PrefixedLogger].
"""

from __future__ import annotations

import logging
from typing import Any, MutableMapping


class PrefixedLogger(logging.LoggerAdapter):
    """A logger adapter prefixing every message with the emitting module's short name."""

    def __init__(self, prefix: str, logger: logging.Logger) -> None:
        """Initialize the adapter.

        Parameters:
            prefix: The prefix written before each message.
            logger: The wrapped logger.
        """
        super().__init__(logger, {})
        self.prefix = prefix

    def process(self, msg: str, kwargs: MutableMapping[str, Any]) -> tuple[str, Any]:
        """Prefix the message.

        Parameters:
            msg: The message.
            kwargs: Remaining arguments.

        Returns:
            The processed message and arguments.
        """
        return f"{self.prefix}: {msg}", kwargs


def get_logger(name: str) -> PrefixedLogger:
    """Return a prefixed logger for a `tetrafold` module.

    Parameters:
        name: The module name, usually `__name__`.

    Returns:
        A logger living under the `tetrafold` hierarchy.
    """
    if not name.startswith("tetrafold"):
        name = f"tetrafold.{name}"
    return PrefixedLogger(name.rsplit(".", 1)[-1], logging.getLogger(name))
