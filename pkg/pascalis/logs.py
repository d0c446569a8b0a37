"""
pascalis - Diagnostics setup

Progress lines look like "[Stage] message" on stderr.
"""

import logging
import sys

_FORMAT = "%(message)s"


class _StderrHandler(logging.StreamHandler):
    """Always writes to the current sys.stderr (survives stream swaps in tests)."""

    def __init__(self):
        super().__init__(sys.stderr)

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def setup_logging(verbose: bool = False, debug: bool = False) -> logging.Logger:
    """Route the package logger to stderr: WARNING, INFO with verbose, DEBUG with debug."""
    root = logging.getLogger("pascalis")
    for handler in list(root.handlers):
        if isinstance(handler, _StderrHandler):
            root.removeHandler(handler)
    handler = _StderrHandler()
    handler.setFormatter(logging.Formatter(_FORMAT))
    root.addHandler(handler)
    if debug:
        root.setLevel(logging.DEBUG)
    elif verbose:
        root.setLevel(logging.INFO)
    else:
        root.setLevel(logging.WARNING)
    return root
