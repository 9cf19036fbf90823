"""Exception hierarchy shared across the toolkit.

The CLI maps these onto process exit codes: configuration problems exit
with 2, data problems with 3, numerical failures with 4.
"""

from __future__ import annotations


class GPScreenError(Exception):
    """Base class for all toolkit errors."""


class InputError(GPScreenError):
    """A caller violated an operation precondition (bad argument, bad shape)."""


class ConfigError(InputError):
    """An experiment or campaign configuration is invalid."""


class DataError(GPScreenError):
    """A dataset or result file is malformed or inconsistent."""


class NumericalError(GPScreenError):
    """A linear-algebra step failed (non-PSD matrix, factorization breakdown)."""
