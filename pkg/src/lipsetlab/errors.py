"""Shared exception types."""

from __future__ import annotations


class BudgetExceeded(RuntimeError):
    """A configured resource budget (part count, rounds, splits) ran out."""


class WitnessNotFound(RuntimeError):
    """A bounded witness search exhausted its depth without a certificate."""


class GapsExhausted(RuntimeError):
    """A placement policy ran out of host gaps before finishing."""


class GuardUnsatisfiable(RuntimeError):
    """A stage guard could not be met with the components available."""

    def __init__(self, message: str, gap=None):
        super().__init__(message)
        self.gap = gap
