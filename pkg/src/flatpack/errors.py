"""Shared exception types."""


class ContractError(ValueError):
    """An operation was called with arguments that violate its contract."""


class CorpusError(Exception):
    """A corpus directory or item manifest failed to load or validate."""
