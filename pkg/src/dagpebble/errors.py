"""Shared exception types."""


class CapExceeded(RuntimeError):
    """An exact search refused to run because its size guard tripped.

    Raised instead of silently degrading; callers that really want the big
    instance must raise the cap explicitly.  The CLI maps this to exit code 3.
    """
