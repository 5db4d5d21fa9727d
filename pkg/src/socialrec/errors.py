class SocialRecError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(SocialRecError, ValueError):
    """Input violates a documented contract (bad id, out-of-range parameter...)."""


class NotFoundError(SocialRecError, KeyError):
    """A referenced user, resource or profile does not exist."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"
