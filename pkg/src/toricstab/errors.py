"""Exception hierarchy.  The CLI maps each class to a distinct exit code."""


class ToricStabError(Exception):
    pass


class InputError(ToricStabError, ValueError):
    """Malformed or inconsistent input (bad file, duplicate vertices, level <= 0)."""


class DimensionError(InputError):
    """The point set does not span a full-dimensional polytope."""


class NotDelzantError(InputError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"polytope is not Delzant: {lines}")


class DomainError(ToricStabError, ValueError):
    """A point was evaluated outside the polytope."""


class ResourceError(ToricStabError):
    """The exact path would exceed the configured enumeration cap."""


class InternalError(ToricStabError, RuntimeError):
    """A self-check failed; indicates a bug rather than bad input."""
