"""Exception hierarchy shared by all modules."""


class CcsPdlError(Exception):
    """Base class; `module` names the component that raised it."""
    module = "ccspdl"


class ParseError(CcsPdlError):
    module = "syntax"

    def __init__(self, msg, pos=None, text=None):
        self.pos = pos
        self.text = text
        if pos is not None:
            msg = "%s at position %d" % (msg, pos)
            if text is not None:
                msg += "\n  %s\n  %s^" % (text, " " * pos)
        super().__init__(msg)


class DialectError(CcsPdlError):
    module = "syntax"


class DefinitionError(CcsPdlError):
    """A constant definition violates the recursion restrictions."""
    module = "syntax"


class BudgetExceeded(CcsPdlError):
    module = "lts"


class PreconditionError(CcsPdlError):
    module = "rewrite"


class InternalError(CcsPdlError):
    """A self-check failed; this signals a bug rather than bad input."""
    module = "rewrite"
