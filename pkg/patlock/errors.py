#!/usr/bin/env python3

"""

errors
======

Exception hierarchy of the patlock pipeline.

Every error that carries a source location renders it as a
``file:line:column:`` prefix, the way compilers report.

"""


class PatlockError(Exception):
    """Base class of all errors raised by patlock."""


class SourceSyntaxError(PatlockError):
    """
    Unrecoverable syntax error in a source or snippet.

    Parameters
    ----------
    message : str
    span : SourceSpan or None
        Location of the offending token.

    """

    def __init__(self, message, span=None):
        self.message = message
        self.span = span
        super().__init__(_located(message, span))


class NestingTooDeepError(SourceSyntaxError):
    """Source nested deeper than the parser follows."""


class RuleSyntaxError(SourceSyntaxError):
    """Rule text that does not follow the pattern grammar."""


class RuleSemanticError(PatlockError):
    """Rule text that parses but misuses markup comments."""

    def __init__(self, message, span=None):
        self.message = message
        self.span = span
        super().__init__(_located(message, span))


class LogFormatError(PatlockError):
    """
    Malformed failure log entry.

    Parameters
    ----------
    message : str
    line_number : int
        1-based line of the log text where the entry starts.

    """

    def __init__(self, message, line_number):
        self.message = message
        self.line_number = line_number
        super().__init__('line {:d}: {}'.format(line_number, message))


class UnlabeledItemError(PatlockError):
    """Alerts or candidates without a verification label."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        items = ', '.join('{}:{:d}'.format(f, l) for f, l in self.missing)
        super().__init__('{:d} unlabeled item(s): {}'.format(
            len(self.missing), items))


class CatalogFormatError(PatlockError):
    """
    Catalog document that cannot be read.

    Parameters
    ----------
    path : str
    diagnostics : list of str
        One message per offending field.

    """

    def __init__(self, path, diagnostics):
        self.path = str(path)
        self.diagnostics = list(diagnostics)
        super().__init__('{}: {}'.format(self.path,
                                         '; '.join(self.diagnostics)))


class DocumentFormatError(PatlockError):
    """JSON input document that does not match its schema."""

    def __init__(self, path, diagnostics):
        self.path = str(path)
        self.diagnostics = list(diagnostics)
        super().__init__('{}: {}'.format(self.path,
                                         '; '.join(self.diagnostics)))


def _located(message, span):
    if span is None:
        return message
    return '{}:{:d}:{:d}: {}'.format(span.file_id, span.line, span.column,
                                      message)
