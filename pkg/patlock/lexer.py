#!/usr/bin/env python3

"""

lexer
=====

This module contains the tokenizer shared by source parsing,
rule parsing and the broad search.

Whitespace and comments are dropped. In pattern mode, line comments
holding a markup (``//inAnyMethod``, ``//not_exists``,
``//Alert: message``, ``//context``, ``//anchor``) are kept as
MARKUP tokens.

The closing angle bracket ``>`` is always a token of its own, so
nested generic type arguments never need splitting; the parser
recombines adjacent brackets into shift operators.

"""

import bisect
import re
from dataclasses import dataclass

from .errors import SourceSyntaxError
from .source_ast import SourceSpan

# Token kinds
IDENT = 'IDENT'
INT = 'INT'
FLOAT = 'FLOAT'
STRING = 'STRING'
CHAR = 'CHAR'
OP = 'OP'
MARKUP = 'MARKUP'
ELLIPSIS = 'ELLIPSIS'
EOF = 'EOF'

_EXP = r'(?:[eE][+-]?\d+)'
_TOKEN_RE = re.compile(r'''
    (?P<ws>\s+)
   |(?P<line_comment>//[^\n]*)
   |(?P<block_comment>/\*.*?\*/)
   |(?P<text_block>""".*?""")
   |(?P<string>"(?:[^"\\\n]|\\.)*")
   |(?P<char>'(?:[^'\\\n]|\\.)+')
   |(?P<float>\d[\d_]*\.\d[\d_]*EXP?[fFdD]?
             |\d[\d_]*\.EXP?[fFdD]?(?![.\w])
             |\.\d[\d_]*EXP?[fFdD]?
             |\d[\d_]*EXP[fFdD]?
             |\d[\d_]*[fFdD](?!\w))
   |(?P<int>0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?|\d[\d_]*[lL]?)
   |(?P<ellipsis>\.\.\.)
   |(?P<ident>[^\W\d][\w$]*|\$[\w$]*)
   |(?P<op>>>>=|>>=|<<=|>=|<=|==|!=|->|::|\+\+|--|&&|\|\|
          |[-+*/%&|^]=|<<|[-+*/%&|^!~?:;,.(){}\[\]<>=@])
'''.replace('EXP', _EXP), re.VERBOSE | re.DOTALL)

_KIND = {
    'text_block': STRING,
    'string': STRING,
    'char': CHAR,
    'float': FLOAT,
    'int': INT,
    'ellipsis': ELLIPSIS,
    'ident': IDENT,
    'op': OP,
}

# Markup comments, matched against the comment text after '//'.
MARKUP_RE = re.compile(
    r'^\s*(?P<kind>inAnyMethod|not_exists|context|anchor)\s*$'
    r'|^\s*(?P<alert>Alert):\s*(?P<message>.*?)\s*$')


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    end_line: int
    end_column: int
    offset: int
    end_offset: int

    def span(self, file_id):
        return SourceSpan(file_id, self.line, self.column,
                          self.end_line, self.end_column)

    def is_op(self, *texts):
        return self.kind == OP and self.text in texts

    def is_word(self, *texts):
        return self.kind == IDENT and self.text in texts


class _Positions:
    """Map string offsets to 1-based (line, column)."""

    def __init__(self, text):
        self.starts = [0] + [m.end() for m in re.finditer('\n', text)]

    def __call__(self, offset):
        i = bisect.bisect_right(self.starts, offset) - 1
        return i + 1, offset - self.starts[i] + 1


def tokenize(text, file_id='<string>', pattern=False):
    """
    Return the tokens of `text`, terminated by an EOF token.

    Parameters
    ----------
    text : str
    file_id : str
        Used in error locations.
    pattern : bool
        If True, markup comments are returned as MARKUP tokens.

    Returns
    -------
    tokens : list of Token

    Raises
    ------
    SourceSyntaxError
        On an unterminated literal or comment, or a stray character.

    """
    position = _Positions(text)
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None or (m.lastgroup == 'op' and
                         text.startswith('/*', pos)):
            line, col = position(pos)
            span = SourceSpan(file_id, line, col, line, col)
            if text.startswith('/*', pos):
                raise SourceSyntaxError('unterminated comment', span)
            if text[pos] in '"\'':
                raise SourceSyntaxError('unterminated literal', span)
            raise SourceSyntaxError(
                'unexpected character {!r}'.format(text[pos]), span)
        group = m.lastgroup
        start, end = m.start(), m.end()
        pos = end
        if group in ('ws', 'block_comment'):
            continue
        if group == 'line_comment':
            if not pattern:
                continue
            mm = MARKUP_RE.match(m.group()[2:])
            if mm is None:
                continue
            kind = MARKUP
        else:
            kind = _KIND[group]
        line, col = position(start)
        end_line, end_col = position(end - 1)
        tokens.append(Token(kind, m.group(), line, col, end_line, end_col,
                            start, end))
    line, col = position(n)
    tokens.append(Token(EOF, '', line, col, line, col, n, n))
    return tokens


def markup_of(token):
    """
    Return (kind, message) of a MARKUP token.

    `kind` is one of 'inAnyMethod', 'not_exists', 'context', 'anchor'
    and 'Alert'; message is None except for alerts.
    """
    m = MARKUP_RE.match(token.text[2:])
    if m.group('alert'):
        return 'Alert', m.group('message')
    return m.group('kind'), None
