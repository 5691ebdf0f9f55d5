#!/usr/bin/env python3

"""

javaparser
==========

This module contains a recursive-descent parser for the supported
subset of Java.

Two modes are available. Source mode parses compilation units and
recovers from statements outside the subset by keeping them as opaque
statements. Pattern mode parses statement sequences of rule files and
catalog snippets: identifiers written with the any/some/other prefix
become wildcards, ``...`` is an ellipsis, and markup comments are
attached to the statement that follows them.

"""

import logging
import re
from contextlib import contextmanager
from dataclasses import dataclass

from . import lexer
from .errors import NestingTooDeepError, SourceSyntaxError
from .lexer import (IDENT, INT, FLOAT, STRING, CHAR, OP, MARKUP, ELLIPSIS,
                    EOF, tokenize)
from .source_ast import (
    SourceSpan, CompilationUnit, TypeDecl, Param, MethodDecl, Block, VarDecl,
    ExprStmt, If, CatchClause, Try, Loop, Switch, Return, Throw, OpaqueStmt,
    MethodCall, FieldAccess, Identifier, Literal, Binary, Unary, Assignment,
    Cast, ObjectCreation, ArrayAccess, Conditional, OpaqueExpr,
    IdentWildcard, ExprAny, StmtEllipsis, TypeAny, link_parents)

logger = logging.getLogger(__name__)

# Identifier wildcards of the pattern language.
WILDCARD_RE = re.compile(r'^(any|some|other)[A-Za-z0-9_]*$')
# Type name wildcards, e.g. AnyException.
TYPE_WILDCARD_RE = re.compile(r'^Any[A-Za-z0-9_]*$')

PRIMITIVES = frozenset(['boolean', 'byte', 'char', 'short', 'int', 'long',
                        'float', 'double', 'void'])

KEYWORDS = frozenset([
    'abstract', 'assert', 'break', 'case', 'catch', 'class', 'const',
    'continue', 'default', 'do', 'else', 'enum', 'extends', 'final',
    'finally', 'for', 'goto', 'if', 'implements', 'import', 'instanceof',
    'interface', 'native', 'new', 'package', 'private', 'protected',
    'public', 'return', 'static', 'strictfp', 'super', 'switch',
    'synchronized', 'this', 'throw', 'throws', 'transient', 'try',
    'volatile', 'while', 'true', 'false', 'null'])

MODIFIERS = frozenset([
    'public', 'protected', 'private', 'static', 'final', 'abstract',
    'native', 'synchronized', 'transient', 'volatile', 'strictfp',
    'default', 'sealed', 'non-sealed'])

TYPE_KEYWORDS = frozenset(['class', 'interface', 'enum', 'record'])

# Statements kept opaque. The contextual keywords only when followed by
# a name or literal, so that `record.save()` stays an expression.
OPAQUE_WORDS = frozenset(['break', 'continue', 'assert', 'synchronized',
                          'class', 'interface', 'enum'])
CONTEXTUAL_OPAQUE_WORDS = frozenset(['yield', 'record'])

ASSIGN_OPS = frozenset(['=', '+=', '-=', '*=', '/=', '%=', '&=', '|=', '^=',
                        '<<=', '>>=', '>>>='])

BINARY_PREC = {
    '||': 1,
    '&&': 2,
    '|': 3,
    '^': 4,
    '&': 5,
    '==': 6, '!=': 6,
    '<': 7, '>': 7, '<=': 7, '>=': 7, 'instanceof': 7,
    '<<': 8, '>>': 8, '>>>': 8,
    '+': 9, '-': 9,
    '*': 10, '/': 10, '%': 10,
}

# Tokens allowed between the angle brackets of type arguments.
_TYPE_ARG_OPS = frozenset([',', '.', '?', '[', ']', '&', '<', '>', '@'])

# Statements, expressions and nested types deeper than this are
# rejected with NestingTooDeepError.
MAX_NESTING = 100

_OPENERS = {'(': ')', '[': ']', '{': '}'}
_CLOSERS = frozenset(_OPENERS.values())


@dataclass(frozen=True)
class MarkupSite:
    """
    A markup comment of a pattern and the statement it precedes.

    `target` is None when no statement follows in the same block.
    `top_level` is True for markups outside any block.
    """

    kind: str
    message: str
    span: SourceSpan
    target: object
    top_level: bool


@dataclass(frozen=True)
class Snippet:
    stmts: tuple
    markups: tuple


class Parser:
    """
    Recursive-descent parser over a token list.

    Parameters
    ----------
    text : str
        Source text, used for the verbatim text of opaque nodes.
    file_id : str
    pattern : bool
        Pattern mode.

    """

    def __init__(self, text, file_id, pattern=False):
        self.text = text
        self.file_id = file_id
        self.pattern = pattern
        self.toks = tokenize(text, file_id, pattern=pattern)
        self.i = 0
        self.depth = 0
        self.nesting = 0
        self.markups = []

    # ------------------------------------------------------
    # Token helpers

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    @property
    def prev(self):
        return self.toks[self.i - 1]

    def next(self):
        t = self.toks[self.i]
        if t.kind != EOF:
            self.i += 1
        return t

    def at_op(self, *ops):
        return self.peek().is_op(*ops)

    def at_word(self, *words):
        return self.peek().is_word(*words)

    def error(self, message, token=None):
        token = token or self.peek()
        if token.kind == EOF:
            message = 'unexpected end of input, ' + message
        return SourceSyntaxError(message, token.span(self.file_id))

    @contextmanager
    def nested(self):
        if self.nesting >= MAX_NESTING:
            raise NestingTooDeepError(
                'nesting deeper than {:d} levels'.format(MAX_NESTING),
                self.peek().span(self.file_id))
        self.nesting += 1
        try:
            yield
        finally:
            self.nesting -= 1

    def expect_op(self, op):
        if not self.at_op(op):
            raise self.error("expected '{}' but found '{}'".format(
                op, self.peek().text))
        return self.next()

    def expect_word(self, word):
        if not self.at_word(word):
            raise self.error("expected '{}' but found '{}'".format(
                word, self.peek().text))
        return self.next()

    def expect_ident(self):
        t = self.peek()
        if t.kind != IDENT or t.text in KEYWORDS:
            raise self.error("expected identifier but found '{}'".format(
                t.text))
        return self.next()

    def span(self, start):
        """Span from token `start` to the last consumed token."""
        end = self.prev if self.i > 0 else start
        if end.offset < start.offset:
            end = start
        return SourceSpan(self.file_id, start.line, start.column,
                          end.end_line, end.end_column)

    def slice_text(self, start_index):
        first = self.toks[start_index]
        last = self.toks[self.i - 1]
        return self.text[first.offset:last.end_offset]

    def slice_tokens(self, start_index, end_index=None):
        end_index = self.i if end_index is None else end_index
        return tuple(t.text for t in self.toks[start_index:end_index])

    def skip_balanced(self):
        """Consume a bracketed group starting at the current opener."""
        opener = self.next()
        stack = [opener]
        while stack:
            t = self.next()
            if t.kind == EOF:
                raise self.error("unclosed '{}'".format(stack[-1].text),
                                 stack[-1])
            if t.kind == OP and t.text in _OPENERS:
                stack.append(t)
            elif t.kind == OP and t.text in _CLOSERS:
                if _OPENERS[stack[-1].text] != t.text:
                    raise self.error("unbalanced '{}'".format(t.text), t)
                stack.pop()

    def skip_angles(self):
        """Consume type arguments or parameters, e.g. <K, List<V>>."""
        start = self.expect_op('<')
        depth = 1
        while depth:
            t = self.peek()
            if t.is_op('<'):
                depth += 1
            elif t.is_op('>'):
                depth -= 1
            elif t.kind == OP and t.text not in _TYPE_ARG_OPS:
                raise self.error('malformed type arguments', start)
            elif t.kind not in (OP, IDENT):
                raise self.error('malformed type arguments', start)
            self.next()

    def skip_annotation(self):
        self.expect_op('@')
        self.expect_ident()
        while self.at_op('.'):
            self.next()
            self.expect_ident()
        if self.at_op('('):
            self.skip_balanced()

    def skip_modifiers(self):
        while True:
            if self.at_op('@') and not self.peek(1).is_word('interface'):
                self.skip_annotation()
            elif self.peek().kind == IDENT and self.peek().text in MODIFIERS:
                self.next()
            else:
                return

    # ------------------------------------------------------
    # Declarations

    def compilation_unit(self):
        start = self.peek()
        types = []
        while self.peek().kind != EOF:
            if self.at_word('package', 'import'):
                while not self.at_op(';'):
                    if self.peek().kind == EOF:
                        raise self.error("expected ';'")
                    self.next()
                self.next()
            elif self.at_op(';'):
                self.next()
            else:
                types.extend(self.type_decl())
        types.sort(key=lambda t: (t.span.line, t.span.column))
        return CompilationUnit(self.file_id, tuple(types),
                               span=self.span(start))

    def type_decl(self):
        """Parse a type declaration; return it with its nested types."""
        start = self.peek()
        self.skip_modifiers()
        if self.at_op('@'):
            self.next()
        if not (self.peek().kind == IDENT and
                self.peek().text in TYPE_KEYWORDS | {'interface'}):
            raise self.error("expected a type declaration but found '{}'"
                             .format(self.peek().text))
        kind = self.next().text
        name = self.expect_ident().text
        while not self.at_op('{'):
            if self.peek().kind == EOF:
                raise self.error("expected '{'")
            if self.at_op('(', '['):
                self.skip_balanced()
            else:
                self.next()
        with self.nested():
            methods, nested = self.class_body(kind)
        decl = TypeDecl(name, tuple(methods), span=self.span(start))
        return [decl] + nested

    def class_body(self, kind):
        brace = self.expect_op('{')
        methods, nested = [], []
        if kind == 'enum':
            while True:
                t = self.peek()
                if t.kind == EOF:
                    raise self.error("unclosed '{'", brace)
                if t.is_op(';'):
                    self.next()
                    break
                if t.is_op('}'):
                    break
                if t.kind == OP and t.text in _OPENERS:
                    self.skip_balanced()
                else:
                    self.next()
        while not self.at_op('}'):
            if self.peek().kind == EOF:
                raise self.error("unclosed '{'", brace)
            self.member(methods, nested)
        self.next()
        return methods, nested

    def member(self, methods, nested):
        if self.at_op(';'):
            self.next()
            return
        start_index = self.i
        start = self.peek()
        self.skip_modifiers()
        if self.at_op('{'):
            # initializer block
            self.skip_balanced()
            return
        if ((self.peek().kind == IDENT and
             self.peek().text in TYPE_KEYWORDS) or
                (self.at_op('@') and self.peek(1).is_word('interface'))):
            self.i = start_index
            nested.extend(self.type_decl())
            return
        try:
            header = self.method_header()
        except SourceSyntaxError as exc:
            logger.debug('skipping class member: %s', exc)
            self.i = start_index
            self.skip_member()
            return
        if header is None:
            self.i = start_index
            self.skip_member()
            return
        name, params, return_type = header
        if self.at_op(';'):
            self.next()
            return
        body = self.block()
        methods.append(MethodDecl(name, params, body, return_type,
                                  span=self.span(start)))

    def method_header(self):
        """
        Parse a method or constructor header up to its body.

        Returns None for fields.
        """
        if self.at_op('<'):
            self.skip_angles()
        if self.peek().kind == IDENT and self.peek(1).is_op('('):
            return_type = ''
        else:
            return_type = self.type_text()
        if not (self.peek().kind == IDENT and self.peek(1).is_op('(')):
            return None
        name = self.expect_ident().text
        params = self.params()
        while not self.at_op('{', ';'):
            t = self.peek()
            if t.kind == EOF or t.is_op('=', '}'):
                raise self.error("expected method body")
            if t.kind == OP and t.text in _OPENERS:
                self.skip_balanced()
            else:
                self.next()
        return name, params, return_type

    def params(self):
        self.expect_op('(')
        params = []
        while not self.at_op(')'):
            start = self.peek()
            if self.pattern and self.peek().kind == ELLIPSIS:
                self.next()
                params.append(StmtEllipsis(span=self.span(start)))
            else:
                self.skip_modifiers()
                type_name = self.type_slot()
                if self.peek().kind == ELLIPSIS:
                    self.next()
                    type_name += '...'
                name = self.name_slot()
                while self.at_op('['):
                    self.next()
                    self.expect_op(']')
                    type_name += '[]'
                params.append(Param(type_name, name, span=self.span(start)))
            if not self.at_op(')'):
                self.expect_op(',')
        self.next()
        return tuple(params)

    def skip_member(self):
        """Skip a field or member up to ';' or a closing block."""
        while True:
            t = self.peek()
            if t.kind == EOF:
                raise self.error("expected ';'")
            if t.is_op(';'):
                self.next()
                return
            if t.is_op('{'):
                self.skip_balanced()
                if not self.at_op(';', ',', ')', '.'):
                    return
                continue
            if t.is_op('}'):
                return
            if t.kind == OP and t.text in _OPENERS:
                self.skip_balanced()
            else:
                self.next()

    # ------------------------------------------------------
    # Types and names

    def type_text(self):
        """Parse a type and return its normalized text."""
        parts = []
        while self.at_op('@'):
            self.skip_annotation()
        t = self.peek()
        if t.kind != IDENT or (t.text in KEYWORDS and
                               t.text not in PRIMITIVES):
            raise self.error("expected type but found '{}'".format(t.text))
        parts.append(self.next().text)
        if t.text not in PRIMITIVES:
            while True:
                if self.at_op('<'):
                    i = self.i
                    self.skip_angles()
                    parts.append(_join_type(self.toks[i:self.i]))
                if self.at_op('.') and self.peek(1).kind == IDENT and \
                        self.peek(1).text not in KEYWORDS:
                    self.next()
                    parts.append('.' + self.next().text)
                else:
                    break
        while self.at_op('[') and self.peek(1).is_op(']'):
            self.next()
            self.next()
            parts.append('[]')
        return ''.join(parts)

    def type_slot(self):
        """Type name, or a type wildcard in pattern mode."""
        t = self.peek()
        text = self.type_text()
        if self.pattern and text == t.text:
            if TYPE_WILDCARD_RE.match(text):
                return TypeAny(text, span=t.span(self.file_id))
            if WILDCARD_RE.match(text):
                return IdentWildcard(text, span=t.span(self.file_id))
        return text

    def name_slot(self):
        """Identifier, or an identifier wildcard in pattern mode."""
        t = self.expect_ident()
        if self.pattern and WILDCARD_RE.match(t.text):
            return IdentWildcard(t.text, span=t.span(self.file_id))
        return t.text

    # ------------------------------------------------------
    # Statements

    def block(self):
        brace = self.expect_op('{')
        self.depth += 1
        try:
            stmts = self.statements(brace)
        finally:
            self.depth -= 1
        self.next()
        return Block(tuple(stmts), span=self.span(brace))

    def statements(self, brace=None):
        """Parse statements up to '}' (inside a block) or end of input."""
        stmts = []
        while True:
            pending = []
            while self.peek().kind == MARKUP:
                pending.append(self.next())
            t = self.peek()
            if t.kind == EOF:
                if brace is not None:
                    raise self.error("unclosed '{'", brace)
                self.attach(pending, None)
                return stmts
            if brace is not None and t.is_op('}'):
                self.attach(pending, None)
                return stmts
            stmt = self.statement()
            self.attach(pending, stmt)
            stmts.append(stmt)

    def attach(self, tokens, stmt):
        for t in tokens:
            kind, message = lexer.markup_of(t)
            self.markups.append(MarkupSite(kind, message,
                                           t.span(self.file_id), stmt,
                                           self.depth == 0))

    def statement(self):
        start_index = self.i
        with self.nested():
            if self.pattern:
                return self.statement_strict()
            try:
                return self.statement_strict()
            except NestingTooDeepError:
                raise
            except SourceSyntaxError as exc:
                logger.debug('opaque statement: %s', exc)
                self.i = start_index
                return self.opaque_statement()

    def statement_strict(self):
        t = self.peek()
        start = t
        if t.is_op('{'):
            return self.block()
        if t.is_op(';'):
            self.next()
            return OpaqueStmt((';',), ';', span=self.span(start))
        if t.kind == ELLIPSIS and self.pattern:
            self.next()
            return StmtEllipsis(span=self.span(start))
        if t.kind == IDENT:
            word = t.text
            if word == 'if':
                return self.if_statement()
            if word == 'try':
                return self.try_statement()
            if word in ('for', 'while'):
                self.next()
                header, text = self.header()
                body = self.statement()
                return Loop(word, header, body, text, span=self.span(start))
            if word == 'do':
                self.next()
                body = self.statement()
                self.expect_word('while')
                header, text = self.header()
                self.expect_op(';')
                return Loop('do', header, body, text, span=self.span(start))
            if word == 'switch':
                start_index = self.i
                self.next()
                self.skip_balanced_at('(')
                self.skip_balanced_at('{')
                return Switch(self.slice_tokens(start_index),
                              self.slice_text(start_index),
                              span=self.span(start))
            if word == 'return':
                self.next()
                value = None
                if not self.at_op(';'):
                    value = self.expression()
                self.expect_op(';')
                return Return(value, span=self.span(start))
            if word == 'throw':
                self.next()
                value = self.expression()
                self.expect_op(';')
                return Throw(value, span=self.span(start))
            if word in OPAQUE_WORDS or (word in CONTEXTUAL_OPAQUE_WORDS and
                                        self.peek(1).kind != OP):
                return self.opaque_statement()
            if self.peek(1).is_op(':') and word not in KEYWORDS:
                # labeled statement
                return self.opaque_statement()
        decl = self.var_decl()
        if decl is not None:
            return decl
        expr = self.expression()
        self.expect_op(';')
        return ExprStmt(expr, span=self.span(start))

    def skip_balanced_at(self, opener):
        if not self.at_op(opener):
            raise self.error("expected '{}'".format(opener))
        self.skip_balanced()

    def header(self):
        """Opaque parenthesized loop header: (tokens, text)."""
        if not self.at_op('('):
            raise self.error("expected '('")
        open_index = self.i
        self.skip_balanced()
        inner = self.toks[open_index + 1:self.i - 1]
        tokens = tuple(t.text for t in inner)
        if inner:
            text = self.text[inner[0].offset:inner[-1].end_offset]
        else:
            text = ''
        return tokens, text

    def if_statement(self):
        start = self.next()
        self.expect_op('(')
        cond = self.expression()
        self.expect_op(')')
        then = self.statement()
        else_ = None
        if self.at_word('else'):
            self.next()
            else_ = self.statement()
        return If(cond, then, else_, span=self.span(start))

    def try_statement(self):
        start = self.next()
        resources = ()
        if self.at_op('('):
            open_index = self.i
            self.skip_balanced()
            resources = self.slice_tokens(open_index + 1, self.i - 1)
        body = self.block()
        catches = []
        while self.at_word('catch'):
            cstart = self.next()
            self.expect_op('(')
            self.skip_modifiers()
            types = [self.type_slot()]
            while self.at_op('|'):
                self.next()
                types.append(self.type_text())
            if len(types) == 1:
                exception_type = types[0]
            else:
                exception_type = ' | '.join(
                    t if isinstance(t, str) else t.name for t in types)
            binding = self.name_slot()
            self.expect_op(')')
            cbody = self.block()
            catches.append(CatchClause(exception_type, binding, cbody,
                                       span=self.span(cstart)))
        finally_ = None
        if self.at_word('finally'):
            self.next()
            finally_ = self.block()
        if not catches and finally_ is None and not resources:
            raise self.error("expected 'catch' or 'finally'")
        return Try(body, tuple(catches), finally_, resources,
                   span=self.span(start))

    def var_decl(self):
        """Speculatively parse a local variable declaration."""
        start_index = self.i
        start = self.peek()
        try:
            self.skip_modifiers()
            type_name = self.type_slot()
            t = self.peek()
            if t.kind != IDENT or t.text in KEYWORDS:
                raise self.error('not a declaration')
            if not self.peek(1).is_op('=', ';', ',', '['):
                raise self.error('not a declaration')
        except SourceSyntaxError:
            self.i = start_index
            return None
        name = self.name_slot()
        while self.at_op('['):
            self.next()
            self.expect_op(']')
            if isinstance(type_name, str):
                type_name += '[]'
        init = None
        if self.at_op('='):
            self.next()
            init = self.initializer()
        if self.at_op(','):
            # several declarators
            self.i = start_index
            return self.opaque_statement()
        self.expect_op(';')
        return VarDecl(type_name, name, init, span=self.span(start))

    def initializer(self):
        if self.at_op('{'):
            start = self.peek()
            start_index = self.i
            self.skip_balanced()
            return OpaqueExpr(self.slice_tokens(start_index),
                              self.slice_text(start_index),
                              span=self.span(start))
        return self.expression()

    def opaque_statement(self):
        """
        Consume tokens up to ';' or a closing block at depth 0.

        Unbalanced brackets and end of input are unrecoverable.
        """
        start = self.peek()
        start_index = self.i
        stack = []
        while True:
            t = self.peek()
            if t.kind == EOF:
                if stack:
                    raise self.error("unclosed '{}'".format(stack[-1].text),
                                     stack[-1])
                raise self.error("expected ';'")
            if t.kind == MARKUP:
                raise self.error('markup comment inside a statement', t)
            if t.kind == OP and t.text in _OPENERS:
                stack.append(self.next())
                continue
            if t.kind == OP and t.text in _CLOSERS:
                if not stack:
                    if t.text == '}':
                        if self.i == start_index:
                            raise self.error("unbalanced '}'")
                        break
                    # stray closer
                    self.next()
                    continue
                if _OPENERS[stack[-1].text] != t.text:
                    raise self.error("unbalanced '{}'".format(t.text))
                stack.pop()
                self.next()
                if t.text == '}' and not stack and \
                        not self.at_op(';', ')', '.', ','):
                    break
                continue
            self.next()
            if t.is_op(';') and not stack:
                break
        return OpaqueStmt(self.slice_tokens(start_index),
                          self.slice_text(start_index),
                          span=self.span(start))

    # ------------------------------------------------------
    # Expressions

    def expression(self):
        start = self.peek()
        lhs = self.conditional()
        t = self.peek()
        if t.kind == OP and t.text in ASSIGN_OPS:
            op = self.next().text
            value = self.expression()
            return Assignment(lhs, value, op, span=self.span(start))
        return lhs

    def conditional(self):
        start = self.peek()
        cond = self.binary(1)
        if self.at_op('?'):
            self.next()
            then = self.expression()
            self.expect_op(':')
            else_ = self.conditional()
            return Conditional(cond, then, else_, span=self.span(start))
        return cond

    def binary_op(self):
        """Return (operator, token count) of the next binary operator."""
        t = self.peek()
        if t.is_word('instanceof'):
            return 'instanceof', 1
        if t.kind != OP:
            return None, 0
        if t.text == '>':
            n = 1
            while n < 3 and self.peek(n).is_op('>') and \
                    self.peek(n).offset == self.peek(n - 1).end_offset:
                n += 1
            if n > 1 and self.peek(n).kind == OP and \
                    self.peek(n).text in ('=', '>=', '>>=') and \
                    self.peek(n).offset == self.peek(n - 1).end_offset:
                return None, 0
            return '>' * n, n
        if t.text in BINARY_PREC:
            return t.text, 1
        return None, 0

    def binary(self, min_prec):
        start = self.peek()
        lhs = self.unary()
        while True:
            op, n = self.binary_op()
            if op is None or BINARY_PREC[op] < min_prec:
                return lhs
            for _ in range(n):
                self.next()
            if op == 'instanceof':
                if self.at_word('final'):
                    self.next()
                rstart = self.peek()
                text = self.type_text()
                if self.peek().kind == IDENT and \
                        self.peek().text not in KEYWORDS:
                    text += ' ' + self.next().text
                rhs = Identifier(text, span=self.span(rstart))
            else:
                rhs = self.binary(BINARY_PREC[op] + 1)
            lhs = Binary(op, lhs, rhs, span=self.span(start))

    def unary(self):
        with self.nested():
            return self.unary_nested()

    def unary_nested(self):
        start = self.peek()
        if start.is_op('+', '-', '!', '~', '++', '--'):
            op = self.next().text
            operand = self.unary()
            return Unary(op, operand, span=self.span(start))
        if start.is_op('('):
            lam = self.lambda_expr()
            if lam is not None:
                return lam
            cast = self.cast()
            if cast is not None:
                return cast
        start_index = self.i
        return self.postfix(self.primary(), start_index)

    def lambda_expr(self):
        """Parse a lambda as an opaque expression, or return None."""
        start = self.peek()
        start_index = self.i
        if start.is_op('('):
            try:
                self.skip_balanced()
            except SourceSyntaxError:
                self.i = start_index
                return None
            if not self.at_op('->'):
                self.i = start_index
                return None
        elif start.kind == IDENT and self.peek(1).is_op('->'):
            self.next()
        else:
            return None
        self.expect_op('->')
        if self.at_op('{'):
            self.skip_balanced()
        else:
            self.expression()
        return OpaqueExpr(self.slice_tokens(start_index),
                          self.slice_text(start_index),
                          span=self.span(start))

    def cast(self):
        start = self.peek()
        start_index = self.i
        self.next()
        try:
            type_name = self.type_slot()
            self.expect_op(')')
        except SourceSyntaxError:
            self.i = start_index
            return None
        primitive = isinstance(type_name, str) and \
            type_name.rstrip('[]') in PRIMITIVES
        t = self.peek()
        follows = (t.kind in (INT, FLOAT, STRING, CHAR) or
                   (t.kind == IDENT and t.text not in
                    ('instanceof',)) or
                   t.is_op('(', '!', '~'))
        if primitive and t.is_op('+', '-', '++', '--'):
            follows = True
        if not follows:
            self.i = start_index
            return None
        operand = self.unary()
        return Cast(type_name, operand, span=self.span(start))

    def arguments(self):
        self.expect_op('(')
        args = []
        while not self.at_op(')'):
            if self.pattern and self.peek().kind == ELLIPSIS:
                t = self.next()
                args.append(StmtEllipsis(span=self.span(t)))
            else:
                args.append(self.expression())
            if not self.at_op(')'):
                self.expect_op(',')
        self.next()
        return tuple(args)

    def primary(self):
        t = self.peek()
        start = t
        if t.kind in (INT, FLOAT, CHAR):
            self.next()
            return Literal(t.kind.lower(), t.text, span=self.span(start))
        if t.kind == STRING:
            self.next()
            content = t.text[1:-1]
            if self.pattern and WILDCARD_RE.match(content):
                return IdentWildcard(content, quoted=True,
                                     span=self.span(start))
            return Literal('string', t.text, span=self.span(start))
        if t.is_op('('):
            self.next()
            inner = self.expression()
            self.expect_op(')')
            return inner
        if t.kind != IDENT:
            raise self.error("unexpected '{}'".format(t.text))
        word = t.text
        if word in ('true', 'false'):
            self.next()
            return Literal('boolean', word, span=self.span(start))
        if word == 'null':
            self.next()
            return Literal('null', word, span=self.span(start))
        if word == 'new':
            return self.creation()
        if word in ('this', 'super'):
            self.next()
            if self.at_op('('):
                args = self.arguments()
                return MethodCall(None, word, args, span=self.span(start))
            return Identifier(word, span=self.span(start))
        if word in KEYWORDS or word in PRIMITIVES:
            raise self.error("unexpected '{}'".format(word))
        if self.peek(1).is_op('->'):
            return self.lambda_expr()
        self.next()
        if self.at_op('('):
            name = word
            if self.pattern and WILDCARD_RE.match(word):
                name = IdentWildcard(word, span=self.span(start))
            args = self.arguments()
            return MethodCall(None, name, args, span=self.span(start))
        if self.pattern:
            if word == 'any':
                return ExprAny(span=self.span(start))
            if WILDCARD_RE.match(word):
                return IdentWildcard(word, span=self.span(start))
        return Identifier(word, span=self.span(start))

    def creation(self):
        start = self.next()
        start_index = self.i - 1
        if self.at_op('<'):
            self.skip_angles()
        type_name = self.type_slot() if not self.peek(1).is_op('[') else \
            self.expect_ident().text
        if self.at_op('['):
            # array creation
            while self.at_op('['):
                self.skip_balanced()
            if self.at_op('{'):
                self.skip_balanced()
            return OpaqueExpr(self.slice_tokens(start_index),
                              self.slice_text(start_index),
                              span=self.span(start))
        if isinstance(type_name, str) and type_name.endswith('[]'):
            if self.at_op('{'):
                self.skip_balanced()
            return OpaqueExpr(self.slice_tokens(start_index),
                              self.slice_text(start_index),
                              span=self.span(start))
        args = self.arguments()
        if self.at_op('{'):
            # anonymous class
            self.skip_balanced()
            return OpaqueExpr(self.slice_tokens(start_index),
                              self.slice_text(start_index),
                              span=self.span(start))
        return ObjectCreation(type_name, args, span=self.span(start))

    def postfix(self, expr, start_index):
        start = self.toks[start_index]
        while True:
            if self.at_op('.'):
                self.next()
                if self.at_op('<'):
                    self.skip_angles()
                if self.at_word('new'):
                    # qualified inner class creation
                    self.creation()
                    expr = OpaqueExpr(self.slice_tokens(start_index),
                                      self.slice_text(start_index),
                                      span=self.span(start))
                    continue
                t = self.peek()
                if t.kind != IDENT:
                    raise self.error("expected member name")
                self.next()
                name = t.text
                if self.pattern and WILDCARD_RE.match(name):
                    name = IdentWildcard(name, span=t.span(self.file_id))
                if self.at_op('('):
                    args = self.arguments()
                    expr = MethodCall(expr, name, args, span=self.span(start))
                else:
                    expr = FieldAccess(expr, name, span=self.span(start))
            elif self.at_op('['):
                self.next()
                index = self.expression()
                self.expect_op(']')
                expr = ArrayAccess(expr, index, span=self.span(start))
            elif self.at_op('++', '--'):
                op = self.next().text
                expr = Unary(op, expr, True, span=self.span(start))
            elif self.at_op('::'):
                self.next()
                if self.at_word('new'):
                    self.next()
                else:
                    self.expect_ident()
                expr = OpaqueExpr(self.slice_tokens(start_index),
                                  self.slice_text(start_index),
                                  span=self.span(start))
            else:
                return expr



def _join_type(tokens):
    """Normalized text of type argument tokens."""
    out = ''
    prev = None
    for t in tokens:
        if prev is not None and (
                prev.text in (',', '&') or t.text == '&' or
                (prev.kind == IDENT and t.kind == IDENT) or
                (prev.text == '?' and t.kind == IDENT)):
            out += ' '
        out += t.text
        prev = t
    return out


def parse_source(text, file_id):
    """
    Parse a Java compilation unit.

    Statements outside the supported subset are kept as opaque
    statements. Class members other than methods and constructors
    are skipped.

    Parameters
    ----------
    text : str
    file_id : str

    Returns
    -------
    unit : CompilationUnit
        With parent links attached.

    Raises
    ------
    SourceSyntaxError
        On unrecoverable input, e.g. an unclosed brace.

    """
    if not file_id:
        raise ValueError('file_id must be nonempty')
    parser = Parser(text, file_id)
    unit = parser.compilation_unit()
    return link_parents(unit)


def parse_snippet(text, file_id='<snippet>', pattern=True):
    """
    Parse a statement sequence.

    Returns
    -------
    snippet : Snippet
        Statements, and the markup comments with the statements they
        precede (pattern mode only).

    """
    parser = Parser(text, file_id, pattern=pattern)
    stmts = parser.statements()
    markups = sorted(parser.markups,
                     key=lambda m: (m.span.line, m.span.column))
    return Snippet(tuple(stmts), tuple(markups))


def parse_expression(text, file_id='<expr>', pattern=False):
    parser = Parser(text, file_id, pattern=pattern)
    expr = parser.expression()
    if parser.peek().kind != EOF:
        raise parser.error("unexpected '{}'".format(parser.peek().text))
    return link_parents(expr)
