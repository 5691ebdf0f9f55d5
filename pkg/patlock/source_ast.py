#!/usr/bin/env python3

"""

source_ast
==========

This module contains the syntax tree of the supported subset of Java.

Nodes are frozen dataclasses. Structural equality (``==``) ignores
source spans and parent links, so two trees parsed from differently
formatted text compare equal when they have the same shape.

Parent links are attached once, after parsing, by :func:`link_parents`;
:func:`ancestors` walks them up to the enclosing method.

The same node vocabulary is used for rule patterns. Pattern trees may in
addition hold the wildcard node kinds defined at the end of the module.

"""

import functools
from dataclasses import dataclass, field, fields


@dataclass(frozen=True)
class SourceSpan:
    """
    Location of a node in a source file.

    Lines and columns are 1-based, the end position is inclusive.
    """

    file_id: str
    line: int
    column: int
    end_line: int
    end_column: int

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError('span must start at line, column >= 1')
        if (self.end_line, self.end_column) < (self.line, self.column):
            raise ValueError('span must not end before it starts')

    @property
    def start(self):
        return (self.line, self.column)

    @property
    def end(self):
        return (self.end_line, self.end_column)

    def contains(self, other):
        """Return True if `other` lies within this span."""
        return self.start <= other.start and other.end <= self.end

    def to(self, other):
        """Return the span from the start of self to the end of `other`."""
        return SourceSpan(self.file_id, self.line, self.column,
                          other.end_line, other.end_column)


@dataclass(frozen=True)
class AstNode:
    """Base of all syntax tree nodes."""

    span: SourceSpan = field(default=None, compare=False, repr=False,
                             kw_only=True)

    @property
    def parent(self):
        return getattr(self, '_parent', None)

    def children(self):
        """Yield child nodes in source order."""
        for f in fields(self):
            if not f.compare:
                continue
            value = getattr(self, f.name)
            if isinstance(value, AstNode):
                yield value
            elif isinstance(value, tuple):
                for item in value:
                    if isinstance(item, AstNode):
                        yield item


@dataclass(frozen=True)
class Stmt(AstNode):
    pass


@dataclass(frozen=True)
class Expr(AstNode):
    pass


# ----------------------------------------------------------
# Declarations

@dataclass(frozen=True)
class CompilationUnit(AstNode):
    file_id: str
    type_decls: tuple = ()


@dataclass(frozen=True)
class TypeDecl(AstNode):
    name: str
    methods: tuple = ()


@dataclass(frozen=True)
class Param(AstNode):
    type_name: object
    name: object


@dataclass(frozen=True)
class MethodDecl(AstNode):
    name: str
    params: tuple
    body: 'Block'
    # Empty for constructors.
    return_type: str = ''


# ----------------------------------------------------------
# Statements

@dataclass(frozen=True)
class Block(Stmt):
    stmts: tuple = ()


@dataclass(frozen=True)
class VarDecl(Stmt):
    type_name: object
    name: object
    init: Expr = None


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    else_: Stmt = None


@dataclass(frozen=True)
class CatchClause(AstNode):
    exception_type: object
    binding: object
    body: Block


@dataclass(frozen=True)
class Try(Stmt):
    body: Block
    catches: tuple = ()
    finally_: Block = None
    # Tokens of a try-with-resources header.
    resources: tuple = ()


@dataclass(frozen=True)
class Loop(Stmt):
    """A for, while or do statement with an opaque header."""

    keyword: str
    header: tuple
    body: Stmt
    header_text: str = field(default='', compare=False)


@dataclass(frozen=True)
class Switch(Stmt):
    tokens: tuple
    text: str = field(default='', compare=False)


@dataclass(frozen=True)
class Return(Stmt):
    value: Expr = None


@dataclass(frozen=True)
class Throw(Stmt):
    value: Expr


@dataclass(frozen=True)
class OpaqueStmt(Stmt):
    """Statement outside the supported subset, kept verbatim."""

    tokens: tuple
    text: str = field(default='', compare=False)


# ----------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class MethodCall(Expr):
    receiver: Expr
    name: object
    args: tuple = ()


@dataclass(frozen=True)
class FieldAccess(Expr):
    receiver: Expr
    name: object


@dataclass(frozen=True)
class Identifier(Expr):
    name: str


@dataclass(frozen=True)
class Literal(Expr):
    kind: str
    lexeme: str


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr
    postfix: bool = False


@dataclass(frozen=True)
class Assignment(Expr):
    target: Expr
    value: Expr
    op: str = '='


@dataclass(frozen=True)
class Cast(Expr):
    type_name: object
    operand: Expr


@dataclass(frozen=True)
class ObjectCreation(Expr):
    type_name: object
    args: tuple = ()


@dataclass(frozen=True)
class ArrayAccess(Expr):
    array: Expr
    index: Expr


@dataclass(frozen=True)
class Conditional(Expr):
    cond: Expr
    then: Expr
    else_: Expr


@dataclass(frozen=True)
class OpaqueExpr(Expr):
    """Lambda, method reference, array creation or anonymous class."""

    tokens: tuple
    text: str = field(default='', compare=False)


# ----------------------------------------------------------
# Pattern-only node kinds

@dataclass(frozen=True)
class IdentWildcard(Expr):
    """
    Identifier abstracted by the any/some/other prefix convention.

    With `quoted` set the wildcard was written as a string literal
    (``"someParam"``) and matches string literals.
    """

    name: str
    quoted: bool = False

    @property
    def anonymous(self):
        return self.name == 'any'


@dataclass(frozen=True)
class ExprAny(Expr):
    """The bare token ``any`` in expression position."""


@dataclass(frozen=True)
class StmtEllipsis(Stmt):
    """``...``: any statement sequence, or any argument sequence."""


@dataclass(frozen=True)
class TypeAny(AstNode):
    """Type name starting with ``Any``, e.g. ``AnyException``."""

    name: str


@dataclass(frozen=True)
class AnchorHole(Stmt):
    """
    Position of the anchor inside an enclosing pattern.

    Matches a source statement that contains the anchor node, provided
    `pattern` matches the anchor node itself.
    """

    pattern: Stmt


# ----------------------------------------------------------
# Navigation

def link_parents(root):
    """Attach parent links below `root` and return it."""
    stack = [root]
    while stack:
        node = stack.pop()
        for child in node.children():
            object.__setattr__(child, '_parent', node)
            stack.append(child)
    return root


def walk(node):
    """Yield `node` and all its descendants in pre-order."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(n.children())))


def ancestors(node):
    """
    Return the ancestors of `node`, inner to outer.

    The chain ends with the enclosing MethodDecl, inclusive.
    Methods, types and compilation units have no ancestors.

    Parameters
    ----------
    node : AstNode
        A node of a tree linked by :func:`link_parents`.

    Returns
    -------
    chain : list of AstNode

    """
    if isinstance(node, (MethodDecl, TypeDecl, CompilationUnit)):
        return []
    chain = []
    p = node.parent
    while p is not None:
        chain.append(p)
        if isinstance(p, MethodDecl):
            break
        p = p.parent
    return chain


def enclosing_method(node):
    """Return the MethodDecl containing `node`, or None."""
    for a in ancestors(node):
        if isinstance(a, MethodDecl):
            return a
    return None


def node_count(node):
    return sum(1 for _ in walk(node))


# ----------------------------------------------------------
# Pretty printing

IND = '    '


def pretty_print(node):
    """
    Return the canonical Java rendering of `node`.

    Opaque statements and expressions are rendered verbatim.
    Parsing the output gives back a structurally equal tree.

    Examples
    --------
    >>> from patlock.javaparser import parse_expression
    >>> pretty_print(parse_expression('Integer . parseInt( s )'))
    'Integer.parseInt(s)'

    """
    if isinstance(node, Stmt):
        return _stmt(node, 0)
    if isinstance(node, Expr):
        return _expr(node)
    return _decl(node, 0)


def name_text(slot):
    """Return the text of a name slot (identifier, type name or wildcard)."""
    if isinstance(slot, IdentWildcard):
        return '"{}"'.format(slot.name) if slot.quoted else slot.name
    if isinstance(slot, TypeAny):
        return slot.name
    return slot


@functools.singledispatch
def _decl(node, level):
    raise TypeError('cannot print {}'.format(type(node).__name__))


@_decl.register
def _(node: CompilationUnit, level):
    return '\n\n'.join(_decl(t, level) for t in node.type_decls) + '\n'


@_decl.register
def _(node: TypeDecl, level):
    body = ''.join(IND*(level + 1) + _decl(m, level + 1) + '\n'
                   for m in node.methods)
    return 'class {} {{\n{}{}}}'.format(node.name, body, IND*level)


@_decl.register
def _(node: MethodDecl, level):
    params = ', '.join(_decl(p, level) for p in node.params)
    head = '{}({}) '.format(node.name, params)
    if node.return_type:
        head = node.return_type + ' ' + head
    return head + _stmt(node.body, level)


@_decl.register
def _(node: Param, level):
    return '{} {}'.format(name_text(node.type_name), name_text(node.name))


@_decl.register
def _(node: CatchClause, level):
    return 'catch ({} {}) {}'.format(name_text(node.exception_type),
                                     name_text(node.binding),
                                     _stmt(node.body, level))


@_decl.register
def _(node: TypeAny, level):
    return node.name


@functools.singledispatch
def _stmt(node, level):
    raise TypeError('cannot print {}'.format(type(node).__name__))


@_stmt.register
def _(node: Block, level):
    if not node.stmts:
        return '{\n' + IND*level + '}'
    inner = ''.join(IND*(level + 1) + _stmt(s, level + 1) + '\n'
                    for s in node.stmts)
    return '{\n' + inner + IND*level + '}'


def _branch(node, level):
    if isinstance(node, Block):
        return ' ' + _stmt(node, level)
    return '\n' + IND*(level + 1) + _stmt(node, level + 1)


@_stmt.register
def _(node: VarDecl, level):
    text = '{} {}'.format(name_text(node.type_name), name_text(node.name))
    if node.init is not None:
        text += ' = ' + _expr(node.init)
    return text + ';'


@_stmt.register
def _(node: ExprStmt, level):
    return _expr(node.expr) + ';'


@_stmt.register
def _(node: If, level):
    text = 'if ({}){}'.format(_expr(node.cond), _branch(node.then, level))
    if node.else_ is not None:
        if isinstance(node.then, Block):
            text += ' else'
        else:
            text += '\n' + IND*level + 'else'
        if isinstance(node.else_, If):
            text += ' ' + _stmt(node.else_, level)
        else:
            text += _branch(node.else_, level)
    return text


@_stmt.register
def _(node: Try, level):
    text = 'try '
    if node.resources:
        text += '({}) '.format(' '.join(node.resources))
    text += _stmt(node.body, level)
    for c in node.catches:
        text += ' ' + _decl(c, level)
    if node.finally_ is not None:
        text += ' finally ' + _stmt(node.finally_, level)
    return text


@_stmt.register
def _(node: Loop, level):
    header = node.header_text or ' '.join(node.header)
    if node.keyword == 'do':
        return 'do{} while ({});'.format(_branch(node.body, level), header)
    return '{} ({}){}'.format(node.keyword, header, _branch(node.body, level))


@_stmt.register
def _(node: Switch, level):
    return node.text or ' '.join(node.tokens)


@_stmt.register
def _(node: Return, level):
    if node.value is None:
        return 'return;'
    return 'return {};'.format(_expr(node.value))


@_stmt.register
def _(node: Throw, level):
    return 'throw {};'.format(_expr(node.value))


@_stmt.register
def _(node: OpaqueStmt, level):
    return node.text or ' '.join(node.tokens)


@_stmt.register
def _(node: StmtEllipsis, level):
    return '...'


@_stmt.register
def _(node: AnchorHole, level):
    return _stmt(node.pattern, level)


_PRIMARY = (Identifier, Literal, MethodCall, FieldAccess, ArrayAccess,
            ObjectCreation, IdentWildcard, ExprAny, StmtEllipsis)


def _primary(e):
    if isinstance(e, _PRIMARY):
        return _expr(e)
    return '(' + _expr(e) + ')'


def _operand(e):
    if isinstance(e, (Binary, Assignment, Conditional, OpaqueExpr)):
        return '(' + _expr(e) + ')'
    return _expr(e)


def _unary_operand(e):
    if isinstance(e, (Binary, Assignment, Conditional, OpaqueExpr, Unary,
                      Cast)):
        return '(' + _expr(e) + ')'
    return _expr(e)


@functools.singledispatch
def _expr(node):
    raise TypeError('cannot print {}'.format(type(node).__name__))


@_expr.register
def _(node: MethodCall):
    args = ', '.join(_expr(a) for a in node.args)
    call = '{}({})'.format(name_text(node.name), args)
    if node.receiver is None:
        return call
    return _primary(node.receiver) + '.' + call


@_expr.register
def _(node: FieldAccess):
    return _primary(node.receiver) + '.' + name_text(node.name)


@_expr.register
def _(node: Identifier):
    return node.name


@_expr.register
def _(node: Literal):
    return node.lexeme


@_expr.register
def _(node: Binary):
    return '{} {} {}'.format(_operand(node.lhs), node.op, _operand(node.rhs))


@_expr.register
def _(node: Unary):
    if node.postfix:
        return _primary(node.operand) + node.op
    return node.op + _unary_operand(node.operand)


@_expr.register
def _(node: Assignment):
    return '{} {} {}'.format(_expr(node.target), node.op, _expr(node.value))


@_expr.register
def _(node: Cast):
    return '({}) {}'.format(name_text(node.type_name),
                            _unary_operand(node.operand))


@_expr.register
def _(node: ObjectCreation):
    args = ', '.join(_expr(a) for a in node.args)
    return 'new {}({})'.format(name_text(node.type_name), args)


@_expr.register
def _(node: ArrayAccess):
    return '{}[{}]'.format(_primary(node.array), _expr(node.index))


@_expr.register
def _(node: Conditional):
    return '{} ? {} : {}'.format(_operand(node.cond), _operand(node.then),
                                 _operand(node.else_))


@_expr.register
def _(node: OpaqueExpr):
    return node.text or ' '.join(node.tokens)


@_expr.register
def _(node: IdentWildcard):
    return name_text(node)


@_expr.register
def _(node: ExprAny):
    return 'any'


@_expr.register
def _(node: StmtEllipsis):
    return '...'
