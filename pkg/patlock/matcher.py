#!/usr/bin/env python3

"""

matcher
=======

This module contains the structural matcher of rule patterns against
parsed source, and the alert list it produces.

A pattern matches a node when both have the same node kind and every
field matches. Identifier wildcards bind the identifier they match;
a name bound twice must denote the same lexeme. ``any`` never binds.
Statement and argument sequences match existentially around ``...``.

"""

import dataclasses
import logging
from dataclasses import dataclass, field

from .pattern_dsl import contains_hole
from .source_ast import (
    AstNode, Stmt, Expr, SourceSpan, MethodDecl, Block, ExprStmt, If, Try,
    CatchClause, Identifier, Literal, IdentWildcard, ExprAny, StmtEllipsis,
    TypeAny, AnchorHole, ancestors, walk)

logger = logging.getLogger(__name__)

# Fields holding a name or type instead of an expression.
NAME_FIELDS = frozenset(['name', 'type_name', 'binding', 'exception_type'])

_ELLIPSIS = StmtEllipsis()


@dataclass(frozen=True)
class MatchResult:
    anchor_span: SourceSpan
    bindings: dict = field(default_factory=dict, hash=False)
    enclosing_method: str = ''
    rule_name: str = ''
    node: AstNode = field(default=None, compare=False, repr=False,
                          hash=False)


@dataclass(frozen=True)
class Alert:
    """
    A rule hit.

    Alerts are identified by (rule_name, file_id, line, column); reports
    show the line only.
    """

    rule_name: str
    file_id: str
    line: int
    column: int
    message: str
    match: MatchResult = field(default=None, compare=False, repr=False,
                               hash=False)

    @property
    def location(self):
        return (self.file_id, self.line)

    @property
    def sort_key(self):
        return (self.file_id, self.line, self.column, self.rule_name)

    def to_json(self):
        return {'rule': self.rule_name, 'file': self.file_id,
                'line': self.line, 'column': self.column,
                'message': self.message}

    @classmethod
    def from_json(cls, d):
        return cls(d['rule'], d['file'], int(d['line']), int(d['column']),
                   d['message'])


def _unique(envs):
    seen = set()
    out = []
    for e in envs:
        key = tuple(sorted(e.items()))
        if key not in seen:
            seen.add(key)
            out.append(e)
    return out


def _all_any_catches(catches):
    """Catch-all clauses with empty bodies also accept a try without catches."""
    return all(isinstance(c.exception_type, TypeAny) and not c.body.stmts
               for c in catches)


def _unconstrained(pattern, name, value):
    """True if an absent part of a pattern accepts anything."""
    if isinstance(pattern, If):
        return name == 'else_' and value is None
    if isinstance(pattern, Try):
        if name == 'finally_' and value is None:
            return True
        if name == 'resources' and not value:
            return True
        return name == 'catches' and _all_any_catches(value)
    if isinstance(pattern, CatchClause):
        return name == 'body' and not value.stmts
    return False


class _Matcher:
    """
    Pattern matcher, optionally around one anchor node.

    With an anchor, an AnchorHole matches the statements on the path
    from the anchor up to its method.
    """

    def __init__(self, anchor=None):
        self.anchor = anchor
        self.chain = set()
        if anchor is not None:
            self.chain = {id(anchor)} | {id(a) for a in ancestors(anchor)}

    def match(self, p, node, env):
        if isinstance(p, AnchorHole):
            return self.match_hole(p, node, env)
        if isinstance(p, StmtEllipsis):
            return [env]
        if isinstance(p, ExprAny):
            return [env] if isinstance(node, Expr) else []
        if isinstance(p, IdentWildcard):
            return self.bind(p, node, env)
        if isinstance(p, TypeAny):
            return [env] if isinstance(node, str) else []
        if isinstance(p, Block):
            if isinstance(node, Block):
                stmts = node.stmts
            elif isinstance(node, Stmt):
                stmts = (node,)
            else:
                return []
            return self.match_seq(p.stmts, stmts, env,
                                  floating=contains_hole(p))
        if type(p) is not type(node):
            return []
        envs = [env]
        for f in dataclasses.fields(p):
            if not f.compare:
                continue
            pv = getattr(p, f.name)
            if _unconstrained(p, f.name, pv):
                continue
            nv = getattr(node, f.name)
            envs = _unique([e2 for e in envs
                            for e2 in self.match_value(pv, nv, e)])
            if not envs:
                return []
        return envs

    def match_hole(self, p, node, env):
        if self.anchor is None or not isinstance(node, AstNode) or \
                id(node) not in self.chain:
            return []
        inner = p.pattern
        if isinstance(inner, ExprStmt) and isinstance(self.anchor, Expr):
            inner = inner.expr
        return self.match(inner, self.anchor, env)

    def match_value(self, pv, nv, env):
        if isinstance(pv, AstNode):
            if isinstance(nv, (AstNode, str)):
                return self.match(pv, nv, env)
            return []
        if isinstance(pv, tuple):
            if not isinstance(nv, tuple):
                return []
            return self.match_seq(pv, nv, env)
        return [env] if pv == nv else []

    def bind(self, p, node, env):
        if p.quoted:
            if not (isinstance(node, Literal) and node.kind == 'string'):
                return []
            value = node.lexeme
        elif isinstance(node, Identifier):
            value = node.name
        elif isinstance(node, str):
            value = node
        else:
            return []
        if p.anonymous:
            return [env]
        bound = env.get(p.name)
        if bound is None:
            extended = dict(env)
            extended[p.name] = value
            return [extended]
        return [env] if bound == value else []

    def match_seq(self, pats, nodes, env, floating=False):
        """
        Match a sequence pattern; ``...`` covers any subsequence.

        A floating sequence may match any window of `nodes`.
        """
        pats = tuple(pats)
        if floating:
            if not pats or not isinstance(pats[0], StmtEllipsis):
                pats = (_ELLIPSIS,) + pats
            if not isinstance(pats[-1], StmtEllipsis):
                pats = pats + (_ELLIPSIS,)
        results = []

        def align(i, j, e):
            if i == len(pats):
                if j == len(nodes):
                    results.append(e)
                return
            p = pats[i]
            if isinstance(p, StmtEllipsis):
                for k in range(j, len(nodes) + 1):
                    align(i + 1, k, e)
                return
            if j == len(nodes):
                return
            for e2 in self.match_value(p, nodes[j], e):
                align(i + 1, j + 1, e2)

        align(0, 0, env)
        return _unique(results)


def match_pattern(pattern, node, env=None):
    """
    Match `pattern` rooted exactly at `node`.

    Parameters
    ----------
    pattern : AstNode
        Pattern tree, possibly holding wildcards.
    node : AstNode
    env : dict, optional
        Bindings already made, wildcard name to lexeme.

    Returns
    -------
    bindings : list of dict
        Every extension of `env` under which the pattern matches.
        Empty if it does not match.

    """
    return _Matcher().match(pattern, node, dict(env or {}))


def sequence_containers(anchor):
    """Statement sequences on the path from `anchor` to its method."""
    containers = []
    for a in [anchor] + ancestors(anchor):
        if isinstance(a, Block):
            containers.append(a.stmts)
        elif isinstance(a, Stmt) and not isinstance(a.parent, Block):
            containers.append((a,))
    return containers


def match_around(seq, anchor, env):
    """
    Match a statement sequence holding an AnchorHole around `anchor`.

    The sequence is tried as a window of every statement sequence
    enclosing the anchor within its method.
    """
    m = _Matcher(anchor)
    results = []
    for stmts in sequence_containers(anchor):
        results.extend(m.match_seq(tuple(seq), stmts, env, floating=True))
    return _unique(results)


def enclosure_suppressed(anchor, enclosure, anchor_bindings):
    """
    Return True if an ancestor of `anchor` matches the negated enclosure.

    The enclosure must hold the anchor at its hole. The search never
    leaves the method of the anchor.
    """
    return bool(match_around((enclosure,), anchor, anchor_bindings))


def iter_methods(unit):
    for t in unit.type_decls:
        yield from t.methods


def anchor_candidates(rule, method):
    """Yield nodes of `method` of the kind the rule anchors on."""
    kind = Expr if isinstance(rule.anchor, ExprStmt) else Stmt
    for node in walk(method.body):
        if isinstance(node, kind):
            yield node


def match_anchor(rule, node):
    """
    Return the bindings under which `node` is alerted by `rule`.

    Empty if the node does not match the anchor, the body does not
    match around it, or every binding is suppressed by the enclosure.
    """
    envs = match_pattern(rule.anchor_pattern, node, {})
    if envs and rule.positive_body:
        envs = _unique([e2 for e in envs
                        for e2 in match_around(rule.body, node, e)])
    if envs and rule.negated_enclosure is not None:
        envs = [e for e in envs
                if not enclosure_suppressed(node, rule.negated_enclosure, e)]
    return envs


def run_rule(rule, units, suppress=None):
    """
    Run a rule over compilation units.

    Parameters
    ----------
    rule : PatternRule
    units : list of CompilationUnit
    suppress : callable, optional
        `suppress(node, bindings)` returning True drops that binding
        of an anchor match.

    Returns
    -------
    alerts : list of Alert
        One per anchor position, sorted by (file_id, line, column).

    """
    found = {}
    for unit in units:
        for method in iter_methods(unit):
            for node in anchor_candidates(rule, method):
                envs = match_anchor(rule, node)
                if envs and suppress is not None:
                    envs = [e for e in envs if not suppress(node, e)]
                if not envs:
                    continue
                span = node.span
                key = (unit.file_id, span.line, span.column)
                if key in found:
                    continue
                result = MatchResult(span, envs[0], method.name, rule.name,
                                     node)
                found[key] = Alert(rule.name, unit.file_id, span.line,
                                   span.column, rule.alert_message, result)
    alerts = sorted(found.values(), key=lambda a: a.sort_key)
    logger.info('rule %s: %d alert(s)', rule.name, len(alerts))
    return alerts


def substitute(pattern, bindings):
    """
    Replace bound wildcards of `pattern` by their lexemes.

    Expression positions get an Identifier (or a string Literal for
    quoted wildcards); name positions get the plain lexeme.
    """
    def visit(value, name_slot):
        if isinstance(value, IdentWildcard) and value.name in bindings:
            lexeme = bindings[value.name]
            if name_slot:
                return lexeme
            if value.quoted:
                return Literal('string', lexeme)
            return Identifier(lexeme)
        if isinstance(value, tuple):
            return tuple(visit(v, False) for v in value)
        if not isinstance(value, AstNode):
            return value
        changes = {}
        for f in dataclasses.fields(value):
            if not f.compare:
                continue
            old = getattr(value, f.name)
            new = visit(old, f.name in NAME_FIELDS)
            if new is not old:
                changes[f.name] = new
        return dataclasses.replace(value, **changes) if changes else value
    return visit(pattern, False)


def merge_alerts(runs):
    """Merge alert lists of several rules into one sorted list."""
    return sorted((a for run in runs for a in run), key=lambda a: a.sort_key)


def alerts_to_json(alerts):
    return [a.to_json() for a in alerts]


def alerts_from_json(data):
    return [Alert.from_json(d) for d in data]


def format_alerts(alerts):
    """Plain-text alert table with the columns #Alert, File, Line, Message."""
    rows = [('#Alert', 'File', 'Line', 'Message')]
    for k, a in enumerate(alerts, start=1):
        rows.append((str(k), a.file_id, str(a.line), a.message))
    widths = [max(len(r[c]) for r in rows) for c in range(3)]
    lines = []
    for r in rows:
        lines.append('  '.join(r[c].ljust(widths[c]) for c in range(3)) +
                     '  ' + r[3])
    return '\n'.join(lines) + '\n'
