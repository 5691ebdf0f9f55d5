#!/usr/bin/env python3

"""

pattern_dsl
===========

This module contains the rule language: Java code examples annotated
with markup comments and written with wildcards.

A rule file holds an optional block of ``#`` metadata lines, an
optional ``//inAnyMethod`` header and a pattern body. One statement is
marked with ``//Alert: message``; matches of it become alerts. A
statement marked ``//not_exists`` that contains the alerted statement
is the negated enclosure: anchors found inside a match of it are not
alerted.

Example, a rule alerting unguarded integer parsing::

    //inAnyMethod
    //not_exists
    try{
        //Alert: Surround Integer.parseInt with a try/catch block
        Integer.parseInt(any);
    }catch(AnyException any){}

"""

import dataclasses
import logging
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import SourceSyntaxError, RuleSyntaxError, RuleSemanticError
from .javaparser import parse_snippet
from .source_ast import (AstNode, Block, ExprStmt, StmtEllipsis, AnchorHole,
                         IdentWildcard, SourceSpan, walk)

logger = logging.getLogger(__name__)

_METADATA_RE = re.compile(
    r'^\s*#\s*(?P<key>[A-Za-z_]+)\s*:\s*(?P<value>.*?)\s*$')


# ----------------------------------------------------------
# Markups

@dataclass(frozen=True)
class Markup:
    span: SourceSpan = field(default=None, compare=False, repr=False,
                             kw_only=True)


@dataclass(frozen=True)
class InAnyMethod(Markup):
    """Rule scope: every method body."""


@dataclass(frozen=True)
class NotExists(Markup):
    """Prefixes the negated enclosure statement."""


@dataclass(frozen=True)
class AlertMarker(Markup):
    """Prefixes the anchor statement."""

    message: str


@dataclass(frozen=True)
class ContextMarker(Markup):
    """Header of an exclusion context file."""


@dataclass(frozen=True)
class AnchorMarker(Markup):
    """Prefixes the anchor position of an exclusion context."""


_MARKUP_CLASSES = {
    'inAnyMethod': InAnyMethod,
    'not_exists': NotExists,
    'context': ContextMarker,
    'anchor': AnchorMarker,
}


def make_markup(site):
    if site.kind == 'Alert':
        return AlertMarker(site.message, span=site.span)
    return _MARKUP_CLASSES[site.kind](span=site.span)


# ----------------------------------------------------------
# Rules

@dataclass(frozen=True)
class PatternRule:
    """
    A parsed rule.

    Attributes
    ----------
    name : str
    scope : Markup
        Always InAnyMethod.
    alert_message : str
    anchor : Stmt
        The statement following the alert markup. An expression
        statement anchors on its expression.
    negated_enclosure : Stmt or None
        The not_exists statement, with the anchor replaced by an
        AnchorHole.
    body : tuple of Stmt
        Top-level statements with the negated enclosure (or, without
        one, the anchor) replaced by an AnchorHole.
    stmts : tuple of Stmt
        Top-level statements as written.
    markups : tuple of Markup
    doc : str or None
        Catalog entry named in the metadata.

    """

    name: str
    scope: Markup
    alert_message: str
    anchor: object
    negated_enclosure: object = None
    body: tuple = ()
    stmts: tuple = ()
    markups: tuple = ()
    doc: str = None

    @property
    def anchor_pattern(self):
        """Pattern matched against candidate nodes."""
        if isinstance(self.anchor, ExprStmt):
            return self.anchor.expr
        return self.anchor

    @property
    def positive_body(self):
        """True if the body constrains more than the anchor itself."""
        return not (len(self.body) == 1 and
                    isinstance(self.body[0], AnchorHole))

    def without_enclosure(self):
        """Return the rule with its negated enclosure dropped."""
        return dataclasses.replace(self, negated_enclosure=None)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: SourceSpan = None

    def __str__(self):
        where = ''
        if self.span is not None:
            where = '{}:{:d}:{:d}: '.format(self.span.file_id, self.span.line,
                                           self.span.column)
        return '{}{}: {}'.format(where, self.severity, self.message)


def split_metadata(text):
    """
    Separate leading ``#`` metadata lines from a rule text.

    Metadata lines are blanked so line numbers stay unchanged.

    Returns
    -------
    metadata : dict
    body : str

    """
    lines = text.split('\n')
    metadata = {}
    for k, line in enumerate(lines):
        if not line.strip():
            continue
        m = _METADATA_RE.match(line)
        if m is None:
            if line.lstrip().startswith('#'):
                lines[k] = ''
                continue
            break
        metadata[m.group('key')] = m.group('value')
        lines[k] = ''
    return metadata, '\n'.join(lines)


def parse_pattern_text(text, name):
    """
    Parse pattern text into top-level statements and markup sites.

    Raises
    ------
    RuleSyntaxError

    """
    try:
        snippet = parse_snippet(text, file_id=name, pattern=True)
    except SourceSyntaxError as exc:
        raise RuleSyntaxError(exc.message, exc.span) from exc
    return snippet


def replace_node(tree, target, replacement):
    """
    Return `tree` with the node `target` (by identity) replaced.

    Works on pattern trees and on tuples of them.
    """
    if tree is target:
        return replacement
    if isinstance(tree, tuple):
        return tuple(replace_node(t, target, replacement) for t in tree)
    if not isinstance(tree, AstNode):
        return tree
    changes = {}
    for f in dataclasses.fields(tree):
        if not f.compare:
            continue
        value = getattr(tree, f.name)
        new = replace_node(value, target, replacement)
        if new is not value:
            changes[f.name] = new
    if not changes:
        return tree
    return dataclasses.replace(tree, **changes)


def contains(tree, target):
    """True if `target` (by identity) occurs in `tree`."""
    if isinstance(tree, tuple):
        return any(contains(t, target) for t in tree)
    return isinstance(tree, AstNode) and any(n is target for n in walk(tree))


def _sites(snippet, kind):
    return [s for s in snippet.markups if s.kind == kind]


def parse_rule(text, rule_name=None):
    """
    Parse the text of a rule file.

    Parameters
    ----------
    text : str
    rule_name : str, optional
        Used when the metadata has no ``name:`` entry.

    Returns
    -------
    rule : PatternRule

    Raises
    ------
    RuleSyntaxError
        Text that does not follow the pattern grammar.
    RuleSemanticError
        Misplaced or missing markup comments.

    """
    if not text.strip():
        raise RuleSyntaxError('empty rule text')
    metadata, body_text = split_metadata(text)
    name = metadata.get('name') or rule_name or '<rule>'
    file_id = rule_name or name
    snippet = parse_pattern_text(body_text, file_id)
    if not snippet.stmts:
        raise RuleSyntaxError('rule has no pattern statements')

    for kind, what in (('context', '//context'), ('anchor', '//anchor')):
        sites = _sites(snippet, kind)
        if sites:
            raise RuleSemanticError(
                '{} is only valid in context files'.format(what),
                sites[0].span)

    alerts = _sites(snippet, 'Alert')
    if not alerts:
        raise RuleSemanticError('rule has no //Alert: marker')
    if len(alerts) > 1:
        raise RuleSemanticError(
            'rule has {:d} //Alert: markers, exactly one is allowed'
            .format(len(alerts)), alerts[1].span)
    alert = alerts[0]
    if not alert.message:
        raise RuleSemanticError('alert message is empty', alert.span)
    if alert.target is None:
        raise RuleSemanticError('//Alert: must precede a statement',
                                alert.span)
    anchor = alert.target

    scopes = _sites(snippet, 'inAnyMethod')
    if len(scopes) > 1:
        raise RuleSemanticError('repeated //inAnyMethod', scopes[1].span)
    if scopes and not (scopes[0].top_level and
                       scopes[0].target is snippet.stmts[0]):
        raise RuleSemanticError('//inAnyMethod must be in the rule header',
                                scopes[0].span)

    negations = _sites(snippet, 'not_exists')
    if len(negations) > 1:
        raise RuleSemanticError('nested or repeated //not_exists',
                                negations[1].span)
    hole = AnchorHole(anchor, span=anchor.span)
    enclosure = None
    if negations:
        negation = negations[0]
        if negation.target is None:
            raise RuleSemanticError('//not_exists must precede a statement',
                                    negation.span)
        if negation.target is anchor or not contains(negation.target,
                                                     anchor):
            raise RuleSemanticError(
                'the //Alert: statement must be inside the //not_exists '
                'statement', alert.span)
        enclosure = replace_node(negation.target, anchor, hole)
        body = replace_node(snippet.stmts, negation.target, hole)
    else:
        body = replace_node(snippet.stmts, anchor, hole)

    markups = tuple(make_markup(s) for s in snippet.markups)
    scope = next((m for m in markups if isinstance(m, InAnyMethod)),
                 InAnyMethod())
    rule = PatternRule(name, scope, alert.message, anchor, enclosure,
                       tuple(body), snippet.stmts, markups,
                       metadata.get('doc'))
    logger.debug('parsed rule %s', name)
    return rule


def is_floating(stmts, top_level=False):
    """
    True if a statement sequence pattern matches as a window.

    The top-level sequence and every block holding the anchor hole
    get implicit ellipses at both ends.
    """
    return top_level or contains_hole(stmts)


def contains_hole(tree):
    if isinstance(tree, tuple):
        return any(contains_hole(t) for t in tree)
    return isinstance(tree, AstNode) and \
        any(isinstance(n, AnchorHole) for n in walk(tree))


def wildcard_names(tree):
    """Count the named (binding) identifier wildcards of a pattern."""
    counts = Counter()
    for stmt in (tree if isinstance(tree, tuple) else (tree,)):
        for n in walk(stmt):
            if isinstance(n, IdentWildcard) and not n.anonymous:
                counts[n.name] += 1
    return counts


def _edge_ellipses(stmts, top_level, diagnostics):
    if not stmts or not is_floating(stmts, top_level):
        return
    first = isinstance(stmts[0], StmtEllipsis)
    last = len(stmts) > 1 and isinstance(stmts[-1], StmtEllipsis)
    if first and last:
        diagnostics.append(Diagnostic(
            'warning', 'ellipsis at both ends of a block is vacuous',
            stmts[0].span))
    elif first or last:
        s = stmts[0] if first else stmts[-1]
        diagnostics.append(Diagnostic(
            'warning', 'redundant ellipsis at the edge of a block', s.span))


def validate_rule(rule):
    """
    Return the diagnostics of a parsed rule.

    Errors re-check what :func:`parse_rule` enforces; warnings flag
    patterns that are valid but probably not what the author meant.

    Parameters
    ----------
    rule : PatternRule

    Returns
    -------
    diagnostics : list of Diagnostic
        Empty for a clean rule.

    """
    diagnostics = []
    if isinstance(rule.anchor, StmtEllipsis):
        diagnostics.append(Diagnostic(
            'error', 'anchor must be a concrete or wildcard statement, '
            'not an ellipsis', rule.anchor.span))
    if not rule.alert_message:
        diagnostics.append(Diagnostic('error', 'alert message is empty'))
    alerts = [m for m in rule.markups if isinstance(m, AlertMarker)]
    if len(alerts) != 1:
        diagnostics.append(Diagnostic(
            'error', 'rule must have exactly one //Alert: marker'))
    if sum(isinstance(m, NotExists) for m in rule.markups) > 1:
        diagnostics.append(Diagnostic('error',
                                      'nested or repeated //not_exists'))
    if rule.negated_enclosure is not None:
        holes = sum(isinstance(n, AnchorHole)
                    for n in walk(rule.negated_enclosure))
        if holes != 1 or isinstance(rule.negated_enclosure, AnchorHole):
            diagnostics.append(Diagnostic(
                'error', 'the //Alert: statement must be inside the '
                '//not_exists statement', rule.negated_enclosure.span))

    spans = {}
    for stmt in rule.stmts:
        for n in walk(stmt):
            if isinstance(n, IdentWildcard) and not n.anonymous:
                spans.setdefault(n.name, n.span)
    for name, count in sorted(wildcard_names(rule.stmts).items()):
        if count == 1:
            diagnostics.append(Diagnostic(
                'warning', "unconstraining wildcard '{}' is used once"
                .format(name), spans[name]))

    _edge_ellipses(rule.body, True, diagnostics)
    for stmt in rule.body:
        for n in walk(stmt):
            if isinstance(n, Block):
                _edge_ellipses(n.stmts, False, diagnostics)
    return diagnostics
