#!/usr/bin/env python3

"""

refine
======

This module contains rule refinement by exclusion contexts.

A context is a positive pattern written in the rule language with a
``//context`` header. One statement is marked ``//anchor``; it stands
for the statement holding the alerted node. An alert is suppressed
when a context matches around its anchor within the same method, with
the wildcards shared by the rule and the context bound alike::

    //context
    someMsg = ValidaUtils.validaInteger(any, someParam);
    ...
    if (someMsg.trim().isEmpty()) {
        //anchor
        Integer.parseInt(someParam);
    }

"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import RuleSyntaxError, RuleSemanticError
from .evaluation import TP
from .matcher import run_rule, match_around
from .pattern_dsl import (split_metadata, parse_pattern_text, replace_node,
                          wildcard_names, parse_rule)
from .readfile import read_json, load_rule
from .source_ast import AnchorHole

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExclusionContext:
    name: str
    description: str
    cause: str
    context_pattern: tuple
    shared_wildcards: frozenset = frozenset()
    anchor: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RefinedRule:
    """A base rule and the exclusion contexts suppressing its alerts."""

    base: object
    exclusions: tuple = ()

    def __post_init__(self):
        names = [c.name for c in self.exclusions]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise RuleSemanticError('duplicate exclusion context {}'.format(
                ', '.join(repr(n) for n in dup)))

    @property
    def name(self):
        return self.base.name


@dataclass(frozen=True)
class DiffReport:
    """
    Alerts of two runs of a rule over the same corpus.

    Lists hold (file, line) pairs in alert order. `before` and `after`
    hold the evaluation reports when metrics were requested.
    """

    removed_alerts: tuple = ()
    retained_alerts: tuple = ()
    removed_true_positives: tuple = ()
    added_alerts: tuple = ()
    before: object = None
    after: object = None

    def to_json(self):
        def pairs(items):
            return [{'file': f, 'line': l} for f, l in items]
        return {
            'removed_alerts': pairs(self.removed_alerts),
            'retained_alerts': pairs(self.retained_alerts),
            'removed_true_positives': pairs(self.removed_true_positives),
            'added_alerts': pairs(self.added_alerts),
            'before': None if self.before is None else self.before.to_json(),
            'after': None if self.after is None else self.after.to_json(),
        }


def shared_wildcards(context, rule):
    """Wildcard names bound by both a context and a rule."""
    ours = set(wildcard_names(context.context_pattern))
    return frozenset(ours & set(wildcard_names(rule.stmts)))


def parse_context(text, name=None, base_rule=None):
    """
    Parse the text of an exclusion context file.

    Parameters
    ----------
    text : str
    name : str, optional
        Used when the metadata has no ``name:`` entry.
    base_rule : PatternRule, optional
        Rule the context refines; fixes the shared wildcards.

    Returns
    -------
    context : ExclusionContext

    Raises
    ------
    RuleSyntaxError, RuleSemanticError

    """
    if not text.strip():
        raise RuleSyntaxError('empty context text')
    metadata, body_text = split_metadata(text)
    cname = metadata.get('name') or name or '<context>'
    snippet = parse_pattern_text(body_text, name or cname)
    if not snippet.stmts:
        raise RuleSyntaxError('context has no pattern statements')

    headers = [s for s in snippet.markups if s.kind == 'context']
    if not headers:
        raise RuleSemanticError('context file must start with //context')
    if len(headers) > 1 or not headers[0].top_level or \
            headers[0].target is not snippet.stmts[0]:
        raise RuleSemanticError('//context must be the file header',
                                headers[-1].span)
    for s in snippet.markups:
        if s.kind in ('Alert', 'not_exists'):
            raise RuleSemanticError(
                '//{} is not valid in a context'.format(
                    'Alert:' if s.kind == 'Alert' else s.kind), s.span)
    anchors = [s for s in snippet.markups if s.kind == 'anchor']
    if len(anchors) != 1:
        raise RuleSemanticError(
            'context needs exactly one //anchor marker, found {:d}'.format(
                len(anchors)), anchors[1].span if anchors else None)
    if anchors[0].target is None:
        raise RuleSemanticError('//anchor must precede a statement',
                                anchors[0].span)
    anchor = anchors[0].target
    pattern = replace_node(snippet.stmts, anchor,
                           AnchorHole(anchor, span=anchor.span))
    context = ExclusionContext(cname, metadata.get('description', ''),
                               metadata.get('cause', ''), tuple(pattern),
                               frozenset(), anchor)
    if base_rule is not None:
        context = replace(context,
                          shared_wildcards=shared_wildcards(context,
                                                            base_rule))
    return context


def refine(base, contexts):
    """Attach contexts to a rule, fixing their shared wildcards."""
    return RefinedRule(base, tuple(
        replace(c, shared_wildcards=shared_wildcards(c, base))
        for c in contexts))


def context_matches(context, node, bindings):
    """
    True if `context` matches around the anchor `node`.

    Only the shared wildcards of `bindings` constrain the context.
    """
    env = {k: v for k, v in bindings.items() if k in context.shared_wildcards}
    return bool(match_around(context.context_pattern, node, env))


def run_refined(rule, units):
    """
    Run a refined rule: base alerts not inside a context match.

    Parameters
    ----------
    rule : RefinedRule
    units : list of CompilationUnit

    Returns
    -------
    alerts : list of Alert

    """
    if not rule.exclusions:
        return run_rule(rule.base, units)

    def suppress(node, bindings):
        return any(context_matches(c, node, bindings)
                   for c in rule.exclusions)

    alerts = run_rule(rule.base, units, suppress=suppress)
    logger.info('refined rule %s with %d context(s): %d alert(s)',
                rule.name, len(rule.exclusions), len(alerts))
    return alerts


def diff_runs(before, after, ledger=None):
    """
    Compare the alerts of a rule before and after refinement.

    Parameters
    ----------
    before, after : list of Alert
    ledger : VerificationLedger, optional
        Labels of the `before` alerts; removed alerts labelled TP are
        reported as removed true positives.

    Returns
    -------
    report : DiffReport

    """
    def key(a):
        return (a.file_id, a.line, a.column)

    after_keys = {key(a) for a in after}
    before_keys = {key(a) for a in before}
    removed = [a.location for a in before if key(a) not in after_keys]
    retained = [a.location for a in before if key(a) in after_keys]
    added = [a.location for a in after if key(a) not in before_keys]
    regressions = []
    if ledger is not None:
        regressions = [loc for loc in removed
                       if ledger.alert_label(loc) == TP]
    return DiffReport(tuple(removed), tuple(retained), tuple(regressions),
                      tuple(added))


def load_context(path, base_rule=None):
    path = Path(path)
    return parse_context(path.read_text(encoding='utf-8'), path.stem,
                         base_rule)


def load_refined(manifest_path):
    """
    Read a refined rule manifest.

    The manifest is JSON ``{"name": ..., "rule": ..., "contexts": [...]}``
    with file paths relative to the manifest.
    """
    manifest_path = Path(manifest_path)
    data = read_json(manifest_path)
    base_dir = manifest_path.parent
    if 'rule' not in data:
        raise RuleSemanticError("{}: manifest has no 'rule' entry".format(
            manifest_path))
    base = load_rule(base_dir / data['rule'])
    if data.get('name'):
        base = replace(base, name=data['name'])
    contexts = [load_context(base_dir / p) for p in data.get('contexts', [])]
    return refine(base, contexts)


def rule_from_text(rule_text, context_texts=(), rule_name=None):
    """Build a refined rule from rule and context texts."""
    base = parse_rule(rule_text, rule_name)
    return refine(base, [parse_context(t, 'context{:d}'.format(k))
                         for k, t in enumerate(context_texts, start=1)])
