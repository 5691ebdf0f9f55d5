#!/usr/bin/env python3

"""

evaluation
==========

This module contains the evaluation of a rule: the broad search for
candidate sites, the verification ledger of human labels, the
precision and relative recall report and the threshold gate.

Relative recall is measured against the broad search candidate set,
not against every defect of the code base.

"""

import logging
from dataclasses import dataclass, field

from .constants import DEFAULT_MIN_PRECISION, DEFAULT_MIN_RECALL
from .errors import SourceSyntaxError, UnlabeledItemError
from .lexer import tokenize, EOF

logger = logging.getLogger(__name__)

TP = 'TP'
FP = 'FP'
DEFECT = 'DEFECT'
NO_DEFECT = 'NO_DEFECT'
ALERT_LABELS = (TP, FP)
CANDIDATE_LABELS = (DEFECT, NO_DEFECT)

# Label carried over when an item changes side between rule versions.
_AS_CANDIDATE = {TP: DEFECT, FP: NO_DEFECT}
_AS_ALERT = {DEFECT: TP, NO_DEFECT: FP}


@dataclass(frozen=True)
class CandidateSet:
    query: str
    hits: tuple = ()

    def to_json(self):
        return {'query': self.query,
                'hits': [{'file': f, 'line': l} for f, l in self.hits]}


@dataclass(frozen=True)
class VerificationLedger:
    """
    Human verification labels keyed by (file, line).

    Parameters
    ----------
    alert_labels : dict
        (file, line) to 'TP' or 'FP'.
    candidate_labels : dict
        (file, line) to 'DEFECT' or 'NO_DEFECT', for broad search
        candidates the rule does not alert.

    """

    alert_labels: dict = field(default_factory=dict)
    candidate_labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, label in self.alert_labels.items():
            if label not in ALERT_LABELS:
                raise ValueError('invalid alert label {!r} at {}:{}'.format(
                    label, *key))
        for key, label in self.candidate_labels.items():
            if label not in CANDIDATE_LABELS:
                raise ValueError(
                    'invalid candidate label {!r} at {}:{}'.format(label, *key))
        common = set(self.alert_labels) & set(self.candidate_labels)
        if common:
            raise ValueError('labelled both as alert and candidate: {}'.format(
                ', '.join('{}:{}'.format(f, l) for f, l in sorted(common))))

    def alert_label(self, key):
        """Label of an alerted item, or None."""
        if key in self.alert_labels:
            return self.alert_labels[key]
        return _AS_ALERT.get(self.candidate_labels.get(key))

    def candidate_label(self, key):
        """Label of a non-alerted candidate, or None."""
        if key in self.candidate_labels:
            return self.candidate_labels[key]
        return _AS_CANDIDATE.get(self.alert_labels.get(key))

    @classmethod
    def from_json(cls, data):
        def labels(items):
            return {(d['file'], int(d['line'])): d['label'] for d in items}
        return cls(labels(data.get('alerts', [])),
                   labels(data.get('candidates', [])))

    def to_json(self):
        def items(labels):
            return [{'file': f, 'line': l, 'label': labels[(f, l)]}
                    for f, l in sorted(labels)]
        return {'alerts': items(self.alert_labels),
                'candidates': items(self.candidate_labels)}


@dataclass(frozen=True)
class EvalReport:
    rule_name: str
    corpus_id: str
    tp: int
    fp: int
    fn: int
    tn: int
    alerts: int
    candidates: int

    @property
    def precision(self):
        """tp / (tp + fp), None when no alert was labelled."""
        if self.tp + self.fp == 0:
            return None
        return self.tp / (self.tp + self.fp)

    @property
    def relative_recall(self):
        """tp / (tp + fn), None when no defect is known."""
        if self.tp + self.fn == 0:
            return None
        return self.tp / (self.tp + self.fn)

    def to_json(self):
        return {'rule': self.rule_name, 'corpus': self.corpus_id,
                'tp': self.tp, 'fp': self.fp, 'fn': self.fn, 'tn': self.tn,
                'alerts': self.alerts, 'candidates': self.candidates,
                'precision': self.precision,
                'relative_recall': self.relative_recall}

    @classmethod
    def from_json(cls, d):
        return cls(d.get('rule', ''), d.get('corpus', ''), d['tp'], d['fp'],
                   d['fn'], d['tn'], d.get('alerts', d['tp'] + d['fp']),
                   d.get('candidates', 0))


@dataclass(frozen=True)
class GateVerdict:
    passed: bool
    reasons: tuple = ()

    def to_json(self):
        return {'passed': self.passed, 'reasons': list(self.reasons)}


def format_ratio(value):
    if value is None:
        return 'undefined'
    return '{:.1f}%'.format(100 * value)


def format_report(report):
    lines = ['Rule: {}'.format(report.rule_name or '-'),
             'Corpus: {}'.format(report.corpus_id or '-'),
             'Alerts: {:d} (TP {:d}, FP {:d})'.format(
                 report.alerts, report.tp, report.fp),
             'Candidates not alerted: {:d} (defects {:d}, no defects {:d})'
             .format(report.fn + report.tn, report.fn, report.tn),
             'Precision: {}'.format(format_ratio(report.precision)),
             'Relative recall: {}'.format(format_ratio(report.relative_recall))]
    return '\n'.join(lines) + '\n'


def _query_tokens(query):
    tokens = [t for t in tokenize(query, '<query>') if t.kind != EOF]
    return [(t.kind, t.text) for t in tokens]


def broad_search(query, files):
    """
    Return every line whose tokens contain the query tokens.

    The query is tokenized like source, so ``Integer.parseInt`` also
    hits ``Integer . parseInt``. Comments and literals never hit.

    Parameters
    ----------
    query : str
    files : dict
        file_id to source text.

    Returns
    -------
    candidates : CandidateSet
        Hits are unique and sorted; a hit is located at the line of
        the first query token.

    """
    wanted = _query_tokens(query) if query.strip() else []
    if not wanted:
        raise ValueError('empty broad search query')
    n = len(wanted)
    hits = set()
    for file_id in sorted(files):
        try:
            tokens = tokenize(files[file_id], file_id)
        except SourceSyntaxError as exc:
            logger.warning('broad search skips %s: %s', file_id, exc)
            continue
        pairs = [(t.kind, t.text) for t in tokens]
        for i in range(len(pairs) - n + 1):
            if pairs[i:i + n] == wanted:
                hits.add((file_id, tokens[i].line))
    logger.info('broad search %r: %d hit(s)', query, len(hits))
    return CandidateSet(query, tuple(sorted(hits)))


def evaluate(alerts, candidates, ledger, rule_name='', corpus_id=''):
    """
    Count labelled alerts and candidates into an evaluation report.

    Parameters
    ----------
    alerts : list of Alert
    candidates : CandidateSet
    ledger : VerificationLedger
    rule_name, corpus_id : str
        Copied into the report.

    Returns
    -------
    report : EvalReport

    Raises
    ------
    UnlabeledItemError
        Listing every alert or non-alerted candidate without a label.

    """
    tp = fp = fn = tn = 0
    missing = set()
    alerted = set()
    for a in alerts:
        key = a.location
        alerted.add(key)
        label = ledger.alert_label(key)
        if label is None:
            missing.add(key)
        elif label == TP:
            tp += 1
        else:
            fp += 1
    others = [key for key in candidates.hits if key not in alerted]
    for key in others:
        label = ledger.candidate_label(key)
        if label is None:
            missing.add(key)
        elif label == DEFECT:
            fn += 1
        else:
            tn += 1
    if missing:
        raise UnlabeledItemError(missing)
    return EvalReport(rule_name, corpus_id, tp, fp, fn, tn, len(alerts),
                      len(candidates.hits))


def _distinct(value, minimum):
    """Fewest decimals, at least two, that tell the numbers apart."""
    for digits in range(2, 18):
        pair = tuple('{:.{}f}'.format(x, digits) for x in (value, minimum))
        if pair[0] != pair[1]:
            return pair
    return repr(value), repr(minimum)


def threshold_gate(report, min_precision=DEFAULT_MIN_PRECISION,
                   min_recall=DEFAULT_MIN_RECALL):
    """
    Decide whether a rule may be deployed.

    Undefined metrics always fail.

    Returns
    -------
    verdict : GateVerdict

    Examples
    --------
    >>> threshold_gate(EvalReport('r', '', 3, 1, 0, 3, 4, 7)).reasons
    ('precision 0.75 < 0.80',)
    >>> threshold_gate(EvalReport('r', '', 799, 201, 0, 0, 1000, 0)).reasons
    ('precision 0.799 < 0.800',)

    """
    reasons = []
    for name, value, minimum in (
            ('precision', report.precision, min_precision),
            ('relative recall', report.relative_recall, min_recall)):
        if value is None:
            reasons.append('{} undefined'.format(name))
        elif value < minimum:
            reasons.append('{} {} < {}'.format(
                name, *_distinct(value, minimum)))
    return GateVerdict(not reasons, tuple(reasons))
