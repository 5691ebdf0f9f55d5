#!/usr/bin/env python3

"""

cli
===

This module contains the command line front end.

Commands follow the maintenance cycle: ``analyze-log`` groups the
failures of a log, ``scan`` runs rules over Java sources,
``evaluate`` computes precision and relative recall against a
verification ledger, ``gate`` decides on deployment, ``diff``
compares a rule with its refinement and ``catalog lint`` checks the
pattern documentation.

Settings are read from built-in defaults, then a YAML settings file
(``--config``, else ``./patlock_settings.yaml``), then flags.

Exit codes: 0 success, 1 gate failure (or lint findings), 2 malformed
log, 3 unlabeled alerts or candidates, 64 usage error, 65 rule or
data error, 74 I/O error.

"""

import argparse
import dataclasses
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import constants as c
from .catalog import load_catalog, lint_catalog
from .errors import (PatlockError, LogFormatError, UnlabeledItemError,
                     RuleSemanticError)
from .evaluation import (CandidateSet, broad_search, evaluate,
                         threshold_gate, format_report, format_ratio)
from .failures import (parse_log, cluster_failures, clusters_to_json,
                       format_clusters)
from .matcher import (run_rule, merge_alerts, alerts_to_json,
                      format_alerts)
from .pattern_dsl import validate_rule
from .readfile import (read_text, dump_json, read_settings, read_sources,
                       parse_corpus, discover_sources, load_rule,
                       load_alerts, load_report, load_ledger)
from .refine import (RefinedRule, refine, load_context, load_refined,
                     run_refined, diff_runs)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CLIError(Exception):
    """Command failure with an explicit process exit code."""

    message: str
    exit_code: int = c.EXIT_DATAERR

    def __str__(self):
        return self.message


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one command run."""

    source: str = None
    glob: str = c.SOURCE_GLOB
    rules: tuple = ()
    contexts: tuple = ()
    manifest: tuple = ()
    log: str = None
    log_format: str = 'auto'
    ledger: str = None
    alerts: str = None
    query: str = None
    format: str = 'text'
    output: str = None
    min_precision: float = c.DEFAULT_MIN_PRECISION
    min_recall: float = c.DEFAULT_MIN_RECALL
    lenient: bool = False
    min_cluster: int = c.DEFAULT_MIN_CLUSTER
    report: str = None
    before: str = None
    after: str = None
    plot: str = None
    catalog: str = None


# Settings that may hold one path or a list of them.
_LIST_KEYS = ('rules', 'contexts', 'manifest')
# Settings a YAML file may set; the rest are command specific.
SETTINGS_KEYS = frozenset([
    'source', 'glob', 'rules', 'contexts', 'manifest', 'log', 'log_format',
    'ledger', 'alerts', 'query', 'format', 'output', 'min_precision',
    'min_recall', 'lenient', 'min_cluster'])


class _Parser(argparse.ArgumentParser):
    """Argument parser reporting usage errors with exit code 64."""

    def error(self, message):
        raise CLIError('{}: {}'.format(self.prog, message), c.EXIT_USAGE)


# ----------------------------------------------------------
# Configuration

def load_settings(path=None):
    """
    Read the settings file.

    Without `path`, ``patlock_settings.yaml`` in the working directory
    is read if present.
    """
    if path is None:
        default = Path(c.SETTINGS_FILE)
        if not default.is_file():
            return {}
        path = default
    try:
        settings = read_settings(path)
    except FileNotFoundError as exc:
        raise CLIError('settings file not found: {}'.format(path),
                       c.EXIT_IOERR) from exc
    except ValueError as exc:
        raise CLIError(str(exc), c.EXIT_USAGE) from exc
    unknown = sorted(set(settings) - SETTINGS_KEYS)
    if unknown:
        raise CLIError('{}: unknown setting(s) {}'.format(
            path, ', '.join(unknown)), c.EXIT_USAGE)
    logger.debug('settings from %s: %s', path, settings)
    return settings


def resolve_config(args, settings):
    """Layer defaults, settings and flags into a RunConfig."""
    values = {}
    for f in dataclasses.fields(RunConfig):
        value = settings.get(f.name)
        flag = getattr(args, f.name, None)
        if flag is not None and flag != [] and flag is not False:
            value = flag
        if value is None:
            continue
        if f.name in _LIST_KEYS:
            value = tuple([value] if isinstance(value, str) else value)
        values[f.name] = value
    try:
        config = RunConfig(**values)
        min_precision = float(config.min_precision)
        min_recall = float(config.min_recall)
        min_cluster = int(config.min_cluster)
    except (TypeError, ValueError) as exc:
        raise CLIError('invalid setting: {}'.format(exc), c.EXIT_USAGE)
    for name, value in (('min_precision', min_precision),
                        ('min_recall', min_recall)):
        if not 0 <= value <= 1:
            raise CLIError('{} must lie in [0, 1], got {}'.format(
                name, value), c.EXIT_USAGE)
    if min_cluster < 1:
        raise CLIError('min_cluster must be at least 1', c.EXIT_USAGE)
    if config.format not in ('text', 'json'):
        raise CLIError("format must be 'text' or 'json'", c.EXIT_USAGE)
    return dataclasses.replace(config, min_precision=min_precision,
                               min_recall=min_recall,
                               min_cluster=min_cluster,
                               lenient=bool(config.lenient))


def color_enabled():
    return os.environ.get(c.COLOR_ENV, '').strip().lower() in c.TRUTHY


def _paint(text, code):
    return '\033[{}m{}\033[0m'.format(code, text)


def emit(config, text=None, data=None):
    """Write a command result as JSON or text to stdout or --output."""
    if config.format == 'json':
        out = dump_json(data)
    else:
        out = text
        if color_enabled() and out:
            head, sep, rest = out.partition('\n')
            out = _paint(head, '1') + sep + rest
    if config.output:
        Path(config.output).write_text(out, encoding='utf-8')
    else:
        sys.stdout.write(out)


def _require(config, *names):
    missing = [n for n in names if not getattr(config, n)]
    if missing:
        raise CLIError('missing input: {}'.format(', '.join(
            '--' + n.replace('_', '-') for n in missing)), c.EXIT_USAGE)


# ----------------------------------------------------------
# Shared steps

def _corpus(config):
    _require(config, 'source')
    files = read_sources(config.source, config.glob)
    return files, parse_corpus(files)


def _check(rule):
    base = rule.base if isinstance(rule, RefinedRule) else rule
    for d in validate_rule(base):
        if d.severity == 'error':
            raise RuleSemanticError(str(d))
        logger.warning('%s: %s', base.name, d)
    return rule


def _rules(config, rules=None, manifests=None):
    """Load rules, refined by --context files, and manifests."""
    rules = config.rules if rules is None else rules
    manifests = config.manifest if manifests is None else manifests
    loaded = []
    for path in rules:
        rule = load_rule(path)
        if config.contexts:
            rule = refine(rule, [load_context(p) for p in config.contexts])
        loaded.append(_check(rule))
    for path in manifests:
        loaded.append(_check(load_refined(path)))
    return loaded


def _run(rules, units):
    runs = []
    for rule in rules:
        if isinstance(rule, RefinedRule):
            runs.append(run_refined(rule, units))
        else:
            runs.append(run_rule(rule, units))
    return merge_alerts(runs)


def _alerts_and_files(config):
    """Alerts from --alerts, or from running the rules over --source."""
    if config.alerts:
        alerts = load_alerts(config.alerts)
        files = read_sources(config.source, config.glob) \
            if config.source else {}
        return alerts, files
    if not (config.rules or config.manifest):
        raise CLIError('missing input: --alerts, --rule or --manifest',
                       c.EXIT_USAGE)
    files, units = _corpus(config)
    return _run(_rules(config), units), files


def _rule_label(config, alerts):
    names = sorted({a.rule_name for a in alerts})
    if names:
        return ', '.join(names)
    return ', '.join(Path(p).stem for p in config.rules + config.manifest)


def _evaluate(config, alerts, files):
    _require(config, 'ledger')
    ledger = load_ledger(config.ledger)
    candidates = broad_search(config.query, files) if config.query \
        else CandidateSet('')
    return evaluate(alerts, candidates, ledger, _rule_label(config, alerts),
                    config.source or '')


# ----------------------------------------------------------
# Commands

def cmd_analyze_log(config):
    _require(config, 'log')
    errors = [] if config.lenient else None
    app_files = None
    if config.source:
        app_files = [p.name for _, p in discover_sources(config.source,
                                                         config.glob)]
    records = parse_log(read_text(config.log), config.log_format, errors,
                        app_files)
    clusters = cluster_failures(records, config.min_cluster)
    if config.plot:
        from .plotreport import plot_clusters
        plot_clusters(clusters, config.plot)
    emit(config, format_clusters(records, clusters),
         clusters_to_json(records, clusters, errors or ()))
    return c.EXIT_OK


def cmd_scan(config):
    if not (config.rules or config.manifest):
        raise CLIError('missing input: --rule or --manifest', c.EXIT_USAGE)
    rules = _rules(config)
    _, units = _corpus(config)
    alerts = _run(rules, units)
    emit(config, format_alerts(alerts), alerts_to_json(alerts))
    return c.EXIT_OK


def cmd_evaluate(config):
    alerts, files = _alerts_and_files(config)
    report = _evaluate(config, alerts, files)
    emit(config, format_report(report), report.to_json())
    return c.EXIT_OK


def _format_verdict(verdict, report):
    lines = ['Gate: {}'.format('PASS' if verdict.passed else 'FAIL'),
             'Precision: {}'.format(format_ratio(report.precision)),
             'Relative recall: {}'.format(format_ratio(
                 report.relative_recall))]
    lines.extend('  ' + r for r in verdict.reasons)
    return '\n'.join(lines) + '\n'


def cmd_gate(config):
    if config.report:
        report = load_report(config.report)
    else:
        alerts, files = _alerts_and_files(config)
        report = _evaluate(config, alerts, files)
    verdict = threshold_gate(report, config.min_precision, config.min_recall)
    data = verdict.to_json()
    data['report'] = report.to_json()
    data['min_precision'] = config.min_precision
    data['min_recall'] = config.min_recall
    emit(config, _format_verdict(verdict, report), data)
    return c.EXIT_OK if verdict.passed else c.EXIT_GATE_FAIL


def _format_diff(diff):
    def locs(items):
        return ', '.join('{}:{:d}'.format(f, l) for f, l in items) or '-'
    lines = ['Removed alerts: {:d}'.format(len(diff.removed_alerts)),
             '  ' + locs(diff.removed_alerts),
             'Retained alerts: {:d}'.format(len(diff.retained_alerts)),
             '  ' + locs(diff.retained_alerts),
             'Removed true positives: {:d}'.format(
                 len(diff.removed_true_positives)),
             '  ' + locs(diff.removed_true_positives)]
    if diff.added_alerts:
        lines.append('Added alerts: {:d}'.format(len(diff.added_alerts)))
        lines.append('  ' + locs(diff.added_alerts))
    for label, report in (('before', diff.before), ('after', diff.after)):
        if report is not None:
            lines.append('Precision {}: {}, relative recall {}: {}'.format(
                label, format_ratio(report.precision), label,
                format_ratio(report.relative_recall)))
    return '\n'.join(lines) + '\n'


def cmd_diff(config):
    """Compare the alerts of a rule (before) and a refinement (after)."""
    files = units = None

    def side(path, rules, manifests):
        nonlocal files, units
        if path:
            return load_alerts(path)
        if units is None:
            files, units = _corpus(config)
        return _run(_rules(config, rules, manifests), units)

    if not (config.before or config.rules):
        raise CLIError('missing input: --before or --rule', c.EXIT_USAGE)
    if not (config.after or config.manifest):
        raise CLIError('missing input: --after or --manifest', c.EXIT_USAGE)
    before = side(config.before, config.rules, ())
    after = side(config.after, (), config.manifest)
    ledger = load_ledger(config.ledger) if config.ledger else None
    diff = diff_runs(before, after, ledger)
    if ledger is not None and config.query:
        if files is None:
            files = read_sources(config.source, config.glob) \
                if config.source else {}
        candidates = broad_search(config.query, files)
        diff = dataclasses.replace(
            diff,
            before=evaluate(before, candidates, ledger, 'before',
                            config.source or ''),
            after=evaluate(after, candidates, ledger, 'after',
                           config.source or ''))
        if config.plot:
            from .plotreport import plot_cycle
            plot_cycle([('before', diff.before), ('after', diff.after)],
                       config.plot, config.min_precision, config.min_recall)
    emit(config, _format_diff(diff), diff.to_json())
    return c.EXIT_OK


def cmd_catalog_lint(config):
    _require(config, 'catalog')
    path = config.catalog
    catalog = load_catalog(path)
    diagnostics = lint_catalog(catalog)
    text = ''.join(str(d) + '\n' for d in diagnostics) or \
        'catalog {}: {:d} pattern(s), {:d} context(s), no findings\n'.format(
            path, len(catalog.patterns), len(catalog.contexts))
    emit(config, text, {'diagnostics': [
        {'severity': d.severity, 'message': d.message,
         'location': None if d.span is None else '{}:{:d}:{:d}'.format(
             d.span.file_id, d.span.line, d.span.column)}
        for d in diagnostics]})
    return c.EXIT_GATE_FAIL if diagnostics else c.EXIT_OK


# ----------------------------------------------------------
# Parser

def _common():
    common = _Parser(add_help=False)
    common.add_argument('-v', '--verbose', action='store_true',
                        help='debug logging')
    common.add_argument('-q', '--quiet', action='store_true',
                        help='errors only')
    common.add_argument('--config', help='YAML settings file')
    common.add_argument('--format', choices=('text', 'json'))
    common.add_argument('--output', help='write the result to a file')
    return common


def _add_source(p):
    p.add_argument('--source', help='root of the Java sources')
    p.add_argument('--glob', help='source file pattern below --source')


def _add_rules(p):
    p.add_argument('--rule', dest='rules', action='append', default=[],
                   help='rule file (.scpl), may repeat')
    p.add_argument('--context', dest='contexts', action='append',
                   default=[], help='exclusion context refining --rule')
    p.add_argument('--manifest', action='append', default=[],
                   help='refined rule manifest (JSON), may repeat')


def _add_evaluation(p):
    _add_source(p)
    _add_rules(p)
    p.add_argument('--alerts', help='alert list written by scan --format json')
    p.add_argument('--ledger', help='verification ledger (JSON)')
    p.add_argument('--query', help='broad search query, e.g. Integer.parseInt')


def build_parser():
    common = _common()
    parser = _Parser(prog='patlock',
                     description='Defect pattern mining and rule '
                     'evaluation for Java code bases.')
    sub = parser.add_subparsers(dest='command', required=True,
                                parser_class=_Parser)

    p = sub.add_parser('analyze-log', parents=[common],
                       help='cluster the failures of a log')
    p.add_argument('log', nargs='?', help='failure log (table or traces)')
    p.add_argument('--log-format', choices=('auto', 'table', 'trace'))
    p.add_argument('--lenient', action='store_true',
                   help='skip malformed entries')
    p.add_argument('--min-cluster', type=int)
    p.add_argument('--plot', help='save a cluster chart')
    _add_source(p)
    p.set_defaults(handler=cmd_analyze_log)

    p = sub.add_parser('scan', parents=[common], help='run rules')
    _add_source(p)
    _add_rules(p)
    p.set_defaults(handler=cmd_scan)

    p = sub.add_parser('evaluate', parents=[common],
                       help='precision and relative recall')
    _add_evaluation(p)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser('gate', parents=[common],
                       help='check an evaluation against thresholds')
    _add_evaluation(p)
    p.add_argument('--report', help='report written by evaluate --format json')
    p.add_argument('--min-precision', type=float)
    p.add_argument('--min-recall', type=float)
    p.set_defaults(handler=cmd_gate)

    p = sub.add_parser('diff', parents=[common],
                       help='compare a rule with its refinement')
    _add_evaluation(p)
    p.add_argument('--before', help='alert list of the base rule')
    p.add_argument('--after', help='alert list of the refined rule')
    p.add_argument('--min-precision', type=float)
    p.add_argument('--min-recall', type=float)
    p.add_argument('--plot', help='save the improvement cycle chart')
    p.set_defaults(handler=cmd_diff)

    p = sub.add_parser('catalog', help='defect pattern catalog')
    csub = p.add_subparsers(dest='action', required=True,
                            parser_class=_Parser)
    lint = csub.add_parser('lint', parents=[common],
                           help='check catalog documents')
    lint.add_argument('catalog', help='catalog directory or file')
    lint.set_defaults(handler=cmd_catalog_lint)
    return parser


# ----------------------------------------------------------
# Entry points

def exit_code_for(exc):
    """Map an exception raised by a command to a process exit code."""
    if isinstance(exc, CLIError):
        return exc.exit_code
    if isinstance(exc, LogFormatError):
        return c.EXIT_LOG_FORMAT
    if isinstance(exc, UnlabeledItemError):
        return c.EXIT_UNLABELED
    if isinstance(exc, OSError):
        return c.EXIT_IOERR
    return c.EXIT_DATAERR


def _setup_logging(args):
    level = logging.WARNING
    if getattr(args, 'verbose', False):
        level = logging.DEBUG
    elif getattr(args, 'quiet', False):
        level = logging.ERROR
    logging.basicConfig(format='%(levelname)s: %(name)s: %(message)s',
                        stream=sys.stderr, level=level, force=True)


def run_cli(argv=None):
    """Parse argv, run the command and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        _setup_logging(args)
        config = resolve_config(args, load_settings(args.config))
        return args.handler(config)
    except (CLIError, PatlockError, OSError, ValueError) as exc:
        # json.JSONDecodeError and ledger label errors are ValueErrors.
        print('error: {}'.format(exc), file=sys.stderr)
        return exit_code_for(exc)


def main(argv=None):
    return run_cli(argv)


if __name__ == '__main__':
    sys.exit(main())
