#!/usr/bin/env python3

"""

failures
========

This module contains the failure analysis stage: reading failure
logs, normalizing failure messages into templates and clustering
failures that share an exception type and a message template.

Two log formats are read. The table format is CSV or TSV with one
failure per row::

    #Failure	File Name	Line	Exception Type	Error Message
    1	BuscaTermoAditivoServlet	49	java.lang.NumberFormatException	For input string: ""

The trace format is raw Java stack traces; the failure location is
taken from the first frame inside the analyzed application.

"""

import csv
import io
import logging
import posixpath
import re
from dataclasses import dataclass

from .constants import PLACEHOLDER, DEFAULT_MIN_CLUSTER
from .errors import LogFormatError

logger = logging.getLogger(__name__)

# Parameters of failure messages: double-quoted text, bracketed text,
# standalone numbers, and placeholders already in place.
_PARAM_RE = re.compile(
    r'"(?P<quoted>[^"]*)"'
    r'|\[(?P<bracketed>[^\]]*)\]'
    r'|(?<![\w.])(?P<number>-?\d+(?:\.\d+)?)(?![\w.])'
    r'|(?P<placeholder>' + re.escape(PLACEHOLDER) + ')')

_EXCEPTION_RE = re.compile(
    r'^(?:Exception in thread "[^"]*" )?'
    r'(?P<type>[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*'
    r'(?:Exception|Error|Throwable))'
    r'(?::\s?(?P<message>.*))?$')
_QUALIFIED_RE = re.compile(
    r'^(?P<type>[a-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)+)(?::\s?(?P<message>.*))?$')
_FRAME_RE = re.compile(
    r'^\s+at\s+(?P<where>[^\s(]+)\((?P<file>[^:()]+)(?::(?P<line>\d+))?\)')
_MORE_RE = re.compile(r'^\s+\.\.\. \d+ (?:more|common frames omitted)')
_CAUSED_RE = re.compile(r'^(?:Caused by|Suppressed): ')
# Frames of these packages never locate an application failure.
PLATFORM_PACKAGES = ('java.', 'javax.', 'jdk.', 'sun.', 'com.sun.',
                     'org.apache.catalina.', 'org.apache.tomcat.',
                     'org.apache.coyote.', 'org.springframework.')

_HEADER_ALIASES = {
    'failure': 'id',
    'id': 'id',
    'file_name': 'file',
    'file': 'file',
    'line': 'line',
    'exception_type': 'exception_type',
    'exception': 'exception_type',
    'error_message': 'message',
    'message': 'message',
}


@dataclass(frozen=True)
class FailureRecord:
    id: int
    file: str
    line: int
    exception_type: str
    message: str = ''

    def to_json(self):
        return {'id': self.id, 'file': self.file, 'line': self.line,
                'exception_type': self.exception_type,
                'message': self.message}


@dataclass(frozen=True)
class MessageTemplate:
    template: str
    params: tuple = ()

    def render(self):
        """Substitute the parameters back into the template."""
        pieces = self.template.split(PLACEHOLDER)
        out = [pieces[0]]
        for param, piece in zip(self.params, pieces[1:]):
            out.append(param)
            out.append(piece)
        return ''.join(out)


@dataclass(frozen=True)
class FailureCluster:
    key: tuple
    members: tuple
    is_pattern_candidate: bool

    @property
    def exception_type(self):
        return self.key[0]

    @property
    def template(self):
        return self.key[1]

    @property
    def size(self):
        return len(self.members)


def normalize_message(message):
    """
    Replace the parameters of a failure message by placeholders.

    Parameters
    ----------
    message : str

    Returns
    -------
    template : MessageTemplate
        `params` lists the replaced values in order of appearance.

    Examples
    --------
    >>> normalize_message('For input string: ""')
    MessageTemplate(template='For input string: "<value>"', params=('',))

    """
    params = []

    def replace(m):
        if m.group('quoted') is not None:
            params.append(m.group('quoted'))
            return '"' + PLACEHOLDER + '"'
        if m.group('bracketed') is not None:
            params.append(m.group('bracketed'))
            return '[' + PLACEHOLDER + ']'
        params.append(m.group())
        return PLACEHOLDER

    template = _PARAM_RE.sub(replace, message)
    return MessageTemplate(template, tuple(params))


def _header_key(name):
    key = name.strip().lstrip('#').strip().lower().replace(' ', '_')
    return _HEADER_ALIASES.get(key)


def _fail(exc, errors):
    if errors is None:
        raise exc
    logger.warning('skipping malformed log entry: %s', exc)
    errors.append(exc)


def _parse_table(text, errors):
    lines = text.splitlines()
    first = next(k for k, l in enumerate(lines) if l.strip())
    header_line = lines[first]
    if '\t' in header_line:
        reader = csv.reader(io.StringIO('\n'.join(lines[first:])),
                            delimiter='\t', quoting=csv.QUOTE_NONE)
    else:
        reader = csv.reader(io.StringIO('\n'.join(lines[first:])))
    header = next(reader)
    columns = [_header_key(h) for h in header]
    for name in ('file', 'line', 'exception_type'):
        if name not in columns:
            raise LogFormatError("missing column '{}'".format(name),
                                 first + 1)
    records = []
    seen = set()
    row_number = 0
    last_line = reader.line_num
    for row in reader:
        start = first + last_line + 1
        last_line = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        row_number += 1
        if len(row) > len(columns):
            _fail(LogFormatError('expected {:d} fields, found {:d}'.format(
                len(columns), len(row)), start), errors)
            continue
        values = dict(zip(columns, row))
        try:
            record = _table_record(values, row_number, start)
        except LogFormatError as exc:
            _fail(exc, errors)
            continue
        if record.id in seen:
            _fail(LogFormatError('duplicate failure id {:d}'.format(
                record.id), start), errors)
            continue
        seen.add(record.id)
        records.append(record)
    return records


def _table_record(values, row_number, line_number):
    id_text = values.get('id', '').strip() if 'id' in values else ''
    try:
        rid = int(id_text) if id_text else row_number
    except ValueError:
        raise LogFormatError('invalid failure id {!r}'.format(id_text),
                             line_number)
    line_text = (values.get('line') or '').strip()
    try:
        line = int(line_text)
    except ValueError:
        raise LogFormatError('invalid line {!r}'.format(line_text),
                             line_number)
    if line < 1:
        raise LogFormatError('line must be >= 1', line_number)
    exception_type = (values.get('exception_type') or '').strip()
    if not exception_type:
        raise LogFormatError('empty exception type', line_number)
    file_name = (values.get('file') or '').strip()
    if not file_name:
        raise LogFormatError('empty file name', line_number)
    return FailureRecord(rid, file_name, line, exception_type,
                         values.get('message') or '')


def _strip_java(file_name):
    if file_name.endswith('.java'):
        return file_name[:-len('.java')]
    return file_name


def _select_frame(frames, app_files):
    """
    Pick the frame locating a failure.

    The first frame in one of `app_files`; without them, the first
    frame outside the platform packages; else the topmost frame.
    """
    located = [f for f in frames if f[1] is not None]
    if not located:
        return None
    if app_files:
        names = {posixpath.basename(str(f).replace('\\', '/'))
                 for f in app_files}
        for frame in located:
            if frame[0] in names:
                return frame
    for frame in located:
        if not frame[2].startswith(PLATFORM_PACKAGES):
            return frame
    return located[0]


def _parse_trace(text, errors, app_files):
    records = []
    entry = None

    def close():
        if entry is None:
            return
        frame = _select_frame(entry['frames'], app_files)
        if frame is None:
            _fail(LogFormatError('stack trace without a located frame',
                                 entry['line']), errors)
            return
        records.append(FailureRecord(len(records) + 1,
                                     _strip_java(frame[0]), frame[1],
                                     entry['type'], entry['message']))

    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        frame = _FRAME_RE.match(line)
        if frame is not None:
            if entry is None:
                _fail(LogFormatError('stack frame outside a stack trace',
                                     number), errors)
                continue
            if not entry['caused']:
                lineno = frame.group('line')
                entry['frames'].append(
                    (frame.group('file'),
                     int(lineno) if lineno is not None else None,
                     frame.group('where')))
            continue
        if _MORE_RE.match(line):
            continue
        if entry is not None and _CAUSED_RE.match(line):
            entry['caused'] = True
            continue
        m = _EXCEPTION_RE.match(line.strip()) or \
            _QUALIFIED_RE.match(line.strip())
        if m is not None and not line[:1].isspace():
            close()
            entry = {'type': m.group('type'),
                     'message': m.group('message') or '',
                     'frames': [], 'caused': False, 'line': number}
            continue
        # other log lines
    close()
    return records


def detect_format(text):
    """Return 'trace' if the text holds stack frames, else 'table'."""
    for line in text.splitlines():
        if _FRAME_RE.match(line):
            return 'trace'
    return 'table'


def parse_log(text, fmt='auto', errors=None, app_files=None):
    """
    Read failure records from a log.

    Parameters
    ----------
    text : str
    fmt : {'auto', 'table', 'trace'}
    errors : list, optional
        If given, malformed entries are appended to it as
        LogFormatError and reading continues (lenient mode).
    app_files : iterable of str, optional
        Files of the analyzed application. In trace mode the first
        frame in one of them locates the failure.

    Returns
    -------
    records : list of FailureRecord

    Raises
    ------
    LogFormatError
        On a malformed entry, unless `errors` is given.

    """
    if not text.strip():
        return []
    if fmt == 'auto':
        fmt = detect_format(text)
    if fmt == 'table':
        records = _parse_table(text, errors)
    elif fmt == 'trace':
        records = _parse_trace(text, errors, app_files)
    else:
        raise ValueError('unknown log format {!r}'.format(fmt))
    logger.info('read %d failure record(s)', len(records))
    return records


def cluster_failures(records, min_cluster=DEFAULT_MIN_CLUSTER):
    """
    Group failures by exception type and message template.

    Parameters
    ----------
    records : list of FailureRecord
    min_cluster : int
        Smallest cluster flagged as a defect pattern candidate.

    Returns
    -------
    clusters : list of FailureCluster
        Sorted by descending size, then key.

    """
    groups = {}
    for r in records:
        key = (r.exception_type, normalize_message(r.message).template)
        groups.setdefault(key, []).append(r.id)
    clusters = [FailureCluster(key, tuple(sorted(ids)),
                               len(ids) >= min_cluster)
                for key, ids in groups.items()]
    clusters.sort(key=lambda c: (-c.size, c.key))
    return clusters


def clusters_to_json(records, clusters, errors=()):
    cluster_of = {}
    for k, c in enumerate(clusters, start=1):
        for rid in c.members:
            cluster_of[rid] = k
    failures = []
    for r in sorted(records, key=lambda r: r.id):
        d = r.to_json()
        d['cluster'] = cluster_of[r.id]
        failures.append(d)
    return {
        'failures': failures,
        'clusters': [{'id': k, 'exception_type': c.exception_type,
                      'template': c.template, 'members': list(c.members),
                      'size': c.size,
                      'is_pattern_candidate': c.is_pattern_candidate}
                     for k, c in enumerate(clusters, start=1)],
        'errors': [{'line': e.line_number, 'message': e.message}
                   for e in errors],
    }


def format_clusters(records, clusters):
    """Failure table with a cluster column, followed by the clusters."""
    data = clusters_to_json(records, clusters)
    rows = [('#Failure', 'File Name', 'Line', 'Exception Type',
             'Error Message', 'Cluster')]
    for f in data['failures']:
        rows.append((str(f['id']), f['file'], str(f['line']),
                     f['exception_type'], f['message'], str(f['cluster'])))
    widths = [max(len(r[c]) for r in rows) for c in range(6)]
    lines = ['  '.join(r[c].ljust(widths[c]) for c in range(6)).rstrip()
             for r in rows]
    lines.append('')
    for c in data['clusters']:
        flag = 'pattern candidate' if c['is_pattern_candidate'] else \
            'singleton' if c['size'] == 1 else 'below threshold'
        lines.append('Cluster {}: {}, {} ({} failure(s): {}) {}'.format(
            c['id'], c['exception_type'], c['template'] or '<empty>',
            c['size'], ', '.join(str(m) for m in c['members']), flag))
    return '\n'.join(lines) + '\n'
