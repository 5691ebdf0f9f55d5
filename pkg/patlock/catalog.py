#!/usr/bin/env python3

"""

catalog
=======

This module contains the defect pattern catalog: documentation of
defect patterns and of the fixing alternatives found while analysing
the contexts of false positive alerts.

A document is a sequence of ``Heading: value`` lines. Code examples,
and any value spanning several lines, follow their heading in a
fenced block::

    Defect Name: Unchecked Integer
    Class and Method of Throw: Integer, method parseInt
    Fixed Code Example:
    ```
    Integer intValue = null;
    try{
        intValue = Integer.parseInt(intParam);
    }catch(NumberFormatException e){
        //handle the exception
    }
    ```

A catalog is either a directory with the layout
``patterns/<name>.doc`` and ``contexts/<pattern>/<name>.doc``, or a
single file holding documents separated by ``---`` lines.

"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .constants import DOC_SUFFIX
from .errors import CatalogFormatError, SourceSyntaxError
from .javaparser import parse_snippet
from .pattern_dsl import Diagnostic

logger = logging.getLogger(__name__)

FENCE = '```'
SEPARATOR = '---'

_LINE_RE = re.compile(r'^(?P<key>[A-Za-z][A-Za-z ]*?)\s*:(?:\s(?P<value>.*))?$')


@dataclass(frozen=True)
class DefectPatternDoc:
    defect_name: str
    description: str = ''
    exception_type_and_message: str = ''
    params_in_message: str = ''
    example_message: str = ''
    throw_site: str = ''
    characterization: str = ''
    defect_code_example: str = ''
    fixed_code_example: str = ''
    rule_file: str = None
    source: Path = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FixingAlternativeDoc:
    defect_pattern: str
    context_name: str
    context_description: str = ''
    context_cause: str = ''
    characterization: str = ''
    code_example: str = ''
    context_file: str = None
    source: Path = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Catalog:
    patterns: tuple = ()
    contexts: tuple = ()

    def pattern(self, name):
        return next((p for p in self.patterns if p.defect_name == name), None)

    def contexts_of(self, name):
        return [c for c in self.contexts if c.defect_pattern == name]


# Headings as they appear in the documentation forms.
PATTERN_HEADINGS = {
    'defect_name': 'Defect Name',
    'description': 'Description',
    'exception_type_and_message': 'Exception Type and Failure Message',
    'params_in_message': 'Parameters in Failure Message',
    'example_message': 'Example of Failure Message',
    'throw_site': 'Class and Method of Throw',
    'characterization': 'Defect Characterization',
    'defect_code_example': 'Defect Code Example',
    'fixed_code_example': 'Fixed Code Example',
    'rule_file': 'Rule File',
}
CONTEXT_HEADINGS = {
    'defect_pattern': 'Defect Pattern',
    'context_name': 'Context Name',
    'context_description': 'Context Description',
    'context_cause': 'Context Cause',
    'characterization': 'Context Characterization',
    'code_example': 'Code Example',
    'context_file': 'Context File',
}
CODE_FIELDS = frozenset(['defect_code_example', 'fixed_code_example',
                         'code_example'])
PATH_FIELDS = frozenset(['rule_file', 'context_file'])


def slug(name):
    return re.sub(r'[^a-z0-9]+', '_', name.lower()).strip('_') or 'doc'


# ----------------------------------------------------------
# Reading

def _split_documents(text):
    """Yield (first line number, lines) of every document in `text`."""
    lines = text.split('\n')
    start = 0
    fenced = False
    for k, line in enumerate(lines):
        if line.strip() == FENCE:
            fenced = not fenced
        elif line.strip() == SEPARATOR and not fenced:
            yield start + 1, lines[start:k]
            start = k + 1
    yield start + 1, lines[start:]


def _read_fields(first, lines, problems):
    values = {}
    k = 0
    while k < len(lines):
        line = lines[k]
        number = first + k
        k += 1
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if m is None:
            problems.append('line {:d}: expected "Heading: value"'.format(
                number))
            continue
        key = m.group('key').strip()
        value = m.group('value')
        if value is None or not value.strip():
            if k < len(lines) and lines[k].strip() == FENCE:
                block = []
                k += 1
                while k < len(lines) and lines[k].strip() != FENCE:
                    block.append(lines[k])
                    k += 1
                if k == len(lines):
                    problems.append('line {:d}: unterminated code block'
                                    .format(number))
                k += 1
                value = '\n'.join(block)
            else:
                value = ''
        else:
            value = value.strip()
        if key.lower() in values:
            problems.append('line {:d}: repeated heading {!r}'.format(
                number, key))
            continue
        values[key.lower()] = (key, value)
    return values


def _build(cls, headings, values, source, problems):
    by_heading = {h.lower(): name for name, h in headings.items()}
    kwargs = {}
    for low, (key, value) in values.items():
        name = by_heading.get(low)
        if name is None:
            problems.append("unknown heading {!r}".format(key))
            continue
        if name in PATH_FIELDS and not value:
            value = None
        kwargs[name] = value
    for name in ('defect_name', 'defect_pattern', 'context_name'):
        if name not in headings:
            continue
        if not kwargs.get(name):
            problems.append('missing {!r}'.format(headings[name]))
    if problems:
        return None
    return cls(source=source, **kwargs)


def parse_docs(text, source=None):
    """
    Parse the documents of a catalog file.

    Returns
    -------
    docs : list
        DefectPatternDoc and FixingAlternativeDoc values, in file order.

    Raises
    ------
    CatalogFormatError

    """
    docs = []
    problems = []
    for first, lines in _split_documents(text):
        if not any(l.strip() for l in lines):
            continue
        local = []
        values = _read_fields(first, lines, local)
        if 'context name' in values:
            doc = _build(FixingAlternativeDoc, CONTEXT_HEADINGS, values,
                         source, local)
        elif 'defect name' in values:
            doc = _build(DefectPatternDoc, PATTERN_HEADINGS, values, source,
                         local)
        else:
            local.append('line {:d}: document has neither "Defect Name" nor '
                         '"Context Name"'.format(first))
            doc = None
        problems.extend(local)
        if doc is not None:
            docs.append(doc)
    if problems:
        raise CatalogFormatError(source or '<string>', problems)
    return docs


def _collect(docs):
    return Catalog(
        tuple(d for d in docs if isinstance(d, DefectPatternDoc)),
        tuple(d for d in docs if isinstance(d, FixingAlternativeDoc)))


def load_catalog(path):
    """
    Read a catalog directory or catalog file.

    Parameters
    ----------
    path : str or Path

    Returns
    -------
    catalog : Catalog

    Raises
    ------
    CatalogFormatError
        With one diagnostic per offending field.

    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob('patterns/*' + DOC_SUFFIX)) + \
            sorted(path.glob('contexts/*/*' + DOC_SUFFIX))
    else:
        files = [path]
    docs = []
    for f in files:
        docs.extend(parse_docs(f.read_text(encoding='utf-8'), f))
    catalog = _collect(docs)
    logger.info('catalog %s: %d pattern(s), %d context(s)', path,
                len(catalog.patterns), len(catalog.contexts))
    return catalog


# ----------------------------------------------------------
# Writing

def _format_value(heading, value):
    if value is None:
        return []
    if '\n' in value or value != value.strip() or value.startswith(FENCE):
        if any(l.strip() == FENCE for l in value.split('\n')):
            raise ValueError('{}: value holds a code fence'.format(heading))
        return ['{}:'.format(heading), FENCE, value, FENCE]
    return ['{}: {}'.format(heading, value).rstrip()]


def format_doc(doc):
    """Render one document, code examples fenced."""
    headings = PATTERN_HEADINGS if isinstance(doc, DefectPatternDoc) \
        else CONTEXT_HEADINGS
    lines = []
    for name, heading in headings.items():
        value = getattr(doc, name)
        if name in CODE_FIELDS and value:
            lines.extend(['{}:'.format(heading), FENCE, value, FENCE])
        else:
            lines.extend(_format_value(heading, value))
    return '\n'.join(lines) + '\n'


def save_catalog(catalog, path):
    """
    Write a catalog.

    A path ending in ``.doc`` receives every document in one file;
    any other path is written as a catalog directory.
    """
    path = Path(path)
    docs = list(catalog.patterns) + list(catalog.contexts)
    if path.suffix == DOC_SUFFIX:
        path.parent.mkdir(parents=True, exist_ok=True)
        text = (SEPARATOR + '\n').join(format_doc(d) for d in docs)
        path.write_text(text, encoding='utf-8')
        return
    for d in catalog.patterns:
        target = path / 'patterns' / (slug(d.defect_name) + DOC_SUFFIX)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(format_doc(d), encoding='utf-8')
    for d in catalog.contexts:
        target = path / 'contexts' / slug(d.defect_pattern) / \
            (slug(d.context_name) + DOC_SUFFIX)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(format_doc(d), encoding='utf-8')


# ----------------------------------------------------------
# Lint

def _doc_label(doc):
    if isinstance(doc, DefectPatternDoc):
        return doc.defect_name
    return '{} / {}'.format(doc.defect_pattern, doc.context_name)


def lint_doc(doc, base_dir=None):
    """
    Check a catalog document.

    Parameters
    ----------
    doc : DefectPatternDoc or FixingAlternativeDoc
    base_dir : Path, optional
        Directory the rule and context paths are relative to. Defaults
        to the directory of the document file.

    Returns
    -------
    diagnostics : list of Diagnostic
        Warnings on an empty characterization, code examples that do
        not parse and paths to missing files.

    """
    if base_dir is None:
        base_dir = doc.source.parent if doc.source is not None else Path('.')
    base_dir = Path(base_dir)
    label = _doc_label(doc)
    diagnostics = []
    if not doc.characterization.strip():
        diagnostics.append(Diagnostic(
            'warning', '{}: empty characterization'.format(label)))
    for name in sorted(CODE_FIELDS):
        code = getattr(doc, name, None)
        if not code:
            continue
        try:
            parse_snippet(code, file_id='{}[{}]'.format(label, name),
                          pattern=True)
        except SourceSyntaxError as exc:
            diagnostics.append(Diagnostic(
                'warning', 'code example does not parse: {}'.format(
                    exc.message), exc.span))
    for name in sorted(PATH_FIELDS):
        target = getattr(doc, name, None)
        if target and not (base_dir / target).is_file():
            diagnostics.append(Diagnostic(
                'warning', '{}: dangling path {}'.format(label, target)))
    return diagnostics


def lint_catalog(catalog, base_dir=None):
    """Lint every document and the references between them."""
    diagnostics = []
    for d in catalog.patterns + catalog.contexts:
        diagnostics.extend(lint_doc(d, base_dir))
    seen = set()
    for d in catalog.patterns:
        if d.defect_name in seen:
            diagnostics.append(Diagnostic(
                'error', 'duplicate defect pattern {!r}'.format(
                    d.defect_name)))
        seen.add(d.defect_name)
    pairs = set()
    for d in catalog.contexts:
        if d.defect_pattern not in seen:
            diagnostics.append(Diagnostic(
                'error', '{}: unknown defect pattern {!r}'.format(
                    _doc_label(d), d.defect_pattern)))
        key = (d.defect_pattern, d.context_name)
        if key in pairs:
            diagnostics.append(Diagnostic(
                'error', 'duplicate context {!r} of {!r}'.format(
                    d.context_name, d.defect_pattern)))
        pairs.add(key)
    return diagnostics
