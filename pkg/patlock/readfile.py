#!/usr/bin/env python3

"""

readfile
========

This module contains functions to read and write the files the
pipeline works on: Java sources, rule files, ledgers, JSON reports
and YAML settings.

"""

import json
import logging
from functools import lru_cache
from pathlib import Path

import jsonschema
import yaml

from .constants import SOURCE_GLOB
from .errors import DocumentFormatError, SourceSyntaxError
from .evaluation import EvalReport, VerificationLedger
from .javaparser import parse_source
from .matcher import alerts_from_json
from .pattern_dsl import parse_rule

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parent / 'schemas'


def read_text(path):
    return Path(path).read_text(encoding='utf-8')


def discover_sources(root, glob=SOURCE_GLOB):
    """
    Return the source files below `root`.

    Returns
    -------
    files : list of (str, Path)
        File id, relative to `root` with POSIX separators, and path.
        Sorted by file id.

    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError('source directory not found: {}'.format(root))
    files = [(p.relative_to(root).as_posix(), p)
             for p in root.glob(glob) if p.is_file()]
    return sorted(files)


def read_sources(root, glob=SOURCE_GLOB):
    """Return a dict mapping file ids below `root` to source text."""
    return {file_id: read_text(p)
            for file_id, p in discover_sources(root, glob)}


def parse_corpus(files):
    """
    Parse source texts into compilation units.

    Files that do not parse are skipped with a warning.

    Parameters
    ----------
    files : dict
        file_id to source text.

    Returns
    -------
    units : list of CompilationUnit
        In file id order.

    """
    units = []
    for file_id in sorted(files):
        try:
            units.append(parse_source(files[file_id], file_id))
        except SourceSyntaxError as exc:
            logger.warning('skipping %s', exc)
    logger.info('parsed %d of %d source file(s)', len(units), len(files))
    return units


def read_json(path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def dump_json(data):
    """Serialize with sorted keys, so equal data gives equal bytes."""
    return json.dumps(data, sort_keys=True, indent=2) + '\n'


def read_settings(path):
    """
    Read a YAML settings file.

    Returns
    -------
    settings : dict
        Empty for an empty file.

    """
    with open(path, encoding='utf-8') as f:
        settings = yaml.safe_load(f)
    if settings is None:
        return {}
    if not isinstance(settings, dict):
        raise ValueError('{}: settings must be a mapping'.format(path))
    return settings


def load_rule(path):
    """Parse a rule file, named after the file unless its metadata says."""
    path = Path(path)
    return parse_rule(read_text(path), path.stem)


@lru_cache(maxsize=None)
def load_schema(name):
    path = SCHEMA_DIR / '{}.schema.json'.format(name)
    return json.loads(path.read_text(encoding='utf-8'))


def validate_document(data, name, path):
    """
    Check a JSON document against the shipped schema `name`.

    Raises
    ------
    DocumentFormatError
        One diagnostic per violation, prefixed with the JSON path of
        the offending value.

    """
    validator = jsonschema.Draft7Validator(load_schema(name))
    errors = sorted(validator.iter_errors(data),
                    key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        raise DocumentFormatError(path, [
            '{}: {}'.format('/'.join(str(p) for p in e.absolute_path)
                            or '<document>', e.message)
            for e in errors])
    return data


def load_alerts(path):
    """Read `scan` alerts, a list or a mapping with an 'alerts' list."""
    data = read_json(path)
    if isinstance(data, dict) and 'alerts' in data:
        data = data['alerts']
    return alerts_from_json(validate_document(data, 'alerts', path))


def load_report(path):
    return EvalReport.from_json(validate_document(read_json(path), 'report',
                                                  path))


def load_ledger(path):
    return VerificationLedger.from_json(
        validate_document(read_json(path), 'ledger', path))
