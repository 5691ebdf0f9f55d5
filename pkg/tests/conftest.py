import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import patlock
from patlock.readfile import read_sources, parse_corpus, load_rule, load_ledger
from patlock.refine import load_refined

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'
SCHEMAS = Path(patlock.__file__).resolve().parent / 'schemas'


@pytest.fixture(scope='session')
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope='session')
def sisgee_files():
    return read_sources(FIXTURES / 'sisgee')


@pytest.fixture(scope='session')
def sisgee_units(sisgee_files):
    return parse_corpus(sisgee_files)


@pytest.fixture(scope='session')
def base_rule():
    return load_rule(FIXTURES / 'rules' / 'unchecked_integer.scpl')


@pytest.fixture(scope='session')
def refined_rule():
    return load_refined(FIXTURES / 'rules' / 'unchecked_integer.refined.json')


@pytest.fixture(scope='session')
def ledger():
    return load_ledger(FIXTURES / 'ledgers' / 'unchecked_integer.json')


@pytest.fixture
def rng():
    return np.random.default_rng(20191017)


@pytest.fixture(scope='session')
def check_schema():
    """Validate JSON output against one of the shipped schemas."""
    def check(name, data):
        path = SCHEMAS / '{}.schema.json'.format(name)
        schema = json.loads(path.read_text(encoding='utf-8'))
        jsonschema.validate(instance=data, schema=schema)
        return data
    return check
