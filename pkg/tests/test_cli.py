import json
import logging

import pytest

from patlock.cli import main

QUERY_ARGS = ['--query', 'Integer.parseInt']


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture(scope='module')
def paths(fixtures_dir):
    return {
        'source': str(fixtures_dir / 'sisgee'),
        'rule': str(fixtures_dir / 'rules' / 'unchecked_integer.scpl'),
        'context': str(fixtures_dir / 'rules' /
                       'inside_integer_validation.scpl'),
        'manifest': str(fixtures_dir / 'rules' /
                        'unchecked_integer.refined.json'),
        'ledger': str(fixtures_dir / 'ledgers' / 'unchecked_integer.json'),
        'table': str(fixtures_dir / 'logs' / 'failures.tsv'),
        'trace': str(fixtures_dir / 'logs' / 'failure1.trace'),
        'catalog': str(fixtures_dir / 'catalog'),
    }


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, '--format', 'json')
    return code, json.loads(out)


def evaluation_args(paths, rule='--rule'):
    return ['--source', paths['source'],
            rule, paths['rule' if rule == '--rule' else 'manifest'],
            '--ledger', paths['ledger']] + QUERY_ARGS


def test_analyze_table(capsys, paths, check_schema):
    code, data = run_json(capsys, 'analyze-log', paths['table'])
    assert code == 0
    check_schema('clusters', data)
    assert [c['size'] for c in data['clusters']] == [2, 2, 1, 1]
    assert [c['is_pattern_candidate'] for c in data['clusters']] == \
        [True, True, False, False]
    code, out, _ = run(capsys, 'analyze-log', paths['table'])
    assert 'Cluster 2: java.lang.NumberFormatException' in out


def test_analyze_trace(capsys, paths):
    code, data = run_json(capsys, 'analyze-log', paths['trace'],
                          '--source', paths['source'])
    assert code == 0
    [failure] = data['failures']
    assert (failure['file'], failure['line']) == \
        ('BuscaTermoAditivoServlet', 49)
    assert failure['exception_type'] == 'java.lang.NumberFormatException'


def test_malformed_log(capsys, tmp_path):
    log = tmp_path / 'bad.tsv'
    log.write_text('#Failure\tFile Name\tLine\tException Type\tError Message\n'
                   '1\tA\tabc\tjava.lang.E\tm\n'
                   '2\tB\t3\tjava.lang.E\tm\n')
    code, _, err = run(capsys, 'analyze-log', log)
    assert code == 2
    assert "line 2: invalid line 'abc'" in err
    code, data = run_json(capsys, 'analyze-log', log, '--lenient')
    assert code == 0
    assert data['errors'] == [{'line': 2, 'message': "invalid line 'abc'"}]
    assert len(data['failures']) == 1


def test_scan(capsys, paths, check_schema):
    code, first = run_json(capsys, 'scan', '--rule', paths['rule'],
                           '--source', paths['source'])
    assert code == 0
    check_schema('alerts', first)
    assert len(first) == 13
    assert first[0]['file'] == 'BuscaTermoAditivoServlet.java'
    assert (first[0]['line'], first[0]['rule']) == (49, 'unchecked_integer')
    _, second = run_json(capsys, 'scan', '--rule', paths['rule'],
                         '--source', paths['source'])
    assert first == second


def test_scan_refined(capsys, paths):
    _, by_manifest = run_json(capsys, 'scan', '--manifest', paths['manifest'],
                              '--source', paths['source'])
    _, by_context = run_json(capsys, 'scan', '--rule', paths['rule'],
                             '--context', paths['context'],
                             '--source', paths['source'])
    assert len(by_manifest) == 4
    assert by_manifest == by_context


def test_evaluate(capsys, paths, check_schema):
    code, data = run_json(capsys, 'evaluate', *evaluation_args(paths))
    assert code == 0
    check_schema('report', data)
    assert (data['tp'], data['fp'], data['fn'], data['tn']) == (3, 10, 0, 3)
    assert data['rule'] == 'unchecked_integer'
    code, out, _ = run(capsys, 'evaluate', *evaluation_args(paths))
    assert 'Precision: 23.1%' in out
    assert 'Relative recall: 100.0%' in out


def test_unlabeled(capsys, paths, tmp_path):
    ledger = tmp_path / 'ledger.json'
    ledger.write_text('{"alerts": [], "candidates": []}')
    args = evaluation_args(paths)
    args[args.index('--ledger') + 1] = str(ledger)
    code, _, err = run(capsys, 'evaluate', *args)
    assert code == 3
    assert '16 unlabeled item(s)' in err


@pytest.mark.parametrize('rule,extra,code', [
    ('--rule', [], 1),
    ('--manifest', [], 1),
    ('--manifest', ['--min-precision', '0.7'], 0),
    ('--manifest', ['--min-precision', '0.75'], 0),
])
def test_gate(capsys, paths, check_schema, rule, extra, code):
    got, data = run_json(capsys, 'gate', *evaluation_args(paths, rule),
                         *extra)
    assert got == code
    check_schema('gate', data)
    assert data['passed'] == (code == 0)


def test_gate_text(capsys, paths):
    code, out, _ = run(capsys, 'gate', *evaluation_args(paths, '--manifest'))
    assert code == 1
    assert out.splitlines() == ['Gate: FAIL', 'Precision: 75.0%',
                                'Relative recall: 100.0%',
                                '  precision 0.75 < 0.80']


def test_gate_from_report(capsys, paths, tmp_path):
    report = tmp_path / 'report.json'
    assert main(['evaluate', *evaluation_args(paths), '--format', 'json',
                 '--output', str(report)]) == 0
    assert capsys.readouterr().out == ''
    code, data = run_json(capsys, 'gate', '--report', report)
    assert code == 1
    assert data['reasons'] == ['precision 0.23 < 0.80']


def test_gate_from_alerts(capsys, paths, tmp_path):
    alerts = tmp_path / 'alerts.json'
    main(['scan', '--manifest', paths['manifest'], '--source',
          paths['source'], '--format', 'json', '--output', str(alerts)])
    code, data = run_json(capsys, 'gate', '--alerts', alerts,
                          '--source', paths['source'],
                          '--ledger', paths['ledger'], *QUERY_ARGS,
                          '--min-precision', '0.7')
    assert code == 0
    assert data['report']['precision'] == pytest.approx(0.75)


ALERT = {'rule': 'r', 'file': 'A.java', 'line': 3, 'column': 5,
         'message': 'm'}
REPORT = {'rule': 'r', 'corpus': 'c', 'tp': 3, 'fp': 1, 'fn': 0, 'tn': 0,
          'alerts': 4, 'candidates': 4, 'precision': 0.75,
          'relative_recall': 1.0}


def _without(d, key):
    return {k: v for k, v in d.items() if k != key}


@pytest.mark.parametrize('option,document,message', [
    ('--alerts', [_without(ALERT, 'column')],
     "0: 'column' is a required property"),
    ('--alerts', {'alerts': [dict(ALERT, line='3')]},
     "0/line: '3' is not of type 'integer'"),
    ('--alerts', {'rule': 'r'}, '<document>: '),
    ('--report', _without(REPORT, 'tp'), "'tp' is a required property"),
    ('--ledger', [{'file': 'A.java', 'line': 3, 'label': 'TP'}],
     "<document>: "),
    ('--ledger', {'alerts': [{'file': 'A.java', 'line': 3}]},
     "alerts/0: 'label' is a required property"),
    ('--ledger', {'candidates': [{'file': 'A.java', 'line': 3,
                                    'label': 'maybe'}]},
     'candidates/0/label: '),
])
def test_malformed_documents(capsys, tmp_path, option, document, message):
    path = tmp_path / 'input.json'
    path.write_text(json.dumps(document))
    alerts = tmp_path / 'alerts.json'
    alerts.write_text(json.dumps([ALERT]))
    argv = {'--alerts': ['gate', '--alerts', path],
            '--report': ['gate', '--report', path],
            '--ledger': ['evaluate', '--alerts', alerts, '--ledger', path]}
    code, out, err = run(capsys, *argv[option])
    assert code == 65
    assert out == ''
    assert err.startswith('error: {}: '.format(path))
    assert message in err


def test_gate_reads_dumped_alerts(capsys, paths, tmp_path):
    alerts = tmp_path / 'alerts.json'
    alerts.write_text(json.dumps({'alerts': []}))
    code, data = run_json(capsys, 'gate', '--alerts', alerts,
                          '--ledger', paths['ledger'])
    assert code == 1
    assert data['reasons'] == ['precision undefined',
                               'relative recall undefined']


def test_diff(capsys, paths, tmp_path, check_schema):
    plot = tmp_path / 'cycle.png'
    code, data = run_json(capsys, 'diff', *evaluation_args(paths),
                          '--manifest', paths['manifest'], '--plot', plot)
    assert code == 0
    check_schema('diff', data)
    assert len(data['removed_alerts']) == 9
    assert data['removed_true_positives'] == []
    assert data['before']['precision'] == pytest.approx(3 / 13)
    assert data['after']['precision'] == pytest.approx(0.75)
    assert plot.stat().st_size > 0


def test_catalog_lint(capsys, paths, tmp_path, check_schema):
    code, out, _ = run(capsys, 'catalog', 'lint', paths['catalog'])
    assert code == 0
    assert 'no findings' in out
    doc = tmp_path / 'patterns' / 'a.doc'
    doc.parent.mkdir()
    doc.write_text('Defect Name: A\n')
    code, data = run_json(capsys, 'catalog', 'lint', tmp_path)
    assert code == 1
    check_schema('lint', data)
    assert data['diagnostics'] == [{'severity': 'warning', 'location': None,
                                    'message': 'A: empty characterization'}]
    doc.write_text('Defect Name: A\nColour: red\n')
    code, _, err = run(capsys, 'catalog', 'lint', tmp_path)
    assert code == 65
    assert "unknown heading 'Colour'" in err


def test_rule_errors(capsys, paths, tmp_path):
    rule = tmp_path / 'r.scpl'
    rule.write_text('Integer.parseInt(any);\n')
    code, _, err = run(capsys, 'scan', '--rule', rule,
                       '--source', paths['source'])
    assert code == 65
    assert 'rule has no //Alert: marker' in err


@pytest.mark.parametrize('argv,code', [
    ([], 64),
    (['scan'], 64),
    (['scan', '--rule', 'r.scpl', '--format', 'xml'], 64),
    (['catalog'], 64),
    (['frobnicate'], 64),
    (['analyze-log'], 64),
    (['analyze-log', 'absent.tsv'], 74),
    (['scan', '--rule', 'absent.scpl', '--source', '.'], 74),
    (['gate', '--report', 'absent.json'], 74),
])
def test_exit_codes(capsys, tmp_path, monkeypatch, argv, code):
    monkeypatch.chdir(tmp_path)
    assert run(capsys, *argv)[0] == code


def test_settings_file(capsys, paths, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / 'patlock_settings.yaml').write_text(
        'min_precision: 0.7\nquery: Integer.parseInt\nsource: {}\n'
        'ledger: {}\n'.format(paths['source'], paths['ledger']))
    code, _ = run_json(capsys, 'gate', '--manifest', paths['manifest'])
    assert code == 0
    # flags override the settings file
    code, _ = run_json(capsys, 'gate', '--manifest', paths['manifest'],
                       '--min-precision', '0.8')
    assert code == 1
    other = tmp_path / 'strict.yaml'
    other.write_text('min_precision: 0.9\nquery: Integer.parseInt\n'
                     'source: {}\nledger: {}\n'.format(paths['source'],
                                                       paths['ledger']))
    code, data = run_json(capsys, 'gate', '--manifest', paths['manifest'],
                          '--config', other)
    assert code == 1
    assert data['min_precision'] == 0.9


@pytest.mark.parametrize('text', [
    'colour: blue\n',
    'min_precision: 2\n',
    'min_cluster: 0\n',
    '- a\n',
])
def test_bad_settings(capsys, tmp_path, text):
    config = tmp_path / 's.yaml'
    config.write_text(text)
    code, _, err = run(capsys, 'scan', '--config', config)
    assert code == 64
    assert err.startswith('error:')


def test_color(capsys, paths, monkeypatch):
    monkeypatch.setenv('PATLOCK_COLOR', '1')
    _, out, _ = run(capsys, 'evaluate', *evaluation_args(paths))
    assert out.startswith('\033[1mRule: unchecked_integer\033[0m\n')
    _, data = run_json(capsys, 'evaluate', *evaluation_args(paths))
    assert data['tp'] == 3


@pytest.mark.parametrize('flag,shown,hidden', [
    ('-v', 'INFO: patlock.readfile: parsed 9 of 9', None),
    ('-q', None, 'INFO:'),
])
def test_logging_levels(capsys, paths, flag, shown, hidden):
    _, _, err = run(capsys, 'scan', flag, '--rule', paths['rule'],
                    '--source', paths['source'])
    if shown:
        assert shown in err
    if hidden:
        assert hidden not in err
