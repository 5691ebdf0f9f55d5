import dataclasses
import itertools
import json

from patlock.javaparser import parse_expression, parse_snippet, parse_source
from patlock.matcher import (Alert, alerts_from_json, alerts_to_json,
                             format_alerts, match_pattern, merge_alerts,
                             run_rule, substitute)
from patlock.pattern_dsl import contains_hole, parse_rule
from patlock.readfile import dump_json, parse_corpus
from patlock.source_ast import (AnchorHole, Block, Expr, ExprStmt, Identifier,
                                MethodCall, Stmt, StmtEllipsis, Try,
                                ancestors, pretty_print, walk)

from javagen import random_corpus, random_rule_text

BASE_ALERTS = [
    ('BuscaTermoAditivoServlet.java', 49),
    ('BuscaTermoAditivoServlet.java', 54),
    ('FormTermoAditivoServlet.java', 115),
    ('FormTermoAditivoServlet.java', 225),
    ('FormTermoAditivoServlet.java', 265),
    ('FormTermoEstagioServlet.java', 214),
    ('FormTermoEstagioServlet.java', 600),
    ('FormTermoEstagioServlet.java', 646),
    ('FormTermoEstagioServlet.java', 749),
    ('FormTermoRescisaoServlet.java', 81),
    ('VerTermoAditivoServlet.java', 48),
    ('VisualizarTermoEAditivo.java', 43),
    ('VisualizarTermoEAditivo.java', 45),
]


def pattern(text):
    return parse_expression(text, pattern=True)


def test_fixture_scan(base_rule, sisgee_units):
    alerts = run_rule(base_rule, sisgee_units)
    assert [a.location for a in alerts] == BASE_ALERTS
    assert {a.message for a in alerts} == {
        'Surround Integer.parseInt with a try/catch block'}
    assert all(a.rule_name == 'unchecked_integer' for a in alerts)
    first = alerts[0]
    assert first.match.enclosing_method == 'doPost'
    assert first.match.node.name == 'parseInt'


def test_guarded_calls_not_alerted(base_rule, sisgee_units):
    files = {a.file_id for a in run_rule(base_rule, sisgee_units)}
    assert 'PrincipalTermo.java' not in files
    assert 'ValidaUtils.java' not in files


def test_scan_is_deterministic(base_rule, sisgee_files):
    first = dump_json(alerts_to_json(run_rule(base_rule,
                                              parse_corpus(sisgee_files))))
    second = dump_json(alerts_to_json(run_rule(base_rule,
                                               parse_corpus(sisgee_files))))
    assert first == second


def test_alert_json(base_rule, sisgee_units, check_schema):
    data = json.loads(dump_json(alerts_to_json(run_rule(base_rule,
                                                        sisgee_units))))
    check_schema('alerts', data)
    assert alerts_from_json(data) == run_rule(base_rule, sisgee_units)


def test_binding_consistency():
    p = pattern('f(someX, someX)')
    assert match_pattern(p, parse_expression('f(a, a)')) == [{'someX': 'a'}]
    assert match_pattern(p, parse_expression('f(a, b)')) == []
    q = pattern('f(someX, otherY)')
    assert match_pattern(q, parse_expression('f(a, b)')) == [
        {'someX': 'a', 'otherY': 'b'}]


def test_any_expression_and_any_prefixed_names():
    p = pattern('f(any, anyName)')
    assert match_pattern(p, parse_expression('f(g(1), x)')) == [
        {'anyName': 'x'}]
    # an identifier wildcard only stands for names
    assert match_pattern(p, parse_expression('f(g(1), g(2))')) == []


def test_prebound_environment():
    p = pattern('Integer.parseInt(someParam)')
    node = parse_expression('Integer.parseInt(idAluno)')
    assert match_pattern(p, node, {'someParam': 'idAluno'})
    assert not match_pattern(p, node, {'someParam': 'ida'})


def test_argument_ellipsis():
    p = pattern('f(..., someLast)')
    assert match_pattern(p, parse_expression('f(a, b, c)')) == [
        {'someLast': 'c'}]
    assert match_pattern(p, parse_expression('f()')) == []


def test_quoted_wildcard():
    p = pattern('request.getParameter("someName")')
    env = match_pattern(p, parse_expression('request.getParameter("ide")'))
    assert env == [{'someName': '"ide"'}]


def test_statement_ellipsis_and_catch_wildcards():
    p = parse_snippet('try {\n    ...\n} catch (AnyException e) {}').stmts[0]
    node = parse_snippet(
        'try { a(); b(); } catch (NumberFormatException e) { log(e); }',
        pattern=False).stmts[0]
    assert match_pattern(p, node) == [{}]


def test_substitute():
    p = pattern('Integer.parseInt(someParam)')
    assert pretty_print(substitute(p, {'someParam': 'ida'})) == \
        'Integer.parseInt(ida)'


def test_enclosure_only_inside_method():
    rule = parse_rule(
        '//inAnyMethod\n'
        '//not_exists\n'
        'try {\n'
        '    //Alert: unchecked\n'
        '    Integer.parseInt(any);\n'
        '} catch (AnyException any) {}\n', 'r')
    unit = parse_source(
        'class A {\n'
        '    void m(String s) {\n'
        '        try {\n'
        '            if (s != null) {\n'
        '                x = Integer.parseInt(s);\n'
        '            }\n'
        '        } catch (NumberFormatException e) {\n'
        '            y = Integer.parseInt(s);\n'
        '        }\n'
        '        z = Integer.parseInt(s);\n'
        '    }\n'
        '}\n', 'A.java')
    assert [a.line for a in run_rule(rule, [unit])] == [8, 10]


REQUEST_PARAMETER = '''//inAnyMethod
String someVariable = request.getParameter("someParam");
...
//Alert: Request parameter used without a check
someVariable.anyMethod(...);
'''


def test_request_parameter_rule():
    rule = parse_rule(REQUEST_PARAMETER, 'request_parameter')
    unit = parse_source(
        'class Cadastro {\n'
        '    void doPost(HttpServletRequest request) {\n'
        '        String param = request.getParameter("param");\n'
        '        log(param);\n'
        '        if (param.length() > 0) {\n'
        '            salvar(param);\n'
        '        }\n'
        '        String other = request.getParameter("otherParam");\n'
        '        String msg = "invalid value: " + other.trim();\n'
        '        String fixed = "a";\n'
        '        fixed.trim();\n'
        '    }\n'
        '}\n', 'Cadastro.java')
    alerts = run_rule(rule, [unit])
    assert [a.line for a in alerts] == [5, 9]
    assert alerts[0].match.bindings == {
        'someVariable': 'param', 'someParam': '"param"',
        'anyMethod': 'length'}
    assert alerts[1].match.bindings == {
        'someVariable': 'other', 'someParam': '"otherParam"',
        'anyMethod': 'trim'}
    assert alerts[1].message == 'Request parameter used without a check'


def test_request_parameter_anchor_binding():
    anchor = parse_rule(REQUEST_PARAMETER, 'r').anchor_pattern
    assert match_pattern(anchor, parse_expression('other.trim()')) == [
        {'someVariable': 'other', 'anyMethod': 'trim'}]
    assert match_pattern(anchor, parse_expression('other.trim()'),
                         {'someVariable': 'param'}) == []
    assert match_pattern(anchor, parse_expression('trim(other)')) == []


def test_merge_and_format():
    a = Alert('r2', 'B.java', 3, 1, 'm')
    b = Alert('r1', 'A.java', 9, 5, 'm')
    merged = merge_alerts([[a], [b]])
    assert merged == [b, a]
    text = format_alerts(merged)
    assert text.splitlines()[0].split() == ['#Alert', 'File', 'Line',
                                            'Message']
    assert text.splitlines()[1].split() == ['1', 'A.java', '9', 'm']


# ----------------------------------------------------------
# Brute-force oracle over random corpora

def _is_parse_int(node):
    return (isinstance(node, MethodCall) and node.name == 'parseInt' and
            node.receiver == Identifier('Integer') and len(node.args) == 1)


def _inside_try_body(node):
    return any(isinstance(a, Try) and any(n is node for n in walk(a.body))
               for a in ancestors(node))


def oracle(units):
    found = set()
    for unit in units:
        for t in unit.type_decls:
            for m in t.methods:
                for node in walk(m.body):
                    if _is_parse_int(node) and not _inside_try_body(node):
                        found.add((unit.file_id, node.span.line,
                                   node.span.column))
    return found


def test_oracle_agreement(base_rule, rng):
    for _ in range(50):
        units = parse_corpus(random_corpus(rng))
        assert all(sum(1 for _ in walk(u)) <= 500 for u in units)
        alerts = run_rule(base_rule, units)
        got = {(a.file_id, a.line, a.column) for a in alerts}
        assert got == oracle(units)
        assert len(got) == len(alerts)


# ----------------------------------------------------------
# Exhaustive oracle for arbitrary rules
#
# Sequences are aligned by enumerating every placement of their
# non-ellipsis elements; holes are resolved by identity against the
# ancestor chain of the candidate node.

def _dedupe(envs):
    out = []
    for e in envs:
        if e not in out:
            out.append(e)
    return out


def _placements(pats, count):
    """Every window placement of a floating sequence over `count` nodes."""
    fixed = [k for k, p in enumerate(pats)
             if not isinstance(p, StmtEllipsis)]
    for positions in itertools.combinations(range(count), len(fixed)):
        pairs = list(zip(fixed, positions))
        if all(b - a == 1 for (i, a), (j, b) in zip(pairs, pairs[1:])
               if j == i + 1):
            yield pairs


def _brute_seq(pats, stmts, env, anchor, chain):
    results = []
    for pairs in _placements(pats, len(stmts)):
        envs = [env]
        for k, pos in pairs:
            envs = [e2 for e in envs
                    for e2 in _brute_match(pats[k], stmts[pos], e, anchor,
                                           chain)]
        results.extend(envs)
    return _dedupe(results)


def _brute_match(p, node, env, anchor, chain):
    if not contains_hole(p):
        return match_pattern(p, node, env)
    if isinstance(p, AnchorHole):
        if id(node) not in chain:
            return []
        inner = p.pattern
        if isinstance(inner, ExprStmt) and isinstance(anchor, Expr):
            inner = inner.expr
        return match_pattern(inner, anchor, env)
    if isinstance(p, Block):
        if isinstance(node, Block):
            return _brute_seq(p.stmts, node.stmts, env, anchor, chain)
        if isinstance(node, Stmt):
            return _brute_seq(p.stmts, (node,), env, anchor, chain)
        return []
    if type(p) is not type(node):
        return []
    holed = [f.name for f in dataclasses.fields(p)
             if f.compare and contains_hole(getattr(p, f.name))]
    # fields holding the hole are checked below, the rest by the matcher
    rest = dataclasses.replace(p, **{n: getattr(node, n) for n in holed})
    envs = match_pattern(rest, node, env)
    for name in holed:
        envs = [e2 for e in envs
                for e2 in _brute_match(getattr(p, name), getattr(node, name),
                                       e, anchor, chain)]
    return _dedupe(envs)


def _brute_around(pats, anchor, env):
    path = [anchor] + ancestors(anchor)
    chain = {id(a) for a in path}
    results = []
    for a in path:
        if isinstance(a, Block):
            results.extend(_brute_seq(pats, a.stmts, env, anchor, chain))
        elif isinstance(a, Stmt) and not isinstance(a.parent, Block):
            results.extend(_brute_seq(pats, (a,), env, anchor, chain))
    return _dedupe(results)


def brute_force_alerts(rule, units):
    kind = Expr if isinstance(rule.anchor, ExprStmt) else Stmt
    pattern = rule.anchor.expr if kind is Expr else rule.anchor
    found = set()
    for unit in units:
        for t in unit.type_decls:
            for m in t.methods:
                for node in walk(m.body):
                    if not isinstance(node, kind):
                        continue
                    envs = [e2 for e in match_pattern(pattern, node)
                            for e2 in _brute_around(rule.body, node, e)]
                    if rule.negated_enclosure is not None:
                        envs = [e for e in envs if not _brute_around(
                            (rule.negated_enclosure,), node, e)]
                    if envs:
                        found.add((unit.file_id, node.span.line,
                                   node.span.column))
    return found


def test_brute_force_agreement(base_rule, rng):
    rules = [base_rule] + [parse_rule(random_rule_text(rng), 'random')
                           for _ in range(40)]
    alerted = 0
    for rule in rules:
        units = parse_corpus(random_corpus(rng))
        got = {(a.file_id, a.line, a.column) for a in run_rule(rule, units)}
        assert got == brute_force_alerts(rule, units), rule.stmts
        alerted += bool(got)
    assert alerted > 5


def test_dropping_enclosure_never_removes_alerts(rng):
    enclosed = 0
    for _ in range(100):
        rule = parse_rule(random_rule_text(rng), 'random')
        enclosed += rule.negated_enclosure is not None
        units = parse_corpus(random_corpus(rng))
        with_negation = {a.sort_key for a in run_rule(rule, units)}
        without = {a.sort_key for a in run_rule(rule.without_enclosure(),
                                                units)}
        assert with_negation <= without
    assert enclosed > 50
