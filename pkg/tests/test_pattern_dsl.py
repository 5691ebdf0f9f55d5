import pytest

from patlock.errors import RuleSyntaxError, RuleSemanticError
from patlock.pattern_dsl import (AlertMarker, InAnyMethod, NotExists,
                                 parse_rule, split_metadata, validate_rule,
                                 wildcard_names)
from patlock.source_ast import (AnchorHole, ExprAny, ExprStmt, Identifier,
                                IdentWildcard, MethodCall, StmtEllipsis, Try,
                                VarDecl, walk)

UNCHECKED = '''//inAnyMethod
//not_exists
try{
    //Alert: Surround Integer.parseInt with a try/catch block
    Integer.parseInt(any);
}catch(AnyException any){}
'''

REQUEST_PARAMETER = '''//inAnyMethod
String someVariable = request.getParameter("someParam");
...
//Alert: Request parameter used without a check
someVariable.anyMethod(...);
'''


def test_fixture_rule(base_rule):
    assert base_rule.name == 'unchecked_integer'
    assert base_rule.doc == 'Unchecked Integer'
    assert base_rule.alert_message == \
        'Surround Integer.parseInt with a try/catch block'
    assert isinstance(base_rule.scope, InAnyMethod)
    assert base_rule.anchor_pattern == MethodCall(
        Identifier('Integer'), 'parseInt', (ExprAny(),))
    assert isinstance(base_rule.negated_enclosure, Try)
    holes = [n for n in walk(base_rule.negated_enclosure)
             if isinstance(n, AnchorHole)]
    assert len(holes) == 1 and holes[0].pattern is base_rule.anchor
    assert not base_rule.positive_body
    assert validate_rule(base_rule) == []


def test_markups_in_order(base_rule):
    kinds = [type(m) for m in base_rule.markups]
    assert kinds == [InAnyMethod, NotExists, AlertMarker]
    # metadata lines are blanked, so spans keep their file lines
    assert base_rule.markups[0].span.line == 3


def test_parse_is_deterministic():
    assert parse_rule(UNCHECKED, 'r') == parse_rule(UNCHECKED, 'r')


def test_name_from_argument():
    assert parse_rule(UNCHECKED, 'from_file').name == 'from_file'
    assert parse_rule('# name: meta\n' + UNCHECKED, 'from_file').name == \
        'meta'


def test_split_metadata_keeps_lines():
    metadata, body = split_metadata('# name: r\n# doc: D\n\nfoo();\n# x\n')
    assert metadata == {'name': 'r', 'doc': 'D'}
    assert body == '\n\n\nfoo();\n# x\n'


def test_without_enclosure():
    rule = parse_rule(UNCHECKED, 'r').without_enclosure()
    assert rule.negated_enclosure is None
    assert rule.alert_message.startswith('Surround')


def test_positive_body():
    rule = parse_rule(
        '//inAnyMethod\n'
        'someMsg = ValidaUtils.validaInteger(any, someParam);\n'
        '...\n'
        '//Alert: parsed after validation\n'
        'Integer.parseInt(someParam);\n', 'r')
    assert rule.positive_body
    assert isinstance(rule.body[-1], AnchorHole)
    assert isinstance(rule.anchor, ExprStmt)
    assert wildcard_names(rule.stmts) == {'someMsg': 1, 'someParam': 2}


@pytest.mark.parametrize('text,message', [
    ('f();', 'no //Alert: marker'),
    ('//Alert: a\nf();\n//Alert: b\ng();', 'exactly one is allowed'),
    ('//Alert:\nf();', 'alert message is empty'),
    ('f();\n//Alert: trailing', 'must precede a statement'),
    ('//context\n//Alert: a\nf();', 'only valid in context files'),
    ('//Alert: a\nf();\n//anchor\ng();', 'only valid in context files'),
    ('//not_exists\ng();\n//Alert: a\nf();',
     'must be inside the //not_exists statement'),
    ('//not_exists\nif (a) {\n//not_exists\nif (b) {\n//Alert: a\nf();\n}\n}',
     'nested or repeated //not_exists'),
    ('f();\n//inAnyMethod\n//Alert: a\ng();', 'must be in the rule header'),
])
def test_markup_misuse(text, message):
    with pytest.raises(RuleSemanticError) as info:
        parse_rule(text, 'r')
    assert message in str(info.value)


@pytest.mark.parametrize('text', [
    '',
    '# name: only metadata\n',
    '//Alert: a\nInteger.parseInt(any;',
])
def test_syntax_errors(text):
    with pytest.raises(RuleSyntaxError):
        parse_rule(text, 'r')


def test_syntax_error_location():
    with pytest.raises(RuleSyntaxError) as info:
        parse_rule('//Alert: a\nf(\n', 'broken')
    assert info.value.span.file_id == 'broken'
    assert str(info.value).startswith('broken:')


def test_validate_warnings():
    rule = parse_rule(
        '//inAnyMethod\n'
        '...\n'
        '//Alert: once\n'
        'use(someValue);\n', 'r')
    messages = [d.message for d in validate_rule(rule)]
    assert "unconstraining wildcard 'someValue' is used once" in messages
    assert 'redundant ellipsis at the edge of a block' in messages
    assert all(d.severity == 'warning' for d in validate_rule(rule))


def test_ellipsis_anchor_is_an_error():
    rule = parse_rule('f();\n//Alert: m\n...\n', 'r')
    errors = [d.message for d in validate_rule(rule) if d.severity == 'error']
    assert errors == ['anchor must be a concrete or wildcard statement, '
                      'not an ellipsis']


def test_request_parameter_rule_shape():
    rule = parse_rule(REQUEST_PARAMETER, 'request_parameter')
    declaration, gap, use = rule.stmts
    assert declaration == VarDecl(
        'String', IdentWildcard('someVariable'),
        MethodCall(Identifier('request'), 'getParameter',
                   (IdentWildcard('someParam', quoted=True),)))
    assert gap == StmtEllipsis()
    assert use == ExprStmt(MethodCall(IdentWildcard('someVariable'),
                                      IdentWildcard('anyMethod'),
                                      (StmtEllipsis(),)))
    assert rule.anchor == use
    assert rule.anchor_pattern == use.expr
    assert rule.positive_body
    assert rule.negated_enclosure is None
    assert isinstance(rule.body[-1], AnchorHole)
    assert wildcard_names(rule.stmts) == {'someVariable': 2, 'someParam': 1,
                                          'anyMethod': 1}
