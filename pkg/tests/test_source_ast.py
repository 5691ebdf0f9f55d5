import pytest

from patlock.javaparser import parse_source, parse_snippet, parse_expression
from patlock.source_ast import (SourceSpan, Block, If, ExprStmt, MethodCall,
                                MethodDecl, ancestors,
                                enclosing_method, node_count, pretty_print,
                                walk)

from javagen import random_corpus

# Calls of a servlet method, in the shape found in production code.
SERVLET = '''
class VisualizarTermoEAditivo extends HttpServlet {
    protected void doGet(HttpServletRequest req, HttpServletResponse resp) {
        String ide = req.getParameter("ide");
        String ida = req.getParameter("ida");
        TermoEstagio termoEstagio = null;
        if (ide != null)
            termoEstagio = TermoEstagioServices.buscarTermoEstagio(Integer.parseInt(ide));
        if (ida != null)
            termoAditivo = TermoAditivoServices.buscarTermoAditivo(Integer.parseInt(ida));
        req.setAttribute("termoEstagio", termoEstagio);
    }
}
'''


def test_span_validation():
    SourceSpan('F.java', 3, 1, 3, 10)
    with pytest.raises(ValueError):
        SourceSpan('F.java', 0, 1, 1, 1)
    with pytest.raises(ValueError):
        SourceSpan('F.java', 3, 5, 3, 4)


def test_span_contains():
    outer = SourceSpan('F.java', 2, 1, 9, 1)
    assert outer.contains(SourceSpan('F.java', 3, 5, 3, 30))
    assert not outer.contains(SourceSpan('F.java', 8, 1, 10, 1))


def test_equality_ignores_spans_and_layout():
    a = parse_expression('Integer.parseInt(idAluno)')
    b = parse_expression('Integer . parseInt (\n  idAluno )')
    assert a == b
    assert a.span != b.span


def test_ancestors_end_at_method():
    unit = parse_source(SERVLET, 'VisualizarTermoEAditivo.java')
    calls = [n for n in walk(unit) if isinstance(n, MethodCall) and
             n.name == 'parseInt']
    assert [c.span.line for c in calls] == [8, 10]
    chain = ancestors(calls[0])
    assert isinstance(chain[-1], MethodDecl)
    assert any(isinstance(a, If) for a in chain)
    assert enclosing_method(calls[0]).name == 'doGet'
    assert ancestors(chain[-1]) == []


def test_pretty_print_canonical():
    snippet = parse_snippet('if(ide!=null)\n x=f( 1 ,ide );else{ g(); }',
                            pattern=False)
    assert pretty_print(snippet.stmts[0]) == (
        'if (ide != null)\n    x = f(1, ide);\nelse {\n    g();\n}')


def test_round_trip_servlet_excerpt():
    unit = parse_source(SERVLET, 'VisualizarTermoEAditivo.java')
    again = parse_source(pretty_print(unit), 'VisualizarTermoEAditivo.java')
    assert again == unit
    assert node_count(again) == node_count(unit)


@pytest.mark.parametrize('text', [
    'a = b + c * d;',
    'a = (b + c) * d;',
    'x = -(a - b);',
    'y = !(a && b) || c;',
    'z = c ? a : b;',
    'w = (int) f(x);',
    'v = new Aluno(id).getNome();',
    'u = a[i + 1];',
    'i++;',
])
def test_round_trip_expressions(text):
    stmt = parse_snippet(text, pattern=False).stmts[0]
    again = parse_snippet(pretty_print(stmt), pattern=False).stmts[0]
    assert again == stmt


def test_round_trip_random_corpora(rng):
    for _ in range(50):
        for file_id, text in random_corpus(rng).items():
            unit = parse_source(text, file_id)
            assert parse_source(pretty_print(unit), file_id) == unit


def test_round_trip_fixtures(sisgee_units):
    assert len(sisgee_units) == 9
    for unit in sisgee_units:
        again = parse_source(pretty_print(unit), unit.file_id)
        assert again == unit
        assert node_count(again) == node_count(unit)


def test_child_spans_within_parent(sisgee_units):
    checked = 0
    for unit in sisgee_units:
        for node in walk(unit):
            for child in node.children():
                assert node.span.contains(child.span), (
                    unit.file_id, type(node).__name__, type(child).__name__)
                assert child.span.file_id == unit.file_id
                checked += 1
    assert checked > 1000


def test_block_children_in_source_order():
    block = parse_snippet('a(); b(); c();', pattern=False).stmts
    names = [s.expr.name for s in block if isinstance(s, ExprStmt)]
    assert names == ['a', 'b', 'c']
    wrapped = Block(block)
    assert [c.expr.name for c in wrapped.children()] == ['a', 'b', 'c']
