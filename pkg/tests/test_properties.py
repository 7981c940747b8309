"""Property tests over strategy-generated terms."""

from fractions import Fraction

from hypothesis import given, settings, strategies as st

from holebox.expr import (
    INT, LocalDecl, Telescope, free_vars, mk_app, mk_lit, mk_var,
    substitute, syntactic_eq,
)
from holebox.norm import definitional_eq, normalize
from holebox.syntax import parse_term, print_term

TELE = Telescope((LocalDecl("x", INT), LocalDecl("y", INT),
                  LocalDecl("z", INT)))


def int_terms(max_leaves=8):
    leaf = st.one_of(
        st.integers(-30, 30).map(lambda v: mk_lit(v, INT)),
        st.sampled_from(["x", "y", "z"]).map(lambda n: mk_var(n, INT)),
    )
    return st.recursive(
        leaf,
        lambda sub: st.tuples(st.sampled_from(["add", "sub", "mul"]),
                              sub, sub).map(
            lambda t: mk_app(t[0], (t[1], t[2]))),
        max_leaves=max_leaves)


@settings(max_examples=200, derandomize=True)
@given(int_terms())
def test_print_parse_round_trip(term):
    assert syntactic_eq(parse_term(print_term(term), TELE, INT), term)


@settings(max_examples=200, derandomize=True)
@given(int_terms())
def test_normalize_idempotent(term):
    once = normalize(term)
    assert syntactic_eq(normalize(once), once)


@settings(max_examples=200, derandomize=True)
@given(int_terms())
def test_syntactic_implies_definitional(term):
    assert definitional_eq(term, term)


@settings(max_examples=200, derandomize=True)
@given(int_terms(), int_terms(4), int_terms(4))
def test_substitution_lemma(term, r, s_raw):
    # t[x:=r][y:=s] == t[y:=s][x:=r[y:=s]] when x is not free in s
    s = substitute(s_raw, "x", mk_lit(0, INT))
    assert "x" not in free_vars(s)
    lhs = substitute(substitute(term, "x", r), "y", s)
    rhs = substitute(substitute(term, "y", s), "x", substitute(r, "y", s))
    assert syntactic_eq(lhs, rhs)


@settings(max_examples=150, derandomize=True)
@given(int_terms(), st.integers(-9, 9))
def test_normalization_respects_evaluation(term, xval):
    """Normalizing then substituting equals substituting then folding."""
    inst = substitute(substitute(substitute(
        term, "x", mk_lit(xval, INT)), "y", mk_lit(2, INT)),
        "z", mk_lit(-3, INT))
    n1 = normalize(inst)
    n2 = normalize(substitute(substitute(substitute(
        normalize(term), "x", mk_lit(xval, INT)), "y", mk_lit(2, INT)),
        "z", mk_lit(-3, INT)))
    assert syntactic_eq(n1, n2)
