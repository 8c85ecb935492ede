import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isodecomp.errors import DegreeError, DimensionMismatch
from isodecomp.exterior import (
    AlternatingForm,
    Subspace,
    contract,
    multi_contract,
    pullback,
    sort_with_sign,
    wedge,
    wedge_all,
)
from conftest import forms, np_evaluate, vectors


def e(d, *idx, c=1):
    return AlternatingForm.basis(d, tuple(idx), c)


def test_sort_with_sign():
    assert sort_with_sign((2, 0, 1)) == ((0, 1, 2), 1)
    assert sort_with_sign((1, 0)) == ((0, 1), -1)
    assert sort_with_sign((1, 1))[1] == 0


def test_determinant_convention():
    w = e(3, 0, 1)
    assert w.evaluate([[1, 0, 0], [0, 1, 0]]) == 1
    assert w.evaluate([[0, 1, 0], [1, 0, 0]]) == -1
    assert (e(2, 0) ^ e(2, 1)) == e(2, 0, 1)
    assert (e(2, 1) ^ e(2, 0)) == -e(2, 0, 1)


def test_contract_first_slot():
    w = e(3, 0, 1, 2)
    assert contract([1, 0, 0], w) == e(3, 1, 2)
    assert contract([0, 1, 0], w) == -e(3, 0, 2)
    # v1 is inserted first
    assert multi_contract([[0, 1, 0], [1, 0, 0]], w) == -e(3, 2)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5).flatmap(lambda d: st.tuples(forms(d=d), st.data())))
def test_evaluate_matches_determinant_oracle(args):
    w, data = args
    vs = [data.draw(vectors(w.dimension)) for _ in range(w.degree)]
    assert float(w.evaluate(vs)) == pytest.approx(np_evaluate(w, vs), abs=1e-7)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5).flatmap(lambda d: st.tuples(forms(d=d), forms(d=d), st.data())))
def test_wedge_evaluation_shuffle(args):
    # (a^b)(v1..v_{p+q}) against the shuffle formula, only for small degrees
    a, b, data = args
    p, q = a.degree, b.degree
    if p + q > a.dimension or p + q > 4:
        return
    import itertools

    vs = [data.draw(vectors(a.dimension)) for _ in range(p + q)]
    total = Fraction(0)
    for S in itertools.combinations(range(p + q), p):
        T = [i for i in range(p + q) if i not in S]
        _, sign = sort_with_sign(tuple(S) + tuple(T))
        total += sign * a.evaluate([vs[i] for i in S]) * b.evaluate([vs[i] for i in T])
    assert wedge(a, b).evaluate(vs) == total


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda d: st.tuples(forms(d=d), st.data())))
def test_contract_matches_evaluation(args):
    w, data = args
    if w.degree == 0:
        return
    v = data.draw(vectors(w.dimension))
    rest = [data.draw(vectors(w.dimension)) for _ in range(w.degree - 1)]
    assert contract(v, w).evaluate(rest) == w.evaluate([v] + rest)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(lambda d: st.tuples(forms(d=d), st.integers(1, 4), st.data())))
def test_pullback_definition(args):
    w, dp, data = args
    M = [data.draw(vectors(dp)) for _ in range(w.dimension)]
    pw = pullback(M, w)
    assert pw.dimension == dp and pw.degree == w.degree
    if w.degree > dp:
        assert pw.is_zero()
        return
    ws = [data.draw(vectors(dp)) for _ in range(w.degree)]
    Mw = [[sum(Fraction(M[i][j]) * x[j] for j in range(dp)) for i in range(w.dimension)] for x in ws]
    assert pw.evaluate(ws) == w.evaluate(Mw)


@settings(max_examples=100, deadline=None)
@given(forms())
def test_json_roundtrip(w):
    data = json.loads(json.dumps(w.to_json()))
    assert AlternatingForm.from_json(data) == w
    # indices are written 1-based
    for t in data["terms"]:
        assert all(1 <= i <= w.dimension for i in t["indices"])


def test_from_json_rejects_bad_input():
    with pytest.raises(DegreeError):
        AlternatingForm.from_json({"dimension": 3, "degree": 2, "terms": [{"indices": [1], "coeff": "1"}]})
    with pytest.raises((DimensionMismatch, ValueError)):
        AlternatingForm.from_json({"dimension": 2, "degree": 1, "terms": [{"indices": [3], "coeff": "1"}]})


def test_mixed_dimensions_rejected():
    with pytest.raises(DimensionMismatch):
        e(3, 0) + e(4, 0)
    with pytest.raises(DegreeError):
        e(3, 0) + e(3, 0, 1)


def test_wedge_all_and_zero():
    w = wedge_all([e(4, 0), e(4, 1), e(4, 0)])
    assert w.is_zero() and w.degree == 3
    assert wedge_all([], 3) == AlternatingForm.scalar(3, 1)


# -- subspaces


def test_subspace_lattice():
    A = Subspace(4, [[1, 0, 0, 0], [0, 1, 0, 0]])
    B = Subspace(4, [[0, 1, 0, 0], [0, 0, 1, 0]])
    assert (A + B).dim == 3
    assert (A & B) == Subspace(4, [[0, 1, 0, 0]])
    assert [0, 3, 0, 0] in A and [0, 0, 1, 0] not in A
    assert (A & B).issubspace(A)
    assert A.annihilator().dual and A.annihilator().dim == 2
    assert A.annihilator().annihilator() == A
    C = A.complement()
    assert (A + C).dim == 4 and (A & C).dim == 0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda d: st.lists(vectors(d), max_size=d + 1).map(lambda vs: (d, vs))))
def test_subspace_json_roundtrip_and_annihilator(dv):
    d, vs = dv
    S = Subspace(d, vs)
    assert Subspace.from_json(json.loads(json.dumps(S.to_json()))) == S
    ann = S.annihilator()
    assert ann.dim == d - S.dim
    for a in ann.basis:
        for v in S.basis:
            assert sum(x * y for x, y in zip(a, v)) == 0
