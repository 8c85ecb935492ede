import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isodecomp.errors import DegreeError, DimensionMismatch
from isodecomp.poly import (
    Poly,
    PolyForm,
    PolyVectorField,
    exterior_derivative,
    fields_from_json,
    fields_to_json,
    lie_bracket,
    random_poly,
)

seeds = st.integers(0, 10 ** 6)


def rand_form(rng, d, k, max_degree=2):
    terms = {}
    for I in itertools.combinations(range(d), k):
        if rng.random() < 0.5:
            terms[I] = random_poly(d, rng, max_degree=max_degree)
    return PolyForm(d, k, terms)


def rand_field(rng, d, max_degree=2):
    return PolyVectorField(d, [random_poly(d, rng, max_degree=max_degree) for _ in range(d)])


def test_poly_arithmetic():
    d = 2
    x, y = Poly.var(d, 0), Poly.var(d, 1)
    p = (x + y) ** 2
    assert p == x * x + 2 * x * y + y * y
    assert p.degree() == 2 and p.diff(0) == 2 * x + 2 * y
    assert p.evaluate([1, 2]) == 9
    assert (p - p).is_zero()
    assert p.compose([y, x]) == p
    assert Poly.const(d, 5).constant_term() == 5
    assert Poly.from_json(d, json.loads(json.dumps(p.to_json()))) == p


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 4))
def test_d_squared_is_zero(seed, d):
    rng = random.Random(seed)
    k = rng.randint(0, d)
    w = rand_form(rng, d, k, max_degree=3)
    assert exterior_derivative(exterior_derivative(w)).is_zero()


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 4))
def test_d_is_an_antiderivation(seed, d):
    rng = random.Random(seed)
    p, q = rng.randint(0, d), rng.randint(0, d)
    a, b = rand_form(rng, d, p), rand_form(rng, d, q)
    if p + q > d:
        return
    lhs = exterior_derivative(a ^ b)
    rhs = (exterior_derivative(a) ^ b) + (a ^ exterior_derivative(b)) * (-1) ** p
    if p + q + 1 > d:
        assert lhs.is_zero()
    else:
        assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 3))
def test_pullback_commutes_with_d(seed, d):
    rng = random.Random(seed)
    k = rng.randint(0, d - 1)
    w = rand_form(rng, d, k, max_degree=1)
    phi = [Poly.var(d, i) + random_poly(d, rng, max_degree=2, n_terms=2) for i in range(d)]
    assert exterior_derivative(w.pullback(phi)) == exterior_derivative(w).pullback(phi)


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 4))
def test_bracket_identities(seed, d):
    rng = random.Random(seed)
    X, Y, Z = (rand_field(rng, d) for _ in range(3))
    assert lie_bracket(X, Y) == -lie_bracket(Y, X)
    jac = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) + lie_bracket(Z, lie_bracket(X, Y))
    assert jac.is_zero()
    f = random_poly(d, rng, max_degree=3)
    assert lie_bracket(X, Y).apply(f) == X.apply(Y.apply(f)) - Y.apply(X.apply(f))


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 4))
def test_evaluate_and_compile_agree(seed, d):
    rng = random.Random(seed)
    w = rand_form(rng, d, rng.randint(0, d))
    pt = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(d)]
    exact = w.evaluate(pt)
    idx = list(itertools.combinations(range(d), w.degree))
    dense = w.compile().dense(np.array([[float(x) for x in pt]]), idx)[0]
    want = np.array([float(exact.coefficient(I)) for I in idx])
    assert np.allclose(dense, want, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 4))
def test_contract_matches_pointwise(seed, d):
    rng = random.Random(seed)
    k = rng.randint(1, d)
    w, X = rand_form(rng, d, k), rand_field(rng, d)
    pt = [Fraction(rng.randint(-3, 3)) for _ in range(d)]
    from isodecomp.exterior import contract

    assert w.contract(X).evaluate(pt) == contract(X.evaluate(pt), w.evaluate(pt))


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 4))
def test_json_roundtrips(seed, d):
    rng = random.Random(seed)
    w = rand_form(rng, d, rng.randint(0, d))
    assert PolyForm.from_json(json.loads(json.dumps(w.to_json()))) == w
    fs = [rand_field(rng, d) for _ in range(2)]
    assert fields_from_json(json.loads(json.dumps(fields_to_json(fs)))) == fs


def test_errors():
    with pytest.raises(DegreeError):
        PolyForm(2, 0, {(): Poly.const(2, 1)}).contract(PolyVectorField.coordinate(2, 0))
    with pytest.raises(DimensionMismatch):
        PolyForm(2, 1).pullback([Poly.var(2, 0)])
