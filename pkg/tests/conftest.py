"""Shared oracles, generators and the acceptance summary hook."""

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from isodecomp.exterior import AlternatingForm
from isodecomp.poly import Poly, PolyForm

ACCEPTANCE_LINES = []


@pytest.fixture
def record_acceptance():
    def record(number, ok, detail):
        line = "%s criterion %d: %s" % ("PASS" if ok else "FAIL", number, detail)
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# random exact data


def random_form(rng, d, k, density=0.5, bound=3):
    terms = {}
    for I in itertools.combinations(range(d), k):
        if rng.random() < density:
            c = rng.randint(-bound, bound)
            if c:
                terms[I] = Fraction(c)
    return AlternatingForm(d, k, terms)


def unimodular(d, rng, shears=None):
    """Random integer matrix with determinant 1 built from elementary shears."""
    M = [[int(i == j) for j in range(d)] for i in range(d)]
    for _ in range(shears or 2 * d):
        i, j = rng.sample(range(d), 2)
        c = rng.choice([-2, -1, 1, 2])
        for r in range(d):
            M[r][i] += c * M[r][j]
    return M


def np_matrix(rows):
    return np.array([[float(x) for x in r] for r in rows])


# numpy oracle: omega(v_1..v_k) = sum_I c_I det(V[I, :])
def np_evaluate(form, vectors):
    V = np_matrix(vectors).T  # columns are the vectors
    total = 0.0
    for I, c in form.terms.items():
        total += float(c) * np.linalg.det(V[list(I), :]) if len(I) else float(c)
    return total


def np_rank(rows, tol=1e-9):
    if not rows or not len(rows[0]):
        return 0
    return int(np.linalg.matrix_rank(np_matrix(rows), tol=tol))


def np_skew_matrix(form2):
    d = form2.dimension
    A = np.zeros((d, d))
    for (i, j), c in form2.terms.items():
        A[i, j] = float(c)
        A[j, i] = -float(c)
    return A


# ---------------------------------------------------------------------------
# hypothesis strategies

small_q = st.fractions(min_value=-4, max_value=4, max_denominator=3)


@st.composite
def forms(draw, d=None, k=None, max_d=6):
    d = draw(st.integers(1, max_d)) if d is None else d
    k = draw(st.integers(0, d)) if k is None else k
    idx = list(itertools.combinations(range(d), k))
    chosen = draw(st.lists(st.sampled_from(idx), max_size=min(len(idx), 6), unique=True)) if idx else []
    terms = {I: draw(small_q) for I in chosen}
    return AlternatingForm(d, k, terms)


@st.composite
def vectors(draw, d):
    return draw(st.lists(small_q, min_size=d, max_size=d))


# ---------------------------------------------------------------------------
# polynomial form generators


def random_closed_exact(rng, d, max_poly_degree=3):
    """``(omega, split, theta')`` with ``omega = d theta'`` and every term carrying a dy."""
    from isodecomp.flatten import CoordinateSplit
    from isodecomp.poly import exterior_derivative, random_poly

    ny = rng.randint(1, d)
    ys = tuple(sorted(rng.sample(range(d), ny)))
    xs = tuple(i for i in range(d) if i not in ys)
    split = CoordinateSplit(xs, ys)
    while True:
        k = rng.randint(0, d - 1)
        terms = {}
        for J in itertools.combinations(range(d), k):
            if k and not any(j in ys for j in J):
                continue
            if k == 0:
                continue
            if rng.random() < 0.6:
                terms[J] = random_poly(d, rng, max_degree=max_poly_degree, n_terms=3)
        theta = PolyForm(d, k, terms)
        omega = exterior_derivative(theta)
        if not omega.is_zero():
            return omega, split, theta


def moser_oracle():
    """Polynomial pullback of the (2,1) canonical form by a y-shift.

    Coordinates ``(x1, x2, q | p, p1, p2)``.  Each shift avoids the variables
    that would create pure-dx terms, so ``span(d/dy)`` stays isotropic.
    """
    from isodecomp.catalog import omega0
    from isodecomp.flatten import CoordinateSplit

    d = 6
    F = Fraction
    g0 = Poly(d, {(1, 0, 0, 0, 0, 0): F(1, 5), (0, 1, 0, 1, 0, 0): F(-1, 7), (0, 0, 0, 0, 1, 0): F(1, 10)})
    g1 = Poly(d, {(0, 1, 1, 0, 0, 0): F(1, 4), (0, 0, 0, 2, 0, 0): F(1, 6)})
    g2 = Poly(d, {(2, 0, 0, 0, 0, 0): F(-1, 3), (0, 0, 1, 0, 0, 1): F(1, 5)})
    phi = [Poly.var(d, i) for i in range(3)] + [Poly.var(d, 3) + g0, Poly.var(d, 4) + g1, Poly.var(d, 5) + g2]
    W = PolyForm.from_constant(omega0(2, 1).form).pullback(phi)
    return W, CoordinateSplit((0, 1, 2), (3, 4, 5))


@pytest.fixture
def rng():
    return random.Random(12345)
