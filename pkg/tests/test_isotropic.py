import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from isodecomp import linalg
from isodecomp.analysis import classify_isotropy, kernel
from isodecomp.catalog import example_r11, max_dim_example, omega0, omega0_constrained
from isodecomp.errors import NotCertified, PreconditionError
from isodecomp.exterior import AlternatingForm, Subspace, multi_contract, pullback
from isodecomp.isotropic import (
    canonical_representation,
    certified_length,
    check_canonical_relation,
    check_max_dim_relation,
    complement_n_isotropic,
    dual_frame,
    frak_N_L,
    index_count,
    principal_class_check,
    verify_complement,
)
from conftest import np_evaluate, unimodular


def np_index_count(omega, F_basis):
    """Oracle: n-tuples of F_basis whose contraction is nonzero, by float evaluation
    of omega(f_J, e_i) over all unit vectors e_i."""
    d, n = omega.dimension, omega.degree - 1
    units = np.eye(d)
    count = 0
    for J in itertools.combinations(range(len(F_basis)), n):
        fs = [F_basis[j] for j in J]
        vals = [np_evaluate(omega, fs + [list(u)]) for u in units]
        count += any(abs(v) > 1e-9 for v in vals)
    return count


def pulled(entry, M):
    """Pull an entry back along the invertible M: L becomes M^{-1} L."""
    Minv = linalg.inverse(M)
    w = pullback(M, entry.form)
    move = lambda S: None if S is None else Subspace(S.ambient, [linalg.matvec(Minv, v) for v in S.basis])
    return w, move(entry.L), move(entry.V)


# -- complements


@pytest.mark.parametrize("n,N", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
def test_complement_on_canonical_forms(n, N):
    ent = omega0(n, N)
    V, r = (ent.V, ent.r) if ent.r <= n else (None, None)
    res = complement_n_isotropic(ent.form, ent.L, V, r)
    assert all(res.checks.values())
    assert verify_complement(ent.form, ent.L, res.F, V, r) == res.checks
    # n-isotropy checked directly: any n vectors of F kill omega on F
    Fb = [list(b) for b in res.F.basis]
    for J in itertools.combinations(range(len(Fb)), n + 1):
        assert ent.form.evaluate([Fb[j] for j in J]) == 0


def test_complement_preconditions():
    ent = omega0(2, 1)
    not_max = Subspace(ent.dimension, list(ent.L.basis)[:-1])
    with pytest.raises(PreconditionError):
        complement_n_isotropic(ent.form, not_max)
    with pytest.raises(PreconditionError):
        complement_n_isotropic(ent.form, ent.L, ent.V, 3)  # r > n
    with pytest.raises(PreconditionError):
        complement_n_isotropic(ent.form, ent.L, ent.V, None)


def test_both_routes_give_valid_complements_with_same_NL():
    rng = random.Random(4)
    ent = omega0(2, 2)
    w, L, _ = pulled(ent, unimodular(ent.dimension, rng))
    a = complement_n_isotropic(w, L)
    b = complement_n_isotropic(w, L, reduction_budget=0)
    assert b.route == "graph solve"
    assert all(a.checks.values()) and all(b.checks.values())
    na = frak_N_L(w, L, a.F, search_budget=100)
    nb = frak_N_L(w, L, b.F, search_budget=100)
    assert na.certified_zero_gap and nb.certified_zero_gap
    assert na.value_upper == nb.value_upper == 0


def test_dual_frame():
    ent = omega0(2, 1)
    F = complement_n_isotropic(ent.form, ent.L).F
    Fb = [list(b) for b in F.basis]
    fs = next([Fb[i] for i in J] for J in itertools.combinations(range(len(Fb)), 2)
              if not multi_contract([Fb[i] for i in J], ent.form).is_zero())
    fr = dual_frame(ent.form, ent.L, fs)
    assert all(fr.checks.values())


# -- index counts and N_L


@pytest.mark.parametrize("n,N", [(1, 1), (2, 1), (2, 2)])
def test_index_count_matches_oracle(n, N):
    rng = random.Random(n * 10 + N)
    ent = omega0(n, N)
    w, L, _ = pulled(ent, unimodular(ent.dimension, rng))
    F = complement_n_isotropic(w, L).F
    Fb = [list(b) for b in F.basis]
    _, c = index_count(w, L, Fb)
    assert c == np_index_count(w, Fb)
    # mixing the basis of F cannot go below dim(L / ker)
    M = unimodular(len(Fb), rng)
    mixed = [[sum(M[i][j] * Fb[j][k] for j in range(len(Fb))) for k in range(w.dimension)] for i in range(len(Fb))]
    assert index_count(w, L, mixed)[1] == np_index_count(w, mixed) >= L.dim - kernel(w).dim


def test_r11_counts():
    ent = example_r11()
    Fb = [list(b) for b in ent.F.basis]
    idx, c = index_count(ent.form, ent.L, Fb)
    assert c == np_index_count(ent.form, Fb) == 4
    nl = frak_N_L(ent.form, ent.L, ent.F, search_budget=200)
    assert nl.count_standard == 4 and nl.best_count == 4
    assert not nl.certified_zero_gap and nl.value_upper == 1
    with pytest.raises(NotCertified):
        canonical_representation(ent.form, ent.L, ent.F, nl=nl)


# -- canonical representation and length


@pytest.mark.parametrize("n,N", [(1, 1), (2, 1), (2, 2), (1, 3)])
def test_canonical_representation_reconstructs(n, N):
    ent = omega0(n, N)
    F = complement_n_isotropic(ent.form, ent.L).F
    rep = canonical_representation(ent.form, ent.L, F)
    assert rep.reconstruct() == ent.form
    assert all(rep.checks.values())
    assert rep.sign == (-1) ** n
    assert rep.length.certified and rep.length.lower == rep.length.upper == N * n + 1


def test_canonical_representation_on_pullback():
    rng = random.Random(9)
    ent = omega0(2, 1)
    w, L, _ = pulled(ent, unimodular(ent.dimension, rng))
    F = complement_n_isotropic(w, L).F
    rep = canonical_representation(w, L, F)
    assert rep.reconstruct() == w
    lb = certified_length(w, L)
    assert lb.certified and lb.upper == 3


# -- principal part


def test_principal_class_is_an_equivalence():
    ent = omega0(2, 1)
    w, L = ent.form, ent.L
    rng = random.Random(2)
    xs = [i for i in ent.horizontal]
    def horizontal():
        terms = {}
        for I in itertools.combinations(xs, w.degree):
            terms[I] = Fraction(rng.randint(-2, 2))
        return AlternatingForm(w.dimension, w.degree, terms)
    a, b = w + horizontal(), w + horizontal()
    assert principal_class_check(w, w, L)
    assert principal_class_check(w, a, L) and principal_class_check(a, w, L)
    assert principal_class_check(a, b, L) and principal_class_check(w, b, L)
    # a term containing an L direction changes the principal part
    p = ent.L.basis[0]
    bad = AlternatingForm.basis(w.dimension, tuple(sorted({p.index(1), xs[0], xs[1]})))
    assert not principal_class_check(w, w + bad, L)


# -- dimension relations


@pytest.mark.parametrize("n,N", [(1, 1), (2, 1), (2, 2), (3, 1), (1, 3)])
def test_canonical_relation_holds_for_omega0(n, N):
    ent = omega0(n, N)
    assert check_canonical_relation(ent.form, ent.L, ent.V, 2)


def test_relations_on_other_entries():
    assert not check_canonical_relation(*(lambda e: (e.form, e.L, e.V, 2))(example_r11()))
    assert check_max_dim_relation(max_dim_example(2, 1).form, max_dim_example(2, 1).L)
    assert not check_max_dim_relation(omega0(2, 2).form, omega0(2, 2).L)
    # dropping momentum terms leaves kernel directions outside L, so L is not maximal
    ent = omega0_constrained(2, 2, {(1, 1)})
    assert kernel(ent.form).dim == 4
    assert not kernel(ent.form).issubspace(ent.L)
    assert not classify_isotropy(ent.L, ent.form, 1).is_maximal
