"""Structural analysis of a single form: kernel, support, decomposability,
length bounds, k-orthogonal complements and isotropy classification."""

from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import linalg
from .errors import DegreeError, DimensionMismatch
from .exterior import (
    AlternatingForm,
    Subspace,
    annihilator,
    multi_contract,
    contract,
    pullback,
    wedge_all,
)
from .linalg import frac_str


def contraction_rows(omega: AlternatingForm) -> list:
    """Rows of the matrix of ``v -> i_v omega`` (one row per output monomial)."""
    d = omega.dimension
    rows = {}
    for I, c in omega.terms.items():
        for pos, i in enumerate(I):
            J = I[:pos] + I[pos + 1:]
            row = rows.get(J)
            if row is None:
                row = rows[J] = [Fraction(0)] * d
            row[i] += -c if pos % 2 else c
    return [rows[J] for J in sorted(rows)]


def kernel(omega: AlternatingForm) -> Subspace:
    if omega.degree == 0:
        raise DegreeError("kernel is undefined for a 0-form")
    d = omega.dimension
    rows = contraction_rows(omega)
    return Subspace(d, linalg.nullspace(rows, d) if rows else linalg.identity(d))


def support(omega: AlternatingForm) -> Subspace:
    """Smallest dual subspace ``S`` with ``omega`` in ``Lambda^k S``.

    The zero form gets ``{0}``; callers that care should test ``is_zero``.
    """
    if omega.is_zero() or omega.degree == 0:
        return Subspace.zero(omega.dimension, dual=True)
    return annihilator(kernel(omega))


def factorize(beta: AlternatingForm) -> Optional[list]:
    """1-forms ``a1..ak`` with ``beta = a1 ^ ... ^ ak``, or ``None`` if not decomposable.

    The factors are a basis of the support, with the overall scalar folded
    into the first one.  The zero form returns ``None`` (it has no factors).
    """
    if beta.degree == 0:
        raise DegreeError("a 0-form has no 1-form factors")
    if beta.is_zero():
        return None
    S = support(beta)
    if S.dim != beta.degree:
        return None
    factors = [AlternatingForm.one_form(r) for r in S.basis]
    w = wedge_all(factors)
    I = next(iter(beta.terms))
    c = beta.terms[I] / w.coefficient(I)
    factors[0] = factors[0] * c
    if wedge_all(factors) != beta:
        raise AssertionError("factorisation failed to reproduce the form")
    return factors


def is_decomposable(beta: AlternatingForm) -> bool:
    if beta.is_zero() or beta.degree <= 1:
        return True
    return support(beta).dim == beta.degree


def decomposable_vector(v, omega: AlternatingForm) -> bool:
    return is_decomposable(contract(v, omega))


# ---------------------------------------------------------------------------
# length


@dataclass
class LengthBounds:
    lower: int
    upper: int
    certified: bool
    witness_basis: Optional[list] = None  # 1-forms, a basis of the dual space
    lower_sources: dict = field(default_factory=dict)
    upper_source: str = "standard basis"

    def __post_init__(self):
        if self.lower > self.upper:
            raise AssertionError("length lower bound %d exceeds upper bound %d" % (self.lower, self.upper))

    def to_json(self):
        out = {
            "lower": self.lower,
            "upper": self.upper,
            "certified": self.certified,
            "lower_sources": dict(self.lower_sources),
            "upper_source": self.upper_source,
        }
        if self.witness_basis is not None:
            out["witness_basis"] = [[frac_str(x) for x in f.one_form_coeffs()] for f in self.witness_basis]
        return out


def length_in_basis(beta: AlternatingForm, vector_basis) -> int:
    """Number of monomials of ``beta`` in the basis dual to ``vector_basis``."""
    return len(pullback(linalg.transpose(vector_basis), beta))


def flattening_rank(beta: AlternatingForm, j: int) -> int:
    """Rank of ``Lambda^j W -> Lambda^{k-j} W^*``, ``xi -> i_xi beta``."""
    cols = {}
    rows = {}
    for I, c in beta.terms.items():
        for J in itertools.combinations(I, j):
            rest = tuple(i for i in I if i not in J)
            # sign of moving J to the front of I
            pos = [I.index(x) for x in J]
            inv = sum(p - t for t, p in enumerate(pos))
            row = rows.setdefault(J, {})
            ci = cols.setdefault(rest, len(cols))
            row[ci] = row.get(ci, 0) + (-c if inv % 2 else c)
    mat = [[r.get(i, 0) for i in range(len(cols))] for r in rows.values()]
    return linalg.rank(mat, len(cols)) if mat else 0


def _darboux_basis(omega: AlternatingForm):
    """Vector basis ``e1, f1, e2, f2, ..., kernel`` with ``omega = sum e^t ^ f^t``."""
    d = omega.dimension
    G = [[Fraction(0)] * d for _ in range(d)]
    for (i, j), c in omega.terms.items():
        G[i][j] = c
        G[j][i] = -c

    def B(u, v):
        return sum((u[i] * G[i][j] * v[j] for i in range(d) if u[i] for j in range(d) if v[j]), Fraction(0))

    remaining = linalg.identity(d)
    pairs = []
    while True:
        found = None
        for a in range(len(remaining)):
            for b in range(a + 1, len(remaining)):
                x = B(remaining[a], remaining[b])
                if x != 0:
                    found = (a, b, x)
                    break
            if found:
                break
        if not found:
            break
        a, b, x = found
        e = remaining[a]
        f = [y / x for y in remaining[b]]
        pairs += [e, f]
        rest = []
        for t, w in enumerate(remaining):
            if t in (a, b):
                continue
            bwf, bwe = B(w, f), B(w, e)
            rest.append([wi - bwf * ei + bwe * fi for wi, ei, fi in zip(w, e, f)])
        remaining = rest
    return pairs + remaining, len(pairs) // 2


def _random_unimodular(d, rng, bound, shears):
    M = linalg.identity(d)
    for _ in range(shears):
        i, j = rng.sample(range(d), 2)
        c = rng.randint(-bound, bound) or 1
        for r in range(d):
            M[r][j] += c * M[r][i]
    perm = list(range(d))
    rng.shuffle(perm)
    return [[M[r][p] for p in perm] for r in range(d)]


def length_bounds(beta: AlternatingForm, search_budget: int = 200, seed: int = 0,
                  extra_lower=None) -> LengthBounds:
    """Lower and upper bounds on the length of ``beta``.

    The lower bound is the best flattening bound ``ceil(rank_j / C(k, j))``
    (for 2-forms this is half the skew rank).  The upper bound is the best
    basis count over the standard basis, a factorisation or Darboux basis
    when available, and ``search_budget`` seeded random unimodular bases.
    ``extra_lower`` may carry ``(value, source)`` from elsewhere.
    """
    d, k = beta.dimension, beta.degree
    ident = linalg.identity(d)
    if beta.is_zero():
        return LengthBounds(0, 0, True, [AlternatingForm.one_form(r) for r in ident],
                            {"zero form": 0}, "zero form")
    sources = {"nonzero": 1}
    lower = 1
    for j in range(1, k // 2 + 1):
        r = flattening_rank(beta, j)
        b = -(-r // math.comb(k, j))
        sources["flattening j=%d" % j] = b
        lower = max(lower, b)
    if extra_lower is not None:
        val, src = extra_lower
        sources[src] = val
        lower = max(lower, val)

    best = len(beta)
    best_basis = ident
    upper_source = "standard basis"

    def consider(vecs, label):
        nonlocal best, best_basis, upper_source
        n = length_in_basis(beta, vecs)
        if n < best:
            best, best_basis, upper_source = n, vecs, label

    if k >= 2 and best > lower:
        facs = factorize(beta)
        if facs is not None:
            rows = linalg.extend_to_basis([f.one_form_coeffs() for f in facs], d)
            consider(linalg.transpose(linalg.inverse(rows)), "factorisation")
    if k == 2 and best > lower:
        vecs, _ = _darboux_basis(beta)
        consider(vecs, "darboux basis")
    if best > lower and search_budget > 0 and d >= 2:
        rng = random.Random(seed)
        for _ in range(search_budget):
            M = _random_unimodular(d, rng, 2, rng.randint(1, 2 * d))
            consider(M, "random unimodular basis (seed %d)" % seed)
            if best <= lower:
                break
    witness_rows = linalg.inverse(linalg.transpose(best_basis))
    witness = [AlternatingForm.one_form(r) for r in witness_rows]
    return LengthBounds(lower, best, lower == best, witness, sources, upper_source)


# ---------------------------------------------------------------------------
# isotropy


def _check_L(L: Subspace, omega: AlternatingForm):
    if L.ambient != omega.dimension:
        raise DimensionMismatch("subspace ambient %d vs form dimension %d" % (L.ambient, omega.dimension))
    if L.dual:
        raise DimensionMismatch("expected a subspace of the base space, got a dual subspace")


def k_orthogonal(L: Subspace, omega: AlternatingForm, k: int) -> Subspace:
    """``{v : i_v i_{v1} ... i_{vk} omega = 0 for all v1..vk in L}``."""
    _check_L(L, omega)
    if not 0 <= k <= omega.degree:
        raise DegreeError("k=%d outside 0..%d" % (k, omega.degree))
    if k == 0:
        return kernel(omega)
    d = omega.dimension
    if k == omega.degree:
        # k+1 arguments exceed the degree: every subspace is k-isotropic
        return Subspace.full(d)
    rows = []
    for combo in itertools.combinations(L.basis, k):
        rows.extend(contraction_rows(multi_contract(combo, omega)))
    if not rows:
        return Subspace.full(d)
    return Subspace(d, linalg.nullspace(rows, d))


@dataclass
class IsotropyReport:
    k: int
    is_k_isotropic: bool
    is_strict: bool
    is_maximal: bool
    k_orthogonal: Subspace
    kernel_in_L: Optional[bool] = None

    def to_json(self):
        return {
            "k": self.k,
            "is_k_isotropic": self.is_k_isotropic,
            "is_strict": self.is_strict,
            "is_maximal": self.is_maximal,
            "kernel_in_L": self.kernel_in_L,
            "k_orthogonal": self.k_orthogonal.to_json(),
        }


def is_k_isotropic(L: Subspace, omega: AlternatingForm, k: int) -> bool:
    return L.issubspace(k_orthogonal(L, omega, k))


def classify_isotropy(L: Subspace, omega: AlternatingForm, k: int) -> IsotropyReport:
    """Classify ``L`` as k-isotropic / strict / maximal with respect to ``omega``.

    Maximality is tested as ``L == L^{omega,k}``: for a k-isotropic ``L``,
    ``L + <u>`` stays k-isotropic exactly when ``u`` lies in ``L^{omega,k}``.
    """
    perp = k_orthogonal(L, omega, k)
    iso = L.issubspace(perp)
    if k == 0:
        strict = iso
    else:
        strict = iso and not is_k_isotropic(L, omega, k - 1)
    maximal = iso and perp == L
    kin = kernel(omega).issubspace(L) if maximal else None
    if maximal and not kin:
        raise AssertionError("maximal subspace misses part of the kernel")
    return IsotropyReport(k, iso, strict, maximal, perp, kin)


def is_maximal_isotropic(L: Subspace, omega: AlternatingForm) -> bool:
    return classify_isotropy(L, omega, 1).is_maximal


def _coeff_vectors(m, bound):
    """Nonzero integer vectors in ``[-bound, bound]^m``, sparse and small first,
    first nonzero entry positive."""
    for nnz in range(1, m + 1):
        for size in range(1, bound + 1):
            for positions in itertools.combinations(range(m), nnz):
                for vals in itertools.product(range(-size, size + 1), repeat=nnz):
                    if 0 in vals or vals[0] < 0 or max(abs(x) for x in vals) != size:
                        continue
                    c = [0] * m
                    for p, x in zip(positions, vals):
                        c[p] = x
                    yield c


def decomposable_basis_search(L: Subspace, omega: AlternatingForm, coeff_bound: int = 2,
                              seed: int = 0, random_trials: int = 200,
                              max_candidates: int = 20000) -> Optional[list]:
    """Look for a basis of ``L`` made of omega-decomposable vectors.

    Tries the echelon basis, then integer combinations of it with entries in
    ``[-coeff_bound, coeff_bound]`` (sparse ones first), then seeded random
    rational combinations.  Returns ``None`` when nothing is found, which
    says nothing about existence.
    """
    _check_L(L, omega)
    if L.dim == 0:
        return []
    if omega.degree >= 2 and not is_k_isotropic(L, omega, 1):
        warnings.warn("searching for a decomposable basis of a non-isotropic subspace")
    d = omega.dimension
    basis = [list(b) for b in L.basis]
    found = []

    def try_add(v):
        if any(x != 0 for x in v) and linalg.rank(found + [v], d) == len(found) + 1:
            if decomposable_vector(v, omega):
                found.append(v)
                return True
        return False

    for b in basis:
        try_add(b)
    if len(found) == L.dim:
        return found

    m = L.dim
    for n_tried, c in enumerate(_coeff_vectors(m, coeff_bound)):
        if n_tried >= max_candidates:
            break
        v = [sum((ci * b[j] for ci, b in zip(c, basis)), Fraction(0)) for j in range(d)]
        try_add(v)
        if len(found) == m:
            return found

    rng = random.Random(seed)
    for _ in range(random_trials):
        c = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(m)]
        v = [sum((ci * b[j] for ci, b in zip(c, basis)), Fraction(0)) for j in range(d)]
        try_add(v)
        if len(found) == m:
            return found
    return None


def is_maximal_isotropic_decomposable(L: Subspace, omega: AlternatingForm, basis=None, **search):
    """``(ok, decomposable_basis)``; ``ok`` is False when maximality fails or no basis is found."""
    if not is_maximal_isotropic(L, omega):
        return False, None
    if basis is not None:
        basis = [list(b) for b in basis]
        if Subspace(L.ambient, basis) != L or len(basis) != L.dim:
            raise ValueError("supplied vectors are not a basis of L")
        if all(decomposable_vector(b, omega) for b in basis):
            return True, basis
        return False, None
    basis = decomposable_basis_search(L, omega, **search)
    return basis is not None, basis
