"""Sparse exterior algebra over the rationals.

Forms are stored as ``{index_tuple: Fraction}`` with strictly increasing,
0-based index tuples; the JSON wire format uses 1-based indices.  The basis
monomial ``e^I`` evaluates on vectors by the determinant convention, so
``(e^1 ^ e^2)(e_1, e_2) = 1``.

Interior products insert into the first slot::

    (i_v a)(w_1, ..., w_{k-1}) = a(v, w_1, ..., w_{k-1})

and ``multi_contract([v1, ..., vk], a)`` applies ``v1`` first, so a full
contraction equals ``a(v1, ..., vk)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Sequence

from . import linalg
from .errors import DegreeError, DimensionMismatch
from .linalg import frac_str, to_fraction


def sort_with_sign(indices):
    """Sort ``indices``; return ``(sorted_tuple, sign)`` or ``(None, 0)`` on a repeat."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return tuple(idx), sign


def _merge_sign(a: tuple, b: tuple) -> int:
    # sign of the shuffle sorting a+b, both already increasing and disjoint
    inv = 0
    j = 0
    for x in a:
        while j < len(b) and b[j] < x:
            j += 1
        inv += j
    return -1 if inv % 2 else 1


class AlternatingForm:
    """A constant-coefficient alternating ``degree``-form on ``Q^dimension``."""

    __slots__ = ("dimension", "degree", "_terms", "_hash")

    def __init__(self, dimension: int, degree: int, terms=None):
        if dimension < 0 or degree < 0:
            raise DegreeError("dimension and degree must be nonnegative")
        self.dimension = int(dimension)
        self.degree = int(degree)
        clean = {}
        if terms:
            items = terms.items() if hasattr(terms, "items") else terms
            for idx, c in items:
                c = to_fraction(c)
                if c == 0:
                    continue
                key, sign = sort_with_sign(idx)
                if key is None:
                    continue
                if len(key) != degree:
                    raise DegreeError("index tuple %r does not match degree %d" % (idx, degree))
                if key and (key[0] < 0 or key[-1] >= dimension):
                    raise DimensionMismatch("index tuple %r out of range for dimension %d" % (idx, dimension))
                v = clean.get(key, 0) + sign * c
                if v == 0:
                    clean.pop(key, None)
                else:
                    clean[key] = v
        self._terms = clean
        self._hash = None

    # construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, dimension, degree):
        return cls(dimension, degree)

    @classmethod
    def scalar(cls, dimension, value):
        return cls(dimension, 0, {(): value})

    @classmethod
    def basis(cls, dimension, indices, coeff=1):
        """``coeff * e^{i1} ^ ... ^ e^{ik}``; ``indices`` need not be sorted."""
        return cls(dimension, len(indices), {tuple(indices): coeff})

    @classmethod
    def one_form(cls, coeffs):
        coeffs = [to_fraction(c) for c in coeffs]
        return cls(len(coeffs), 1, {(i,): c for i, c in enumerate(coeffs) if c})

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self):
        return len(self._terms)

    def coefficient(self, indices) -> Fraction:
        key, sign = sort_with_sign(indices)
        if key is None:
            return Fraction(0)
        return sign * self._terms.get(key, Fraction(0))

    def one_form_coeffs(self) -> list:
        if self.degree != 1:
            raise DegreeError("not a 1-form")
        out = [Fraction(0)] * self.dimension
        for (i,), c in self._terms.items():
            out[i] = c
        return out

    def scalar_value(self) -> Fraction:
        if self.degree != 0:
            raise DegreeError("not a 0-form")
        return self._terms.get((), Fraction(0))

    def coords(self, index_list) -> list:
        """Coefficients on a fixed list of sorted index tuples."""
        return [self._terms.get(I, Fraction(0)) for I in index_list]

    def evaluate(self, vectors: Sequence[Sequence]) -> Fraction:
        if len(vectors) != self.degree:
            raise DegreeError("need %d vectors, got %d" % (self.degree, len(vectors)))
        return multi_contract(vectors, self).scalar_value() if self.degree else self.scalar_value()

    # arithmetic ------------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, AlternatingForm):
            return NotImplemented
        if other.dimension != self.dimension:
            raise DimensionMismatch("dimension %d vs %d" % (self.dimension, other.dimension))
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        if other.degree != self.degree:
            raise DegreeError("cannot add forms of degree %d and %d" % (self.degree, other.degree))
        t = dict(self._terms)
        for k, v in other._terms.items():
            t[k] = t.get(k, 0) + v
        return AlternatingForm(self.dimension, self.degree, t)

    def __neg__(self):
        return AlternatingForm(self.dimension, self.degree, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, AlternatingForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, AlternatingForm):
            return NotImplemented
        c = to_fraction(c)
        return AlternatingForm(self.dimension, self.degree, {k: c * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, AlternatingForm):
            return NotImplemented
        return (self.dimension, self.degree, self._terms) == (other.dimension, other.degree, other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dimension, self.degree, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        if not self._terms:
            return "AlternatingForm(d=%d, k=%d, 0)" % (self.dimension, self.degree)
        parts = []
        for I in sorted(self._terms):
            mono = "^".join("e%d" % (i + 1) for i in I) or "1"
            parts.append("%s*%s" % (frac_str(self._terms[I]), mono))
        return "AlternatingForm(d=%d, k=%d, %s)" % (self.dimension, self.degree, " + ".join(parts))

    # serialisation ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "degree": self.degree,
            "terms": [
                {"indices": [i + 1 for i in I], "coeff": frac_str(self._terms[I])}
                for I in sorted(self._terms)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "AlternatingForm":
        d = int(data["dimension"])
        k = int(data["degree"])
        terms = {}
        for t in data["terms"]:
            idx = [int(i) for i in t["indices"]]
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError("indices must be strictly increasing: %r" % (idx,))
            if any(i < 1 or i > d for i in idx):
                raise DimensionMismatch("index out of range 1..%d: %r" % (d, idx))
            key = tuple(i - 1 for i in idx)
            if key in terms:
                raise ValueError("duplicate index tuple %r" % (idx,))
            terms[key] = to_fraction(t["coeff"])
        return cls(d, k, terms)


def index_tuples(dimension: int, degree: int) -> list:
    return list(itertools.combinations(range(dimension), degree))


def wedge(a: AlternatingForm, b: AlternatingForm) -> AlternatingForm:
    if a.dimension != b.dimension:
        raise DimensionMismatch("wedge of forms on dimensions %d and %d" % (a.dimension, b.dimension))
    out = {}
    for I, x in a._terms.items():
        sI = set(I)
        for J, y in b._terms.items():
            if sI.intersection(J):
                continue
            key = tuple(sorted(I + J))
            v = x * y if _merge_sign(I, J) > 0 else -(x * y)
            out[key] = out.get(key, 0) + v
    return AlternatingForm(a.dimension, a.degree + b.degree, out)


def wedge_all(forms: Sequence[AlternatingForm], dimension=None) -> AlternatingForm:
    if not forms:
        return AlternatingForm.scalar(dimension, 1)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def contract(v: Sequence, a: AlternatingForm) -> AlternatingForm:
    """Interior product ``i_v a``."""
    if len(v) != a.dimension:
        raise DimensionMismatch("vector of length %d against form on dimension %d" % (len(v), a.dimension))
    if a.degree == 0:
        raise DegreeError("cannot contract a 0-form")
    v = [to_fraction(x) for x in v]
    out = {}
    for I, c in a._terms.items():
        for pos, i in enumerate(I):
            vi = v[i]
            if vi == 0:
                continue
            key = I[:pos] + I[pos + 1:]
            val = vi * c
            out[key] = out.get(key, 0) + (-val if pos % 2 else val)
    return AlternatingForm(a.dimension, a.degree - 1, out)


def multi_contract(vs: Sequence[Sequence], a: AlternatingForm) -> AlternatingForm:
    """``i_{v_k} ... i_{v_1} a``: the first vector is inserted first."""
    if len(vs) > a.degree:
        raise DegreeError("%d vectors exceed degree %d" % (len(vs), a.degree))
    out = a
    for v in vs:
        out = contract(v, out)
    return out


def pullback(M: Sequence[Sequence], a: AlternatingForm) -> AlternatingForm:
    """Pull ``a`` back along the linear map ``w -> M w``.

    ``M`` has ``a.dimension`` rows and ``d'`` columns; the result lives on
    ``Q^{d'}`` and satisfies ``(M^* a)(w_1..w_k) = a(M w_1, ..., M w_k)``.
    """
    M = linalg.as_matrix(M)
    if len(M) != a.dimension:
        raise DimensionMismatch("map has %d rows, form lives on dimension %d" % (len(M), a.dimension))
    dp = len(M[0]) if M else 0
    if a.degree > dp and not a.is_zero():
        return AlternatingForm(dp, a.degree)
    rows = [AlternatingForm.one_form(r) if dp else AlternatingForm(0, 1) for r in M]
    if a.degree == 0:
        return AlternatingForm(dp, 0, dict(a._terms))
    cache = {}

    def prefix(I):
        if I in cache:
            return cache[I]
        f = rows[I[0]] if len(I) == 1 else wedge(prefix(I[:-1]), rows[I[-1]])
        cache[I] = f
        return f

    out = AlternatingForm(dp, a.degree)
    acc = {}
    for I in sorted(a._terms):
        c = a._terms[I]
        for J, x in prefix(I)._terms.items():
            acc[J] = acc.get(J, 0) + c * x
    return AlternatingForm(dp, a.degree, acc) if acc else out


# --------------------------------------------------------------------------
# subspaces


class Subspace:
    """A subspace of ``Q^ambient`` (or of its dual), kept in reduced echelon form.

    Two instances compare equal exactly when they describe the same subspace.
    """

    __slots__ = ("ambient", "basis", "dual", "pivots")

    def __init__(self, ambient: int, vectors: Iterable[Sequence] = (), dual: bool = False):
        vectors = [list(v) for v in vectors]
        for v in vectors:
            if len(v) != ambient:
                raise DimensionMismatch("vector of length %d in ambient dimension %d" % (len(v), ambient))
        R, piv = linalg.rref(vectors, ambient) if vectors else ([], [])
        self.ambient = int(ambient)
        self.basis = tuple(tuple(r) for r in R)
        self.pivots = tuple(piv)
        self.dual = bool(dual)

    @classmethod
    def full(cls, n, dual=False):
        return cls(n, linalg.identity(n), dual)

    @classmethod
    def zero(cls, n, dual=False):
        return cls(n, (), dual)

    @classmethod
    def coordinate(cls, n, indices, dual=False):
        return cls(n, [[int(j == i) for j in range(n)] for i in indices], dual)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.ambient, self.dual, self.basis) == (other.ambient, other.dual, other.basis)

    def __hash__(self):
        return hash((self.ambient, self.dual, self.basis))

    def __repr__(self):
        rows = ["[" + ", ".join(frac_str(x) for x in r) + "]" for r in self.basis]
        return "Subspace(ambient=%d, dim=%d%s, %s)" % (
            self.ambient, self.dim, ", dual" if self.dual else "", "; ".join(rows))

    def _check(self, other):
        if self.ambient != other.ambient or self.dual != other.dual:
            raise DimensionMismatch("subspaces live in different spaces")

    def __contains__(self, v) -> bool:
        if len(v) != self.ambient:
            raise DimensionMismatch("vector length %d, ambient %d" % (len(v), self.ambient))
        v = [to_fraction(x) for x in v]
        return linalg.rank(list(self.basis) + [v], self.ambient) == self.dim

    def coordinates(self, v) -> list:
        """Coefficients of ``v`` in ``self.basis``; raises if ``v`` is not in the subspace."""
        v = [to_fraction(x) for x in v]
        coeffs = [v[p] for p in self.pivots]
        recon = [sum((c * b[j] for c, b in zip(coeffs, self.basis)), Fraction(0)) for j in range(self.ambient)]
        if recon != v:
            raise ValueError("vector is not in the subspace")
        return coeffs

    def issubspace(self, other: "Subspace") -> bool:
        self._check(other)
        return all(b in other for b in self.basis)

    __le__ = issubspace

    def __add__(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)

    def __and__(self, other: "Subspace") -> "Subspace":
        return subspace_intersect(self, other)

    def annihilator(self) -> "Subspace":
        return annihilator(self)

    def complement(self) -> "Subspace":
        """Coordinate complement: unit vectors at the non-pivot columns."""
        piv = set(self.pivots)
        return Subspace.coordinate(self.ambient, [c for c in range(self.ambient) if c not in piv], self.dual)

    def basis_matrix(self) -> list:
        """``ambient x dim`` matrix whose columns are the basis vectors."""
        return linalg.transpose(self.basis) if self.basis else [[] for _ in range(self.ambient)]

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient,
            "dual": self.dual,
            "vectors": [[frac_str(x) for x in v] for v in self.basis],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Subspace":
        n = int(data["ambient"])
        vecs = [[to_fraction(x) for x in v] for v in data.get("vectors", [])]
        return cls(n, vecs, bool(data.get("dual", False)))


def span(vectors, ambient=None, dual=False) -> Subspace:
    vectors = [list(v) for v in vectors]
    if ambient is None:
        if not vectors:
            raise ValueError("ambient dimension required for an empty span")
        ambient = len(vectors[0])
    return Subspace(ambient, vectors, dual)


def annihilator(S: Subspace) -> Subspace:
    """``S^perp``; lives in the dual of the space containing ``S``."""
    if S.dim == 0:
        return Subspace.full(S.ambient, not S.dual)
    return Subspace(S.ambient, linalg.nullspace(S.basis, S.ambient), not S.dual)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    a._check(b)
    return Subspace(a.ambient, list(a.basis) + list(b.basis), a.dual)


def subspace_intersect(a: Subspace, b: Subspace) -> Subspace:
    a._check(b)
    return annihilator(subspace_sum(annihilator(a), annihilator(b)))


def subspace_equal(a: Subspace, b: Subspace) -> bool:
    a._check(b)
    return a == b


@dataclass(frozen=True)
class Splitting:
    """A direct sum decomposition ``ambient = part_X (+) part_L``."""

    ambient_dimension: int
    part_X: Subspace
    part_L: Subspace

    def __post_init__(self):
        if self.part_X.ambient != self.ambient_dimension or self.part_L.ambient != self.ambient_dimension:
            raise DimensionMismatch("splitting parts live in the wrong space")
        if (self.part_X & self.part_L).dim != 0:
            raise ValueError("parts intersect nontrivially")
        if self.part_X.dim + self.part_L.dim != self.ambient_dimension:
            raise ValueError("parts do not span the ambient space")


def form_from_vector_coords(dimension, degree, index_list, coords) -> AlternatingForm:
    return AlternatingForm(dimension, degree, {I: c for I, c in zip(index_list, coords) if c})


def unit(n: int, i: int) -> list:
    return [Fraction(int(j == i)) for j in range(n)]
