"""Sparse polynomials with rational coefficients, and forms / vector fields
whose coefficients are such polynomials.

Polynomials are dicts ``exponent tuple -> Fraction``.  Numerical evaluation
goes through :meth:`Poly.compile` / :class:`CompiledForm`, which batch
points with numpy.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegreeError, DimensionMismatch
from .exterior import AlternatingForm, sort_with_sign
from .linalg import frac_str, to_fraction


class Poly:
    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = int(nvars)
        clean = {}
        if terms:
            items = terms.items() if hasattr(terms, "items") else terms
            for e, c in items:
                c = to_fraction(c)
                if c == 0:
                    continue
                e = tuple(int(x) for x in e)
                if len(e) != self.nvars or any(x < 0 for x in e):
                    raise DimensionMismatch("bad exponent vector %r for %d variables" % (e, self.nvars))
                v = clean.get(e, 0) + c
                if v:
                    clean[e] = v
                else:
                    clean.pop(e, None)
        self._terms = clean

    @classmethod
    def const(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, i):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self):
        return not self._terms

    def degree(self):
        return max((sum(e) for e in self._terms), default=-1)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise DimensionMismatch("polynomials in %d and %d variables" % (self.nvars, other.nvars))
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = to_fraction(other)
            return Poly(self.nvars, {e: c * v for e, v in self._terms.items()})
        other = self._coerce(other)
        out = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly.const(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self._terms.items())))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for e in sorted(self._terms):
            mono = "*".join("z%d^%d" % (i + 1, k) if k > 1 else "z%d" % (i + 1) for i, k in enumerate(e) if k)
            parts.append(frac_str(self._terms[e]) + ("*" + mono if mono else ""))
        return " + ".join(parts)

    def diff(self, i: int) -> "Poly":
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return Poly(self.nvars, out)

    def evaluate(self, point: Sequence) -> Fraction:
        point = [to_fraction(x) for x in point]
        total = Fraction(0)
        for e, c in self._terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= x ** k
            total += v
        return total

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """``self(subs[0], ..., subs[nvars-1])``."""
        if len(subs) != self.nvars:
            raise DimensionMismatch("need %d substitutions" % self.nvars)
        m = subs[0].nvars if subs else 0
        out = Poly(m)
        powers = {}
        for e, c in self._terms.items():
            term = Poly.const(m, c)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in powers:
                        powers[(i, k)] = subs[i] ** k
                    term = term * powers[(i, k)]
            out = out + term
        return out

    def to_json(self):
        return [{"exponents": list(e), "coeff": frac_str(self._terms[e])} for e in sorted(self._terms)]

    @classmethod
    def from_json(cls, nvars, monomials):
        terms = {}
        for m in monomials:
            e = tuple(int(x) for x in m["exponents"])
            c = to_fraction(m["coeff"])
            if e in terms:
                terms[e] += c
            else:
                terms[e] = c
        return cls(nvars, terms)


def _monomial_table(polys, nvars):
    """Shared exponent matrix and coefficient matrix (monomials x polys) for batch evaluation."""
    exps = sorted({e for p in polys for e in p._terms})
    if not exps:
        return np.zeros((0, nvars), dtype=np.int64), np.zeros((0, len(polys)))
    pos = {e: i for i, e in enumerate(exps)}
    C = np.zeros((len(exps), len(polys)))
    for j, p in enumerate(polys):
        for e, c in p._terms.items():
            C[pos[e], j] = float(c)
    return np.array(exps, dtype=np.int64), C


def _eval_table(E, C, Z):
    Z = np.asarray(Z, dtype=float)
    if E.shape[0] == 0:
        return np.zeros(Z.shape[:-1] + (C.shape[1],))
    mono = np.prod(Z[..., None, :] ** E, axis=-1)
    return mono @ C


class PolyForm:
    """A ``degree``-form on ``Q^dimension`` with polynomial coefficients."""

    __slots__ = ("dimension", "degree", "_terms")

    def __init__(self, dimension: int, degree: int, terms=None):
        self.dimension = int(dimension)
        self.degree = int(degree)
        clean = {}
        if terms:
            items = terms.items() if hasattr(terms, "items") else terms
            for idx, p in items:
                if not isinstance(p, Poly):
                    p = Poly.const(self.dimension, p)
                if p.nvars != self.dimension:
                    raise DimensionMismatch("coefficient in %d variables, form on %d" % (p.nvars, self.dimension))
                key, sign = sort_with_sign(idx)
                if key is None or p.is_zero():
                    continue
                if len(key) != degree:
                    raise DegreeError("index tuple %r does not match degree %d" % (idx, degree))
                if key and (key[0] < 0 or key[-1] >= dimension):
                    raise DimensionMismatch("index tuple %r out of range" % (idx,))
                v = clean[key] + p * sign if key in clean else p * sign
                if v.is_zero():
                    clean.pop(key, None)
                else:
                    clean[key] = v
        self._terms = clean

    @classmethod
    def from_constant(cls, form: AlternatingForm) -> "PolyForm":
        d = form.dimension
        return cls(d, form.degree, {I: Poly.const(d, c) for I, c in form.terms.items()})

    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self):
        return not self._terms

    def __len__(self):
        return len(self._terms)

    def _check(self, other):
        if not isinstance(other, PolyForm):
            raise TypeError("expected a PolyForm")
        if other.dimension != self.dimension:
            raise DimensionMismatch("forms on dimensions %d and %d" % (self.dimension, other.dimension))

    def __add__(self, other):
        self._check(other)
        if other.degree != self.degree:
            raise DegreeError("cannot add forms of degrees %d and %d" % (self.degree, other.degree))
        out = dict(self._terms)
        for I, p in other._terms.items():
            out[I] = out[I] + p if I in out else p
        return PolyForm(self.dimension, self.degree, out)

    def __neg__(self):
        return PolyForm(self.dimension, self.degree, {I: -p for I, p in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        """Multiply by a scalar or a polynomial."""
        return PolyForm(self.dimension, self.degree, {I: p * c for I, p in self._terms.items()})

    __rmul__ = __mul__

    def __xor__(self, other):
        self._check(other)
        out = {}
        for I, p in self._terms.items():
            for J, q in other._terms.items():
                key, sign = sort_with_sign(I + J)
                if key is None:
                    continue
                v = p * q * sign
                out[key] = out[key] + v if key in out else v
        return PolyForm(self.dimension, self.degree + other.degree, out)

    def __eq__(self, other):
        if isinstance(other, PolyForm):
            return (self.dimension, self.degree, self._terms) == (other.dimension, other.degree, other._terms)
        return NotImplemented

    def __repr__(self):
        if not self._terms:
            return "PolyForm(d=%d, k=%d, 0)" % (self.dimension, self.degree)
        parts = ["(%r)*dz%s" % (self._terms[I], "^dz".join(str(i + 1) for i in I)) for I in sorted(self._terms)]
        return "PolyForm(d=%d, k=%d, %s)" % (self.dimension, self.degree, " + ".join(parts))

    def evaluate(self, point) -> AlternatingForm:
        return AlternatingForm(self.dimension, self.degree, {I: p.evaluate(point) for I, p in self._terms.items()})

    def compile(self) -> "CompiledForm":
        return CompiledForm(self)

    def contract(self, field: "PolyVectorField") -> "PolyForm":
        if self.degree == 0:
            raise DegreeError("cannot contract a 0-form")
        out = {}
        for I, p in self._terms.items():
            for pos, i in enumerate(I):
                comp = field.components[i]
                if comp.is_zero():
                    continue
                J = I[:pos] + I[pos + 1:]
                v = p * comp * (-1 if pos % 2 else 1)
                out[J] = out[J] + v if J in out else v
        return PolyForm(self.dimension, self.degree - 1, out)

    def pullback(self, phi: Sequence[Poly]) -> "PolyForm":
        """Pullback by the polynomial map ``z -> (phi_1(z), ..., phi_d(z))`` (same dimension)."""
        d = self.dimension
        if len(phi) != d:
            raise DimensionMismatch("map must have %d components" % d)
        dphi = [PolyForm(d, 1, {(j,): f.diff(j) for j in range(d)}) for f in phi]
        out = PolyForm(d, self.degree)
        for I, p in self._terms.items():
            term = PolyForm(d, 0, {(): p.compose(phi)})
            for i in I:
                term = term ^ dphi[i]
            out = out + term
        return out

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "degree": self.degree,
            "terms": [{"indices": [i + 1 for i in I], "monomials": self._terms[I].to_json()}
                      for I in sorted(self._terms)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PolyForm":
        """Reads polynomial terms (``monomials``) and constant terms (``coeff``)."""
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
            if "monomials" in t:
                terms[key] = Poly.from_json(d, t["monomials"])
            else:
                terms[key] = Poly.const(d, t["coeff"])
        return cls(d, k, terms)


class CompiledForm:
    """Float evaluation of a PolyForm at many points at once."""

    def __init__(self, form: PolyForm):
        self.dimension = form.dimension
        self.degree = form.degree
        self.index = sorted(form._terms)
        self.E, self.C = _monomial_table([form._terms[I] for I in self.index], form.dimension)

    def __call__(self, Z) -> np.ndarray:
        """Coefficients at points ``Z`` (shape ``(..., d)``), one column per entry of ``index``."""
        return _eval_table(self.E, self.C, Z)

    def dense(self, Z, index_list) -> np.ndarray:
        """Coefficients laid out on ``index_list`` (missing tuples are zero)."""
        vals = self(Z)
        out = np.zeros(vals.shape[:-1] + (len(index_list),))
        pos = {I: i for i, I in enumerate(index_list)}
        for j, I in enumerate(self.index):
            out[..., pos[I]] = vals[..., j]
        return out


class PolyVectorField:
    __slots__ = ("dimension", "components")

    def __init__(self, dimension: int, components):
        comps = []
        for c in components:
            if not isinstance(c, Poly):
                c = Poly.const(dimension, c)
            if c.nvars != dimension:
                raise DimensionMismatch("component in %d variables, field on %d" % (c.nvars, dimension))
            comps.append(c)
        if len(comps) != dimension:
            raise DimensionMismatch("need %d components, got %d" % (dimension, len(comps)))
        self.dimension = int(dimension)
        self.components = tuple(comps)

    @classmethod
    def coordinate(cls, d, i, coeff=None):
        comps = [Poly(d)] * d
        comps[i] = coeff if coeff is not None else Poly.const(d, 1)
        return cls(d, comps)

    def apply(self, f: Poly) -> Poly:
        """Directional derivative ``sum_j a^j d_j f``."""
        out = Poly(self.dimension)
        for j, a in enumerate(self.components):
            if not a.is_zero():
                out = out + a * f.diff(j)
        return out

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __add__(self, other):
        return PolyVectorField(self.dimension, [a + b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return PolyVectorField(self.dimension, [-a for a in self.components])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return PolyVectorField(self.dimension, [a * c for a in self.components])

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, PolyVectorField):
            return self.dimension == other.dimension and self.components == other.components
        return NotImplemented

    def __repr__(self):
        parts = ["(%r)*d%d" % (c, i + 1) for i, c in enumerate(self.components) if not c.is_zero()]
        return "PolyVectorField(%s)" % (" + ".join(parts) or "0")

    def evaluate(self, point) -> list:
        return [c.evaluate(point) for c in self.components]

    def to_json(self):
        return {"components": [{"monomials": c.to_json()} for c in self.components]}

    @classmethod
    def from_json(cls, dimension, data):
        return cls(dimension, [Poly.from_json(dimension, c.get("monomials", [])) for c in data["components"]])


def fields_to_json(fields) -> dict:
    d = fields[0].dimension if fields else 0
    return {"dimension": d, "fields": [f.to_json() for f in fields]}


def fields_from_json(data) -> list:
    d = int(data["dimension"])
    return [PolyVectorField.from_json(d, f) for f in data["fields"]]


def exterior_derivative(omega: PolyForm) -> PolyForm:
    d = omega.dimension
    out = {}
    for I, p in omega._terms.items():
        for j in range(d):
            if j in I:
                continue
            dp = p.diff(j)
            if dp.is_zero():
                continue
            key, sign = sort_with_sign((j,) + I)
            v = dp * sign
            out[key] = out[key] + v if key in out else v
    return PolyForm(d, omega.degree + 1, out)


def lie_bracket(a: PolyVectorField, b: PolyVectorField) -> PolyVectorField:
    """``[a, b]^i = a^j d_j b^i - b^j d_j a^i``."""
    if a.dimension != b.dimension:
        raise DimensionMismatch("vector fields on dimensions %d and %d" % (a.dimension, b.dimension))
    return PolyVectorField(a.dimension, [a.apply(bi) - b.apply(ai) for ai, bi in zip(a.components, b.components)])


def random_poly(nvars, rng, max_degree=2, n_terms=3, coeff_bound=3, variables=None) -> Poly:
    """Seeded random polynomial; ``variables`` restricts which variables may appear."""
    variables = list(range(nvars)) if variables is None else list(variables)
    terms = {}
    for _ in range(n_terms):
        e = [0] * nvars
        deg = rng.randint(0, max_degree)
        for _ in range(deg):
            if variables:
                e[rng.choice(variables)] += 1
        c = Fraction(rng.randint(-coeff_bound, coeff_bound), rng.randint(1, 2))
        terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return Poly(nvars, terms)


def index_list(d, k):
    return list(itertools.combinations(range(d), k))
