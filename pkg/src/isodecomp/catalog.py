"""Concrete forms with a designated isotropic subspace, used as fixtures.

Coordinate orderings (0-based positions):

* ``omega0(n, N)``: ``x^1..x^n, q^1..q^N, p, p_1^1..p_1^n, ..., p_N^1..p_N^n``
* ``example_r11()``: ``p_1, p_2, p_3, q^1, q^2, x_1^1, x_2^1, x_1^2, x_2^2, x_1^3, x_2^3``
* ``max_dim_example(n, N)``: ``q^1..q^{N+n}`` then ``p_I`` for the n-subsets ``I`` in lex order

``expected`` records are written from closed formulas (not by running the
analyzer), so the golden tests compare two independent sources.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from .analysis import classify_isotropy, decomposable_vector
from .errors import DegreeError, PreconditionError
from .exterior import AlternatingForm, Subspace, contract, unit


@dataclass
class CatalogEntry:
    name: str
    form: AlternatingForm
    L: Subspace
    V: Optional[Subspace] = None
    F: Optional[Subspace] = None
    r: Optional[int] = None
    expected: dict = field(default_factory=dict)
    coordinate_names: list = field(default_factory=list)
    horizontal: tuple = ()  # coordinates a horizontal perturbation may use
    decomposable_basis: Optional[list] = None

    @property
    def dimension(self):
        return self.form.dimension

    def meta_json(self) -> dict:
        return {
            "name": self.name,
            "dimension": self.form.dimension,
            "degree": self.form.degree,
            "coordinate_names": list(self.coordinate_names),
            "r": self.r,
            "horizontal": [i + 1 for i in self.horizontal],
            "expected": dict(self.expected),
        }


def _coord_span(d, idx):
    return Subspace.coordinate(d, sorted(idx))


def _units(d, idx):
    return [unit(d, i) for i in idx]


def _omega0_layout(n, N):
    xs = list(range(n))
    qs = list(range(n, n + N))
    p = n + N
    pim = {(i, mu): n + N + 1 + (i - 1) * n + (mu - 1) for i in range(1, N + 1) for mu in range(1, n + 1)}
    names = ["x%d" % mu for mu in range(1, n + 1)] + ["q%d" % i for i in range(1, N + 1)] + ["p"]
    names += ["p%d_%d" % (i, mu) for i in range(1, N + 1) for mu in range(1, n + 1)]
    return xs, qs, p, pim, names


def _omega0_form(n, N, I):
    xs, qs, p, pim, _ = _omega0_layout(n, N)
    d = n + N + 1 + n * N
    dnx = AlternatingForm.basis(d, xs)
    form = AlternatingForm.basis(d, [p]) ^ dnx
    form = -form
    for (i, mu) in sorted(I):
        dnx_mu = contract(unit(d, xs[mu - 1]), dnx)
        form = form + (AlternatingForm.basis(d, [qs[i - 1], pim[(i, mu)]]) ^ dnx_mu)
    return form


def _check_nN(n, N, n_min=1, N_min=1):
    if not (isinstance(n, int) and isinstance(N, int)) or n < n_min or N < N_min:
        raise ValueError("need integers n >= %d, N >= %d (got n=%r, N=%r)" % (n_min, N_min, n, N))


def omega0(n: int, N: int) -> CatalogEntry:
    """``sum dq^i ^ dp_i^mu ^ d^n x_mu - dp ^ d^n x`` with ``d^n x_mu = i_{d/dx^mu} d^n x``."""
    _check_nN(n, N)
    entry = omega0_constrained(n, N, {(i, mu) for i in range(1, N + 1) for mu in range(1, n + 1)})
    entry.name = "omega0(%d,%d)" % (n, N)
    entry.expected.update({"length": N * n + 1, "N_L": 0, "count_standard": N * n + 1})
    return entry


def omega0_constrained(n: int, N: int, I) -> CatalogEntry:
    """``omega0`` keeping only the momentum terms with ``(i, mu)`` in ``I``."""
    _check_nN(n, N)
    I = {tuple(t) for t in I}
    for t in I:
        if len(t) != 2 or not (1 <= t[0] <= N and 1 <= t[1] <= n):
            raise ValueError("index %r not in {1..%d} x {1..%d}" % (t, N, n))
    xs, qs, p, pim, names = _omega0_layout(n, N)
    d = n + N + 1 + n * N
    form = _omega0_form(n, N, I)
    Lidx = [p] + sorted(pim.values())
    used_q = {i for i, _ in I}
    support_dim = n + 1 + len(I) + len(used_q)
    expected = {
        "dimension": d,
        "degree": n + 1,
        "terms": len(I) + 1,
        "kernel_dim": d - support_dim,
        "dim_L": len(Lidx),
    }
    if len(I) == n * N:
        expected["L_maximal_isotropic_decomposable"] = True
        expected["canonical_relation_r2"] = True
    return CatalogEntry(
        name="omega0_constrained(%d,%d,%s)" % (n, N, sorted(I)),
        form=form,
        L=_coord_span(d, Lidx),
        V=_coord_span(d, Lidx + qs),
        F=_coord_span(d, xs + qs),
        r=2,
        expected=expected,
        coordinate_names=names,
        horizontal=tuple(xs + qs),
        decomposable_basis=_units(d, Lidx),
    )


def _embed(form, d, offset):
    return AlternatingForm(d, form.degree, {tuple(i + offset for i in k): c for k, c in form.terms.items()})


def _embed_space(S, d, offset):
    vecs = [[0] * offset + list(v) + [0] * (d - offset - S.ambient) for v in S.basis]
    return Subspace(d, vecs)


def direct_sum(omega1, omega2, L1: Subspace, L2: Subspace, check: bool = True) -> CatalogEntry:
    """Block form ``omega1 (+) omega2`` on ``Q^{d1+d2}`` with ``L = L1 (+) L2``.

    ``omega1``/``omega2`` may also be catalog entries; their names, V, F and
    decomposable bases are carried along when both have them.
    """
    e1 = omega1 if isinstance(omega1, CatalogEntry) else None
    e2 = omega2 if isinstance(omega2, CatalogEntry) else None
    w1 = e1.form if e1 else omega1
    w2 = e2.form if e2 else omega2
    if w1.degree != w2.degree:
        raise DegreeError("direct sum of forms of degrees %d and %d" % (w1.degree, w2.degree))
    d1, d2 = w1.dimension, w2.dimension
    d = d1 + d2
    form = _embed(w1, d, 0) + _embed(w2, d, d1)
    L = _embed_space(L1, d, 0) + _embed_space(L2, d, d1)
    names1 = e1.coordinate_names if e1 else ["a%d" % (i + 1) for i in range(d1)]
    names2 = e2.coordinate_names if e2 else ["b%d" % (i + 1) for i in range(d2)]
    names = [s + "'" for s in names1] + [s + "''" for s in names2]
    F = V = None
    if e1 and e2 and e1.F is not None and e2.F is not None:
        F = _embed_space(e1.F, d, 0) + _embed_space(e2.F, d, d1)
    if e1 and e2 and e1.V is not None and e2.V is not None:
        V = _embed_space(e1.V, d, 0) + _embed_space(e2.V, d, d1)
    basis = [list(v) + [0] * d2 for v in L1.basis] + [[0] * d1 + list(v) for v in L2.basis]
    entry = CatalogEntry(
        name="(%s)+(%s)" % (e1.name if e1 else "omega1", e2.name if e2 else "omega2"),
        form=form,
        L=L,
        V=V,
        F=F,
        r=min(e1.r, e2.r) if e1 and e2 and e1.r and e2.r else None,
        coordinate_names=names,
        horizontal=tuple(list(e1.horizontal if e1 else ()) + [i + d1 for i in (e2.horizontal if e2 else ())]),
    )
    if check and w1.degree >= 2:
        rep = classify_isotropy(L, form, 1)
        dec = all(decomposable_vector(b, form) for b in basis)
        entry.expected["L_maximal_isotropic_decomposable"] = bool(rep.is_maximal and dec)
        if dec:
            entry.decomposable_basis = basis
    entry.expected["dimension"] = d
    entry.expected["dim_L"] = L.dim
    return entry


def example_r11() -> CatalogEntry:
    """A 4-form on an 11-dimensional space whose p-span has a nonzero index gap."""
    d = 11
    p1, p2, p3, q1, q2 = 0, 1, 2, 3, 4
    x11, x21, x12, x22, x13, x23 = 5, 6, 7, 8, 9, 10
    B = AlternatingForm.basis
    form = B(d, [p1, q1, x11, x21]) + B(d, [p2, q2, x12, x22]) + \
        (B(d, [p3]) ^ (B(d, [q1]) + B(d, [q2])) ^ B(d, [x13, x23]))
    names = ["p1", "p2", "p3", "q1", "q2", "x1^1", "x2^1", "x1^2", "x2^2", "x1^3", "x2^3"]
    return CatalogEntry(
        name="r11",
        form=form,
        L=_coord_span(d, [p1, p2, p3]),
        V=_coord_span(d, [p1, p2, p3, q1, q2]),
        F=_coord_span(d, [q1, q2, x11, x21, x12, x22, x13, x23]),
        r=2,
        expected={
            "dimension": 11,
            "degree": 4,
            "terms": 4,
            "kernel_dim": 0,
            "dim_L": 3,
            "count_standard": 4,
            "N_L_upper": 1,
            "L_maximal_isotropic_decomposable": True,
            "canonical_relation_r2": False,
        },
        coordinate_names=names,
        horizontal=(q1, q2, x11, x21, x12, x22, x13, x23),
        decomposable_basis=_units(d, [p1, p2, p3]),
    )


def r11_alternative_subspaces(entry: Optional[CatalogEntry] = None) -> dict:
    """The other two 3-dimensional candidate subspaces (x_1's and x_2's)."""
    d = 11
    return {"x1": _coord_span(d, [5, 7, 9]), "x2": _coord_span(d, [6, 8, 10])}


def max_dim_example(n: int, N: int) -> CatalogEntry:
    """``sum_I dp_I ^ dq^{i1} ^ ... ^ dq^{in}`` over all n-subsets ``I`` of ``{1..N+n}``."""
    _check_nN(n, N, 1, 0)
    m = N + n
    subsets = list(itertools.combinations(range(m), n))
    d = m + len(subsets)
    form = AlternatingForm(d, n + 1)
    for k, I in enumerate(subsets):
        form = form + AlternatingForm.basis(d, [m + k] + list(I))
    names = ["q%d" % (i + 1) for i in range(m)] + ["p_" + "".join(str(i + 1) for i in I) for I in subsets]
    Lidx = list(range(m, d))
    return CatalogEntry(
        name="max_dim(%d,%d)" % (n, N),
        form=form,
        L=_coord_span(d, Lidx),
        F=_coord_span(d, range(m)),
        expected={
            "dimension": d,
            "degree": n + 1,
            "terms": len(subsets),
            "kernel_dim": 0,
            "dim_L": len(subsets),
            "length": math.comb(m, n),
            "N_L": 0,
            "max_dim_relation": True,
            "L_maximal_isotropic_decomposable": True,
        },
        coordinate_names=names,
        horizontal=tuple(range(m)),
        decomposable_basis=_units(d, Lidx),
    )


def add_horizontal(entry: CatalogEntry, eta: AlternatingForm) -> CatalogEntry:
    """``entry.form + eta`` with ``eta`` built from the entry's horizontal coordinates only."""
    from .isotropic import principal_class_check

    if eta.dimension != entry.form.dimension or eta.degree != entry.form.degree:
        raise DegreeError("perturbation has dimension/degree (%d,%d), expected (%d,%d)"
                          % (eta.dimension, eta.degree, entry.form.dimension, entry.form.degree))
    allowed = set(entry.horizontal)
    leaks = sorted({i for k in eta.terms for i in k if i not in allowed})
    if leaks:
        raise PreconditionError("perturbation uses non-horizontal coordinates %s"
                                % [entry.coordinate_names[i] if entry.coordinate_names else i + 1 for i in leaks])
    new = entry.form + eta
    if not principal_class_check(entry.form, new, entry.L, decomposable_basis=entry.decomposable_basis):
        raise PreconditionError("perturbation changes the principal part")
    expected = {k: v for k, v in entry.expected.items() if k in ("dimension", "degree", "dim_L",
                                                                 "L_maximal_isotropic_decomposable")}
    return CatalogEntry(
        name=entry.name + "+eta",
        form=new,
        L=entry.L,
        V=entry.V,
        F=entry.F,
        r=entry.r,
        expected=expected,
        coordinate_names=list(entry.coordinate_names),
        horizontal=entry.horizontal,
        decomposable_basis=entry.decomposable_basis,
    )


def by_name(key: str) -> CatalogEntry:
    """Parse ``omega0:2,2``, ``omega0c:2,2:1-1;2-1``, ``r11``, ``maxdim:2,1``."""
    head, _, rest = key.partition(":")
    head = head.strip().lower()
    try:
        if head == "r11":
            return example_r11()
        if head == "omega0":
            n, N = (int(t) for t in rest.split(","))
            return omega0(n, N)
        if head in ("omega0c", "omega0_constrained"):
            dims, _, idx = rest.partition(":")
            n, N = (int(t) for t in dims.split(","))
            I = set()
            for tok in filter(None, idx.split(";")):
                i, mu = tok.split("-")
                I.add((int(i), int(mu)))
            return omega0_constrained(n, N, I)
        if head in ("maxdim", "max_dim"):
            n, N = (int(t) for t in rest.split(","))
            return max_dim_example(n, N)
    except ValueError as exc:
        raise ValueError("bad catalog name %r: %s" % (key, exc)) from exc
    raise ValueError("unknown catalog entry %r" % key)
