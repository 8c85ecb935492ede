"""Complements, counts and canonical representations attached to a maximal
isotropic decomposable subspace ``L`` of an ``(n+1)``-form ``omega``.

Every constructive routine here re-checks its postconditions with exact
arithmetic before returning, and records them in a ``checks`` dict.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import linalg
from .analysis import (
    LengthBounds,
    classify_isotropy,
    decomposable_basis_search,
    decomposable_vector,
    factorize,
    is_k_isotropic,
    kernel,
    length_bounds,
    length_in_basis,
    support,
)
from .errors import (
    DimensionMismatch,
    InternalCheckError,
    NotCertified,
    PreconditionError,
    SearchExhausted,
)
from .exterior import (
    AlternatingForm,
    Subspace,
    contract,
    multi_contract,
    pullback,
    sort_with_sign,
    wedge_all,
)
from .linalg import frac_str

log = logging.getLogger(__name__)


def _vec_json(v):
    return [frac_str(x) for x in v]


def _form_on(omega: AlternatingForm, vectors) -> AlternatingForm:
    """Restriction of ``omega`` to the span of ``vectors``, in their coordinates."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return AlternatingForm(0, omega.degree)
    return pullback(linalg.transpose(vectors), omega)


def _combine(coeffs, vectors, d):
    return [sum((c * v[j] for c, v in zip(coeffs, vectors) if c), Fraction(0)) for j in range(d)]


def _dual_rows(vectors):
    """1-forms dual to a basis given as a list of vectors."""
    return linalg.inverse(linalg.transpose(vectors))


def _get_decomposable_basis(omega, L, basis, **search):
    if basis is not None:
        basis = [list(b) for b in basis]
        if len(basis) != L.dim or Subspace(L.ambient, basis) != L:
            raise PreconditionError("supplied vectors are not a basis of L")
        bad = [i for i, b in enumerate(basis) if not decomposable_vector(b, omega)]
        if bad:
            raise PreconditionError("supplied basis vectors %s are not decomposable" % bad)
        return basis
    basis = decomposable_basis_search(L, omega, **search)
    if basis is None:
        raise PreconditionError("no decomposable basis of L found within the search budget")
    return basis


# ---------------------------------------------------------------------------
# n-isotropic complements


@dataclass
class ComplementResult:
    F: Subspace
    checks: dict
    route: str
    basis: list = field(default_factory=list)

    def to_json(self):
        return {"F": self.F.to_json(), "route": self.route, "checks": dict(self.checks)}


def verify_complement(omega, L, F, V=None, r=None) -> dict:
    d = omega.dimension
    checks = {
        "L_cap_F_zero": (L & F).dim == 0,
        "L_plus_F_is_W": L.dim + F.dim == d and (L + F).dim == d,
        "F_n_isotropic": _form_on(omega, F.basis).is_zero(),
    }
    if V is not None:
        FV = F & V
        checks["FV_plus_L_is_V"] = (FV + L) == V and (FV & L).dim == 0
        checks["FV_(r-1)_isotropic"] = is_k_isotropic(FV, omega, r - 1)
    return checks


class _Stall(Exception):
    pass


def _induction_step(omega: AlternatingForm, Lvecs, tries_per_level: int, budget: list):
    """One level of the inductive construction on a nondegenerate form.

    Works in coordinates: ``omega`` lives on ``Q^d``, ``Lvecs`` is a
    decomposable basis of a maximal isotropic subspace.  Returns a basis of
    an n-isotropic complement or raises ``_Stall``.  ``budget`` is a
    one-element list counting the reductions still allowed overall.
    """
    d = omega.dimension
    if not Lvecs:
        if d == 0:
            return []
        raise _Stall("empty L in a space of dimension %d" % d)
    v0, rest = Lvecs[0], Lvecs[1:]
    frame = linalg.extend_to_basis([v0] + rest, d)
    dual = _dual_rows(frame)
    us = factorize(contract(v0, omega))
    if us is None:
        raise _Stall("leading vector is not decomposable")
    # alpha0 is fixed only up to L^perp; walk through a few shifts of the echelon choice
    lperp = dual[len(Lvecs):]
    shifts = [[]] + [[(j, c)] for j in range(len(lperp)) for c in (1, -1)]
    for shift in shifts[:max(1, tries_per_level)]:
        alpha0 = list(dual[0])
        for j, c in shift:
            alpha0 = [a + c * b for a, b in zip(alpha0, lperp[j])]
        found = _reduce_once(omega, v0, rest, alpha0, us, tries_per_level, budget)
        if found is not None:
            return found
    raise _Stall("no admissible reduction found at dimension %d" % d)


def _reduce_once(omega, v0, rest, alpha0, us, tries_per_level, budget):
    d = omega.dimension
    n = len(us)
    a0 = AlternatingForm.one_form(alpha0)
    omega1 = omega - wedge_all([a0] + us)
    if not contract(v0, omega1).is_zero():
        raise InternalCheckError("v0 must lie in the kernel of the reduced form")
    ker_a0 = Subspace(d, linalg.nullspace([alpha0], d))
    K = kernel(omega1) & ker_a0
    s = K.dim
    if s > n:
        log.debug("d=%d: kernel part %d exceeds n=%d", d, s, n)
        return None
    ucoef = [u.one_form_coeffs() for u in us]
    # U[j][i] = u^j(k_i)
    U = [[sum((a * b for a, b in zip(u, k)), Fraction(0)) for k in K.basis] for u in ucoef]
    Ut = linalg.transpose(U) if s else []
    G = []
    for j in range(s):
        g = linalg.solve(Ut, [int(i == j) for i in range(s)], n)
        if g is None:
            return None
        G.append(g)
    H = linalg.nullspace(Ut, n) if s else []  # directions vanishing on K

    def adjusted(params):
        out = []
        for j in range(s):
            g = list(G[j])
            for t, h in enumerate(H):
                c = params[j * len(H) + t]
                if c:
                    g = [x + c * y for x, y in zip(g, h)]
            out.append(_combine(g, ucoef, d))
        return out

    nparams = s * len(H)
    grid = itertools.product([0, 1, -1, 2, -2], repeat=nparams)
    for attempt, params in enumerate(grid):
        if attempt >= tries_per_level:
            break
        if budget[0] <= 0:
            raise _Stall("reduction budget exhausted")
        budget[0] -= 1
        uprime = adjusted(params)
        W1 = linalg.nullspace([alpha0] + uprime, d)
        if len(W1) != d - s - 1:
            log.debug("d=%d: W1 has dimension %d, expected %d", d, len(W1), d - s - 1)
            continue
        om1 = _form_on(omega1, W1)
        W1t = linalg.transpose(W1)
        L1 = []
        for v in rest:
            x = linalg.solve(W1t, v, len(W1))
            if x is None:
                break
            L1.append(x)
        if len(L1) != len(rest):
            log.debug("d=%d: L1 not inside W1", d)
            continue
        if W1 and kernel(om1).dim != 0:
            log.debug("d=%d s=%d: reduced form degenerate on W1", d, s)
            continue
        if W1 and not classify_isotropy(Subspace(len(W1), L1), om1, 1).is_maximal:
            log.debug("d=%d s=%d: L1 not maximal in W1", d, s)
            continue
        try:
            sub = _induction_step(om1, L1, tries_per_level, budget)
        except _Stall as exc:
            log.debug("d=%d: recursion stalled (%s)", d, exc)
            continue
        lifted = [_combine(f, W1, d) for f in sub]
        return [list(k) for k in K.basis] + lifted
    return None


def _induction_route(omega, L, dbasis, tries_per_level=4, budget=64):
    d = omega.dimension
    Ker = kernel(omega)
    C = Ker.complement()
    Cb = [list(b) for b in C.basis]
    omega_C = _form_on(omega, Cb)
    frame_t = linalg.transpose([list(b) for b in Ker.basis] + Cb)
    proj = []
    for v in dbasis:
        x = linalg.solve(frame_t, v, d)
        proj.append(x[Ker.dim:])
    keep = linalg.independent_subset(proj, len(Cb))
    proj = [proj[i] for i in keep]
    Fc = _induction_step(omega_C, proj, tries_per_level, [budget])
    return [_combine(f, Cb, d) for f in Fc]


def _graph_route(omega, L, V=None, r=None):
    """Solve for ``F`` as the graph of a linear map ``F0 -> L`` over a fixed complement.

    Two ``L`` arguments kill ``omega`` (``L`` is isotropic), so every
    postcondition is linear in the graph map.
    """
    d = omega.dimension
    n = omega.degree - 1
    Lb = [list(b) for b in L.basis]
    m = len(Lb)
    if V is not None:
        pool = [list(b) for b in V.basis]
        idx = linalg.independent_subset(Lb + pool, d)
        F0V = [pool[i - m] for i in idx if i >= m]
    else:
        F0V = []
    F0 = F0V + linalg.extend_to_basis(Lb + F0V, d)[m + len(F0V):]
    D = len(F0)
    nunk = m * D
    rows, rhs = [], []

    # omega in the frame (L basis, F0); arguments become frame positions
    P = pullback(linalg.transpose(Lb + F0), omega)

    def value(positions):
        key, sign = sort_with_sign(positions)
        return sign * P.coefficient(key) if key is not None else 0

    def add_equation(fixed_pos, args):
        # fixed_pos: (slot, j) pairs whose F0 argument picks up the graph correction
        const = value(args)
        row = [Fraction(0)] * nunk
        for t, j in fixed_pos:
            for a in range(m):
                trial = list(args)
                trial[t] = a
                val = value(trial)
                if val:
                    row[a * D + j] += val
        if const or any(row):
            rows.append(row)
            rhs.append(-const)

    for J in itertools.combinations(range(D), n + 1):
        add_equation(list(enumerate(J)), [m + j for j in J])
    if V is not None:
        for Gs in itertools.combinations(range(len(F0V)), r):
            for Hs in itertools.combinations(range(D), n + 1 - r):
                add_equation(list(enumerate(Gs)), [m + g for g in Gs] + [m + h for h in Hs])
    if not rows:
        sol = [Fraction(0)] * nunk
    else:
        sol = linalg.solve(rows, rhs, nunk)
    if sol is None:
        raise PreconditionError("no n-isotropic complement exists; hypotheses must fail")
    F = []
    for j in range(D):
        vec = list(F0[j])
        for a in range(m):
            c = sol[a * D + j]
            if c:
                vec = [x + c * y for x, y in zip(vec, Lb[a])]
        F.append(vec)
    return F


def complement_n_isotropic(omega: AlternatingForm, L: Subspace, V: Optional[Subspace] = None,
                           r: Optional[int] = None, decomposable_basis=None,
                           tries_per_level: int = 4, reduction_budget: int = 32,
                           **search) -> ComplementResult:
    """Find an n-isotropic ``F`` with ``W = L (+) F`` (and ``(F & V) (+) L = V``).

    The inductive construction peels off one decomposable vector of ``L`` at
    a time.  Its reductions only work for a compatible choice of ``alpha0``
    (with ``s = 0`` the hyperplane ``ker alpha0`` must already contain the
    answer), so it gets a small budget.  If it stalls, or misses the
    conditions involving ``V``, the complement is solved for directly as a
    graph over a fixed complement.  Whatever route is taken, the result is
    re-verified.
    """
    if L.ambient != omega.dimension or (V is not None and V.ambient != omega.dimension):
        raise DimensionMismatch("subspaces do not live on the form's space")
    if omega.degree < 2:
        raise PreconditionError("need a form of degree n+1 >= 2")
    n = omega.degree - 1
    rep = classify_isotropy(L, omega, 1)
    if not rep.is_maximal:
        raise PreconditionError("L is not maximal isotropic (L != L^{omega,1})")
    dbasis = _get_decomposable_basis(omega, L, decomposable_basis, **search)
    if V is not None:
        if r is None or not 1 <= r <= n:
            raise PreconditionError("r must be given with 1 <= r <= n when V is supplied")
        if not L.issubspace(V):
            raise PreconditionError("L is not contained in V")
        if not is_k_isotropic(V, omega, r):
            raise PreconditionError("V is not %d-isotropic" % r)

    route = "induction"
    try:
        Fb = _induction_route(omega, L, dbasis, tries_per_level, reduction_budget)
        F = Subspace(omega.dimension, Fb)
        checks = verify_complement(omega, L, F, V, r)
        ok = all(checks.values())
    except _Stall:
        ok = False
    if not ok:
        route = "graph solve"
        Fb = _graph_route(omega, L, V, r)
        F = Subspace(omega.dimension, Fb)
        checks = verify_complement(omega, L, F, V, r)
        if not all(checks.values()):
            raise InternalCheckError("complement failed verification: %r" % checks)
    return ComplementResult(F, checks, route, [list(b) for b in Fb])


# ---------------------------------------------------------------------------
# dual frame


@dataclass
class DualFrame:
    forms: list
    v: list
    checks: dict


def dual_frame(omega: AlternatingForm, L: Subspace, fs, decomposable_basis=None, **search) -> DualFrame:
    """Dual 1-forms ``f^1..f^n`` to ``f_1..f_n`` whose wedge lies in ``omega^flat(L)``."""
    n = omega.degree - 1
    fs = [list(f) for f in fs]
    if len(fs) != n:
        raise PreconditionError("need exactly n=%d vectors" % n)
    beta = multi_contract(fs, omega)
    if all(beta.evaluate([l]) == 0 for l in L.basis):
        raise PreconditionError("contraction with the f's lies in the annihilator of L")
    dbasis = _get_decomposable_basis(omega, L, decomposable_basis, **search)
    v = None
    for cand in dbasis:
        c = omega.evaluate([cand] + fs)
        if c != 0:
            v = [x / c for x in cand]
            break
    if v is None:
        raise InternalCheckError("decomposable basis fails to detect a nonzero pairing")
    iv = contract(v, omega)
    S = support(iv)
    sb = [list(b) for b in S.basis]
    Gm = [[sum((a * b for a, b in zip(s_, f)), Fraction(0)) for f in fs] for s_ in sb]
    try:
        X = linalg.inverse(Gm)
    except ZeroDivisionError:
        raise PreconditionError("span of the f's is not complementary to ker i_v omega")
    forms = [AlternatingForm.one_form(_combine(X[j], sb, omega.dimension)) for j in range(n)]
    wedge_f = wedge_all(forms)
    image = [contract(l, omega) for l in L.basis]
    idx = sorted({I for f in image for I in f.terms} | set(wedge_f.terms))
    rk = linalg.rank([f.coords(idx) for f in image], len(idx))
    rk2 = linalg.rank([f.coords(idx) for f in image] + [wedge_f.coords(idx)], len(idx))
    checks = {
        "duality": all(forms[j].evaluate([fs[i]]) == int(i == j) for i in range(n) for j in range(n)),
        "wedge_equals_i_v_omega": wedge_f == iv,
        "wedge_in_image_of_L": rk == rk2,
    }
    if not all(checks.values()):
        raise InternalCheckError("dual frame failed verification: %r" % checks)
    return DualFrame(forms, v, checks)


# ---------------------------------------------------------------------------
# index counts


def index_count(omega: AlternatingForm, L: Subspace, F_basis):
    """``(index_set, count)``: n-tuples of ``F_basis`` whose contraction with omega is nonzero."""
    F_basis = [list(f) for f in F_basis]
    d = omega.dimension
    if L.dim + len(F_basis) != d or (L + Subspace(d, F_basis)).dim != d:
        raise PreconditionError("F_basis does not span a complement of L")
    n = omega.degree - 1
    idx = [J for J in itertools.combinations(range(len(F_basis)), n)
           if not multi_contract([F_basis[j] for j in J], omega).is_zero()]
    return idx, len(idx)


_PERM_CACHE = {}


def _perms_with_sign(n):
    if n not in _PERM_CACHE:
        out = []
        for p in itertools.permutations(range(n)):
            inv = sum(1 for a in range(n) for b in range(a + 1, n) if p[a] > p[b])
            out.append((p, -1 if inv % 2 else 1))
        _PERM_CACHE[n] = out
    return _PERM_CACHE[n]


def _int_det(M) -> int:
    # Bareiss fraction-free elimination
    M = [list(map(int, r)) for r in M]
    n = len(M)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if sw is None:
                return 0
            M[k], M[sw] = M[sw], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


class _CountEngine:
    """Exact count of nonvanishing n-tuples for integer changes of basis of ``F``.

    The count only depends on the lines spanned by the basis vectors, so
    rational bases are handled by clearing denominators column by column.
    """

    def __init__(self, omega, L, F_basis):
        self.n = omega.degree - 1
        self.D = len(F_basis)
        alphas = [_form_on(contract(list(l), omega), F_basis) for l in L.basis]
        self.I_list = sorted({I for a in alphas for I in a.terms})
        self.J_list = list(itertools.combinations(range(self.D), self.n))
        rows = []
        for a in alphas:
            vals = a.coords(self.I_list)
            den = math.lcm(*[v.denominator for v in vals]) if vals else 1
            rows.append([int(v * den) for v in vals])
        self.C = rows
        self.cmax = max((abs(x) for r in rows for x in r), default=0)
        self.Iarr = np.array(self.I_list, dtype=np.int64).reshape(len(self.I_list), self.n)
        self.Jarr = np.array(self.J_list, dtype=np.int64).reshape(len(self.J_list), self.n)
        self.perms = _perms_with_sign(self.n) if self.n <= 6 else None

    def _minors(self, M):
        n = self.n
        if n == 0:
            return np.ones((len(self.I_list), len(self.J_list)), dtype=object)
        big = int(np.abs(M).max()) ** n * math.factorial(n) > 2 ** 60 if M.size else False
        if self.perms is None or big:
            Mi = [[int(x) for x in row] for row in M]
            return np.array([[_int_det([[Mi[i][j] for j in J] for i in I]) for J in self.J_list]
                             for I in self.I_list], dtype=object)
        R = M[self.Iarr]  # (nI, n, D)
        out = np.zeros((len(self.I_list), len(self.J_list)), dtype=np.int64)
        for p, sgn in self.perms:
            term = np.ones_like(out)
            for t in range(n):
                term = term * R[:, t, :][:, self.Jarr[:, p[t]]]
            out += sgn * term
        return out

    def count(self, M) -> int:
        M = np.asarray(M, dtype=np.int64)
        if not self.I_list:
            return 0
        minors = self._minors(M)
        mmax = int(np.abs(minors).max()) if minors.size else 0
        if self.cmax * mmax * len(self.I_list) < 2 ** 62 and minors.dtype != object:
            vals = np.array(self.C, dtype=np.int64) @ minors
        else:
            vals = np.array(self.C, dtype=object) @ minors.astype(object)
        return int(np.count_nonzero(np.any(vals != 0, axis=0)))

    def count_fraction(self, M) -> int:
        """Same as ``count`` for a rational matrix (columns rescaled to integers)."""
        cols = linalg.transpose(M)
        scaled = []
        for c in cols:
            den = math.lcm(*[Fraction(x).denominator for x in c])
            scaled.append([int(Fraction(x) * den) for x in c])
        return self.count(np.array(linalg.transpose(scaled), dtype=object).astype(np.int64))


@dataclass
class NLResult:
    count_standard: int
    best_count: int
    floor: int  # dim(L / ker omega)
    certified_zero_gap: bool
    value_upper: int
    witness_basis: list
    index_set: list
    trials: int
    length_crosscheck: dict = field(default_factory=dict)
    random_bases: int = 0  # nonsingular random bases actually counted

    def to_json(self):
        return {
            "count_standard": self.count_standard,
            "best_count": self.best_count,
            "dim_L_mod_ker": self.floor,
            "certified_zero_gap": self.certified_zero_gap,
            "value_upper": self.value_upper,
            "value_lower": 0,
            "witness_basis": [_vec_json(v) for v in self.witness_basis],
            "index_set": [[i + 1 for i in I] for I in self.index_set],
            "trials": self.trials,
            "random_bases": self.random_bases,
            "length_crosscheck": dict(self.length_crosscheck),
        }


def _support_lines(omega, dbasis, F_basis, cap=300):
    """1-dimensional members of the intersection closure of the supports of
    ``i_v omega`` (v decomposable), restricted to ``F``, with a containment score."""
    D = len(F_basis)
    supports = []
    for v in dbasis:
        S = support(contract(v, omega))
        rows = [[sum((a * b for a, b in zip(s_, f)), Fraction(0)) for f in F_basis] for s_ in S.basis]
        sub = Subspace(D, rows, dual=True)
        if sub.dim and sub not in supports:
            supports.append(sub)
    closure = list(supports)
    frontier = list(supports)
    while frontier and len(closure) < cap:
        new = []
        for a in frontier:
            for b in closure:
                c = a & b
                if c.dim and c not in closure and c not in new:
                    new.append(c)
        closure.extend(new)
        frontier = new
    lines = [c for c in closure if c.dim == 1]
    scored = []
    for ln in lines:
        score = sum(1 for s_ in supports if ln.issubspace(s_))
        scored.append((-score, ln.basis, ln))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [t[2] for t in scored]


def _basis_from_dual_lines(lines, D):
    rows = []
    for ln in lines:
        trial = rows + [list(ln.basis[0])]
        if linalg.rank(trial, D) == len(trial):
            rows = trial
        if len(rows) == D:
            break
    rows = linalg.extend_to_basis(rows, D)
    return linalg.inverse(rows)  # columns are the dual vectors


def frak_N_L(omega: AlternatingForm, L: Subspace, F: Subspace, search_budget: int = 2000,
             seed: int = 0, coeff_bound: int = 2, decomposable_basis=None) -> NLResult:
    """Bounds on ``min_B N(B) - dim(L/ker omega)`` over bases ``B`` of ``F``.

    Candidates: the echelon basis of ``F``; bases dual to lines in the
    intersection lattice of the supports of decomposable contractions;
    every single shear ``f_i += c f_j`` (``|c| <= coeff_bound``) of the best
    basis so far; ``search_budget`` seeded random bases with entries in
    ``[-coeff_bound, coeff_bound]``.  A zero gap is certified only by a
    witness basis meeting the floor.
    """
    d = omega.dimension
    if L.dim + F.dim != d or (L & F).dim != 0:
        raise PreconditionError("F is not a complement of L")
    if not _form_on(omega, F.basis).is_zero():
        raise PreconditionError("F is not n-isotropic")
    Fb = [list(b) for b in F.basis]
    D = len(Fb)
    floor = L.dim - kernel(omega).dim
    eng = _CountEngine(omega, L, Fb)
    ident = np.eye(D, dtype=np.int64)
    c_std = eng.count(ident)
    best, bestM = c_std, [[Fraction(int(i == j)) for j in range(D)] for i in range(D)]
    trials = 1

    def done():
        return best <= floor

    # structured: lines from the support lattice
    if not done():
        try:
            dbasis = decomposable_basis if decomposable_basis is not None else \
                decomposable_basis_search(L, omega, coeff_bound=coeff_bound, seed=seed)
        except Exception:
            dbasis = None
        if dbasis:
            lines = _support_lines(omega, dbasis, Fb)
            if lines:
                orders = [lines]
                rng0 = random.Random(seed)
                for _ in range(min(50, search_budget)):
                    perm = list(lines)
                    rng0.shuffle(perm)
                    orders.append(perm)
                for order in orders:
                    M = _basis_from_dual_lines(order, D)
                    c = eng.count_fraction(M)
                    trials += 1
                    if c < best:
                        best, bestM = c, M
                    if done():
                        break

    def as_int(M):
        cols = linalg.transpose(M)
        out = []
        for c in cols:
            den = math.lcm(*[Fraction(x).denominator for x in c])
            out.append([int(Fraction(x) * den) for x in c])
        return np.array(linalg.transpose(out), dtype=np.int64)

    # single shears of the best basis
    if not done():
        B0 = as_int(bestM)
        improved = True
        while improved and not done():
            improved = False
            for i in range(D):
                for j in range(D):
                    if i == j:
                        continue
                    for c in range(-coeff_bound, coeff_bound + 1):
                        if c == 0:
                            continue
                        M = B0.copy()
                        M[:, i] += c * M[:, j]
                        cnt = eng.count(M)
                        trials += 1
                        if cnt < best:
                            best, B0, improved = cnt, M, True
                            bestM = [[Fraction(int(x)) for x in row] for row in M]
                            break
                    if improved or done():
                        break
                if improved or done():
                    break

    # seeded random bases (singular draws are redrawn, not counted)
    random_bases = 0
    if not done():
        rng = np.random.default_rng(seed)
        B0 = as_int(bestM)
        t = 0
        while random_bases < search_budget and t < 10 * search_budget:
            t += 1
            if t % 2 == 1:
                M = rng.integers(-coeff_bound, coeff_bound + 1, size=(D, D))
            else:
                S = np.eye(D, dtype=np.int64)
                for _ in range(int(rng.integers(1, D + 1))):
                    i, j = rng.choice(D, size=2, replace=False)
                    S[:, i] += int(rng.integers(-coeff_bound, coeff_bound + 1)) * S[:, j]
                M = B0 @ S
            if _int_det(M.tolist()) == 0:
                continue
            cnt = eng.count(M)
            trials += 1
            random_bases += 1
            if cnt < best:
                best = cnt
                bestM = [[Fraction(int(x)) for x in row] for row in M]
                if done():
                    break

    witness = [_combine([bestM[i][j] for i in range(D)], Fb, d) for j in range(D)]
    index_set, cnt = index_count(omega, L, witness)
    if cnt != best:
        raise InternalCheckError("fast count %d disagrees with exact count %d" % (best, cnt))
    if best < floor:
        raise InternalCheckError("count below dim(L/ker omega); hypotheses must fail")
    lb = length_bounds(omega, search_budget=0)
    cross = {"length_lower": lb.lower, "count_at_least_length_lower": best >= lb.lower}
    if not cross["count_at_least_length_lower"]:
        raise InternalCheckError("count %d below the length lower bound %d" % (best, lb.lower))
    return NLResult(c_std, best, floor, best == floor, best - floor, witness, index_set, trials, cross,
                    random_bases)


# ---------------------------------------------------------------------------
# canonical representation


@dataclass
class CanonicalRep:
    F_basis: list
    dual_forms: list
    hat_forms: dict
    index_set: list
    sign: int
    checks: dict
    length: LengthBounds

    def reconstruct(self) -> AlternatingForm:
        terms = [wedge_all([self.hat_forms[I]] + [self.dual_forms[i] for i in I]) for I in self.index_set]
        out = terms[0]
        for t in terms[1:]:
            out = out + t
        return out * self.sign

    def to_json(self):
        return {
            "F_basis": [_vec_json(v) for v in self.F_basis],
            "dual_forms": [_vec_json(f.one_form_coeffs()) for f in self.dual_forms],
            "hat_forms": [
                {"indices": [i + 1 for i in I], "form": _vec_json(self.hat_forms[I].one_form_coeffs())}
                for I in self.index_set
            ],
            "index_set": [[i + 1 for i in I] for I in self.index_set],
            "sign": self.sign,
            "checks": dict(self.checks),
            "length": self.length.to_json(),
        }


def canonical_representation(omega: AlternatingForm, L: Subspace, F: Subspace,
                             nl: Optional[NLResult] = None, **nl_options) -> CanonicalRep:
    """Write ``omega = sign * sum_I hat_I ^ e^{i1} ^ ... ^ e^{in}``.

    ``hat_I`` is the contraction of omega with the witness basis vectors
    indexed by ``I`` (first index inserted first) and ``e^i`` is the dual
    basis in ``L^perp``; with that ordering ``sign = (-1)^n``.
    """
    if nl is None:
        nl = frak_N_L(omega, L, F, **nl_options)
    if not nl.certified_zero_gap:
        raise NotCertified("N_L is not certified zero (best count %d, floor %d)" % (nl.best_count, nl.floor))
    d = omega.dimension
    n = omega.degree - 1
    Lb = [list(b) for b in L.basis]
    Fb = [list(v) for v in nl.witness_basis]
    m = len(Lb)
    dual = _dual_rows(Lb + Fb)
    e_forms = [AlternatingForm.one_form(dual[m + i]) for i in range(len(Fb))]
    hats = {I: multi_contract([Fb[i] for i in I], omega) for I in nl.index_set}
    sign = -1 if n % 2 else 1
    rep = CanonicalRep(Fb, e_forms, hats, list(nl.index_set), sign, {}, None)
    if not nl.index_set:
        recon = AlternatingForm(d, omega.degree)
    else:
        recon = rep.reconstruct()
    if recon != omega:
        raise InternalCheckError("canonical reconstruction differs from omega")
    hat_rows = [hats[I].one_form_coeffs() for I in nl.index_set]
    checks = {
        "reconstruction_exact": True,
        "dual_forms_in_L_perp": all(f.evaluate([l]) == 0 for f in e_forms for l in Lb),
        "hats_in_F_perp": all(h.evaluate([f]) == 0 for h in hats.values() for f in Fb),
        "hats_independent": linalg.rank(hat_rows, d) == len(hat_rows) if hat_rows else True,
        "index_count_is_dim_L_mod_ker": len(nl.index_set) == nl.floor,
    }
    # basis of W^* in which omega has exactly |index set| monomials
    Fperp = Subspace(d, linalg.nullspace(Fb, d) if Fb else linalg.identity(d))
    fill_rows = list(hat_rows)
    for row in Fperp.basis:
        trial = fill_rows + [list(row)]
        if linalg.rank(trial, d) == len(trial):
            fill_rows = trial
    coframe = fill_rows + [f.one_form_coeffs() for f in e_forms]
    vec_basis = linalg.transpose(linalg.inverse(coframe))
    witness_count = length_in_basis(omega, vec_basis)
    checks["adapted_basis_count"] = witness_count == len(nl.index_set)
    if not all(checks.values()):
        raise InternalCheckError("canonical representation failed checks: %r" % checks)
    rigorous = length_bounds(omega, search_budget=0)
    if rigorous.lower > witness_count:
        raise InternalCheckError("rigorous length bound exceeds canonical term count")
    sources = dict(rigorous.lower_sources)
    sources["zero-gap theorem: dim(L/ker omega)"] = nl.floor
    rep.length = LengthBounds(max(rigorous.lower, nl.floor), witness_count,
                              max(rigorous.lower, nl.floor) == witness_count,
                              [AlternatingForm.one_form(r) for r in coframe], sources,
                              "canonical representation")
    rep.checks = checks
    return rep


def certified_length(omega: AlternatingForm, L: Subspace, decomposable_basis=None,
                     search_budget: int = 200, seed: int = 0) -> LengthBounds:
    """Length bounds sharpened by a zero-gap certificate for ``L`` when one is found."""
    try:
        comp = complement_n_isotropic(omega, L, decomposable_basis=decomposable_basis, seed=seed)
        nl = frak_N_L(omega, L, comp.F, search_budget=search_budget, seed=seed,
                      decomposable_basis=decomposable_basis)
        if nl.certified_zero_gap:
            return canonical_representation(omega, L, comp.F, nl=nl).length
    except (PreconditionError, SearchExhausted, NotCertified):
        pass
    return length_bounds(omega, search_budget=search_budget, seed=seed)


# ---------------------------------------------------------------------------
# principal part and dimension relations


def principal_class_check(omega: AlternatingForm, omega2: AlternatingForm, L: Subspace,
                          decomposable_basis=None) -> bool:
    """True iff ``(omega2 - omega)`` vanishes under contraction with ``L``.

    When it does and ``L`` is maximal isotropic decomposable for ``omega``,
    the same is re-verified for ``omega2``.
    """
    if omega.dimension != omega2.dimension or omega.degree != omega2.degree:
        raise DimensionMismatch("forms differ in dimension or degree")
    diff = omega2 - omega
    ok = all(contract(list(l), diff).is_zero() for l in L.basis)
    if ok and omega.degree >= 2:
        rep = classify_isotropy(L, omega, 1)
        if rep.is_maximal:
            basis = decomposable_basis
            if basis is None:
                basis = decomposable_basis_search(L, omega, random_trials=20, max_candidates=500)
            if basis is not None:
                rep2 = classify_isotropy(L, omega2, 1)
                dec2 = all(decomposable_vector(b, omega2) for b in basis)
                if not (rep2.is_maximal and dec2):
                    raise InternalCheckError("principal-part implication failed")
    return ok


def _span_equal(forms_a, forms_b):
    idx = sorted({I for f in list(forms_a) + list(forms_b) for I in f.terms})
    if not idx:
        return True, 0, 0
    A = [f.coords(idx) for f in forms_a]
    B = [f.coords(idx) for f in forms_b]
    ra = linalg.rank(A, len(idx)) if A else 0
    rb = linalg.rank(B, len(idx)) if B else 0
    rab = linalg.rank(A + B, len(idx)) if A or B else 0
    return ra == rb == rab, ra, rb


def image_of(omega, L):
    return [contract(list(l), omega) for l in L.basis]


def check_max_dim_relation(omega: AlternatingForm, L: Subspace) -> bool:
    """``omega^flat(L) == Lambda^n L^perp``, cross-checked against the dimension count."""
    d = omega.dimension
    n = omega.degree - 1
    Lperp = [AlternatingForm.one_form(r) for r in L.annihilator().basis]
    target = [wedge_all(list(c)) for c in itertools.combinations(Lperp, n)] if n else \
        [AlternatingForm.scalar(d, 1)]
    image = image_of(omega, L)
    equal, _, rt = _span_equal(image, target)
    dim_cond = L.dim == kernel(omega).dim + math.comb(d - L.dim, n)
    if rt != math.comb(d - L.dim, n):
        raise InternalCheckError("Lambda^n L^perp has the wrong dimension")
    if is_k_isotropic(L, omega, 1) and dim_cond != equal:
        raise InternalCheckError("dimension criterion disagrees with the span comparison")
    return equal


def canonical_target(L: Subspace, V: Subspace, n: int, r: int):
    """Spanning set of n-forms annihilating ``L`` and killed by any ``r`` vectors of ``V``,
    together with the closed-form dimension."""
    d = L.ambient
    Lb = [list(b) for b in L.basis]
    m = len(Lb)
    pool = [list(b) for b in V.basis]
    idx = linalg.independent_subset(Lb + pool, d)
    Vp = [pool[i - m] for i in idx if i >= m]
    full = linalg.extend_to_basis(Lb + Vp, d)
    Hb = full[m + len(Vp):]
    dual = _dual_rows(full)
    vdual = [AlternatingForm.one_form(dual[m + i]) for i in range(len(Vp))]
    hdual = [AlternatingForm.one_form(dual[m + len(Vp) + i]) for i in range(len(Hb))]
    forms = []
    for s in range(0, min(r - 1, n) + 1):
        for A in itertools.combinations(vdual, s):
            for B in itertools.combinations(hdual, n - s):
                forms.append(wedge_all(list(A) + list(B), d))
    formula = sum(math.comb(len(Vp), s) * math.comb(len(Hb), n - s) for s in range(0, r))
    return forms, formula


def check_canonical_relation(omega: AlternatingForm, L: Subspace, V: Subspace, r: int) -> bool:
    """``omega^flat(L) == Lambda^n_r L^perp`` relative to ``V``."""
    if not L.issubspace(V):
        raise PreconditionError("L is not contained in V")
    n = omega.degree - 1
    target, formula = canonical_target(L, V, n, r)
    equal, _, rt = _span_equal(image_of(omega, L), target)
    if rt != formula:
        raise InternalCheckError("target dimension %d disagrees with the closed formula %d" % (rt, formula))
    return equal
