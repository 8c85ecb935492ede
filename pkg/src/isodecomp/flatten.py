"""Flattening closed polynomial forms along a coordinate split ``z = (x, y)``.

``L`` is the span of the ``d/dy`` directions.  The symbolic stages
(splitting, homotopy) are exact; only the Moser flow is numerical.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .analysis import is_maximal_isotropic_decomposable, kernel
from .errors import DimensionMismatch, FlattenError, PreconditionError
from .exterior import AlternatingForm, Subspace
from .linalg import frac_str, rank, solve
from .poly import Poly, PolyForm, PolyVectorField, exterior_derivative, lie_bracket

__all__ = ["CoordinateSplit", "FlattenResult", "InvolutivityResult", "PolyVectorField",
           "check_regularity", "involutive", "moser_flatten", "poincare_homotopy", "restrict_split"]


@dataclass(frozen=True)
class CoordinateSplit:
    x_indices: tuple
    y_indices: tuple

    def __post_init__(self):
        xs, ys = tuple(sorted(self.x_indices)), tuple(sorted(self.y_indices))
        object.__setattr__(self, "x_indices", xs)
        object.__setattr__(self, "y_indices", ys)
        both = xs + ys
        if len(set(both)) != len(both):
            raise ValueError("x and y index sets overlap")
        if sorted(both) != list(range(len(both))):
            raise ValueError("x and y indices must partition 0..d-1")

    @property
    def dimension(self):
        return len(self.x_indices) + len(self.y_indices)

    @classmethod
    def parse(cls, x: str, y: str) -> "CoordinateSplit":
        """From 1-based comma lists, e.g. ``"1,2"`` and ``"3,4"``."""
        xs = tuple(int(t) - 1 for t in x.split(",") if t.strip())
        ys = tuple(int(t) - 1 for t in y.split(",") if t.strip())
        return cls(xs, ys)


def restrict_split(omega: PolyForm, split: CoordinateSplit):
    """``(Omega, omega_F)``: ``omega_F`` keeps the terms built from dx's only."""
    if split.dimension != omega.dimension:
        raise DimensionMismatch("split covers %d coordinates, form has %d" % (split.dimension, omega.dimension))
    xs = set(split.x_indices)
    pure = {I: p for I, p in omega.terms.items() if all(i in xs for i in I)}
    omega_F = PolyForm(omega.dimension, omega.degree, pure)
    return omega - omega_F, omega_F


def poincare_homotopy(omega: PolyForm, split: CoordinateSplit, check: bool = True) -> PolyForm:
    """Fiberwise primitive along ``y``: ``theta = int_0^1 Phi_t^* (i_E omega) dt / t``.

    ``Phi_t(x, y) = (x, t y)`` and ``E = sum y_j d/dy_j``.  For the monomial
    ``x^a y^b`` on ``dz^I`` the t-integral is ``1 / (|b| + #(I & y))``.
    """
    if omega.degree == 0:
        raise PreconditionError("homotopy needs a form of degree >= 1")
    if check:
        if not exterior_derivative(omega).is_zero():
            raise PreconditionError("form is not closed")
        if not restrict_split(omega, split)[1].is_zero():
            raise PreconditionError("form has a pure-dx part; homotopy along y needs it to vanish")
    d = omega.dimension
    ys = set(split.y_indices)
    out = {}
    for I, p in omega.terms.items():
        ny = sum(1 for i in I if i in ys)
        if ny == 0:
            continue
        for pos, j in enumerate(I):
            if j not in ys:
                continue
            J = I[:pos] + I[pos + 1:]
            sign = -1 if pos % 2 else 1
            terms = {}
            for e, c in p.terms.items():
                w = sum(e[i] for i in ys) + ny
                e2 = list(e)
                e2[j] += 1
                terms[tuple(e2)] = sign * c / w
            v = Poly(d, terms)
            out[J] = out[J] + v if J in out else v
    theta = PolyForm(d, omega.degree - 1, out)
    if check and exterior_derivative(theta) != omega:
        raise PreconditionError("homotopy identity d(theta) = omega failed")
    return theta


# ---------------------------------------------------------------------------
# Moser flow


@dataclass
class FlattenResult:
    omega0: AlternatingForm
    steps: int
    samples: list  # (point, error)
    max_error: float
    x_drift: float
    tol: float
    ok: bool
    flow_params: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "omega0": self.omega0.to_json(),
            "steps": self.steps,
            "max_error": self.max_error,
            "x_drift": self.x_drift,
            "tol": self.tol,
            "ok": self.ok,
            "flow_params": dict(self.flow_params),
            "probes": dict(self.probes),
            "samples": [{"point": [float(x) for x in p], "error": float(e)} for p, e in self.samples],
        }


def _probe_points(d, rng, count, radius):
    pts = [[Fraction(0)] * d]
    den = 8
    top = max(1, int(radius * den))
    for _ in range(count):
        pts.append([Fraction(rng.randint(-top, top), den) for _ in range(d)])
    return pts


def check_regularity(omega: PolyForm, split: CoordinateSplit, points) -> dict:
    """Kernel dimension and the isotropy of ``span(d/dy)`` at rational probe points."""
    d = omega.dimension
    L = Subspace.coordinate(d, split.y_indices)
    kdims = []
    for pt in points:
        w = omega.evaluate(pt)
        kd = kernel(w).dim
        kdims.append(kd)
        if kd != kdims[0]:
            raise PreconditionError("kernel dimension jumps from %d to %d at point %s"
                                    % (kdims[0], kd, [frac_str(x) for x in pt]))
    for pt in points:
        w = omega.evaluate(pt)
        ok, _ = is_maximal_isotropic_decomposable(L, w, basis=None, random_trials=20, max_candidates=2000)
        if not ok:
            raise PreconditionError("span(d/dy) is not maximal isotropic decomposable at %s"
                                    % [frac_str(x) for x in pt])
    return {"points": len(points), "kernel_dim": kdims[0] if kdims else None}


class _FlowField:
    """Batched evaluation of the Moser field ``X_t`` (y-components only)."""

    def __init__(self, omega, omega0_poly, alpha, split):
        d = omega.dimension
        k = omega.degree
        self.d = d
        self.ys = list(split.y_indices)
        self.top = list(itertools.combinations(range(d), k))
        self.low = list(itertools.combinations(range(d), k - 1))
        self.w = omega.compile()
        self.w0 = omega0_poly.compile()
        self.alpha = alpha.compile()
        lowpos = {J: i for i, J in enumerate(self.low)}
        # contraction with d/dy_j as a linear map on coefficient vectors
        self.cmap = np.zeros((len(self.ys), len(self.low), len(self.top)))
        for a, j in enumerate(self.ys):
            for b, I in enumerate(self.top):
                if j in I:
                    pos = I.index(j)
                    self.cmap[a, lowpos[I[:pos] + I[pos + 1:]], b] = -1.0 if pos % 2 else 1.0

    def __call__(self, t, Z):
        w = self.w.dense(Z, self.top)
        w0 = self.w0.dense(Z, self.top)
        wt = w0 + t * (w - w0)
        A = np.einsum("jab,pb->paj", self.cmap, wt)
        b = self.alpha.dense(Z, self.low)
        c = np.einsum("pjk,pk->pj", np.linalg.pinv(A), b)
        resid = np.abs(np.einsum("paj,pj->pa", A, c) - b).max(axis=1) if b.size else np.zeros(len(Z))
        X = np.zeros_like(Z)
        X[:, self.ys] = c
        return X, resid


def _pulled_back_error(compiled, omega0_dense, top, Phi_center, J):
    """Max |(Phi^* omega)(z) - omega0| over coefficients, for each point."""
    vals = compiled.dense(Phi_center, top)  # (P, ntop)
    pulled = np.zeros((len(Phi_center), len(top)))
    for b, I in enumerate(top):
        sub = J[:, list(I), :]  # rows I of the Jacobian
        for a, K in enumerate(top):
            pulled[:, a] += vals[:, b] * np.linalg.det(sub[:, :, list(K)])
    return np.abs(pulled - omega0_dense[None, :]).max(axis=1)


def moser_flatten(omega: PolyForm, split: CoordinateSplit, steps: int = 100, samples: int = 50,
                  tol: float = 1e-6, seed: int = 0, radius: float = 0.1, h: float = 1e-4,
                  probes: int = 8, resid_tol: float = 1e-8) -> FlattenResult:
    """Flow ``omega`` to its value at the origin with the Moser trick.

    Solves ``i_{X_t} omega_t = alpha`` (``alpha = theta0 - theta``) for ``X_t``
    tangent to ``y``, integrates it with fixed-step RK4 and checks
    ``Phi_1^* omega = omega(0)`` at ``samples`` seeded points (the origin
    first) using central-difference Jacobians with step ``h``.
    """
    d = omega.dimension
    if split.dimension != d:
        raise DimensionMismatch("split covers %d coordinates, form has %d" % (split.dimension, d))
    if steps < 1 or samples < 1:
        raise ValueError("steps and samples must be positive")
    if not exterior_derivative(omega).is_zero():
        raise PreconditionError("form is not closed")
    if not restrict_split(omega, split)[1].is_zero():
        raise PreconditionError("form has a nonzero pure-dx part")
    rng = random.Random(seed)
    probe_info = check_regularity(omega, split, _probe_points(d, rng, probes, radius))

    origin = [Fraction(0)] * d
    omega0 = omega.evaluate(origin)
    omega0_poly = PolyForm.from_constant(omega0)
    theta = poincare_homotopy(omega, split)
    theta0 = poincare_homotopy(omega0_poly, split)
    alpha = theta0 - theta
    field_ = _FlowField(omega, omega0_poly, alpha, split)

    nprng = np.random.default_rng(seed)
    base = nprng.uniform(-radius, radius, size=(samples, d))
    base[0] = 0.0
    # each sample launches 2d+1 flows: the point and its +-h perturbations
    offsets = np.concatenate([np.zeros((1, d)), h * np.eye(d), -h * np.eye(d)])
    Z = (base[:, None, :] + offsets[None, :, :]).reshape(-1, d)
    Z0 = Z.copy()
    dt = 1.0 / steps
    worst_resid = 0.0
    for s in range(steps):
        t = s * dt
        k1, r1 = field_(t, Z)
        k2, r2 = field_(t + dt / 2, Z + dt / 2 * k1)
        k3, r3 = field_(t + dt / 2, Z + dt / 2 * k2)
        k4, r4 = field_(t + dt, Z + dt * k3)
        for r, pts in ((r1, Z), (r2, Z), (r3, Z), (r4, Z)):
            m = int(np.argmax(r)) if r.size else 0
            if r.size and r[m] > resid_tol:
                raise FlattenError("i_X omega_t = alpha is inconsistent (residual %.3g) at t=%.4f"
                                   % (r[m], t), point=pts[m].tolist(), residual=float(r[m]))
            worst_resid = max(worst_resid, float(r.max()) if r.size else 0.0)
        Z = Z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    Zr = Z.reshape(samples, 2 * d + 1, d)
    centre = Zr[:, 0, :]
    J = (Zr[:, 1:d + 1, :] - Zr[:, d + 1:, :]).transpose(0, 2, 1) / (2 * h)  # J[p, i, j] = d Phi^i / d z^j
    top = list(itertools.combinations(range(d), omega.degree))
    w0_dense = np.array([float(omega0.coefficient(I)) for I in top])
    errs = _pulled_back_error(omega.compile(), w0_dense, top, centre, J)
    xs = list(split.x_indices)
    x_drift = float(np.abs(Z[:, xs] - Z0[:, xs]).max()) if xs else 0.0
    max_error = float(errs.max())
    return FlattenResult(
        omega0=omega0,
        steps=steps,
        samples=[(base[i].tolist(), float(errs[i])) for i in range(samples)],
        max_error=max_error,
        x_drift=x_drift,
        tol=tol,
        ok=bool(max_error <= tol),
        flow_params={"steps": steps, "dt": dt, "h": h, "radius": radius, "seed": seed,
                     "max_residual": worst_resid},
        probes=probe_info,
    )


# ---------------------------------------------------------------------------
# involutivity


@dataclass
class InvolutivityResult:
    involutive: bool
    points: list
    rank: int
    witness: Optional[dict] = None

    def __bool__(self):
        return self.involutive

    def to_json(self):
        out = {"involutive": self.involutive, "rank": self.rank,
               "points": [[frac_str(x) for x in p] for p in self.points]}
        if self.witness is not None:
            w = dict(self.witness)
            w["bracket"] = w["bracket"].to_json()
            if w["point"] is not None:
                w["point"] = [frac_str(x) for x in w["point"]]
            w["pair"] = [i + 1 for i in w["pair"]]
            out["witness"] = w
        return out


def _module_coefficients(gens, target, degree_bound):
    """Polynomial ``c_i`` of degree <= ``degree_bound`` with ``sum c_i g_i = target``, or None."""
    d = target.dimension
    monos = [e for k in range(degree_bound + 1)
             for e in _exponents(d, k)]
    unknown = {}
    for i in range(len(gens)):
        for m in monos:
            unknown[(i, m)] = len(unknown)
    rows = {}
    for (i, m), u in unknown.items():
        for k, comp in enumerate(gens[i].components):
            for e, c in comp.terms.items():
                key = (k, tuple(a + b for a, b in zip(e, m)))
                rows.setdefault(key, {})[u] = c
    for k, comp in enumerate(target.components):
        for e in comp.terms:
            rows.setdefault((k, e), {})
    keys = sorted(rows)
    A = [[rows[key].get(u, 0) for u in range(len(unknown))] for key in keys]
    b = [target.components[k].terms.get(e, 0) for k, e in keys]
    sol = solve(A, b, len(unknown)) if A else [0] * len(unknown)
    if sol is None:
        return None
    out = []
    for i in range(len(gens)):
        out.append(Poly(d, {m: sol[unknown[(i, m)]] for m in monos}))
    return out


def _exponents(d, k):
    for combo in itertools.combinations_with_replacement(range(d), k):
        e = [0] * d
        for j in combo:
            e[j] += 1
        yield tuple(e)


def involutive(dist: Sequence[PolyVectorField], probe_points=None, seed: int = 0,
               n_probes: int = 6, mode: str = "module", degree_bound: Optional[int] = None
               ) -> InvolutivityResult:
    """Whether the brackets of the generators stay inside the distribution.

    The generators must have the same rank at every probe point (seeded
    rational points with nonzero coordinates unless given).  Membership of
    each bracket is then decided

    * ``mode="module"``: in the polynomial module spanned by the generators,
      by an exact solve for coefficients of degree <= ``degree_bound``
      (default: bracket degree + 1).  A negative answer is relative to
      that bound.
    * ``mode="pointwise"``: in the span of the generators at each probe point.

    The result is truthy iff involutive; a failure carries the offending
    pair, the bracket and (pointwise) the point.
    """
    if mode not in ("module", "pointwise"):
        raise ValueError("mode must be 'module' or 'pointwise'")
    if not dist:
        raise ValueError("empty distribution")
    d = dist[0].dimension
    if any(f.dimension != d for f in dist):
        raise DimensionMismatch("vector fields on different dimensions")
    if probe_points is None:
        rng = random.Random(seed)
        probe_points = [[Fraction(rng.choice([-1, 1]) * rng.randint(1, 7), rng.randint(1, 3)) for _ in range(d)]
                        for _ in range(n_probes)]
    else:
        probe_points = [[Fraction(x) for x in p] for p in probe_points]
    gens_at = []
    ranks = []
    for pt in probe_points:
        rows = [f.evaluate(pt) for f in dist]
        rk = rank(rows, d)
        ranks.append(rk)
        if rk != ranks[0]:
            raise PreconditionError("distribution rank changes from %d to %d at %s"
                                    % (ranks[0], rk, [frac_str(x) for x in pt]))
        gens_at.append(rows)
    for a, b in itertools.combinations(range(len(dist)), 2):
        br = lie_bracket(dist[a], dist[b])
        if br.is_zero():
            continue
        if mode == "module":
            bound = degree_bound
            if bound is None:
                bound = max(c.degree() for c in br.components) + 1
            if _module_coefficients(list(dist), br, bound) is None:
                return InvolutivityResult(False, probe_points, ranks[0],
                                          {"pair": (a, b), "bracket": br, "point": None,
                                           "degree_bound": bound})
            continue
        for pt, rows in zip(probe_points, gens_at):
            v = br.evaluate(pt)
            if not any(v):
                continue
            cols = [list(c) for c in zip(*rows)]  # d x m system
            if solve(cols, v, len(rows)) is None:
                return InvolutivityResult(False, probe_points, ranks[0],
                                          {"pair": (a, b), "bracket": br, "point": pt})
    return InvolutivityResult(True, probe_points, ranks[0])
