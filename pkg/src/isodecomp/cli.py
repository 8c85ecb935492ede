"""Command-line front end: ``isodecomp <command> ...`` (or ``python3 -m isodecomp``).

Exit codes::

    0  success
    2  unreadable or malformed input
    3  dimension mismatch or violated precondition
    4  budgeted search ended without a result
    5  result could not be certified
    6  flattening failed or exceeded its tolerance
    7  internal postcondition check failed (a bug)

Errors are reported as one JSON object on stderr.  Every randomized search
takes ``--seed`` (default 0), so reports are reproducible; the ``timings``
block is the only part that varies between identical runs and is left out
of ``report_digest``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__
from .analysis import classify_isotropy, is_decomposable, kernel, length_bounds, support
from .catalog import by_name, example_r11, max_dim_example, omega0, omega0_constrained
from .errors import (
    DegreeError,
    DimensionMismatch,
    FlattenError,
    InternalCheckError,
    NotCertified,
    PreconditionError,
    SearchExhausted,
)
from .exterior import AlternatingForm, Subspace
from .flatten import CoordinateSplit, involutive, moser_flatten
from .isotropic import (
    canonical_representation,
    complement_n_isotropic,
    frak_N_L,
    index_count,
)
from .poly import PolyForm, fields_from_json

DEFAULT_SEED = 0

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_SEARCH = 4
EXIT_NOT_CERTIFIED = 5
EXIT_FLATTEN = 6
EXIT_INTERNAL = 7


class InputError(Exception):
    pass


class _Digests:
    def __init__(self):
        self.items = {}

    def add(self, label, path):
        data = Path(path).read_bytes()
        self.items[label] = hashlib.sha256(data).hexdigest()
        return data


def _load_json(path, digests, label):
    try:
        data = digests.add(label, path)
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc))
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise InputError("%s is not valid JSON: %s" % (path, exc))


def _parse(loader, path, digests, label):
    data = _load_json(path, digests, label)
    try:
        return loader(data)
    except (DimensionMismatch, DegreeError):
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError("%s: malformed %s (%s)" % (path, label, exc))


def _load_form(path, digests):
    return _parse(AlternatingForm.from_json, path, digests, "form")


def _load_subspace(path, digests, label, ambient):
    S = _parse(Subspace.from_json, path, digests, label)
    if S.ambient != ambient:
        raise DimensionMismatch("%s lives in dimension %d, form in %d" % (label, S.ambient, ambient))
    return S


def _load_basis(path, digests):
    data = _load_json(path, digests, "basis")
    try:
        vecs = data["vectors"] if isinstance(data, dict) else data
        return [[x for x in v] for v in vecs]
    except (KeyError, TypeError) as exc:
        raise InputError("%s: malformed basis (%s)" % (path, exc))


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _finish(args, command, body, digests, timings):
    report = {"tool": "isodecomp", "version": __version__, "command": command,
              "inputs": dict(sorted(digests.items.items())), "seed": getattr(args, "seed", None)}
    report.update(body)
    report["report_digest"] = hashlib.sha256(_dumps(report).encode()).hexdigest()
    if not getattr(args, "no_timings", False):
        report["timings"] = {k: round(v, 6) for k, v in timings.items()}
    text = _dumps(report)
    if getattr(args, "output", None):
        atomic_write(args.output, text)
    else:
        sys.stdout.write(text)
    return report


class _Timer:
    def __init__(self):
        self.t = {}

    def __call__(self, label):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.start = time.perf_counter()

            def __exit__(self, *exc):
                timer.t[label] = time.perf_counter() - self.start

        return _Ctx()


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args):
    dg, tm = _Digests(), _Timer()
    omega = _load_form(args.form, dg)
    body = {"dimension": omega.dimension, "degree": omega.degree, "terms": len(omega)}
    with tm("structure"):
        if omega.degree == 0:
            body["kernel_dim"] = None
        else:
            K = kernel(omega)
            body["kernel_dim"] = K.dim
            body["kernel"] = K.to_json()
        S = support(omega)
        body["support_dim"] = S.dim
        body["decomposable"] = is_decomposable(omega)
        body["degenerate"] = omega.is_zero() or (omega.degree > 0 and body["kernel_dim"] > 0)
    with tm("length"):
        body["length"] = length_bounds(omega, search_budget=args.length_budget, seed=args.seed).to_json()
    if args.L:
        L = _load_subspace(args.L, dg, "L", omega.dimension)
        with tm("isotropy"):
            if not 0 <= args.k < omega.degree:
                raise DegreeError("k=%d must satisfy 0 <= k < degree=%d" % (args.k, omega.degree))
            rep = classify_isotropy(L, omega, args.k)
            body["isotropy"] = rep.to_json()
        if args.k == 1 and rep.is_maximal:
            with tm("complement"):
                if args.F:
                    F = _load_subspace(args.F, dg, "F", omega.dimension)
                else:
                    F = complement_n_isotropic(omega, L, seed=args.seed).F
                body["F"] = F.to_json()
            idx, cnt = index_count(omega, L, F.basis)
            body["count_standard"] = cnt
            body["index_set_standard"] = [[i + 1 for i in I] for I in idx]
            with tm("N_L"):
                nl = frak_N_L(omega, L, F, search_budget=args.budget, seed=args.seed)
            body["N_L"] = nl.to_json()
            if nl.certified_zero_gap:
                with tm("canonical"):
                    canon = canonical_representation(omega, L, F, nl=nl)
                body["canonical"] = canon.to_json()
                body["length"] = canon.length.to_json()
    return _finish(args, "analyze", body, dg, tm.t)


def cmd_isotropy(args):
    dg, tm = _Digests(), _Timer()
    omega = _load_form(args.form, dg)
    L = _load_subspace(args.L, dg, "L", omega.dimension)
    if not 0 <= args.k < omega.degree:
        raise DegreeError("k=%d must satisfy 0 <= k < degree=%d" % (args.k, omega.degree))
    with tm("classify"):
        rep = classify_isotropy(L, omega, args.k)
    return _finish(args, "isotropy", {"isotropy": rep.to_json()}, dg, tm.t)


def cmd_complement(args):
    dg, tm = _Digests(), _Timer()
    omega = _load_form(args.form, dg)
    L = _load_subspace(args.L, dg, "L", omega.dimension)
    V = _load_subspace(args.V, dg, "V", omega.dimension) if args.V else None
    basis = _load_basis(args.basis, dg) if args.basis else None
    with tm("complement"):
        res = complement_n_isotropic(omega, L, V, args.r, decomposable_basis=basis, seed=args.seed)
    if args.F_out:
        atomic_write(args.F_out, _dumps(res.F.to_json()))
    return _finish(args, "complement", {"complement": res.to_json()}, dg, tm.t)


def _form_L_F(args, dg):
    omega = _load_form(args.form, dg)
    L = _load_subspace(args.L, dg, "L", omega.dimension)
    F = _load_subspace(args.F, dg, "F", omega.dimension)
    return omega, L, F


def cmd_nl(args):
    dg, tm = _Digests(), _Timer()
    omega, L, F = _form_L_F(args, dg)
    with tm("N_L"):
        nl = frak_N_L(omega, L, F, search_budget=args.budget, seed=args.seed, coeff_bound=args.coeff_bound)
    return _finish(args, "nl", {"N_L": nl.to_json()}, dg, tm.t)


def cmd_canonical(args):
    dg, tm = _Digests(), _Timer()
    omega, L, F = _form_L_F(args, dg)
    with tm("canonical"):
        rep = canonical_representation(omega, L, F, search_budget=args.budget, seed=args.seed)
    return _finish(args, "canonical", {"canonical": rep.to_json()}, dg, tm.t)


def cmd_flatten(args):
    dg, tm = _Digests(), _Timer()
    omega = _parse(PolyForm.from_json, args.form, dg, "form")
    parts = dict(p.split("=", 1) for p in args.split if "=" in p)
    if set(parts) != {"x", "y"}:
        raise InputError("--split needs x=... and y=... (1-based comma lists)")
    try:
        split = CoordinateSplit.parse(parts["x"], parts["y"])
    except ValueError as exc:
        raise InputError("bad --split: %s" % exc)
    with tm("flatten"):
        res = moser_flatten(omega, split, steps=args.steps, samples=args.samples, tol=args.tol,
                            seed=args.seed, radius=args.radius)
    _finish(args, "flatten", {"flatten": res.to_json()}, dg, tm.t)
    if not res.ok:
        raise FlattenError("max_error %.3g exceeds tol %.3g" % (res.max_error, res.tol))


def cmd_catalog(args):
    name = args.name.lower()
    if name == "omega0":
        entry = omega0(args.n, args.N)
    elif name in ("omega0c", "omega0_constrained"):
        I = set()
        for tok in filter(None, (args.I or "").split(";")):
            i, mu = tok.split("-")
            I.add((int(i), int(mu)))
        entry = omega0_constrained(args.n, args.N, I)
    elif name == "r11":
        entry = example_r11()
    elif name in ("maxdim", "max_dim"):
        entry = max_dim_example(args.n, args.N)
    else:
        entry = by_name(args.name)
    out = Path(args.output)
    stem = out.with_suffix("") if out.suffix == ".json" else out
    atomic_write(out, _dumps(entry.form.to_json()))
    written = [str(out)]
    meta = entry.meta_json()
    for label in ("L", "V", "F"):
        S = getattr(entry, label)
        if S is not None:
            p = Path(str(stem) + ".%s.json" % label)
            atomic_write(p, _dumps(S.to_json()))
            written.append(str(p))
    meta["files"] = written
    atomic_write(Path(str(stem) + ".meta.json"), _dumps(meta))
    return meta


def cmd_involutive(args):
    dg, tm = _Digests(), _Timer()
    fields = _parse(fields_from_json, args.fields, dg, "fields")
    with tm("involutive"):
        res = involutive(fields, seed=args.seed, n_probes=args.probes, mode=args.mode)
    return _finish(args, "involutive", {"involutive": res.to_json()}, dg, tm.t)


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="isodecomp", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("-o", "--output", help="write the JSON report here (atomically) instead of stdout")
        sp.add_argument("--no-timings", action="store_true", help="omit the timings block")
        if seed:
            sp.add_argument("--seed", type=int, default=DEFAULT_SEED,
                            help="seed for randomized searches (default %d)" % DEFAULT_SEED)

    sp = sub.add_parser("analyze", help="kernel, support, length; with --L also isotropy, N_L, canonical form")
    sp.add_argument("--form", required=True)
    sp.add_argument("--L")
    sp.add_argument("--F")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--budget", type=int, default=2000, help="random bases tried by the N_L search")
    sp.add_argument("--length-budget", dest="length_budget", type=int, default=200,
                    help="random bases tried when bounding the length")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("isotropy", help="classify a subspace as k-isotropic / strict / maximal")
    sp.add_argument("--form", required=True)
    sp.add_argument("--L", required=True)
    sp.add_argument("--k", type=int, default=1)
    common(sp, seed=False)
    sp.set_defaults(func=cmd_isotropy)

    sp = sub.add_parser("complement", help="n-isotropic complement of a maximal isotropic decomposable L")
    sp.add_argument("--form", required=True)
    sp.add_argument("--L", required=True)
    sp.add_argument("--V")
    sp.add_argument("--r", type=int)
    sp.add_argument("--basis", help="decomposable basis of L (JSON list of vectors)")
    sp.add_argument("--F-out", dest="F_out", help="also write F as a subspace JSON file")
    common(sp)
    sp.set_defaults(func=cmd_complement)

    for name, fn, helptext in (("nl", cmd_nl, "bounds on N_L for a complement F"),
                               ("canonical", cmd_canonical, "canonical representation (needs N_L = 0)")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--form", required=True)
        sp.add_argument("--L", required=True)
        sp.add_argument("--F", required=True)
        sp.add_argument("--budget", type=int, default=2000)
        if name == "nl":
            sp.add_argument("--coeff-bound", dest="coeff_bound", type=int, default=2)
        common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("flatten", help="Moser flattening of a closed polynomial form")
    sp.add_argument("--form", required=True)
    sp.add_argument("--split", nargs=2, required=True, metavar=("x=I", "y=J"))
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--radius", type=float, default=0.1)
    common(sp)
    sp.set_defaults(func=cmd_flatten)

    sp = sub.add_parser("catalog", help="write a catalog form plus L/V/F and metadata files")
    sp.add_argument("name", help="omega0, omega0c, r11 or maxdim")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--N", type=int, default=1)
    sp.add_argument("--I", help="kept (i,mu) pairs for omega0c, e.g. '1-1;2-1'")
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("involutive", help="involutivity of a polynomial distribution")
    sp.add_argument("--fields", required=True)
    sp.add_argument("--mode", choices=("module", "pointwise"), default="module")
    sp.add_argument("--probes", type=int, default=6)
    common(sp)
    sp.set_defaults(func=cmd_involutive)
    return p


def _error(code, kind, exc, **extra):
    payload = {"error": kind, "message": str(exc), "exit_code": code}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except InputError as exc:
        return _error(EXIT_PARSE, "parse_error", exc)
    except (DimensionMismatch, DegreeError) as exc:
        return _error(EXIT_PRECONDITION, "dimension_error", exc)
    except PreconditionError as exc:
        return _error(EXIT_PRECONDITION, "precondition_error", exc)
    except SearchExhausted as exc:
        return _error(EXIT_SEARCH, "search_exhausted", exc)
    except NotCertified as exc:
        return _error(EXIT_NOT_CERTIFIED, "not_certified", exc)
    except FlattenError as exc:
        return _error(EXIT_FLATTEN, "flatten_error", exc, point=exc.point, residual=exc.residual)
    except InternalCheckError as exc:
        return _error(EXIT_INTERNAL, "internal_check_failed", exc)
    except ValueError as exc:
        return _error(EXIT_PARSE, "parse_error", exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
