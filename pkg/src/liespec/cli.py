"""Command-line front end.

    liespec spectrum example.json
    liespec check example.json -f 0,1/2
    liespec homology example.json -f 0,7
    liespec taylor commuting.json --table
    liespec verify example.json --properties projection,chain
    liespec verify --random 100
    liespec random --seed 42 --n 3 --m 4 -o instance.json

Every command prints one JSON document (or a plain table with ``--table``)
and exits with the code of the error it hit, 7 for a failed property check,
0 otherwise.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from . import linalg_core as la
from .errors import LieSpecError, MalformedInput, NotSolvable
from .harness import ALL_PROPERTIES, EIGEN_TOL, NORM_TOL, SET_TOL, random_batch, run_suite, summarize
from .homology_engine import CHAIN_TOL, COMMUTING_TOL, betti, build_complex, check_commuting
from .instances import InstanceSpec, fuzz_specs, random_solvable_rep
from .lie_structure import (
    CHARACTER_TOL,
    CLOSURE_TOL,
    LieAlgebraRep,
    OperatorFamily,
    abelian_rep,
    build_rep,
    derived_subalgebra,
    is_nilpotent,
    is_solvable,
)
from .linalg_core import EXACT, FLOAT, GaussianRational, RankPolicy
from .serialize import jsonable, point, scalar_out
from .spectrum import DEDUP_TOL, candidate_characters, check_character, joint_spectrum, taylor_spectrum

THEOREM_FAILED = 7


# --- input documents -----------------------------------------------------------


def _entry(x, mode: str, where: str):
    if mode == EXACT:
        if not isinstance(x, str):
            raise MalformedInput(f"{where}: exact mode needs string entries, got {x!r}")
        return GaussianRational.parse(x)
    ok = (
        isinstance(x, list)
        and len(x) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)
    )
    if not ok:
        raise MalformedInput(f"{where}: float mode needs [re, im] number pairs, got {x!r}")
    if not all(math.isfinite(v) for v in x):
        raise MalformedInput(f"{where}: non-finite entry {x!r}")
    return complex(x[0], x[1])


def parse_document(doc) -> OperatorFamily:
    """Validate an input document and return its operator family."""
    if not isinstance(doc, dict):
        raise MalformedInput("input must be a JSON object")
    extra = set(doc) - {"dim_E", "scalar_mode", "generators", "description"}
    if extra:
        raise MalformedInput(f"unknown keys {sorted(extra)}")
    m, mode, gens = doc.get("dim_E"), doc.get("scalar_mode"), doc.get("generators")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise MalformedInput("dim_E must be a positive integer")
    if mode not in (FLOAT, EXACT):
        raise MalformedInput('scalar_mode must be "float" or "exact"')
    if not isinstance(gens, list) or not gens:
        raise MalformedInput("generators must be a nonempty list")
    names, mats = [], []
    for k, g in enumerate(gens):
        if not isinstance(g, dict) or set(g) != {"name", "matrix"}:
            raise MalformedInput(f"generator {k} must have exactly the keys name and matrix")
        name, rows = g["name"], g["matrix"]
        if not isinstance(name, str) or not name:
            raise MalformedInput(f"generator {k}: name must be a nonempty string")
        if not isinstance(rows, list) or len(rows) != m or any(
            not isinstance(r, list) or len(r) != m for r in rows
        ):
            raise MalformedInput(f"generator {name!r}: matrix must be {m} x {m}")
        M = np.empty((m, m), dtype=object if mode == EXACT else complex)
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                M[i, j] = _entry(x, mode, f"generator {name!r} entry ({i}, {j})")
        names.append(name)
        mats.append(M)
    if len(set(names)) != len(names):
        raise MalformedInput("generator names must be unique")
    return OperatorFamily(tuple(mats), tuple(names))


def load_input(path: str) -> OperatorFamily:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path} is not valid JSON: {exc}") from exc
    return parse_document(doc)


def family_document(family: OperatorFamily) -> dict:
    """Input document for ``family``; float entries keep full precision."""
    mode = family.backend
    gens = []
    for name, X in zip(family.names, family.ops):
        if mode == EXACT:
            rows = [[str(x) for x in row] for row in X]
        else:
            rows = [[[float(z.real), float(z.imag)] for z in row] for row in X]
        gens.append({"name": name, "matrix": rows})
    return {"dim_E": family.dim_E, "scalar_mode": mode, "generators": gens}


def parse_point(text: str, n: int, backend: str) -> list:
    """Comma-separated coordinates; ``p/q`` and ``a+b i`` forms are accepted."""
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != n:
        raise MalformedInput(f"expected {n} coordinates, got {len(parts)}")
    out = []
    for t in parts:
        if backend == EXACT:
            out.append(GaussianRational.parse(t))
            continue
        try:
            out.append(complex(t.replace(" ", "").replace("i", "j")))
        except ValueError:
            out.append(complex(GaussianRational.parse(t)))
    return out


# --- output documents ----------------------------------------------------------


def algebra_summary(L: LieAlgebraRep, policy: RankPolicy) -> dict:
    return {
        "n": L.n,
        "dim_E": L.dim_E,
        "names": list(L.family.names),
        "backend": L.backend,
        "solvable": is_solvable(L, policy),
        "nilpotent": is_nilpotent(L, policy),
        "dim_L2": derived_subalgebra(L, policy).dim,
        "bracket_sign": L.sign,
        "fingerprint": L.fingerprint(),
    }


def tolerances(policy: RankPolicy) -> dict:
    return {
        "rank": policy.tol,
        "closure": CLOSURE_TOL,
        "character": CHARACTER_TOL,
        "chain": CHAIN_TOL,
        "commuting": COMMUTING_TOL,
        "dedup": DEDUP_TOL,
        "set": SET_TOL,
        "eigen": EIGEN_TOL,
        "norm": NORM_TOL,
    }


def _options(args) -> dict:
    skip = {"command", "handler", "format", "output"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _document(args, algebra, result, warnings, policy) -> dict:
    return jsonable(
        {
            "command": {"name": args.command, "options": _options(args)},
            "algebra": algebra,
            "result": result,
            "warnings": list(warnings),
            "tolerances": tolerances(policy),
        }
    )


def _policy(args, family: OperatorFamily | None = None) -> RankPolicy:
    backend = args.backend or (family.backend if family is not None else FLOAT)
    if not args.tol > 0:
        raise MalformedInput("--tol must be positive")
    return RankPolicy(backend=backend, tol=args.tol)


def _load_rep(args):
    family = load_input(args.input)
    policy = _policy(args, family)
    L = build_rep(family.to_backend(policy.backend), policy=policy)
    return L, policy


# --- commands ------------------------------------------------------------------


def cmd_spectrum(args) -> tuple[dict, int]:
    L, policy = _load_rep(args)
    summary = algebra_summary(L, policy)
    if args.candidates_only:
        cands = candidate_characters(L, policy)
        chars = sorted(zip(cands.characters, cands.provenance), key=lambda t: t[0].sort_key())
        result = {
            "candidates": [
                {"f": point(ch), "weight": w, "shift": list(eps)} for ch, (w, eps) in chars
            ],
            "adjoint_shifts": cands.adjoint_shifts,
        }
        return _document(args, summary, result, cands.warnings, policy), 0
    R = joint_spectrum(L, policy)
    result = {
        "points": [
            {"f": point(ch), "betti": list(b.values), "ill_conditioned": b.ill_conditioned}
            for ch, b in R.entries
        ],
        "n_candidates": R.n_candidates,
    }
    return _document(args, summary, result, R.warnings, policy), 0


def cmd_check(args) -> tuple[dict, int]:
    L, policy = _load_rep(args)
    summary = algebra_summary(L, policy)
    if not summary["solvable"]:
        raise NotSolvable("spectrum membership is defined for solvable algebras")
    v = check_character(L, parse_point(args.f, L.n, policy.backend), policy)
    result = {
        "f": point(v.character),
        "in_spectrum": v.in_spectrum,
        "betti": list(v.betti.values),
        "ill_conditioned": v.betti.ill_conditioned,
    }
    return _document(args, summary, result, [], policy), 0


def cmd_homology(args) -> tuple[dict, int]:
    L, policy = _load_rep(args)
    summary = algebra_summary(L, policy)
    f = args.f if args.f is not None else ",".join(["0"] * L.n)
    C = build_complex(L, parse_point(f, L.n, policy.backend), policy)
    b = betti(C, policy)
    result = {
        "f": point(C.character),
        "chain_dims": C.dims(),
        "ranks": list(b.ranks),
        "betti": list(b.values),
        "euler_characteristic": b.euler_characteristic(),
        "chain_defect": C.chain_defect(),
        "ill_conditioned": b.ill_conditioned,
    }
    return _document(args, summary, result, [], policy), 0


def cmd_taylor(args) -> tuple[dict, int]:
    family = load_input(args.input)
    policy = _policy(args, family)
    family = family.to_backend(policy.backend)
    check_commuting(family)
    R = taylor_spectrum(family, policy)
    L = abelian_rep(family)
    summary = {
        "n": L.n,
        "dim_E": L.dim_E,
        "names": list(family.names),
        "backend": L.backend,
        "commuting": True,
        "solvable": True,
        "nilpotent": True,
        "dim_L2": 0,
        "bracket_sign": L.sign,
        "fingerprint": L.fingerprint(),
    }
    result = {"points": [{"f": point(ch), "betti": list(b.values)} for ch, b in R.entries]}
    return _document(args, summary, result, R.warnings, policy), 0


def _property_list(text: str | None) -> list[str]:
    if not text:
        return list(ALL_PROPERTIES)
    names = [t.strip() for t in text.split(",") if t.strip()]
    unknown = sorted(set(names) - set(ALL_PROPERTIES))
    if unknown:
        raise MalformedInput(f"unknown properties {unknown}; choose from {list(ALL_PROPERTIES)}")
    return names


def cmd_verify(args) -> tuple[dict, int]:
    props = _property_list(args.properties)
    if (args.input is None) == (args.random is None):
        raise MalformedInput("give either an input file or --random N")
    if args.input is not None:
        L, policy = _load_rep(args)
        summary = algebra_summary(L, policy)
        instances = [(L, None)]
    else:
        if args.random < 1:
            raise MalformedInput("--random needs a positive count")
        policy = _policy(args)
        try:
            specs = fuzz_specs(args.random, args.seed, args.max_n, args.max_m, args.nilpotent)
        except ValueError as exc:
            raise MalformedInput(str(exc)) from exc
        summary = None
        instances = random_batch(specs, policy)
    reports = run_suite(instances, policy, props)
    failed = [r for r in reports if r.failed]
    result = {
        "all_passed": not failed,
        "summary": summarize(reports),
        "reports": [r.to_dict() for r in reports],
    }
    code = THEOREM_FAILED if failed else 0
    return _document(args, summary, result, [], policy), code


def cmd_random(args) -> tuple[dict, int]:
    try:
        spec = InstanceSpec(args.seed, args.n, args.m, args.nilpotent)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc
    L = random_solvable_rep(spec)
    doc = family_document(L.family)
    doc["description"] = f"random {'nilpotent' if args.nilpotent else 'solvable'} instance, seed {args.seed}"
    return doc, 0


# --- presentation --------------------------------------------------------------


def _fmt_scalar(x) -> str:
    v = scalar_out(x) if not isinstance(x, (str, list)) else x
    if isinstance(v, str):
        return v
    re_, im = v
    if im == 0:
        return f"{re_:.12g}"
    return f"{complex(re_, im):.12g}".strip("()")


def _fmt_point(p) -> str:
    return "(" + ", ".join(_fmt_scalar(x) for x in p) + ")"


def render_table(doc: dict) -> str:
    """Plain-text rendering of an output document."""
    lines = []
    alg = doc.get("algebra")
    if alg:
        lines.append(
            f"{alg['n']} operators on C^{alg['dim_E']}  sign {alg['bracket_sign']}  "
            f"dim L^2 {alg['dim_L2']}  solvable {alg['solvable']}  nilpotent {alg['nilpotent']}"
        )
    res = doc.get("result", {})
    if "points" in res:
        lines.append(f"{'f':<40} betti")
        for p in res["points"]:
            lines.append(f"{_fmt_point(p['f']):<40} {' '.join(map(str, p['betti']))}")
    if "candidates" in res:
        lines.append(f"{'candidate':<40} weight shift")
        for c in res["candidates"]:
            lines.append(f"{_fmt_point(c['f']):<40} {c['weight']} {c['shift']}")
    if "in_spectrum" in res:
        lines.append(f"f = {_fmt_point(res['f'])}  in spectrum: {res['in_spectrum']}  betti {res['betti']}")
    elif "chain_dims" in res:
        lines.append(f"f = {_fmt_point(res['f'])}")
        lines.append(f"dims  {res['chain_dims']}")
        lines.append(f"betti {res['betti']}  euler {res['euler_characteristic']}")
    if "summary" in res:
        lines.append(f"{'property':<24} pass fail n/a")
        for name, s in res["summary"].items():
            lines.append(f"{name:<24} {s['passed']:>4} {s['failed']:>4} {s['not_applicable']:>3}")
        for r in res["reports"]:
            if r["applicable"] and not r["passed"]:
                lines.append(f"FAIL {r['theorem']} seed={r['seed']} fingerprint={r['fingerprint']}")
    for w in doc.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise MalformedInput(f"cannot write {path}: {exc.strerror}") from exc


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=la.DEFAULT_POLICY.tol, help="relative SVD rank tolerance")
    common.add_argument("--backend", choices=(FLOAT, EXACT), help="default: the input's scalar_mode")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", help="JSON output (default)")
    fmt.add_argument("--table", dest="format", action="store_const", const="table", help="plain-text table")
    common.set_defaults(format="json")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="liespec", description="Joint spectra of solvable matrix Lie algebras.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="joint spectrum with Betti vectors")
    p.add_argument("input")
    p.add_argument("--candidates-only", action="store_true", help="list candidates without deciding them")
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("check", parents=[common], help="decide one character")
    p.add_argument("input")
    p.add_argument("-f", required=True, help="coordinates f(X_1),...,f(X_n); use -f=-1,0 for a leading minus")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("homology", parents=[common], help="chain dimensions, ranks and Betti numbers at f")
    p.add_argument("input")
    p.add_argument("-f", help="character coordinates (default: zero)")
    p.set_defaults(handler=cmd_homology)

    p = sub.add_parser("taylor", parents=[common], help="Taylor spectrum of a commuting tuple")
    p.add_argument("input")
    p.set_defaults(handler=cmd_taylor)

    p = sub.add_parser("verify", parents=[common], help="run property checks")
    p.add_argument("input", nargs="?")
    p.add_argument("--random", type=int, metavar="N", help="check N seeded random instances instead")
    p.add_argument("--properties", help=f"comma-separated subset of {','.join(ALL_PROPERTIES)}")
    p.add_argument("--seed", type=int, default=0, help="batch seed for --random")
    p.add_argument("--max-n", type=int, default=4)
    p.add_argument("--max-m", type=int, default=5)
    p.add_argument("--nilpotent", action="store_true", help="strictly upper-triangular instances")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("random", help="emit a random solvable instance as an input document")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=2, help="target dimension of the algebra")
    p.add_argument("--m", type=int, default=3, help="dimension of E")
    p.add_argument("--nilpotent", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_random, format="json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc, code = args.handler(args)
        if args.format == "table" and args.command != "random":
            text = render_table(doc)
        else:
            text = json.dumps(doc, indent=2) + "\n"
        _write(text, args.output)
        return code
    except LieSpecError as exc:
        err = {
            "command": {"name": args.command},
            "error": {"type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code},
        }
        if args.format == "json":
            sys.stdout.write(json.dumps(err, indent=2) + "\n")
        print(f"liespec: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
