"""Command-line entry point: ``toric-hdi <command> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Sequence

from . import hdi
from .contractions import nef_cone_rays, nef_ray_contractions
from .cohomology import cohomology_dims
from .cox import CoxError, class_box, hilbert_function
from .cox import generic_rank as module_generic_rank
from .cox import presentation_from_json
from .fan import (
    Fan,
    FanError,
    ToricVariety,
    hirzebruch_surface,
    point,
    product_variety,
    projective_space,
    star_subdivision,
)
from .fan import to_json as fan_to_json
from .frobenius import FrobeniusError, frobenius_push_module, frobenius_summands
from .maps import MorphismError, ToricMorphism, pullback_divisor

THREADS_ENV = "TORIC_HDI_THREADS"


class InputError(ValueError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


# ---------------------------------------------------------------------------
# input parsing


def parse_builtin(text: str) -> ToricVariety:
    """``projective:n``, ``hirzebruch:a``, ``point``, products ``A*B`` and
    ``blowup:i,j,...:<variety>`` (star subdivision of the cone on those rays)."""
    text = text.strip()
    if text.startswith("blowup:"):
        parts = text.split(":", 2)
        if len(parts) != 3:
            raise InputError(f"malformed blowup builtin {text!r}", "/builtin")
        idx = [int(x) for x in parts[1].split(",") if x]
        return star_subdivision(parse_builtin(parts[2]), idx)
    factors = text.split("*")
    if len(factors) > 1:
        X = parse_builtin(factors[0])
        for f in factors[1:]:
            X = product_variety(X, parse_builtin(f))
        return X
    name, _, arg = text.partition(":")
    try:
        if name == "projective":
            return projective_space(int(arg))
        if name == "hirzebruch":
            return hirzebruch_surface(int(arg))
        if name == "point":
            return point()
    except ValueError as exc:
        raise InputError(f"bad argument in builtin {text!r}", "/builtin") from exc
    raise InputError(f"unknown builtin variety {text!r}", "/builtin")


def _int_list(value: Any, path: str) -> list[int]:
    if not isinstance(value, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
        raise InputError("expected a list of integers", path)
    return value


def variety_from_data(data: Any, path: str = "") -> ToricVariety:
    if isinstance(data, str):
        return parse_builtin(data)
    if not isinstance(data, dict):
        raise InputError("expected a fan object or builtin string", path or "/")
    for key in ("rays", "maxCones"):
        if key not in data:
            raise InputError(f"missing required key {key!r}", f"{path}/{key}")
        if not isinstance(data[key], list):
            raise InputError("expected a list", f"{path}/{key}")
    rays = [_int_list(r, f"{path}/rays/{i}") for i, r in enumerate(data["rays"])]
    cones = [_int_list(c, f"{path}/maxCones/{i}") for i, c in enumerate(data["maxCones"])]
    dim = data.get("dim")
    return ToricVariety(Fan(rays, cones, dim=dim))


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc.msg} at line {exc.lineno}", "/") from exc


def load_variety(args) -> ToricVariety:
    if getattr(args, "builtin", None):
        return parse_builtin(args.builtin)
    if getattr(args, "fan", None):
        return variety_from_data(load_json(args.fan))
    raise InputError("give a fan file or --builtin", "/")


def parse_matrix(text: str) -> list[list[int]]:
    """``"1,0,0;0,1,0"`` -> rows."""
    if not text.strip():
        return []
    return [[int(x) for x in row.split(",")] for row in text.split(";")]


def load_morphism(args) -> ToricMorphism:
    if args.map:
        data = load_json(args.map)
        if not isinstance(data, dict):
            raise InputError("expected a morphism object", "/")
        for key in ("source", "target", "matrix"):
            if key not in data:
                raise InputError(f"missing required key {key!r}", f"/{key}")
        source = variety_from_data(data["source"], "/source")
        target = variety_from_data(data["target"], "/target")
        matrix = [_int_list(r, f"/matrix/{i}") for i, r in enumerate(data["matrix"])]
    else:
        if not (args.source and args.target and args.matrix is not None):
            raise InputError("give a morphism file or --source, --target and --matrix", "/")
        source, target = parse_builtin(args.source), parse_builtin(args.target)
        matrix = parse_matrix(args.matrix)
    return ToricMorphism(target, source, matrix)


def parse_divisor(X: ToricVariety, coeffs: str | None, at_rays: Sequence[str] | None) -> tuple[int, ...]:
    """Coefficients as ``"a0,a1,..."`` or ray-addressed ``"u1,u2,...:a"`` entries."""
    if coeffs:
        D = tuple(int(x) for x in coeffs.split(","))
    else:
        D = (0,) * X.n_rays
    if at_rays:
        D = list(D)
        index = {r: i for i, r in enumerate(X.rays)}
        for item in at_rays:
            ray, _, value = item.rpartition(":")
            key = tuple(int(x) for x in ray.split(","))
            if key not in index:
                raise InputError(f"{list(key)} is not a ray of the variety", "/divisor")
            D[index[key]] = int(value)
        D = tuple(D)
    if len(D) != X.n_rays:
        raise InputError(f"divisor needs {X.n_rays} coefficients, got {len(D)}", "/divisor")
    return D


def parse_box(text: str | None, rank: int, default=(0, 4)) -> list[tuple[int, ...]]:
    """``"lo:hi"`` for every coordinate, or ``"lo:hi,lo:hi,..."``."""
    if rank == 0:
        return [()]
    if not text:
        bounds = [default] * rank
    else:
        parts = text.split(",")
        if len(parts) == 1:
            parts = parts * rank
        if len(parts) != rank:
            raise InputError(f"box needs {rank} ranges", "/twistBox")
        bounds = []
        for p in parts:
            lo, _, hi = p.partition(":")
            bounds.append((int(lo), int(hi)))
    return class_box([b[0] for b in bounds], [b[1] for b in bounds])


def thread_count(args) -> int:
    if args.threads:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# commands


def _twist_entry(job):
    f, i, D, d = job
    return hdi.twist_sections(f, i, D, d)[0]


def cmd_variety_check(args) -> dict:
    X = load_variety(args)
    out = {
        "dim": X.dim,
        "rays": len(X.rays),
        "cones": len(X.max_cones),
        "smooth": X.is_smooth,
        "complete": X.is_complete,
        "classGroupRank": X.class_group_rank,
        "classGroupTorsion": list(X.class_group_torsion),
    }
    if args.oracle and X.is_complete:
        out["oracle"] = {"h0(O)": cohomology_dims(X, X.zero_divisor())[0] == 1}
    return out


def cmd_hdi(args) -> dict:
    f = load_morphism(args)
    X, Y = f.source, f.target
    D = parse_divisor(X, args.divisor, args.divisor_ray)
    i = args.degree
    classes = parse_box(args.twist_box, Y.class_group_rank)
    limit = hdi.TWIST_BOX_BASE ** max(1, Y.class_group_rank)
    if len(classes) > limit:
        raise hdi.HdiError("twist box exceeds limit")
    threads = thread_count(args)
    jobs = [(f, i, D, d) for d in classes]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(_twist_entry, jobs))
    else:
        values = [_twist_entry(j) for j in jobs]
    table = dict(zip(classes, values))
    out: dict[str, Any] = {
        "i": i,
        "rank": hdi.hdi_rank(f, i, D),
        "eigencharacters": None,
        "twistTable": [{"class": list(d), "h0": h} for d, h in sorted(table.items())],
        "splitting": None,
        "torsionDim": None,
    }
    if args.eigenchars:
        out["eigencharacters"] = [list(r) for r in hdi.compute_eigencharacters(f, i, D).representatives()]
    if hdi._is_p1(Y):
        s = hdi.splitting_type_over_p1(f, i, D)
        out["splitting"] = sorted(s.degrees, reverse=True)
        out["torsionLength"] = s.torsion
        out["torsionDim"] = 0 if s.torsion else -1
    else:
        profile = hdi.torsion_profile(f, i, D)
        out["torsionDim"] = -1 if profile.growth_degree is None else profile.growth_degree
    if args.oracle:
        out["oracle"] = hdi_oracle(f, i, D, table)
    return out


def hdi_oracle(f: ToricMorphism, i: int, D, table) -> dict:
    checks = {"rank": hdi.hdi_rank(f, i, D) == hdi.generic_rank(f, i, D)}
    if i == 0:
        ok = True
        for d, h in table.items():
            pulled = pullback_divisor(f, f.target.lift(d)).coefficients
            ok &= f.source.count_lattice_points([a + b for a, b in zip(D, pulled)]) == h
        checks["latticePoints"] = ok
    if hdi._is_p1(f.target):
        checks["leray"] = hdi.leray_check_over_p1(f, D)
    if not all(checks.values()):
        raise OracleMismatch(checks)
    return checks


class OracleMismatch(RuntimeError):
    def __init__(self, checks):
        super().__init__("oracle mismatch: " + ", ".join(k for k, v in checks.items() if not v))
        self.checks = checks


def cmd_frobenius(args) -> dict:
    X = load_variety(args)
    p = args.p
    if args.presentation:
        M = presentation_from_json(X, load_json(args.presentation))
        pushed = frobenius_push_module(X, p, M)
        box = parse_box(args.box, X.class_group_rank, default=(-2, 2))
        out = {
            "p": p,
            "summands": [],
            "matrix": pushed.to_json(),
            "genericRank": module_generic_rank(pushed),
            "hilbert": [{"class": list(d), "dim": v} for d, v in sorted(hilbert_function(pushed, box).items())],
        }
        if args.oracle:
            base = hilbert_function(M, [tuple(p * x for x in d) for d in box])
            ok = all(v == base[tuple(p * x for x in d)] for d, v in hilbert_function(pushed, box).items())
            if not ok:
                raise OracleMismatch({"hilbert": False})
            out["oracle"] = {"hilbert": True}
        return out
    D = parse_divisor(X, args.divisor, args.divisor_ray)
    summands = frobenius_summands(X, p, D)
    out = summands.to_json()
    out["matrix"] = None
    if args.oracle:
        box = parse_box(args.box, X.class_group_rank, default=(-2, 2))
        ok = True
        for d in box:
            E = X.lift(d).coefficients
            lhs = sum(X.count_lattice_points([a + b for a, b in zip(Du, E)]) for Du in summands.divisors())
            ok &= lhs == X.count_lattice_points([a + p * b for a, b in zip(D, E)])
        if not ok:
            raise OracleMismatch({"sectionCount": False})
        out["oracle"] = {"sectionCount": True}
    return out


def cmd_contract(args) -> list:
    X = load_variety(args)
    out = []
    for ray, f in zip(nef_cone_rays(X), nef_ray_contractions(X)):
        out.append({
            "nefRay": list(ray),
            "isomorphism": f.is_isomorphism,
            "matrix": [list(r) for r in f.matrix],
            "target": fan_to_json(f.target),
            "targetDim": f.target.dim,
            "targetSmooth": f.target.is_smooth,
            "targetComplete": f.target.is_complete,
        })
    return out


# ---------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    def add_common(p, defaults: bool):
        # accepted before or after the subcommand; only the top level sets defaults
        kw = {} if defaults else {"default": argparse.SUPPRESS}
        p.add_argument("--output", choices=["json", "pretty"], **({"default": "json"} if defaults else kw))
        p.add_argument("--threads", type=int, help=f"worker processes (default: ${THREADS_ENV} or all cores)",
                       **({"default": None} if defaults else kw))
        p.add_argument("--oracle", action="store_true", help="run brute-force cross-checks",
                       **({"default": False} if defaults else kw))

    parser = argparse.ArgumentParser(prog="toric-hdi", description="Higher direct images on toric varieties")
    add_common(parser, True)
    common = argparse.ArgumentParser(add_help=False)
    add_common(common, False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_variety(p):
        p.add_argument("fan", nargs="?", help="fan JSON file")
        p.add_argument("--builtin", help="e.g. projective:2, hirzebruch:1, blowup:1,5:hirzebruch:1*projective:1")

    def add_divisor(p):
        p.add_argument("--divisor", help="comma-separated ray coefficients")
        p.add_argument("--divisor-ray", action="append", metavar="U:A",
                       help="coefficient A on the ray with coordinates U, e.g. 0,0,1:-2")

    p = sub.add_parser("variety-check", parents=[common], help="smoothness, completeness, class group")
    add_variety(p)
    p.set_defaults(run=cmd_variety_check)

    p = sub.add_parser("hdi", parents=[common], help="higher direct images along a fibration")
    p.add_argument("map", nargs="?", help="morphism JSON file")
    p.add_argument("--source", help="builtin source variety")
    p.add_argument("--target", help="builtin target variety")
    p.add_argument("--matrix", help='lattice map rows, e.g. "1,0;0,1"')
    add_divisor(p)
    p.add_argument("--degree", "-i", type=int, default=0)
    p.add_argument("--twist-box", help='"lo:hi" per class coordinate (default 0:4)')
    p.add_argument("--eigenchars", action="store_true")
    p.set_defaults(run=cmd_hdi)

    p = sub.add_parser("frobenius", parents=[common], help="Frobenius pushforward of a line bundle or module")
    add_variety(p)
    p.add_argument("-p", type=int, required=True)
    add_divisor(p)
    p.add_argument("--presentation", help="presentation JSON file")
    p.add_argument("--box", help='Hilbert function box, "lo:hi" per coordinate')
    p.set_defaults(run=cmd_frobenius)

    p = sub.add_parser("contract", parents=[common], help="contractions of the extremal nef rays")
    add_variety(p)
    p.set_defaults(run=cmd_contract)
    return parser


def _emit_error(kind: str, message: str, path: str | None = None) -> None:
    err: dict[str, Any] = {"type": kind, "message": message}
    if path is not None:
        err["path"] = path
    sys.stderr.write(json.dumps({"error": err}, sort_keys=True) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.run(args)
    except InputError as exc:
        _emit_error("input", str(exc), exc.path or "/")
        return 2
    except OSError as exc:
        _emit_error("input", f"{exc.strerror}: {exc.filename}", "/")
        return 2
    except OracleMismatch as exc:
        _emit_error("oracle", str(exc))
        return 3
    except (FanError, MorphismError, hdi.HdiError, CoxError, FrobeniusError, ValueError, ArithmeticError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1
    if args.output == "pretty":
        text = json.dumps(result, indent=2, sort_keys=True)
    else:
        text = json.dumps(result, sort_keys=True, separators=(",", ":"))
    sys.stdout.write(text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
