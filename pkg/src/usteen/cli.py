"""Command-line interface: compute tables and run the verification catalog.

Exit codes: 0 on success (all checks passed), 1 when a verification check
fails, 2 for usage or input errors.  Reports go to stdout, diagnostics to
stderr.  Output is deterministic unless timings are requested.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import fixtures
from .fulu import FuluModule
from .harness import make_spec, poincare_coeffs, report, run_all, run_check
from .lannes import RealmCalculus, fix_presented, gv_invariants, hv, realm_suspend, rtilde
from .singer import r1
from .steenrod import admissible_basis
from .unstable import (
    TruncatedModule,
    free_unstable,
    phi,
    polynomial_module,
    suspend,
    tensor,
    truncate,
    unit_module,
)

_REALM_PATTERN = re.compile(r"^(?:S(?P<s>\d+))?HV(?P<r>\d+)$")


def _named_module(name: str, D: int) -> TruncatedModule:
    if name in ("F", "F0", "HV0"):
        return unit_module(D)
    if name in ("F1", "F2", "F3"):
        return free_unstable(int(name[1]), D)
    if name in ("HZ2", "HV1"):
        return polynomial_module(1, D)
    if name.startswith("HV") and name[2:].isdigit():
        return polynomial_module(int(name[2:]), D)
    if name == "PhiF1":
        return truncate(phi(free_unstable(1, (D + 1) // 2)), D, name="Ph(F(1))")
    if name == "SigmaF":
        return suspend(unit_module(D - 1))
    if name == "F1xF1":
        f1 = free_unstable(1, D)
        return tensor(f1, f1)
    path = Path(name)
    if path.suffix == ".json" and path.exists():
        loaded = fixtures.load(path)
        mod = loaded.underlying if isinstance(loaded, FuluModule) else loaded
        return truncate(mod, min(mod.D, D))
    raise SystemExit2(
        f"unknown module {name!r}; use F0..F3, HZ2, HV<r>, PhiF1, SigmaF, F1xF1 "
        "or a fixture file path"
    )


def _named_realm(name: str, D: int):
    m = _REALM_PATTERN.match(name)
    if not m:
        raise SystemExit2(f"realm modules must match (S<k>)?HV<r>, got {name!r}")
    X = hv(int(m.group("r")), D)
    if m.group("s"):
        X = realm_suspend(X, int(m.group("s")))
    return X


class SystemExit2(Exception):
    """A usage or input error (mapped to exit code 2)."""


def _emit(doc: dict, lines, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _dims_csv(dims) -> str:
    return ",".join(str(d) for d in dims)


def _cmd_compute(args) -> int:
    D = args.max_degree
    what = args.what
    if what == "basis":
        degrees = []
        lines = []
        for n in range(D + 1):
            monos = [m.label() for m in admissible_basis(n)]
            degrees.append({"degree": n, "count": len(monos), "monomials": monos})
            lines.append(f"{n}: {len(monos)}: {' '.join(monos)}")
        lines.append("counts: " + _dims_csv(d["count"] for d in degrees))
        _emit({"admissible_basis": degrees}, lines, args.format)
        return 0
    if what == "module":
        M = _named_module(args.module, D)
        rep = M.validate()
        dims = [M.dim(n) for n in range(min(D, M.D) + 1)]
        doc = {
            "name": M.name,
            "D": min(D, M.D),
            "dims": dims,
            "valid": rep.ok,
            "violations": rep.violations,
        }
        lines = [
            f"module {M.name} through degree {doc['D']}",
            "dims: " + _dims_csv(dims),
            "validation: " + ("ok" if rep.ok else "; ".join(rep.violations)),
        ]
        _emit(doc, lines, args.format)
        return 0
    if what == "r1":
        M = _named_module(args.module, D)
        S = r1(M)
        dims = [S.fulu.dim(n) for n in range(S.D + 1)]
        doc = {
            "name": f"R1({M.name})",
            "certified_degree": S.D,
            "dims": dims,
            "free_on_distinguished_basis": S.free_gens.ok,
        }
        lines = [
            f"R1({M.name}) through degree {S.D}",
            "dims: " + _dims_csv(dims),
            f"free on the distinguished basis: {S.free_gens.ok}",
        ]
        _emit(doc, lines, args.format)
        return 0
    if what == "rtilde":
        X = _named_realm(args.module, D)
        P = rtilde(X)
        dims = [P.realization.dim(n) for n in range(D + 1)]
        doc = {"name": f"Rtilde({X.name})", "certified_degree": D, "dims": dims}
        lines = [f"Rtilde({X.name}) through degree {D}", "dims: " + _dims_csv(dims)]
        _emit(doc, lines, args.format)
        return 0
    if what == "invariants":
        if args.rank is None:
            raise SystemExit2("compute invariants requires --rank")
        inv = gv_invariants(args.rank, D)
        dims = [inv.module.dim(n) for n in range(D + 1)]
        series = poincare_coeffs(args.rank, D)
        doc = {
            "name": f"invariants(rank {args.rank})",
            "certified_degree": D,
            "dims": dims,
            "series": series,
        }
        lines = [
            f"stabilizer invariants at rank {args.rank} through degree {D}",
            "dims:   " + _dims_csv(dims),
            "series: " + _dims_csv(series),
        ]
        _emit(doc, lines, args.format)
        return 0
    if what == "fix":
        X = _named_realm(args.module, D)
        calc = RealmCalculus(X)
        P = rtilde(X, calc)
        F = fix_presented(P)
        dims = [F.dim(n) for n in range(D + 1)]
        base = list(X.module.dims)
        doc = {
            "name": f"Fix(Rtilde({X.name}))",
            "certified_degree": D,
            "dims": dims,
            "matches_module": dims == base,
        }
        lines = [
            f"Fix(Rtilde({X.name})) through degree {D}",
            "dims: " + _dims_csv(dims),
            f"matches the module: {dims == base}",
        ]
        _emit(doc, lines, args.format)
        return 0
    raise SystemExit2(f"unknown compute target {what!r}")


def _cmd_verify(args) -> int:
    if not args.all and not args.check:
        raise SystemExit2("verify needs --check <ID> or --all")
    if args.check:
        try:
            spec = make_spec(
                args.check, D=args.max_degree, max_rank=args.max_rank, seed=args.seed
            )
        except KeyError as exc:
            raise SystemExit2(str(exc)) from exc
        results = [run_check(spec)]
    else:
        results = run_all(D=args.max_degree, max_rank=args.max_rank, seed=args.seed)
    sys.stdout.write(report(results, args.format, include_timings=args.timings))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usteen",
        description="Truncated unstable-module computations and verification checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compute", help="print dimension tables and bases")
    comp.add_argument("what", choices=["basis", "module", "r1", "rtilde", "invariants", "fix"])
    comp.add_argument("--module", default="HZ2", help="module name or fixture file")
    comp.add_argument("--max-degree", type=int, default=10)
    comp.add_argument("--rank", type=int, default=None)
    comp.add_argument("--format", choices=["text", "json"], default="text")
    comp.set_defaults(fn=_cmd_compute)

    ver = sub.add_parser("verify", help="run verification checks")
    ver.add_argument("--check", default=None, help="a single check id, e.g. T3")
    ver.add_argument("--all", action="store_true", help="run the whole catalog")
    ver.add_argument("--max-degree", type=int, default=10)
    ver.add_argument("--max-rank", type=int, default=2)
    ver.add_argument("--seed", type=int, default=2)
    ver.add_argument("--format", choices=["text", "json"], default="text")
    ver.add_argument("--timings", action="store_true",
                     help="include wall times (breaks byte-identical output)")
    ver.set_defaults(fn=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
