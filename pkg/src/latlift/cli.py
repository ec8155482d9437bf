"""Command line entry point: ``latlift <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 search truncated, 4 a reproduced
claim did not hold.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .certificate import CertificateFailure, section7_certificate
from .condensate import Condensate, check_theta_ideal, tau_map
from .congruence import con_lattice, is_boolean_lattice, is_simple
from .diagram import LiftBounds, Lifting, bounded_lift_search, verify_lifting
from .io import Fixtures, diagram_record, digest, dumps
from .lattice import ResourceExhausted, ValidationError, all_sublattices, hasse_text, length, maximal_sublattices
from .poset import (
    CapacityExhausted,
    FinitePoset,
    PosetError,
    build_tree_covering,
    check_compatibility,
    extreme_ideals,
    finite_T_covering,
    monotone_hull,
    sigma_select,
)
from .reproduce import CONCLUSION, reproduce

OK, INVALID, TRUNCATED, MISMATCH = 0, 2, 3, 4


class Run:
    """Collects the result object and writes it (plus a manifest) at the end."""

    def __init__(self, args, fx):
        self.args = args
        self.fx = fx
        self.start = time.perf_counter()
        self.bounds = {}

    def finish(self, result, text):
        args = self.args
        if args.json:
            sys.stdout.write(dumps(result))
        else:
            print(text)
        if args.out:
            Path(args.out).write_text(dumps(result), encoding="utf-8")
        manifest_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
        if manifest_path:
            manifest = {
                "command": args.command,
                "fixtures": dict(sorted(self.fx.hashes.items())),
                "bounds": self.bounds,
                "threads": args.threads,
                "wall_time_s": round(time.perf_counter() - self.start, 3),
                "result_digest": digest(result),
            }
            Path(manifest_path).write_text(dumps(manifest), encoding="utf-8")


def _con_summary(L):
    C = con_lattice(L)
    k = is_boolean_lattice(C.as_semilattice())
    if len(C) == 2:
        shape = "simple"
    elif k is not None:
        shape = f"≅ 2^{k}"
    else:
        shape = "not Boolean"
    return C, k, shape


def cmd_con(args, run):
    L = run.fx.lattice(args.lattice)
    C, k, shape = _con_summary(L)
    blocks = [c.to_record() for c in C]
    S = C.as_semilattice()
    result = {"lattice": L.name, "size": L.n, "congruences": len(C), "boolean_rank": k,
              "blocks": dict(zip(S.ids, blocks)), "hasse": hasse_text(S)}
    lines = [f"{L.name}: {len(C)} congruences ({shape})" if shape == "simple" else f"{L.name}: {len(C)} congruences {shape}"]
    for cid, b in zip(S.ids, blocks):
        lines.append(f"  {cid}: " + " ".join("{" + ",".join(x) + "}" for x in b))
    lines.append("Hasse diagram of Con:")
    lines.append(hasse_text(S))
    run.finish(result, "\n".join(lines))
    return OK


def cmd_sublattices(args, run):
    L = run.fx.lattice(args.lattice)
    run.bounds = {"cap": args.cap, "min_size": args.min_size, "max_size": args.max_size}
    if args.maximal:
        subs = maximal_sublattices(L, cap=args.cap)
    else:
        subs = all_sublattices(L, min_size=args.min_size, max_size=args.max_size, cap=args.cap)
    rows = []
    for S in subs:
        C, k, shape = _con_summary(S)
        rows.append({"removed": sorted(set(L.ids) - set(S.ids)), "size": S.n, "length": length(S),
                     "congruences": len(C), "boolean_rank": k})
    result = {"lattice": L.name, "maximal_only": args.maximal, "count": len(rows), "sublattices": rows}
    lines = [f"{L.name}: {len(rows)} {'maximal ' if args.maximal else ''}sublattices"]
    if args.maximal or len(rows) <= 50:
        for r in rows:
            lines.append(f"  {L.name}-{{{','.join(r['removed'])}}}  size {r['size']}  length {r['length']}  |Con| {r['congruences']}")
    run.finish(result, "\n".join(lines))
    return OK


def cmd_si(args, run):
    V = run.fx.variety(args.variety)
    members = V.si_members()
    rows = []
    for L in members:
        if args.simple and not is_simple(L):
            continue
        if args.length is not None and length(L) != args.length:
            continue
        rows.append({"size": L.n, "length": length(L), "simple": is_simple(L), "lattice": L.to_record()})
    fss, witness = V.is_finitely_semisimple()
    result = {"variety": V.name, "generators": [g.name for g in V.generators], "members": rows,
              "finitely_semisimple": fss}
    lines = [f"{V!r}: {len(members)} subdirectly irreducible members up to isomorphism"]
    for r in rows:
        lines.append(f"  size {r['size']:3d}  length {r['length']}  {'simple' if r['simple'] else 'SI, not simple'}")
    lines.append(f"finitely semisimple: {'yes' if fss else f'no (an SI member with {witness.n} elements is not simple)'}")
    run.finish(result, "\n".join(lines))
    return OK


def cmd_member(args, run):
    V = run.fx.variety(args.variety)
    L = run.fx.lattice(args.lattice)
    inside = V.contains(L)
    result = {"variety": V.name, "lattice": L.name, "member": inside}
    run.finish(result, f"{L.name} {'is' if inside else 'is not'} in {V!r}")
    return OK


def cmd_lift(args, run):
    D = run.fx.diagram(args.diagram)
    V = run.fx.variety(args.variety)
    if args.mode == "section7":
        try:
            cert = section7_certificate(V, D)
        except CertificateFailure as exc:
            result = {"mode": "section7", "status": "certificate failed", "step": exc.step, "error": str(exc),
                      "trace": exc.trace}
            run.finish(result, f"certificate failed at step {exc.step}: {exc}")
            return MISMATCH
        result = {"mode": "section7", "status": "no lifting", "certificate": cert.to_record()}
        lines = [f"{D.name} has no lifting in {V!r}:"]
        lines += [f"  case B3={c['B3']}: refuted ({c['reason']})" for c in cert.cases]
        run.finish(result, "\n".join(lines))
        return OK
    if args.mode == "verify":
        A = run.fx.diagram(args.lifting)
        xi = verify_lifting(A, D)
        result = {"mode": "verify", "lifting": A.name, "natural_iso": xi.as_record() if xi else None}
        run.finish(result, f"{A.name} {'lifts' if xi else 'does not lift'} {D.name}")
        return OK
    bounds = LiftBounds(max_size=args.max_size, max_length=args.max_length, subdirect=args.subdirect,
                        max_product=args.max_product, cap=args.cap, max_cases=args.max_cases)
    run.bounds = bounds.as_dict()
    try:
        r = bounded_lift_search(D, V, bounds)
    except ResourceExhausted as exc:
        result = {"mode": "search", "status": "truncated", "bounds": bounds.as_dict(), "error": str(exc)}
        run.finish(result, f"search truncated: {exc}")
        return TRUNCATED
    if isinstance(r, Lifting):
        result = {"mode": "search", "status": "lifting found", "lifting": diagram_record(r.diagram),
                  "natural_iso": r.xi.as_record()}
        sizes = ", ".join(f"{i}: {L.n} elements" for i, L in sorted(r.diagram.nodes.items()))
        run.finish(result, f"lifting of {D.name} found in {V!r} ({sizes})")
        return OK
    cert = r.certificate
    result = {"mode": "search", "status": "none within bounds", "certificate": cert.to_record()}
    note = "" if cert.pools_complete else " (candidate pools incomplete: not a proof of non-existence)"
    run.finish(result, f"no lifting of {D.name} within bounds{note}")
    return OK if cert.pools_complete else TRUNCATED


def cmd_condensate(args, run):
    D = run.fx.diagram(args.diagram)
    nc = finite_T_covering(args.k)
    if D.index != nc.I:
        raise ValidationError("the finite T_k covering is normed onto the 2-element chain; the diagram must be indexed by it")
    cond = Condensate(D, nc)
    result = {"diagram": D.name, "covering": f"T_{args.k}", "size": len(cond),
              "extreme_ideals": [e.generator for e in extreme_ideals(nc)]}
    lines = [f"Cond({D.name}, T_{args.k}): {len(cond)} elements"]
    if D.kind == "lattice":
        rep = tau_map(D, nc, strict=False)
        result["quasi_lifting"] = rep.to_record()
        for row in rep.ideals:
            lines.append(f"  ideal ↓{row['ideal']}: iso {row['iso']}, α = ker p {row['alpha_is_kernel_of_projection']}")
        status = OK if rep.ok else MISMATCH
    else:
        if len(cond) > args.max_elements:
            raise ResourceExhausted(f"condensate has {len(cond)} > {args.max_elements} elements")
        checks = {e.generator: check_theta_ideal(cond, e) for e in extreme_ideals(nc)}
        result["theta_ideals"] = checks
        lines += [f"  θ at ↓{g}: {'ok' if ok else 'FAILED'}" for g, ok in checks.items()]
        status = OK if all(checks.values()) else MISMATCH
    run.finish(result, "\n".join(lines))
    return status


def cmd_sigma(args, run):
    if args.tree:
        _, rec = run.fx.record(args.tree)
        T = FinitePoset.from_record(rec)
    else:
        T = FinitePoset.chain(args.chain)
    cap = args.capacity
    nc = build_tree_covering(T, cap)
    F = {}
    if args.family:
        _, F = run.fx.record(args.family)
        # close upward so the family is order-preserving
        F = monotone_hull(nc, {k: set(v) for k, v in F.items()})
    try:
        sigma = sigma_select(nc, F)
    except CapacityExhausted as exc:
        result = {"status": "capacity exhausted", "node": exc.node, "capacity": exc.capacity,
                  "excluded": sorted(exc.excluded)}
        run.finish(result, f"capacity exhausted at node {exc.node}: values {sorted(exc.excluded)} all excluded")
        return OK
    table = {i: s.generator for i, s in sorted(sigma.items())}
    result = {"status": "ok", "sigma": table, "compatible": check_compatibility(nc, F, sigma),
              "covering_size": nc.U.n}
    lines = [f"σ on {T.n} nodes (covering with {nc.U.n} elements):"]
    lines += [f"  σ({i}) = ↓{g}" for i, g in table.items()]
    run.finish(result, "\n".join(lines))
    return OK


def cmd_reproduce(args, run):
    steps, fx = reproduce(run.fx)
    lines = [s.line() + f"  ({s.seconds:.2f}s)" for s in steps]
    if not any(s.invalid for s in steps):
        lines.append("[INFO] 7. property suites run under pytest (tests/test_acceptance.py::test_criterion_7_property_suites)")
    ok = all(s.ok for s in steps)
    invalid = any(s.invalid for s in steps)
    if invalid:
        lines.append("stopped: invalid fixture")
    elif ok:
        lines.append(CONCLUSION)
    else:
        lines.append("claims not reproduced: " + ", ".join(str(s.number) for s in steps if not s.ok))
    result = {"steps": [{"number": s.number, "title": s.title, "ok": s.ok, "invalid": s.invalid,
                         "details": s.details} for s in steps],
              "conclusion": CONCLUSION if ok else None}
    run.finish(result, "\n".join(lines))
    if invalid:
        return INVALID
    return OK if ok else MISMATCH


def build_parser():
    p = argparse.ArgumentParser(prog="latlift", description="Congruence lattices, liftings and certificates for finite lattices.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fixtures", help="directory searched before the bundled fixtures")
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; results never depend on it")
    common.add_argument("--json", action="store_true", help="print the result as JSON")
    common.add_argument("--out", help="write the JSON result here")
    common.add_argument("--manifest", help="write the run manifest here (default: OUT.manifest.json)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("con", parents=[common], help="congruence lattice of a lattice")
    s.add_argument("lattice")
    s.set_defaults(fn=cmd_con)

    s = sub.add_parser("sublattices", parents=[common], help="enumerate sublattices")
    s.add_argument("lattice")
    s.add_argument("--maximal", action="store_true")
    s.add_argument("--min-size", type=int, default=1)
    s.add_argument("--max-size", type=int)
    s.add_argument("--cap", type=int, default=10 ** 6)
    s.set_defaults(fn=cmd_sublattices)

    s = sub.add_parser("si", parents=[common], help="subdirectly irreducible members of a variety")
    s.add_argument("variety")
    s.add_argument("--simple", action="store_true")
    s.add_argument("--length", type=int)
    s.set_defaults(fn=cmd_si)

    s = sub.add_parser("member", parents=[common], help="membership of a lattice in a variety")
    s.add_argument("variety")
    s.add_argument("lattice")
    s.set_defaults(fn=cmd_member)

    s = sub.add_parser("lift", parents=[common], help="search or refute liftings of a diagram")
    s.add_argument("diagram")
    s.add_argument("variety")
    s.add_argument("--mode", choices=["search", "section7", "verify"], default="search")
    s.add_argument("--lifting", help="lattice diagram to check (mode verify)")
    s.add_argument("--max-size", type=int)
    s.add_argument("--max-length", type=int)
    s.add_argument("--subdirect", action="store_true", help="also search subdirect products for node candidates")
    s.add_argument("--max-product", type=int, default=512)
    s.add_argument("--cap", type=int, default=20000)
    s.add_argument("--max-cases", type=int, default=10 ** 6)
    s.set_defaults(fn=cmd_lift)

    s = sub.add_parser("condensate", parents=[common], help="condensate over the finite T_k covering")
    s.add_argument("diagram")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--max-elements", type=int, default=5000)
    s.set_defaults(fn=cmd_condensate)

    s = sub.add_parser("sigma-select", parents=[common], help="σ-selection on a tree covering")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--tree", help="poset fixture of a finite tree")
    g.add_argument("--chain", type=int, default=2)
    s.add_argument("--capacity", type=int, default=3)
    s.add_argument("--family", help="JSON map: extreme-ideal generator -> covering elements it excludes (closed upward)")
    s.set_defaults(fn=cmd_sigma)

    s = sub.add_parser("reproduce-paper", parents=[common], help="replay every finite claim and print the conclusion")
    s.set_defaults(fn=cmd_reproduce)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    fx = Fixtures(args.fixtures)
    run = Run(args, fx)
    try:
        return args.fn(args, run)
    except (ValidationError, PosetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID
    except ResourceExhausted as exc:
        print(f"truncated: {exc}", file=sys.stderr)
        return TRUNCATED


if __name__ == "__main__":
    sys.exit(main())
