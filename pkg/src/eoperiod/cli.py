"""Command-line entry point: `eoperiod <subcommand> ...`.

Exit status is 0 on success, 2 on usage errors (argparse) and 1 when the
computation itself rejects the input.
"""

import argparse
import json
import sys
from pathlib import Path

from . import bredon, e2_gen, groups as gr, lattice as lat, norm_diff as nd
from . import periodicity as per
from . import ss_engine as ss


class DomainError(Exception):
    pass


def pow2(n):
    """'2^k' or 'm·2^k' for a positive integer n."""
    if n == 0:
        return "0"
    k = (n & -n).bit_length() - 1
    odd = n >> k
    return f"2^{k}" if odd == 1 else f"{odd}·2^{k}"


def fmt_int(n, args):
    return pow2(n) if args.pow2 else str(n)


def fmt_factors(f, args):
    return f.pow2_str() if args.pow2 else str(f)


def parse_range(text):
    """'A..B' -> (A, B)."""
    try:
        a, b = text.split("..")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None


def _group(text):
    try:
        return gr.parse_group(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def emit(args, obj, lines):
    if args.json:
        print(json.dumps(obj, indent=1))
    else:
        for line in lines:
            print(line)


# ---------------------------------------------------------------- commands

def cmd_period(args):
    if args.group is not None:
        d = gr.descriptor_for(args.group)
    else:
        if args.g0_order is None or args.sylow is None:
            raise DomainError("give --group, or both --g0-order and --sylow")
        d = gr.FiniteSubgroupDescriptor(args.g0_order, args.sylow)
    P = per.P(args.height, d)
    emit(args, {"height": args.height, "g0_order": d.g0_order, "sylow": str(d.sylow2), "period": P},
         [fmt_int(P, args)])


def _pair(args):
    return per.HeightGroupPair(args.height, args.group)


def cmd_lattice(args):
    p = _pair(args)
    rep = per.report(p)
    M = rep.lattice.matrix()
    diag = lat.snf_diagonal(M)
    obj = {"height": p.h, "group": str(p.group), "basis": gr.basis(p.group),
           "generators": [list(v.coeffs) for v in rep.lattice.generators],
           "snf_diagonal": diag, "invariant_factors": rep.complexity.to_json(),
           "integer_period": rep.integer_period}
    lines = [f"generators of L' for h={p.h}, G={p.group}:"]
    lines += [f"  {gr.format_rep(v)}" for v in rep.lattice.generators]
    lines.append("snf diagonal: " + " ".join(fmt_int(x, args) for x in diag))
    lines.append("invariant factors: " + " ".join(fmt_int(x, args) for x in rep.complexity.torsion))
    lines.append("quotient: " + fmt_factors(rep.complexity, args))
    lines.append("integer period: " + fmt_int(rep.integer_period, args))
    emit(args, obj, lines)


def matrix_quotient(M):
    cols = len(M[0]) if M else 0
    diag = [d for d in lat.snf_diagonal(M) if d]
    return lat.InvariantFactors(cols - len(diag), tuple(diag))


def cmd_quotient(args):
    try:
        M = lat.read_matrix(args.matrix)
    except OSError as exc:
        raise DomainError(str(exc)) from None
    q = matrix_quotient(M)
    emit(args, {"matrix": M, "snf_diagonal": lat.snf_diagonal(M), "quotient": q.to_json()},
         [fmt_factors(q, args)])


def cmd_normdiff(args):
    specs = nd.theoremD_family(_pair(args))
    rows = [nd.bidegree_summary(d) for d in specs]
    lines = []
    for d, row in zip(specs, rows):
        if args.list or not args.validate:
            lines.append(str(d))
            lines.append(f"    source ({row['source_degree']}, {row['source_filtration']})"
                         f"  target ({row['target_degree']}, {row['target_filtration']})")
        if args.validate:
            lines.append(f"    valid: {row['valid']}")
    emit(args, rows, lines)
    if args.validate and not all(r["valid"] for r in rows):
        raise DomainError("a generated differential failed the bidegree check")


def cmd_oracle(args):
    V = gr.parse_rep(args.group, args.rep)
    idx = bredon.RepSphereIndex.of(V)
    col = bredon.chart_column(idx)
    obj = {"group": str(args.group), "rep": list(V.coeffs), "dim": V.dim,
           "column": [{"stem": V.dim - f, "fil": f, "orders": ["inf" if o == 0 else o for o in orders]}
                      for f, orders in sorted(col.items())]}

    def show(orders):
        if args.pow2:
            return " ⊕ ".join("Z" if o == 0 else f"Z/2^{o.bit_length() - 1}" for o in orders) or "0"
        return bredon.format_orders(orders)

    lines = [f"S^({gr.format_rep(V)}), |V| = {V.dim}"]
    lines += [f"  ({V.dim - f},{f}): {show(orders)}" for f, orders in sorted(col.items())]
    emit(args, obj, lines)


def cmd_e2(args):
    if args.level != "C4":
        raise DomainError("only the C4 chart is generated")
    chart = e2_gen.generate(args.level, args.stems, args.fmax)
    text = chart.dumps()
    if args.out:
        Path(args.out).write_text(text)
    summary = e2_gen.read_chart_json(text)
    lines = [f"{len(chart.classes)} classes on stems {args.stems[0]}..{args.stems[1]}, |f| <= {args.fmax}"]
    if args.out:
        lines.append(f"wrote {args.out}")
    else:
        for (s, f), orders in sorted(summary.items()):
            lines.append(f"  ({s},{f}): {bredon.format_orders(orders)}")
    if args.json and not args.out:
        print(text)
    else:
        emit(args, {"classes": len(chart.classes), "out": args.out}, lines)


def _load_script(path):
    if path is None:
        return ss.shipped_script()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DomainError(str(exc)) from None


def _replay(args):
    try:
        return ss.run_script(_load_script(args.script), args.window, args.fmax, args.pi)
    except ss.ReplayError as exc:
        raise DomainError(str(exc)) from None


def cmd_ss(args):
    res = _replay(args)
    if args.out:
        res.write(args.out)
    lines = [f"replayed {len(res.state.log)} differentials in {res.seconds:.1f} s"]
    lines += [f"  {msg}" for _, msg in res.checks if msg.startswith("negative")]
    if args.out:
        lines.append(f"wrote {args.out}/einf.json, pi.json, chart.svg")
    emit(args, {"differentials": [r.to_json() for r in res.state.log],
                "seconds": res.seconds, "out": args.out}, lines)


def read_pi_json(obj):
    """pi.json -> ({n: core InvariantFactors}, {n: bo InvariantFactors})."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    core, bo = {}, {}
    for k, v in obj.items():
        if k == "extensions":
            continue
        core[int(k)] = lat.InvariantFactors.from_json(v["core"])
        bo[int(k)] = lat.InvariantFactors.from_json(v["bo"])
    return core, bo


def cmd_homotopy(args):
    if args.pi_json:
        try:
            obj = json.loads(Path(args.pi_json).read_text())
        except OSError as exc:
            raise DomainError(str(exc)) from None
    else:
        obj = _replay(args).pi_json()
    core, bo = read_pi_json(obj)
    lo, hi = args.stems
    keep = [n for n in sorted(core) if lo <= n < hi]
    lines = [f"pi_{n}: {fmt_factors(core[n], args)}"
             + ("" if not bo[n].free_rank and not bo[n].torsion else f"   (bo part {fmt_factors(bo[n], args)})")
             for n in keep]
    emit(args, {str(n): obj[str(n)] for n in keep}, lines)


# ------------------------------------------------------------------ parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--pow2", action="store_true", help="print orders as powers of 2")

    ap = argparse.ArgumentParser(prog="eoperiod", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("period", parents=[common], help="integer periodicity P(h, G)")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--group", type=_group)
    p.add_argument("--g0-order", type=int)
    p.add_argument("--sylow", type=_group)
    p.set_defaults(func=cmd_period)

    for name, func, hlp in (("lattice", cmd_lattice, "generators and quotient of L'"),
                            ("normdiff", cmd_normdiff, "orientation-class differential family")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--height", type=int, required=True)
        p.add_argument("--group", type=_group, required=True)
        if name == "normdiff":
            p.add_argument("--list", action="store_true")
            p.add_argument("--validate", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("quotient", parents=[common], help="Z^n / row span of an integer matrix")
    p.add_argument("--matrix", required=True, help="whitespace text or JSON array")
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("oracle", parents=[common], help="Bredon homology column of a sphere")
    p.add_argument("--rep", required=True, help='e.g. "4+4*s+4*l"')
    p.add_argument("--group", type=_group, default=gr.C4)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("e2", parents=[common], help="E2 chart")
    p.add_argument("--level", default="C4")
    p.add_argument("--stems", type=parse_range, default=(0, 40))
    p.add_argument("--fmax", type=int, default=13)
    p.add_argument("--out")
    p.set_defaults(func=cmd_e2)

    def replay_args(q):
        q.add_argument("--script", help="deduction script (default: the shipped one)")
        q.add_argument("--window", type=parse_range, default=(-1, 50), help="positive stems tracked")
        q.add_argument("--fmax", type=int, default=40)
        q.add_argument("--pi", type=parse_range, default=(-32, 40), help="stems of the homotopy table")

    p = sub.add_parser("ss", help="spectral sequence replay")
    ssub = p.add_subparsers(dest="action", required=True)
    q = ssub.add_parser("run", parents=[common])
    replay_args(q)
    q.add_argument("--out")
    q.set_defaults(func=cmd_ss)

    p = sub.add_parser("homotopy", parents=[common], help="homotopy table from a replay")
    replay_args(p)
    p.add_argument("--pi-json", help="read a pi.json instead of replaying")
    p.add_argument("--stems", type=parse_range, default=(-32, 40), help="A..B; write --stems=-4..4 for negative A")
    p.set_defaults(func=cmd_homotopy)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (DomainError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
