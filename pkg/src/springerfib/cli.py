"""Command line front end.

Every command prints one JSON document (or CSV for count tables) on stdout.
Exit status is 0 on success, 1 when a check fails (the report is still
printed) and 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from importlib import resources
from pathlib import Path

from . import bundle, diagram, flag, oracle, quiver
from .errors import NotInComponent, SpringerError
from .scalar import field_from_name

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------


def _field(args, default: str):
    name = args.field or default
    try:
        return field_from_name(name)
    except SpringerError as exc:
        raise UsageError(f"bad --field {name!r}: {exc}") from None


def _diagram(text: str):
    try:
        return diagram.parse_diagram(text)
    except SpringerError as exc:
        raise UsageError(f"cannot parse diagram {text!r}: {exc}") from None


def _marked(text: str) -> diagram.MarkedCupDiagram:
    d = _diagram(text)
    if not isinstance(d, diagram.MarkedCupDiagram):
        raise UsageError(f"{text!r} is not a type D diagram")
    return d


def _load_json(spec: str):
    """A file path, a bundled fixture name, or inline JSON."""
    if spec.lstrip().startswith(("[", "{")):
        try:
            return json.loads(spec)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad inline JSON: {exc}") from None
    path = Path(spec)
    if path.is_file():
        return json.loads(path.read_text())
    name = spec if spec.endswith(".json") else spec + ".json"
    res = resources.files("springerfib").joinpath("fixtures", name)
    if res.is_file():
        return json.loads(res.read_text())
    try:
        return json.loads(spec)
    except json.JSONDecodeError:
        raise UsageError(f"no such file or fixture: {spec!r}") from None


def _load_rep(args) -> quiver.QuiverRep:
    obj = _load_json(args.fixture)
    fld = field_from_name(args.field) if args.field else None
    try:
        return quiver.QuiverRep.from_json(obj, fld)
    except SpringerError as exc:
        raise UsageError(f"bad fixture {args.fixture!r}: {exc}") from None


_POINT = re.compile(r"\[\s*([^:\]]+?)\s*:\s*([^:\]]+?)\s*\]")


def _params(text: str, fld) -> list[tuple]:
    """``"[1:2] [0:1]"`` to a list of projective points."""
    text = text.strip()
    pts = []
    pos = 0
    for m in _POINT.finditer(text):
        gap = text[pos : m.start()].strip(" ,")
        if gap:
            raise UsageError(f"unexpected {gap!r} in parameters")
        try:
            pts.append((fld.coerce(m.group(1)), fld.coerce(m.group(2))))
        except (SpringerError, ValueError) as exc:
            raise UsageError(f"bad parameter {m.group(0)!r}: {exc}") from None
        pos = m.end()
    rest = text[pos:].strip(" ,")
    if rest:
        raise UsageError(f"unexpected {rest!r} in parameters")
    return pts


def _ambient(d) -> int:
    return 2 * d.m if isinstance(d, diagram.MarkedCupDiagram) else d.n


def _load_flag(spec: str, fld, n: int) -> flag.Flag:
    obj = _load_json(spec)
    data = obj["flag"] if isinstance(obj, dict) else obj
    try:
        return flag.Flag.from_json(fld, n, data)
    except (SpringerError, TypeError, ValueError) as exc:
        raise UsageError(f"bad flag: {exc}") from None


def _shape(d) -> tuple[int, int]:
    if isinstance(d, diagram.MarkedCupDiagram):
        return bundle.shape_of(d)
    return (d.n - d.k, d.k)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_enumerate(args):
    if args.type == "D":
        ds = diagram.enumerate_typeD(args.n, args.k)
    else:
        ds = diagram.enumerate_typeA(args.n, args.k)
    return EXIT_OK, [diagram.serialize_diagram(d) for d in ds]


def cmd_fold(args):
    a = _diagram(args.diagram)
    if not isinstance(a, diagram.CupDiagram):
        raise UsageError("fold takes a type A diagram")
    return EXIT_OK, [diagram.serialize_diagram(d) for d in diagram.fold(a)]


def cmd_unfold(args):
    d = _marked(args.diagram)
    return EXIT_OK, [diagram.serialize_diagram(a) for a in diagram.unfold(d)]


def cmd_stats(args):
    d = _diagram(args.diagram)
    s = diagram.stats(d)

    def keyed(mp):
        return {str(k): v for k, v in sorted(mp.items())}

    return EXIT_OK, {
        "diagram": diagram.serialize_diagram(d),
        "rho": keyed(s.rho),
        "c": keyed(s.c),
        "sigma": keyed(s.sigma),
        "delta": keyed(s.delta),
        "m": keyed(s.m_of),
    }


def _theta_trials() -> int:
    return int(os.environ.get("SPRINGERFIB_RETRIES", "64"))


def cmd_check_quiver(args):
    r = _load_rep(args)
    out = {
        "n": r.n,
        "k": r.k,
        "field": r.field.name,
        "admissible": quiver.is_admissible(r),
        "stable": quiver.is_admissible(r) and quiver.is_stable(r),
        "springer_point": quiver.is_springer_point(r),
    }
    ok = out["admissible"] and out["stable"]
    if ok:
        rep = quiver.check_tilde(quiver.build_tilde(r), r)
        out["tilde"] = rep.to_json()
        ok = ok and rep.ok
        fixed = quiver.is_theta_fixed(r, trials=_theta_trials(), seed=args.seed)
        out["theta"] = fixed.kind
    if args.diagram:
        d = _diagram(args.diagram)
        if isinstance(d, diagram.MarkedCupDiagram):
            member = quiver.in_lambda_marked(r, d)
        else:
            member = quiver.in_lambda_a(r, d)
        out["diagram"] = diagram.serialize_diagram(d)
        out["member"] = member
        ok = ok and member
    return (EXIT_OK if ok else EXIT_FAIL), out


def cmd_maffei(args):
    r = _load_rep(args)
    res = quiver.maffei_flag(r)
    return EXIT_OK, {
        "n": r.n,
        "k": r.k,
        "field": r.field.name,
        "flag": res.flag.to_json(),
        "raw": res.raw_json(),
        "x": res.x.to_json(),
    }


def _membership(d, fl, fld):
    lam = _shape(d)
    x = flag.standard_nilpotent(lam, fld)
    out = {"x_stable": flag.is_x_stable(fl, x)}
    if isinstance(d, diagram.MarkedCupDiagram):
        gram = flag.gram_matrix(lam, fld)
        out["isotropic"] = flag.is_isotropic_flag(fl, gram)
        rel = flag.marked_relations(fl, x, d, gram)
        out["relations"] = rel.features
        out["member"] = out["x_stable"] and out["isotropic"] and rel.holds
    else:
        out["member"] = out["x_stable"] and flag.in_K_a(fl, x, d)
    return out


def cmd_check_flag(args):
    d = _diagram(args.diagram)
    fld = _field(args, "Q")
    fl = _load_flag(args.flag, fld, _ambient(d))
    out = {"diagram": diagram.serialize_diagram(d), "field": fld.name}
    out.update(_membership(d, fl, fld))
    return (EXIT_OK if out["member"] else EXIT_FAIL), out


def cmd_build_flag(args):
    d = _marked(args.diagram)
    fld = _field(args, "Q")
    pts = _params(args.params or "", fld)
    fl = bundle.build_flag(d, pts, fld)
    return EXIT_OK, {
        "diagram": diagram.serialize_diagram(d),
        "field": fld.name,
        "params": [[fld.to_json(a), fld.to_json(b)] for a, b in pts],
        "flag": fl.to_json(),
    }


def cmd_verify_bundle(args):
    d = _marked(args.diagram)
    fld = _field(args, "Q")
    if args.flag:
        fl = _load_flag(args.flag, fld, _ambient(d))
    elif args.params is not None:
        fl = bundle.build_flag(d, _params(args.params, fld), fld)
    else:
        raise UsageError("verify-bundle needs --flag or --params")
    try:
        rep = bundle.verify_bundle_point(d, fl)
    except NotInComponent as exc:
        return EXIT_FAIL, {"diagram": diagram.serialize_diagram(d), "ok": False, "error": str(exc)}
    out = {"diagram": diagram.serialize_diagram(d), "field": fld.name}
    out.update(rep.to_json(fld))
    return (EXIT_OK if rep.ok else EXIT_FAIL), out


def cmd_decompose(args):
    lam = (args.n - args.k, args.k)
    task = oracle.EnumerationTask(lam, args.q, args.type == "D", args.cap)
    rep = oracle.decompose(task, workers=args.workers)
    ok = rep.complete and not rep.containments()
    if args.csv:
        return (EXIT_OK if ok else EXIT_FAIL), rep.to_csv()
    return (EXIT_OK if ok else EXIT_FAIL), rep.to_json()


def cmd_count(args):
    d = _diagram(args.diagram)
    got = oracle.count_component(d, args.q)
    expected = (args.q + 1) ** len(d.cups)
    out = {"diagram": diagram.serialize_diagram(d), "q": args.q, "count": got, "expected": expected}
    if args.csv:
        text = f"diagram,q,count,expected\n\"{out['diagram']}\",{args.q},{got},{expected}\n"
        return (EXIT_OK if got == expected else EXIT_FAIL), text
    return (EXIT_OK if got == expected else EXIT_FAIL), out


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return v


def _prime(text: str) -> int:
    from .scalar import is_prime

    v = _positive(text)
    if not is_prime(v):
        raise argparse.ArgumentTypeError(f"q must be prime, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="springerfib", description="Two-row Springer fibre computations.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--field", help="Q, Qi, Fp:<p> or Fp2:<p>")
        sp.add_argument("--seed", type=int, default=0)
        return sp

    for name, func in (("enumerate", cmd_enumerate),):
        sp = add(name, func, "list the cup diagrams of a shape")
        sp.add_argument("--type", choices=("A", "D"), required=True)
        sp.add_argument("--n", type=_positive, required=True)
        sp.add_argument("--k", type=_positive, required=True)

    add("fold", cmd_fold, "fold a type A diagram").add_argument("--diagram", required=True)
    add("unfold", cmd_unfold, "unfold a type D diagram").add_argument("--diagram", required=True)
    add("stats", cmd_stats, "vertex statistics of a diagram").add_argument("--diagram", required=True)

    sp = add("check-quiver", cmd_check_quiver, "admissibility, stability and the lifted checks")
    sp.add_argument("--fixture", required=True)
    sp.add_argument("--diagram")

    add("maffei", cmd_maffei, "flag of a quiver representation").add_argument("--fixture", required=True)

    sp = add("check-flag", cmd_check_flag, "component membership of a flag")
    sp.add_argument("--diagram", required=True)
    sp.add_argument("--flag", required=True, help="file, fixture name or inline JSON")

    sp = add("build-flag", cmd_build_flag, "flag from one projective point per cup")
    sp.add_argument("--diagram", required=True)
    sp.add_argument("--params", default="", help='e.g. "[1:0] [2:3]"')

    sp = add("verify-bundle", cmd_verify_bundle, "round-trip a flag through the bundle maps")
    sp.add_argument("--diagram", required=True)
    sp.add_argument("--flag")
    sp.add_argument("--params")

    sp = add("decompose", cmd_decompose, "exhaustive decomposition over F_q")
    sp.add_argument("--type", choices=("A", "D"), required=True)
    sp.add_argument("--n", type=_positive, required=True)
    sp.add_argument("--k", type=_positive, required=True)
    sp.add_argument("--q", type=_prime, required=True)
    sp.add_argument("--cap", type=_positive, default=oracle.DEFAULT_CAP)
    sp.add_argument("--workers", type=_positive, default=1)
    sp.add_argument("--csv", action="store_true", help="per-component counts as CSV")

    sp = add("count", cmd_count, "points of one component over F_q")
    sp.add_argument("--diagram", required=True)
    sp.add_argument("--q", type=_prime, required=True)
    sp.add_argument("--csv", action="store_true")
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        code, report = args.func(args)
    except UsageError as exc:
        print(f"springerfib: error: {exc}", file=stderr)
        return EXIT_USAGE
    except SpringerError as exc:
        print(f"springerfib: error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_USAGE
    if isinstance(report, str):
        stdout.write(report)
    else:
        stdout.write(json.dumps(report, indent=2, sort_keys=False) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
