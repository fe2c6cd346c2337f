"""Command-line driver: ``btb branch|verify|graph|info``.

Exit codes: 0 success or verified, 1 refuted, 2 inconclusive or input error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import oracle
from .branch import admissible_check, check_precision, compare, compute, contains_ball, required_precision, seed
from .bttree import ORIGIN, Mat2, Vertex, ball_window, distance
from .divalg import DivisionAlgebra, SubalgebraSpec, ramification_data
from .errors import BTBError, HypothesisViolation, InvalidGraph, PrecisionExhausted, SeedNotFound
from .graphkit import (
    Graph,
    attach,
    build_full_rose,
    build_restricted_rose,
    build_rose,
    figure_rose,
    path_graph,
    subdivide,
)
from .orders import MaxOrder, d_tower_gens, scalar_generators
from .residual import ResidualRing, brute_force_centralizer, centralizer_of_gens

OK, REFUTED, INCONCLUSIVE = 0, 1, 2
STATUS = {OK: "verified", REFUTED: "refuted", INCONCLUSIVE: "inconclusive"}


class UsageError(BTBError):
    """Bad scenario or command-line input."""


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def subalgebra_from(alg: DivisionAlgebra, kind: str, f: int = 1, e: int = 1) -> SubalgebraSpec:
    kind = kind.lower()
    if kind in ("full", "b", "fullalgebra"):
        return SubalgebraSpec.full_algebra(alg)
    if kind in ("unramified", "f"):
        return SubalgebraSpec.unramified_field(alg, f if f > 1 else alg.n)
    if kind in ("ramified", "pi", "k[pi]"):
        return SubalgebraSpec.ramified_by_power(alg, e if e > 1 else alg.n)
    if kind == "mixed":
        return SubalgebraSpec.mixed(alg, f, e)
    if kind in ("trivial", "k"):
        return SubalgebraSpec.trivial(alg)
    raise UsageError(f"unknown subalgebra kind {kind!r}")


def element_from_spec(alg: DivisionAlgebra, spec):
    """int, {"w": [...], "pi": k}, {"lo", "N", "digits"}, or a list of these (summed)."""
    if isinstance(spec, bool):
        raise UsageError("booleans are not algebra elements")
    if isinstance(spec, int):
        return alg.scalar(spec)
    if isinstance(spec, list):
        acc = alg.zero()
        for part in spec:
            acc = acc + element_from_spec(alg, part)
        return acc
    if isinstance(spec, dict):
        if "digits" in spec:
            return alg.element_from_json(spec)
        w = list(spec.get("w", [1]))
        w += [0] * (alg.n - len(w))
        return alg.from_w(tuple(w[:alg.n]), int(spec.get("pi", 0)))
    raise UsageError(f"cannot read an element from {spec!r}")


def generators_from_spec(alg: DivisionAlgebra, data) -> list[Mat2]:
    if isinstance(data, dict):
        data = data.get("generators", [])
    gens = []
    for m in data:
        if len(m) != 4:
            raise UsageError("a generator is a list of four entries [a, b, c, d]")
        gens.append(Mat2(*(element_from_spec(alg, x) for x in m)))
    return gens


@dataclass
class Scenario:
    name: str
    alg: DivisionAlgebra
    gens: list
    label: str
    R: int
    hint: Vertex | None = None
    t_max: int = 0
    subalgebra: SubalgebraSpec | None = None
    expect: dict = field(default_factory=dict)
    out_dot: str | None = None
    out_json: str | None = None


def load_scenario(path: str | None, args) -> Scenario:
    raw = {}
    base = Path(".")
    if path:
        base = Path(path).parent
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UsageError(f"cannot read scenario {path}: {exc}") from exc
    a = raw.get("algebra", {})
    p = args.p if args.p is not None else a.get("p", 2)
    n = args.n if args.n is not None else a.get("n", 2)
    M = args.precision if args.precision is not None else a.get("M", 16)
    alg = DivisionAlgebra.standard(p, n, M)
    o = raw.get("order", {})
    win = raw.get("window", {})
    R = args.radius if getattr(args, "radius", None) is not None else win.get("radius", 3)
    hint = Vertex.from_json(win["seed"]) if "seed" in win else None
    t_max, L = 0, None
    gens_file = getattr(args, "gens", None) or o.get("generators_file")
    if gens_file:
        p_ = Path(gens_file)
        if not p_.is_absolute() and not p_.exists():
            p_ = base / p_
        try:
            data = json.loads(p_.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read generators from {gens_file}: {exc}") from exc
        gens, label = generators_from_spec(alg, data), f"gens:{Path(gens_file).name}"
    elif "generators" in o:
        gens, label = generators_from_spec(alg, o["generators"]), "gens"
    elif "subalgebra" in o:
        L = subalgebra_from(alg, o["subalgebra"], o.get("f", 1), o.get("e", 1))
        gens, label = [Mat2.scalar(x) for x in L.generators], f"O_L, L = {L.kind}"
    elif "dtower" in o:
        t_max = int(o["dtower"])
        gens, label = d_tower_gens(alg, MaxOrder(alg, ORIGIN), t_max), f"D^[{t_max}]"
    elif "thm11_case" in o:
        gens, label = oracle.thm11_generators(alg, int(o["thm11_case"])), f"thm11 case {o['thm11_case']}"
    else:
        gens, label = scalar_generators(alg), "O_B"
    sc = Scenario(raw.get("name", Path(path).stem if path else "adhoc"), alg, gens, label, R, hint, t_max, L,
                  dict(raw.get("expect", {})), raw.get("output", {}).get("dot"), raw.get("output", {}).get("json"))
    check_precision(alg, R, hint or ORIGIN, t_max)
    return sc


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)


def _emit(report: dict, args) -> None:
    text = dumps(report)
    if getattr(args, "out_json", None):
        _write(args.out_json, text)
    sys.stdout.write(text)


def _vertices_json(vs) -> list:
    return [v.to_json() for v in sorted(vs)]


# ---------------------------------------------------------------------------
# branch
# ---------------------------------------------------------------------------

def prediction_for(sc: Scenario) -> oracle.Prediction | None:
    tag = sc.expect.get("prediction")
    if not tag:
        return None
    if tag == "Thm1.4":
        if sc.subalgebra is None:
            raise UsageError("Thm1.4 prediction needs [order] subalgebra")
        return oracle.predict_tha(sc.subalgebra, sc.R)
    if tag.startswith("Thm1.1case"):
        params = {k: v for k, v in sc.expect.items() if k != "prediction"}
        params.setdefault("n", sc.alg.n)
        params.setdefault("R", sc.R)
        return oracle.predict_tho(int(tag[-1]), params)
    if tag.startswith("Prop2.1type"):
        params = {k: v for k, v in sc.expect.items() if k != "prediction"}
        params.setdefault("q", sc.alg.p)
        return oracle.predict_p21(int(tag[-1]), params, sc.R)
    raise UsageError(f"no prediction builder for {tag!r}")


def cmd_branch(args) -> int:
    sc = load_scenario(args.scenario, args)
    start = seed(sc.alg, sc.gens, sc.hint)
    win = compute(sc.alg, sc.gens, start, sc.R, parallel=args.parallel, t_max=sc.t_max)
    report = json.loads(win.to_json())
    report["scenario"] = sc.name
    report["order"] = sc.label
    code = OK
    pred = prediction_for(sc)
    if pred is not None:
        match = compare(win, pred.graph, pred.root)
        report["prediction"] = {"source": pred.source, "matches": match}
        code = OK if match else REFUTED
    dot = win.to_dot(name=_dot_name(sc.name))
    _write(args.out_dot or sc.out_dot, dot)
    if args.out_json or sc.out_json:
        _write(args.out_json or sc.out_json, dumps(report))
    sys.stdout.write(dumps(report))
    return code


def _dot_name(s: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in s) or "G"


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _alg(args, p=2, n=2, M=16) -> DivisionAlgebra:
    return DivisionAlgebra.standard(args.p or p, args.n or n, args.precision or M)


def verify_lemma41(args) -> tuple[int, dict]:
    alg = _alg(args)
    t = args.t if args.t is not None else 2
    R = args.radius if args.radius is not None else t + 2
    win = compute(alg, d_tower_gens(alg, MaxOrder(alg, ORIGIN), t), ORIGIN, R, parallel=args.parallel, t_max=t)
    ball = set(ball_window(alg, ORIGIN, t))
    got = set(win.verts)
    ok = got == ball
    return (OK if ok else REFUTED), {
        "t": t, "radius": R, "branch_size": len(got), "ball_size": len(ball),
        "report": f"branch = {len(got)}-vertex ball" if ok else "branch differs from the ball",
        "extra": _vertices_json(got - ball), "missing": _vertices_json(ball - got),
    }


def verify_thm11(args) -> tuple[int, dict]:
    alg = _alg(args)
    R = args.radius if args.radius is not None else 4
    cases = [args.case] if args.case else [1, 2, 3]
    out, code = {}, OK
    for c in cases:
        gens = oracle.thm11_generators(alg, c)
        start = seed(alg, gens)
        win = compute(alg, gens, start, R, parallel=args.parallel)
        if c == 1:
            pred = oracle.predict_tho(1, {"e": 1})
        elif c == 2:
            # the origin is an end of the path: (0, 0) - (1, 0) - (2, 0)
            pred = oracle.predict_tho(2, {"n": alg.n, "e": 2, "has_intermediate": True, "root_index": 0})
        else:
            pred = oracle.predict_tho(3, {"R": R})
        match = compare(win, pred.graph, pred.root)
        out[f"case{c}"] = {"seed": start.to_json(), "size": len(win), "counts": win.count(), "matches": match}
        if not match:
            code = REFUTED
    return code, out


def verify_thm12(args) -> tuple[int, dict]:
    alg = _alg(args)
    R = args.radius if args.radius is not None else 4
    win = compute(alg, scalar_generators(alg), ORIGIN, R, parallel=args.parallel)
    ball_center = contains_ball(win, 2)
    scan = oracle.scan_triples(alg, 2, parallel=args.parallel)
    first = sorted(scan.witnesses)[0] if scan.witnesses else None
    ok = ball_center is None and not scan.failures
    return (OK if ok else REFUTED), {
        "branch_window_size": len(win),
        "radius2_ball_inside_branch": None if ball_center is None else ball_center.to_json(),
        "triples": scan.total,
        "failures": [[_vertices_json(tr), why] for tr, why in scan.failures],
        "sample_witness": None if first is None else {"triple": [v.to_json() for v in first],
                                                      "row": scan.witnesses[first]},
    }


def verify_thm14(args) -> tuple[int, dict]:
    alg = _alg(args)
    R = args.radius if args.radius is not None else 4
    kinds = [args.subalgebra] if args.subalgebra else ["full", "unramified", "ramified"]
    out, code = {}, OK
    for k in kinds:
        L = subalgebra_from(alg, k)
        gens = [Mat2.scalar(x) for x in L.generators]
        win = compute(alg, gens, ORIGIN, R, parallel=args.parallel)
        pred = oracle.predict_tha(L, R)
        match = compare(win, pred.graph, pred.root)
        out[L.kind] = {"size": len(win), "predicted_size": len(pred.graph.truncate(pred.root, R).V),
                       "counts": win.count(), "matches": match}
        if not match:
            code = REFUTED
    return code, out


def verify_lemma42(args) -> tuple[int, dict]:
    alg = _alg(args)
    R = args.radius if args.radius is not None else 6
    count = args.count or 100
    rng = random.Random(args.seed)
    ball = ball_window(alg, ORIGIN, R)
    passed, unknown, bad = 0, 0, []
    for _ in range(count):
        tri = rng.sample(ball, 3)
        r = oracle.conjugate_order_check(alg, *tri)
        if r is True:
            passed += 1
        elif r is None:
            unknown += 1
        else:
            bad.append(_vertices_json(tri))
    code = REFUTED if bad else (INCONCLUSIVE if unknown else OK)
    return code, {"trials": count, "passed": passed, "undecided": unknown, "failures": bad, "seed": args.seed}


def verify_fig7e(args) -> tuple[int, dict]:
    alg = _alg(args)
    R = args.radius if args.radius is not None else 3
    S, forced = oracle.figure7e_set(alg)
    res = admissible_check(alg, S, R, center=ORIGIN, parallel=args.parallel)
    ok = res.status == "StrictlyLarger"
    return (OK if ok else REFUTED), {
        "S": _vertices_json(S), "status": res.status,
        "witness": None if res.witness is None else res.witness.to_json(),
        "expected_witness": forced.to_json(),
    }


def verify_prop21(args) -> tuple[int, dict]:
    alg = DivisionAlgebra.standard(args.p or 2, 1, args.precision or 24)
    R = args.radius if args.radius is not None else 4
    zero, one = alg.zero(), alg.one()
    runs = {
        "nilpotent": ([Mat2(zero, one, zero, zero)], oracle.predict_p21(2, {"q": alg.p}, R)),
        "zero": ([Mat2(zero, zero, zero, zero)], oracle.predict_p21(3, {"q": alg.p}, R)),
    }
    for r in range(3):
        runs[f"thick{r}"] = ([Mat2.diag(alg.scalar(alg.p ** r), zero)], oracle.predict_p21(1, {"r": r, "q": alg.p}, R))
    out, code = {}, OK
    for name, (gens, pred) in runs.items():
        win = compute(alg, gens, ORIGIN, R, parallel=args.parallel)
        match = compare(win, pred.graph, pred.root)
        out[name] = {"size": len(win), "matches": match}
        if not match:
            code = REFUTED
    return code, out


def verify_residual(args) -> tuple[int, dict]:
    limit = 1 << 16
    cases = []
    for n in (1, 2, 3, 4):
        alg = DivisionAlgebra.standard(2, n, 16)
        specs = [SubalgebraSpec.trivial(alg), SubalgebraSpec.full_algebra(alg)]
        for f in range(2, n + 1):
            if n % f == 0:
                specs.append(SubalgebraSpec.unramified_field(alg, f))
        for e in range(2, n + 1):
            if n % e == 0:
                specs.append(SubalgebraSpec.ramified_by_power(alg, e))
        if n == 4:
            specs.append(SubalgebraSpec.mixed(alg, 2, 2))
        for L in specs:
            r = 1
            while r <= alg.cap and ResidualRing(alg, r).size <= limit:
                table = centralizer_of_gens(alg, L.generators, r)
                brute = brute_force_centralizer(alg, L.generators, r, limit)
                cases.append({"n": n, "L": L.kind, "r": r, "count": table.count,
                              "agree": table.element_set == brute})
                r += 1
    lifts, roses = {}, {}
    for n, kinds in ((2, ["full", "unramified", "ramified"]), (4, ["mixed"])):
        alg = DivisionAlgebra.standard(2, n, 12)
        for k in kinds:
            L = subalgebra_from(alg, k, 2, 2) if k == "mixed" else subalgebra_from(alg, k)
            lifts[f"n{n}:{L.kind}"] = oracle.lemma51_lifts(L)
            st = oracle.full_rose_structure(L)
            roses[f"n{n}:{L.kind}"] = {"counts": list(st.counts), "node_levels": list(st.node_levels),
                                       "expected": list(st.expected_node_levels), "ok": st.ok}
    ok = all(c["agree"] for c in cases) and all(r["ok"] for r in roses.values())
    ok &= all(v == 2 ** int(k.split(":")[0][1:]) for k, v in lifts.items())
    return (OK if ok else REFUTED), {"tables": cases, "lifts": lifts, "full_roses": roses}


VERIFIERS = {
    "lemma41": verify_lemma41, "thm11": verify_thm11, "thm12": verify_thm12, "thm14": verify_thm14,
    "lemma42": verify_lemma42, "fig7e": verify_fig7e, "prop21": verify_prop21, "residual": verify_residual,
}


def cmd_verify(args) -> int:
    if args.scenario:
        raw = tomllib.loads(Path(args.scenario).read_text())
        a = raw.get("algebra", {})
        args.p = args.p if args.p is not None else a.get("p")
        args.n = args.n if args.n is not None else a.get("n")
        args.precision = args.precision if args.precision is not None else a.get("M")
        if args.radius is None:
            args.radius = raw.get("window", {}).get("radius")
    code, details = VERIFIERS[args.tag](args)
    _emit({"tag": args.tag, "status": STATUS[code], "details": details}, args)
    return code


# ---------------------------------------------------------------------------
# graph
# ---------------------------------------------------------------------------

def _load_graph(path: str) -> Graph:
    try:
        data = json.loads(Path(path).read_text())
        V = [_hashable(v) for v in data["vertices"]]
        E = [(_hashable(u), _hashable(v)) for u, v in data["edges"]]
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise InvalidGraph(f"cannot read graph {path}: {exc}") from exc
    return Graph.from_edges(V, E)


def _hashable(x):
    return tuple(_hashable(y) for y in x) if isinstance(x, list) else x


def cmd_graph(args) -> int:
    if args.what == "subdivide":
        g = _load_graph(args.graph) if args.graph else path_graph(args.length)
        out = subdivide(g, args.by)
    elif args.what == "rose":
        if args.figure:
            out = figure_rose().graph
        elif args.full or args.restricted:
            alg = _alg(args)
            L = subalgebra_from(alg, args.subalgebra or "full", args.f, args.e)
            out = (build_full_rose(L) if args.full else build_restricted_rose(L)).graph
        else:
            out = build_rose(args.t, args.r).graph
    else:
        g = _load_graph(args.graph) if args.graph else path_graph(args.length)
        at = [_hashable(json.loads(x)) for x in args.at] if args.at else list(g.V)
        out = attach(g, at, build_rose(args.t, args.r))
    out.validate()
    dot = out.to_dot(name=args.what)
    _write(args.out_dot, dot)
    _write(args.out_json, out.to_json() + "\n")
    sys.stdout.write(dot)
    return OK


# ---------------------------------------------------------------------------
# info
# ---------------------------------------------------------------------------

def cmd_info(args) -> int:
    alg = _alg(args)
    kinds = {}
    for k in ("trivial", "full", "unramified", "ramified"):
        try:
            L = subalgebra_from(alg, k)
            e, f, eBC, fBC = ramification_data(L)
            kinds[L.kind] = {"e": e, "f": f, "e(B/C)": eBC, "f(B/C)": fBC, "eprime": L.eprime}
        except BTBError as exc:
            kinds[k] = {"error": str(exc)}
    report = {
        "p": alg.p, "n": alg.n, "M": alg.M, "cap": alg.cap,
        "conway_polynomial": list(alg.config.h),
        "residue_field_size": alg.p ** alg.n,
        "tree_valency": alg.p ** alg.n + 1,
        "max_window_radius": max(0, (alg.cap - 8) // 2),
        "subalgebras": dict(sorted(kinds.items())),
    }
    _emit(report, args)
    return OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _common(sp):
    sp.add_argument("--scenario")
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--precision", type=int, help="coefficient precision M (digits of p)")
    sp.add_argument("--radius", type=int)
    sp.add_argument("--out-dot")
    sp.add_argument("--out-json")
    sp.add_argument("--parallel", action="store_true")
    sp.add_argument("--seed", type=int, default=0, help="seed for randomized checks")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="btb", description="Branches of orders in the Bruhat-Tits tree of M_2(B).")
    sub = ap.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("branch", help="compute a windowed branch")
    _common(b)
    b.add_argument("--gens", help="JSON file with generator matrices")

    v = sub.add_parser("verify", help="check a statement within a window")
    v.add_argument("tag", choices=sorted(VERIFIERS))
    _common(v)
    v.add_argument("--t", type=int)
    v.add_argument("--case", type=int, choices=[1, 2, 3])
    v.add_argument("--subalgebra")
    v.add_argument("--count", type=int)

    g = sub.add_parser("graph", help="graph constructions as DOT")
    g.add_argument("what", choices=["subdivide", "rose", "attach"])
    _common(g)
    g.add_argument("--graph", help="JSON {vertices, edges}")
    g.add_argument("--length", type=int, default=1, help="path length when no graph is given")
    g.add_argument("--by", type=int, default=2)
    g.add_argument("--t", type=int, default=2)
    g.add_argument("--r", type=int, default=1)
    g.add_argument("--at", nargs="*", help="JSON-encoded vertex names")
    g.add_argument("--figure", action="store_true")
    g.add_argument("--full", action="store_true")
    g.add_argument("--restricted", action="store_true")
    g.add_argument("--subalgebra")
    g.add_argument("--f", type=int, default=1)
    g.add_argument("--e", type=int, default=1)

    i = sub.add_parser("info", help="algebra and subalgebra data")
    _common(i)
    return ap


COMMANDS = {"branch": cmd_branch, "verify": cmd_verify, "graph": cmd_graph, "info": cmd_info}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args)
    except (PrecisionExhausted, SeedNotFound, HypothesisViolation, InvalidGraph, UsageError) as exc:
        sys.stderr.write(f"btb: {type(exc).__name__}: {exc}\n")
        return INCONCLUSIVE
    except BTBError as exc:
        sys.stderr.write(f"btb: {type(exc).__name__}: {exc}\n")
        return INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
