"""Command-line interface: ``triagg <command> ...``.

Exit status: 0 success, 1 verification failed, 2 usage error, 3 malformed
file, 4 invalid input (degenerate base size, bad dimensions, ...),
5 exact-expansion budget exceeded.  Errors are reported on stderr as one
JSON object ``{"error": category, "message": text}``.

``TRIAGG_THREADS`` caps the thread count of the numerical libraries.
"""

from __future__ import annotations

import os

_threads = os.environ.get("TRIAGG_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import sys  # noqa: E402
from fractions import Fraction  # noqa: E402
from pathlib import Path  # noqa: E402

import numpy as np  # noqa: E402

from . import analysis, core, engine, generator, io, verify  # noqa: E402
from .composite import CompositeAlgorithm, gen_new25b  # noqa: E402
from .errors import TriaggError  # noqa: E402
from .sparse import format_rational, parse_rational  # noqa: E402
from .strassen import strassen  # noqa: E402

log = logging.getLogger("triagg")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_INVALID = 4
EXIT_BUDGET = 5

_EXIT_BY_CATEGORY = {"format": EXIT_FORMAT, "budget": EXIT_BUDGET, "verification-failed": EXIT_FAILED}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False, default=str)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _write_algorithm(obj, out, expand=False) -> None:
    if out in (None, "-"):
        sys.stdout.write(io.dumps(io.document_of(obj, expand)))
    else:
        io.save(obj, out, expand)


def _summary(obj) -> dict:
    d = {"name": obj.name, "dims": list(obj.dims), "t": obj.t}
    m, n, p = obj.dims
    if m == n == p and m > 1:
        d["omega"] = analysis.round6(analysis.exponent_exact(m, obj.t))
    if isinstance(obj, CompositeAlgorithm):
        d["h"] = obj.h
        d["blocks"] = obj.blocks
        d["substituted_blocks"] = obj.substituted_blocks
    return d


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    fam, n0 = args.family, args.n0
    if fam != "strassen" and n0 is None:
        raise UsageError("--n0 is required for this family")
    if fam == "strassen":
        obj = strassen()
    elif fam == "pan":
        obj = generator.gen_pan(n0)
    elif fam == "new25":
        obj = generator.gen_new25(n0, path=args.path)
    elif fam == "decomposed":
        obj = generator.gen_new25_decomposed(n0).algorithm
    elif fam == "new25b":
        rep = io.load(args.subst) if args.subst else None
        pairs = json.loads(args.pairs) if args.pairs else None
        obj = gen_new25b(n0, rep, pairs=pairs)
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown family {fam}")
    if args.output:
        _write_algorithm(obj, args.output, args.expand)
        _emit(_summary(obj))
    else:
        _write_algorithm(obj, "-", args.expand)
    return EXIT_OK


def cmd_verify(args) -> int:
    alg = io.load(args.file)
    alg, report = verify.certify(
        alg,
        args.mode,
        trials=args.trials,
        prime=args.prime,
        seed=args.seed,
        budget=args.budget,
        samples=args.samples,
        levels=args.levels,
        domain=args.domain,
    )
    doc = report.to_dict(include_timing=args.timing)
    _emit(doc)
    if args.report:
        _emit(doc, args.report)
    if report.result and args.write:
        _write_algorithm(alg, args.write)
    return EXIT_OK if report.result else EXIT_FAILED


def _analyze_file(path, as_json: bool, effective: bool) -> int:
    obj = io.load(path)
    out = _summary(obj)
    if isinstance(obj, core.BilinearAlgorithm):
        if effective or not obj.factored:
            st = analysis.stats(obj)
            out["stats"] = {k: v for k, v in st.to_dict().items() if v is not None}
        if obj.factored:
            try:
                dec = generator.DecomposedAlgorithm.from_algorithm(obj)
            except ValueError:
                dec = None
            if dec is not None:
                dst = analysis.stats(dec)
                out["decomposed"] = {k: v for k, v in dst.to_dict().items() if v is not None}
                c = analysis.leading_coefficient(dec)
                out["leading_coefficient"] = float(c)
                out["leading_coefficient_exact"] = format_rational(c)
    if as_json:
        _emit(out)
    else:
        for k, v in out.items():
            if isinstance(v, dict):
                print(f"{k}:")
                for k2, v2 in v.items():
                    print(f"  {k2}: {v2}")
            else:
                print(f"{k}: {v}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.file:
        return _analyze_file(args.file, args.json, args.effective)
    bases = [int(x) for x in args.bases.split(",")] if args.bases else None
    rows = analysis.rank_table(bases) if bases else analysis.rank_table()
    best = {fam: analysis.optimal_base(fam) for fam in ("new25", "new25b")}
    coeffs = []
    for n0 in [int(x) for x in args.coefficients.split(",")] if args.coefficients else []:
        dec = generator.gen_new25_decomposed(n0)
        st = analysis.stats(dec)
        coeffs.append(
            {
                "n0": n0,
                "t0": dec.t0,
                "s0": dec.s0,
                "q_U": st.q_U,
                "q_V": st.q_V,
                "q_W": st.q_W,
                "c": round(float(analysis.leading_coefficient(dec)), 6),
            }
        )
    if args.json:
        _emit({"ranks": rows, "optimal": {k: list(v) for k, v in best.items()}, "coefficients": coeffs})
    else:
        print(analysis.format_table(rows))
        print()
        for fam, (n0, e) in best.items():
            print(f"optimal {fam}: n0={n0} omega={e}")
        if coeffs:
            print()
            print(analysis.format_table(coeffs))
    return EXIT_OK


def _load_plain(path) -> core.BilinearAlgorithm:
    obj = io.load(path)
    if not isinstance(obj, core.BilinearAlgorithm):
        raise UsageError("this command needs an explicit algorithm file, not a composite")
    return obj


def cmd_compose(args) -> int:
    alg = core.compose(_load_plain(args.first), _load_plain(args.second))
    _write_algorithm(alg, args.output)
    return EXIT_OK


def cmd_rotate(args) -> int:
    _write_algorithm(core.rotate(_load_plain(args.file)), args.output)
    return EXIT_OK


def cmd_symmetrize(args) -> int:
    _write_algorithm(core.symmetrize(_load_plain(args.file)), args.output)
    return EXIT_OK


def cmd_merge_kin(args) -> int:
    alg = _load_plain(args.file)
    if args.targeted:
        pairs = generator.targeted_pairs(alg)
    else:
        pairs = core.find_kin_pairs(alg)
    merged = core.merge_kin(alg, pairs)
    _write_algorithm(merged, args.output)
    if args.output:
        _emit({"pairs": len(pairs), "t_before": alg.t, "t_after": merged.t})
    return EXIT_OK


def cmd_degroote(args) -> int:
    alg = _load_plain(args.file)
    K = [[parse_rational(str(x)) for x in row] for row in json.loads(args.K)]
    _write_algorithm(core.degroote_transform(alg, K), args.output)
    return EXIT_OK


def _read_matrix(path, dom):
    p = Path(path)
    if p.suffix == ".npy":
        return dom.prepare(np.load(p, allow_pickle=False))
    rows = []
    for line in p.read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            rows.append([parse_rational(x) for x in line.replace(",", " ").split()])
    if not rows or len({len(r) for r in rows}) != 1:
        raise io.FormatError(f"{path}: expected a non-empty rectangular matrix")
    if dom.name == "float":
        return np.array([[float(x) for x in r] for r in rows])
    return dom.prepare(np.array(rows, dtype=object))


def _write_matrix(path, M, dom) -> None:
    if path.endswith(".npy"):
        arr = M.astype(np.float64) if dom.name == "float" else M.astype(object).astype(str)
        np.save(path, arr)
        return

    def fmt(x):
        if isinstance(x, Fraction):
            return format_rational(x)
        return repr(float(x)) if dom.name == "float" else str(int(x))

    Path(path).write_text("\n".join(" ".join(fmt(x) for x in row) for row in M) + "\n")


def cmd_multiply(args) -> int:
    alg = _load_plain(args.algorithm)
    dom = engine.make_domain(args.domain, args.prime)
    m, n, p = alg.dims
    L = args.levels
    rng = np.random.default_rng(args.seed)
    A = _read_matrix(args.a, dom) if args.a else dom.random(rng, (m**L, n**L))
    B = _read_matrix(args.b, dom) if args.b else dom.random(rng, (n**L, p**L))
    counter = engine.OperationCount()
    C = engine.recursive_multiply(alg, A, B, L, args.base_threshold, dom, args.path, counter)
    ok = dom.equal(C, dom.naive(A, B))
    if args.output:
        _write_matrix(args.output, C, dom)
    _emit(
        {
            "levels": L,
            "domain": dom.name,
            "path": args.path,
            "seed": args.seed if not (args.a and args.b) else None,
            "multiplications": counter.multiplications,
            "linear_ops": counter.linear_ops,
            "matches_naive": bool(ok),
        }
    )
    return EXIT_OK if ok else EXIT_FAILED


def cmd_export(args) -> int:
    obj = io.load(args.file)
    _write_algorithm(obj, args.output, args.expand)
    return EXIT_OK


def cmd_import(args) -> int:
    if args.supplemental:
        if not args.dims:
            raise UsageError("--supplemental needs --dims M N P")
        obj = io.load_supplemental(args.file, tuple(args.dims))
    else:
        obj = io.load(args.file)
    _write_algorithm(obj, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="triagg", description="Trilinear-aggregation matrix multiplication toolkit.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an algorithm")
    g.add_argument("--family", required=True, choices=["strassen", "pan", "new25", "new25b", "decomposed"])
    g.add_argument("--n0", type=int, help="base size (m0 for new25b)")
    g.add_argument("--subst", help="<4,4,4> replacement file for new25b")
    g.add_argument("--pairs", help="JSON list of cell-pair indices to substitute (new25b)")
    g.add_argument("--path", choices=["literal", "merge"], default="literal", help="new25 construction route")
    g.add_argument("--expand", action="store_true", help="write effective U, V, W instead of the factored form")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="verify an algorithm file")
    v.add_argument("file")
    v.add_argument("--mode", choices=["exact", "brent", "random", "multiply"], default="random")
    v.add_argument("--trials", type=int, default=verify.DEFAULT_TRIALS)
    v.add_argument("--prime", type=int, default=verify.DEFAULT_PRIME)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--budget", type=int, default=verify.DEFAULT_BUDGET)
    v.add_argument("--samples", type=int, default=2)
    v.add_argument("--levels", type=int, default=1)
    v.add_argument("--domain", choices=["rational", "prime", "float"], default="rational")
    v.add_argument("--report", help="also write the report to this file")
    v.add_argument("--write", help="on success, write the algorithm with its verification metadata")
    v.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("analyze", help="rank/exponent tables, or statistics of one file")
    a.add_argument("file", nargs="?")
    a.add_argument("--bases", help="comma-separated base sizes for the table")
    a.add_argument("--coefficients", help="comma-separated n0 values for leading coefficients")
    a.add_argument("--json", action="store_true")
    a.add_argument("--effective", action="store_true", help="also count the expanded U, V, W of a factored file")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compose", help="tensor product of two algorithms")
    c.add_argument("first")
    c.add_argument("second")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_compose)

    for name, fn, text in (("rotate", cmd_rotate, "cyclic rotation"), ("symmetrize", cmd_symmetrize, "symmetrization")):
        r = sub.add_parser(name, help=text)
        r.add_argument("file")
        r.add_argument("-o", "--output")
        r.set_defaults(func=fn)

    k = sub.add_parser("merge-kin", help="merge kin row pairs")
    k.add_argument("file")
    k.add_argument("--targeted", action="store_true", help="only the diagonal pairs of an aggregation algorithm")
    k.add_argument("-o", "--output")
    k.set_defaults(func=cmd_merge_kin)

    d = sub.add_parser("degroote", help="apply a de Groote sandwich transform")
    d.add_argument("file")
    d.add_argument("--K", required=True, help="JSON matrix of rationals")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_degroote)

    mu = sub.add_parser("multiply", help="recursive multiplication with an algorithm file")
    mu.add_argument("algorithm")
    mu.add_argument("--levels", type=int, default=1)
    mu.add_argument("--domain", choices=["rational", "prime", "float"], default="rational")
    mu.add_argument("--prime", type=int, default=verify.DEFAULT_PRIME)
    mu.add_argument("--path", choices=["plain", "decomposed"], default="plain")
    mu.add_argument("--base-threshold", type=int, default=0)
    mu.add_argument("--a", help="left operand (text or .npy); random when omitted")
    mu.add_argument("--b", help="right operand (text or .npy); random when omitted")
    mu.add_argument("--seed", type=int, default=0)
    mu.add_argument("-o", "--output", help="write the product here")
    mu.set_defaults(func=cmd_multiply)

    e = sub.add_parser("export", help="rewrite an algorithm file in canonical form")
    e.add_argument("file")
    e.add_argument("--expand", action="store_true")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_export)

    i = sub.add_parser("import", help="read an algorithm file (or a plain-text listing)")
    i.add_argument("file")
    i.add_argument("--supplemental", action="store_true", help="plain-text U/V/W listing (best effort)")
    i.add_argument("--dims", type=int, nargs=3, metavar=("M", "N", "P"))
    i.add_argument("-o", "--output")
    i.set_defaults(func=cmd_import)
    return ap


def _error(category: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": category, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _error("usage", str(exc), EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        return _error("usage", str(exc), EXIT_USAGE)
    except TriaggError as exc:
        return _error(exc.category, str(exc), _EXIT_BY_CATEGORY.get(exc.category, EXIT_INVALID))
    except (ValueError, TypeError) as exc:
        return _error("invalid", str(exc), EXIT_INVALID)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
