"""Command line: ``expfactor factor``, ``expfactor verify``, ``expfactor fixture``.

Matrix files are JSON documents::

    {"format_version": "1", "kind": "sl2", "trunc_order": 256,
     "entries": {"a": [[re, im], ...], "b": ..., "c": ..., "d": ...}}

A factors file has the same header, ``factors: {"m1": entries, "m2": entries}``
and a ``metadata`` block. Floats are written with ``repr``, so a file
re-parses to bit-identical coefficients.
"""
import argparse
import csv
import json
import logging
import math
import sys

import numpy as np

from . import factor as fc
from . import fixtures as fx
from . import mat2
from . import verify as vf
from .errors import FactorError, ParseError, ResidualError, ValidationError
from .holofun import DiscFunction
from .mat2 import MatFun

FORMAT_VERSION = "1"
KINDS = ("sl2", "gl2")
ENTRY_NAMES = ("a", "b", "c", "d")

log = logging.getLogger("expfactor")


# -- files ------------------------------------------------------------------

def _coeff_pairs(f):
    return [[float(c.real), float(c.imag)] for c in f.coeffs]


def _entries_doc(m):
    return {k: _coeff_pairs(f) for k, f in zip(ENTRY_NAMES, m.entries)}


def _parse_entries(raw, order, where):
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: expected an object with keys a, b, c, d",
                         field=where)
    out = []
    for k in ENTRY_NAMES:
        field = f"{where}.{k}"
        if k not in raw:
            raise ParseError(f"{field}: missing entry", field=field)
        pairs = raw[k]
        if not isinstance(pairs, list) or not pairs:
            raise ParseError(f"{field}: expected a non-empty list of "
                             f"[re, im] pairs", field=field)
        coeffs = np.empty(len(pairs), dtype=complex)
        for i, p in enumerate(pairs):
            ok = (isinstance(p, list) and len(p) == 2
                  and all(isinstance(x, (int, float))
                          and not isinstance(x, bool) for x in p))
            if not ok or not all(math.isfinite(x) for x in p):
                raise ParseError(f"{field}[{i}]: expected a finite "
                                 f"[re, im] pair, got {p!r}",
                                 field=f"{field}[{i}]")
            coeffs[i] = complex(p[0], p[1])
        if coeffs.size > order:
            raise ParseError(f"{field}: {coeffs.size} coefficients exceed "
                             f"trunc_order {order}", field=field)
        out.append(DiscFunction(coeffs, order=order))
    return MatFun(*out)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: line {err.lineno}, column {err.colno}: "
                         f"{err.msg}", line=err.lineno) from err
    except OSError as err:
        raise ParseError(f"{path}: {err.strerror}") from err


def _header(doc, path):
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    for key in ("format_version", "kind", "trunc_order"):
        if key not in doc:
            raise ParseError(f"{path}: missing field {key!r}", field=key)
    if doc["format_version"] != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported format_version "
                         f"{doc['format_version']!r}", field="format_version")
    if doc["kind"] not in KINDS:
        raise ParseError(f"{path}: kind must be one of {KINDS}, got "
                         f"{doc['kind']!r}", field="kind")
    order = doc["trunc_order"]
    if not isinstance(order, int) or isinstance(order, bool) or order < 1:
        raise ParseError(f"{path}: trunc_order must be a positive integer",
                         field="trunc_order")
    return doc["kind"], order


def parse_input(path, tol_input=mat2.SL_TOL, trunc=None, grid=None):
    """Read a matrix file; returns ``(kind, MatFun)``.

    For ``sl2`` files the boundary sup of ``|det - 1|`` must not exceed
    ``tol_input``. ``trunc`` overrides the file's working order.
    """
    doc = _load_json(path)
    kind, order = _header(doc, path)
    if "entries" not in doc:
        raise ParseError(f"{path}: missing field 'entries'", field="entries")
    m = _parse_entries(doc["entries"], trunc or order, "entries")
    if kind == "sl2":
        defect = mat2.det_defect(m, grid)
        if defect > tol_input:
            raise ValidationError(f"{path}: det defect {defect:.3e} exceeds "
                                  f"--tol-input {tol_input:.1e}",
                                  det_defect=defect)
    return kind, m


def write_matrix(path, m, kind="sl2"):
    doc = {"format_version": FORMAT_VERSION, "kind": kind,
           "trunc_order": m.order, "entries": _entries_doc(m)}
    _dump(path, doc)


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def write_factors(path, fac, kind, order, report=None):
    meta = {"branch": fac.branch, "factor_count": fac.factor_count,
            "residual": fac.residual,
            "certificates": [c.to_dict() for c in fac.certificates],
            "details": _jsonable(fac.details)}
    if report is not None:
        meta["residual_sup"] = report.residual_sup
    doc = {"format_version": FORMAT_VERSION, "kind": kind,
           "trunc_order": order,
           "factors": {"m1": _entries_doc(fac.m1), "m2": _entries_doc(fac.m2)},
           "metadata": meta}
    _dump(path, doc)


def read_factors(path):
    """``(kind, trunc_order, m1, m2, metadata)`` from a factors file."""
    doc = _load_json(path)
    kind, order = _header(doc, path)
    facs = doc.get("factors")
    if not isinstance(facs, dict):
        raise ParseError(f"{path}: missing field 'factors'", field="factors")
    for k in ("m1", "m2"):
        if k not in facs:
            raise ParseError(f"{path}: missing field 'factors.{k}'",
                             field=f"factors.{k}")
    m1 = _parse_entries(facs["m1"], order, "factors.m1")
    m2 = _parse_entries(facs["m2"], order, "factors.m2")
    return kind, order, m1, m2, doc.get("metadata", {})


def _dump(path, doc):
    text = json.dumps(doc, indent=1)
    if path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def write_csv(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "residual"])
        for z, r in report.residual_grid:
            w.writerow([repr(z.real), repr(z.imag), repr(r)])


def _write_report(path, report, extra=None):
    doc = report.to_dict()
    if extra:
        doc.update(extra)
    _dump(path, _jsonable(doc))


# -- commands ---------------------------------------------------------------

def cmd_factor(args):
    kind, a = parse_input(args.input, args.tol_input, args.trunc, args.grid)
    if kind == "sl2":
        fac = fc.factor_sl2(a, args.grid, args.tol_input)
    else:
        fac = fc.factor_gl2(a, args.grid, args.tol_input)
    report = vf.residual_report(a, fac, seed=args.seed)
    write_factors(args.output, fac, kind, a.order, report)
    if args.report:
        _write_report(args.report, report,
                      {"factor_count": fac.factor_count, "kind": kind})
    if args.csv:
        write_csv(args.csv, report)
    log.info("branch %s, %d factor(s), residual %.3e", fac.branch,
             fac.factor_count, report.residual_sup)
    if not report.residual_sup <= args.tol:
        raise ResidualError(f"residual {report.residual_sup:.3e} exceeds "
                            f"--tol {args.tol:.1e}")
    return 0


def cmd_verify(args):
    kind, a = parse_input(args.input, args.tol_input, args.trunc, args.grid)
    fkind, order, m1, m2, meta = read_factors(args.factors)
    if order != a.order:
        raise ValidationError(f"truncation orders differ: input {a.order}, "
                              f"factors {order}")
    if fkind != kind:
        raise ValidationError(f"kinds differ: input {kind}, factors {fkind}")
    fac = fc.Factorization(m1, m2, meta.get("factor_count", 2),
                           meta.get("branch", ""))
    report = vf.residual_report(a, fac, seed=args.seed)
    if args.report:
        _write_report(args.report, report)
    if args.csv:
        write_csv(args.csv, report)
    print(f"residual_sup {report.residual_sup:.3e} "
          f"traceless_defect {report.traceless_defect:.3e} "
          f"det_defect {report.det_defect:.3e}")
    if not report.residual_sup <= args.tol:
        raise ResidualError(f"residual {report.residual_sup:.3e} exceeds "
                            f"--tol {args.tol:.1e}")
    return 0


def _fixture(name, seed, order):
    if name == "identity":
        return "sl2", MatFun.identity(order)
    if name == "shear":
        return "sl2", fx.shear_corpus(count=seed + 1, order=order)[seed]
    if name == "sharpness":
        return "gl2", fx.sharpness_matrix(60, order)
    if name == "gl2":
        return "gl2", fx.gl2_corpus(count=seed + 1, order=order)[seed]
    raise ValueError(name)


def cmd_fixture(args):
    kind, m = _fixture(args.name, args.seed, args.trunc or 256)
    write_matrix(args.output, m, kind)
    return 0


# -- entry point ------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="expfactor",
        description="Factor 2x2 matrices over the disc algebra as a product "
                    "of two exponentials.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--trunc", type=int, default=None,
                       help="working order (default: the file's trunc_order)")
        q.add_argument("--grid", type=int, default=4096,
                       help="boundary grid size (default 4096)")
        q.add_argument("--tol", type=float, default=1e-8,
                       help="residual threshold (default 1e-8)")
        q.add_argument("--tol-input", type=float, default=mat2.SL_TOL,
                       help="det defect budget for sl2 inputs (default 1e-10)")
        q.add_argument("--seed", type=int, default=0,
                       help="seed for interior sample points")
        q.add_argument("--report", help="write a JSON report here")
        q.add_argument("--csv", help="write re,im,residual rows here")

    q = sub.add_parser("factor", help="factor a matrix file")
    q.add_argument("input")
    q.add_argument("-o", "--output", default="-",
                   help="factors file (default stdout)")
    common(q)
    q.set_defaults(func=cmd_factor)

    q = sub.add_parser("verify", help="check a factors file against its input")
    q.add_argument("input")
    q.add_argument("factors")
    common(q)
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("fixture", help="write a sample matrix file")
    q.add_argument("name", choices=["identity", "shear", "sharpness", "gl2"])
    q.add_argument("-o", "--output", default="-")
    q.add_argument("--seed", type=int, default=0,
                   help="index into the seeded corpus")
    q.add_argument("--trunc", type=int, default=None)
    q.set_defaults(func=cmd_fixture)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except FactorError as err:
        out = {"error": err.category, "message": str(err),
               "exit_code": err.exit_code}
        if err.certificate is not None:
            out["certificate"] = err.certificate.to_dict()
        print(json.dumps(_jsonable(out)), file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
