"""Command-line front end.

Exit codes:
  0  success (decompose: certificate written; verify: certificate valid)
  1  parse error, malformed certificate, unsupported (non-torsion) group
  2  element is not a finite sum of projections
  3  a construction would exceed the dimension cap
  4  verification failed

stdout carries JSON only; human-readable messages go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from fractions import Fraction

from . import certificate as certio
from .errors import (
    CertificateFormatError,
    DimensionCapExceeded,
    ElementParseError,
    GroupMismatch,
    NegativeCoefficient,
    NonTorsionGroup,
    NotDecomposable,
)
from .ktheory import KGroup, parse_group
from .numeric import DEFAULT_DIM_CAP, TAU_MAT
from .strategies import (
    CertificateBuilder,
    SpectralElement,
    rational_parameters,
    strat_big,
    strat_rational,
    strat_spectral,
)
from .verify import verify_certificate

log = logging.getLogger("projsum")

_BLOCK = re.compile(r"\s*([^:;]+?)\s*:\s*\(([^()]*)\)\s*")


def parse_element(text: str, group: KGroup) -> SpectralElement:
    """Parse ``"1.3:(1);0.4:(0)"``; coefficients are decimals or ``p/q``."""
    blocks = []
    pos = 0
    for chunk in text.split(";"):
        m = _BLOCK.fullmatch(chunk)
        if not m:
            raise ElementParseError(f"expected 'coeff:(c1,...)', got {chunk!r}", pos)
        coeff_text, class_text = m.group(1), m.group(2)
        try:
            coeff = Fraction(coeff_text)
        except (ValueError, ZeroDivisionError):
            raise ElementParseError(f"bad coefficient {coeff_text!r}", pos + m.start(1)) from None
        try:
            residues = [int(x) for x in class_text.split(",")] if class_text.strip() else []
        except ValueError:
            raise ElementParseError(f"bad class {class_text!r}", pos + m.start(2)) from None
        if not residues and group.moduli:
            residues = [0] * len(group.moduli)
        try:
            blocks.append((coeff, group.element(residues)))
        except GroupMismatch as exc:
            raise ElementParseError(str(exc), pos + m.start(2)) from None
        pos += len(chunk) + 1
    return SpectralElement(group, tuple(blocks))


def _dim_cap(flag):
    if flag is not None:
        return flag
    return int(os.environ.get("PROJSUM_DIM_CAP", DEFAULT_DIM_CAP))


def _emit(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def cmd_decompose(args) -> int:
    try:
        group = parse_group(args.k0)
        element = parse_element(args.element, group)
    except (NonTorsionGroup, ElementParseError) as exc:
        log.error("%s", exc)
        _emit({"status": "error", "reason": str(exc)})
        return 1
    try:
        cert = strat_spectral(element, tolerance=args.tol, dim_cap=_dim_cap(args.dim_cap),
                              theta_route=args.route)
    except NegativeCoefficient as exc:
        log.error("%s", exc)
        _emit({"status": "error", "reason": str(exc)})
        return 1
    except NotDecomposable as exc:
        log.error("not a finite sum of projections: %s", exc.reason)
        _emit({"status": "not-decomposable", "reason": exc.reason})
        return 2
    except DimensionCapExceeded as exc:
        log.error("construction needs dimension %d > cap %d", exc.dimension, exc.cap)
        _emit({"status": "dimension-cap-exceeded", "dimension": exc.dimension, "cap": exc.cap})
        return 3
    report = verify_certificate(cert)
    log.info("replay: valid=%s projections=%d max_residual=%.2e",
             report.valid, report.projections, report.max_residual)
    text = certio.dumps(cert)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        _emit({"status": "ok", "out": args.out, "projections": report.projections,
               "valid": report.valid})
    else:
        sys.stdout.write(text + "\n")
    return 0 if report.valid else 4


def cmd_verify(args) -> int:
    try:
        with open(args.path) as fh:
            cert = certio.loads(fh.read())
    except (OSError, CertificateFormatError) as exc:
        log.error("%s", exc)
        _emit({"valid": False, "errors": [{"kind": "Malformed", "message": str(exc)}]})
        return 1
    report = verify_certificate(cert)
    sys.stdout.write(report.dumps() + "\n")
    return 0 if report.valid else 4


def parse_preset(name: str) -> int:
    m = re.fullmatch(r"o(\d+)|on\((\d+)\)|on(\d+)", name.strip().lower())
    if not m:
        raise ValueError(f"unknown preset {name!r}; use o2, o3 or on(N)")
    n = int(next(g for g in m.groups() if g))
    if n < 2:
        raise ValueError("O_n needs n >= 2")
    return n


def _roundtrip(cert):
    return verify_certificate(certio.loads(certio.dumps(cert)))


def demo_battery(n: int) -> list:
    """Fixed worked examples inside O_n, each checked after a JSON round trip."""
    group = KGroup.cuntz(n)
    theta = group.zero
    items = []
    for gamma in (Fraction(3, 2), Fraction(7, 4), Fraction(2), Fraction(13, 5), Fraction(3)):
        b = CertificateBuilder(group, [(gamma, theta)])
        strat_big(b, gamma, 0)
        rep = _roundtrip(b.certificate())
        items.append({"name": f"big gamma={gamma}", "valid": rep.valid,
                      "projections": rep.projections, "max_residual": rep.max_residual})

    alpha, beta = Fraction(7, 5), Fraction(3, 5)
    b = CertificateBuilder(group, [(alpha, theta), (beta, theta)])
    strat_rational(b, alpha, beta, 0, 1)
    rep = _roundtrip(b.certificate())
    k, h, m, r, dim, count = rational_parameters(alpha, beta)
    items.append({"name": "rational 7/5, 3/5", "valid": rep.valid, "projections": rep.projections,
                  "max_residual": rep.max_residual, "r": r, "dimension": dim,
                  "trace_identity": alpha * r * m + beta * m == r * k + h == count})

    g1 = group.element((1,))
    order = group.class_order(g1)
    a = Fraction(3, 2)
    excess = 1 / (a - 1) - Fraction(1, order)
    mm = excess.numerator // excess.denominator
    delta = excess - mm
    cert = strat_spectral(SpectralElement(group, ((a, g1),)))
    rep = _roundtrip(cert)
    item = {"name": f"3/2 p with [p]={list(g1)}", "valid": rep.valid, "projections": rep.projections,
            "max_residual": rep.max_residual, "order": order}
    if order > 1:
        item.update(m=mm, delta=str(delta),
                    trace_identity=(mm * order + 1) * a + order * (a - 1) * delta == (mm + 1) * order + 1)
    items.append(item)

    cert = strat_spectral(SpectralElement(group, ((Fraction("1.3"), g1), (Fraction("0.4"), theta))))
    rep = _roundtrip(cert)
    items.append({"name": "1.3 p + 0.4 q", "valid": rep.valid, "projections": rep.projections,
                  "max_residual": rep.max_residual})
    return items


def cmd_demo(args) -> int:
    try:
        n = parse_preset(args.preset)
    except ValueError as exc:
        log.error("%s", exc)
        return 1
    items = demo_battery(n)
    for it in items:
        log.info("%-28s valid=%s projections=%d residual=%.2e",
                 it["name"], it["valid"], it["projections"], it["max_residual"])
    _emit({"preset": f"O_{n}", "k0": [n - 1], "items": items})
    ok = all(it["valid"] and it.get("trace_identity", True) for it in items)
    return 0 if ok else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projsum",
                                     description="Finite sums of projections with replayable certificates.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    dec = sub.add_parser("decompose", help="build a certificate for a spectral element")
    dec.add_argument("--k0", default="", help='torsion K0 as moduli, e.g. "2" or "2,3"')
    dec.add_argument("--element", required=True, help='blocks like "1.3:(1);0.4:(0)"')
    dec.add_argument("--tol", type=float, default=TAU_MAT)
    dec.add_argument("--dim-cap", type=int, default=None)
    dec.add_argument("--out", default=None)
    dec.add_argument("--route", choices=("auto", "real", "rational"), default="auto",
                     help="construction used for zero-class multiples")
    dec.set_defaults(func=cmd_decompose)

    ver = sub.add_parser("verify", help="replay a certificate file")
    ver.add_argument("path")
    ver.set_defaults(func=cmd_verify)

    demo = sub.add_parser("demo", help="worked examples in a Cuntz algebra")
    demo.add_argument("preset", help="o2, o3, or on(N)")
    demo.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
