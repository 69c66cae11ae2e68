"""Command-line frontend.

Exit codes: 0 success / true, 1 clean negative result, 2 invalid input,
3 internal failure.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass

from . import lattice as lat
from .brill_noether import SeveriQuery, alpha, curve_class_of_severi, severi_bound, severi_dims, severi_exists, witness
from .certifier import CertificationFailure, certify, coverage, exact, square_zero_normal_form, verify_certificate
from .models import CurveClass, DivisorClass, Family, OrbitInvariant, divisor_invariants, model, q_curve
from .monodromy import DEFAULT_COEFF_BOUND, NoRepresentative, eichler_equivalent, mu_normal_form, orbit_oracle, realizable

log = logging.getLogger("hklattice")

EXIT_OK, EXIT_NEGATIVE, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3


class InvalidInput(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    output_format: str = "json"
    coeff_bound: int = DEFAULT_COEFF_BOUND
    verbosity: str = "normal"


def _parse_json(flag: str, text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{flag}: malformed JSON ({exc.msg} at column {exc.colno})") from None


def _parse_class(flag: str, text: str, cls):
    data = _parse_json(flag, text)
    try:
        return cls.from_json(data)
    except ValueError as exc:
        raise InvalidInput(f"{flag}: {exc}") from None


def _parse_lattice(text: str) -> lat.IntegerLattice:
    """``["U", "U", -2]``: names of standard summands, integers for ``<k>``;
    or ``{"gram": [[...]], "hyperbolic": [[i, j], ...]}``."""
    data = _parse_json("--lattice", text)
    try:
        if isinstance(data, dict):
            hyp = tuple(tuple(p) for p in data.get("hyperbolic", ()))
            return lat.IntegerLattice(tuple(tuple(r) for r in data["gram"]), hyperbolic=hyp)
        if not isinstance(data, list) or not data:
            raise ValueError("expected a non-empty list of summands or an object with 'gram'")
        parts = []
        for item in data:
            if isinstance(item, int) and not isinstance(item, bool):
                parts.append(lat.standard_lattice("rank1", item))
            elif isinstance(item, str):
                parts.append(lat.standard_lattice(item))
            else:
                raise ValueError(f"unrecognized summand {item!r}")
        return lat.direct_sum(*parts)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"--lattice: {exc}") from None


def _parse_vector(flag: str, text: str, L: lat.IntegerLattice):
    data = _parse_json(flag, text)
    if not isinstance(data, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in data):
        raise InvalidInput(f"{flag}: expected a JSON array of integers")
    if len(data) != L.rank:
        raise InvalidInput(f"{flag}: length {len(data)} does not match lattice rank {L.rank}")
    if not any(data):
        raise InvalidInput(f"{flag}: zero vector")
    return tuple(data)


# -- output -------------------------------------------------------------------

def _flatten(data, prefix=""):
    if isinstance(data, dict):
        for k, v in data.items():
            yield from _flatten(v, f"{prefix}{k}." if not isinstance(v, (dict, list)) or v else f"{prefix}{k}")
    elif isinstance(data, list) and data and all(isinstance(x, dict) for x in data):
        for i, v in enumerate(data):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), json.dumps(data, ensure_ascii=False) if isinstance(data, (list, dict)) else data


def emit(data, cfg: CliConfig, stream=None):
    stream = stream or sys.stdout
    data = exact(data)
    if cfg.output_format == "json":
        json.dump(data, stream, indent=2, ensure_ascii=False)
        stream.write("\n")
        return
    rows = list(_flatten(data))
    width = max((len(k) for k, _ in rows), default=0)
    for k, v in rows:
        if isinstance(v, bool):
            v = str(v).lower()
        stream.write(f"{k.ljust(width)}  {v}\n")


# -- subcommands ----------------------------------------------------------------

def cmd_invariants(args, cfg):
    m = model(args.family, args.n, args.s)
    D = _parse_class("--divisor", args.divisor, DivisorClass)
    if D.content != 1:
        raise InvalidInput(f"--divisor: {D} is not primitive")
    inv = divisor_invariants(m, D)
    emit({"model": m.to_json(), "divisor": D.to_json(), "invariant": inv.to_json()}, cfg)
    return EXIT_OK


def cmd_normal_form(args, cfg):
    inv = OrbitInvariant(args.square, args.div, args.residue)
    out = {"family": Family.parse(args.family).value, "n": args.n, "invariant": inv.to_json()}
    if not realizable(args.family, args.n, *inv.key()):
        emit({**out, "realizable": False}, cfg)
        return EXIT_NEGATIVE
    if inv.square < 0:
        raise InvalidInput("--square: negative squares have no normal form here")
    try:
        if inv.square == 0:
            nf = square_zero_normal_form(args.family, args.n, inv)
        else:
            nf = mu_normal_form(args.family, args.n, inv)
    except (NoRepresentative, CertificationFailure) as exc:
        emit({**out, "realizable": True, "error": str(exc)}, cfg)
        return EXIT_NEGATIVE
    emit({**out, "realizable": True, "normal_form": nf.to_json(), "divisor": nf.divisor.to_json()}, cfg)
    return EXIT_OK


def cmd_severi(args, cfg):
    try:
        qry = SeveriQuery(args.family, args.p, args.delta, args.n)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    ok = severi_exists(qry)
    out = {"family": qry.family.value, "p": qry.p, "delta": qry.delta, "n": qry.n, "g": qry.g,
           "alpha": alpha(qry), "bound": severi_bound(qry), "exists": ok}
    if ok:
        sev, ser = severi_dims(qry)
        C = curve_class_of_severi(qry, model(qry.family, qry.n, qry.p - 1))
        out.update(severi_dim=sev, series_dim=ser, curve=C.to_json(), curve_label=C.label(qry.family))
    emit(out, cfg)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_witness(args, cfg):
    m = model(args.family, args.n, args.s)
    q = q_curve(m, CurveClass(1, args.mu))
    if args.mu < 0 or q < 0:
        raise InvalidInput(f"--mu: need mu >= 0 and q(H - mu tau) >= 0 (q = {q})")
    w = witness(args.family, args.n, args.s, args.mu)
    out = {"model": m.to_json(), "mu": args.mu, "q": q, "witness": w.to_json() if w else None}
    emit(out, cfg)
    return EXIT_OK if w else EXIT_NEGATIVE


def cmd_certify(args, cfg):
    if args.verify:
        text = sys.stdin.read() if args.verify == "-" else open(args.verify, encoding="utf-8").read()
        data = _parse_json("--verify", text)
        try:
            same, fresh = verify_certificate(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"--verify: {exc}") from None
        emit({"verified": same, "certificate": fresh}, cfg)
        return EXIT_OK if same else EXIT_NEGATIVE
    for flag in ("family", "n", "s", "curve"):
        if getattr(args, flag) is None:
            raise InvalidInput(f"--{flag} is required unless --verify is given")
    m = model(args.family, args.n, args.s)
    C = _parse_class("--curve", args.curve, CurveClass)
    if C.content != 1:
        raise InvalidInput(f"--curve: {C.label(m.family)} is not primitive")
    if q_curve(m, C) < 0:
        raise InvalidInput(f"--curve: q = {q_curve(m, C)} < 0; negative classes are not certified")
    try:
        cert = certify(m, C)
    except CertificationFailure as exc:
        emit({"certified": False, "failure": exc.to_json()}, cfg)
        return EXIT_NEGATIVE
    emit(cert.to_json(), cfg)
    return EXIT_OK


def cmd_coverage(args, cfg):
    if args.square_bound <= 0:
        raise InvalidInput("--square-bound must be positive")
    report = coverage(args.family, args.n, args.square_bound)
    emit(report.to_json(include_certificates=args.include_certificates), cfg)
    return EXIT_OK if not report.failures else EXIT_NEGATIVE


def cmd_oracle(args, cfg):
    L = _parse_lattice(args.lattice)
    if len(L.hyperbolic) < 2:
        raise InvalidInput("--lattice: needs two declared U summands")
    v = _parse_vector("--v", args.v, L)
    w = _parse_vector("--w", args.w, L)
    for flag, x in (("--v", v), ("--w", w)):
        if not lat.is_primitive(L, x):
            raise InvalidInput(f"{flag}: vector is not primitive")
    if lat.square(L, v) != lat.square(L, w):
        raise InvalidInput(f"--v/--w: squares differ ({lat.square(L, v)} vs {lat.square(L, w)})")
    res = orbit_oracle(L, v, w, cfg.coeff_bound)
    emit({"result": res.status, "depth": res.depth, "explored": res.explored,
          "coeff_bound": cfg.coeff_bound, "eichler_equivalent": eichler_equivalent(L, v, w)}, cfg)
    return EXIT_OK if res.reached else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    def common_options(default):
        # SUPPRESS on subparsers keeps a flag given before the subcommand
        c = argparse.ArgumentParser(add_help=False)
        c.add_argument("--format", choices=("json", "table"), default=default or "json")
        c.add_argument("--coeff-bound", type=int, default=default or DEFAULT_COEFF_BOUND,
                       help=f"coefficient box for the transvection oracle (default {DEFAULT_COEFF_BOUND})")
        c.add_argument("-v", "--verbose", action="store_true", default=default or False)
        c.add_argument("-q", "--quiet", action="store_true", default=default or False)
        return c

    p = argparse.ArgumentParser(prog="hklattice", description=__doc__.splitlines()[0],
                                parents=[common_options(None)])
    sub_common = common_options(argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[sub_common], **kw)

    def family(sp, required=True):
        sp.add_argument("--family", choices=("k3hilb", "kummer"), required=required)

    sp = add("invariants", help="orbit invariant of a divisor aH+bB")
    family(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--divisor", required=True, help='JSON, e.g. \'{"a":2,"b":-5}\'')
    sp.set_defaults(func=cmd_invariants)

    sp = add("normal-form", help="normal form (s, t, mu) of an orbit invariant")
    family(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--square", type=int, required=True)
    sp.add_argument("--div", type=int, required=True)
    sp.add_argument("--residue", type=int, required=True)
    sp.set_defaults(func=cmd_normal_form)

    sp = add("severi", help="Severi existence inequality and dimensions")
    family(sp)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--delta", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=cmd_severi)

    sp = add("witness", help="Severi witness for the class H - mu tau")
    family(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--mu", type=int, required=True)
    sp.set_defaults(func=cmd_witness)

    sp = add("certify", help="certificate for a primitive curve class aH - mu tau")
    family(sp, required=False)
    sp.add_argument("--n", type=int)
    sp.add_argument("--s", type=int)
    sp.add_argument("--curve", help='JSON, e.g. \'{"a":1,"mu":5}\'')
    sp.add_argument("--verify", metavar="FILE", help="re-validate a certificate JSON file ('-' for stdin)")
    sp.set_defaults(func=cmd_certify)

    sp = add("coverage", help="certify every realizable orbit up to a square bound")
    family(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--square-bound", type=int, required=True)
    sp.add_argument("--include-certificates", action="store_true")
    sp.set_defaults(func=cmd_coverage)

    sp = add("oracle", help="transvection orbit search between two lattice vectors")
    sp.add_argument("--lattice", required=True, help='JSON, e.g. \'["U","U",-2]\'')
    sp.add_argument("--v", required=True)
    sp.add_argument("--w", required=True)
    sp.set_defaults(func=cmd_oracle)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.coeff_bound < 1:
        print("error: --coeff-bound must be positive", file=sys.stderr)
        return EXIT_INVALID
    cfg = CliConfig(args.format, args.coeff_bound, "verbose" if args.verbose else "quiet" if args.quiet else "normal")
    try:
        return args.func(args, cfg)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception:
        log.exception("internal failure")
        return EXIT_INTERNAL


def main():
    sys.exit(run())
