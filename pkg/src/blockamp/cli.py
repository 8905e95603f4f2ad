"""Command line entry point: ``blockamp <subcommand>``.

Exit codes: 0 success, 2 protocol abort, 3 infeasible configuration,
4 any other error (including bad arguments).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .bits import BitString, Distribution
from .design import WeakDesign, build_weak_design, validate_weak_design
from .devices import behavior_from_csv
from .eat import EatConfig, certificate
from .exceptions import InfeasibleConfigError
from .games import InputDistribution, mdl_ghz_score, mdl_hardy_score, mermin_score
from .protocol import (EXIT_ABORT, EXIT_INFEASIBLE, EXIT_OK, EXIT_RUNTIME, ProtocolConfig,
                       bell_test, plan_protocol, run_with_plan)
from .srs import build_srs, certify_srs
from .trevisan import RSHadamardCode, desk_params, min_seed_length, trevisan_extract
from .two_source import ExtractorMode, RazParams, raz_params_check, two_source_extract


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_RUNTIME, f"{self.prog}: error: {message}\n")


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(path, "w") as fh:
        fh.write(text)


def _parse_bits(text, fmt="bits", length=None) -> BitString:
    text = "".join(text.split())
    if fmt == "hex":
        return BitString.from_hex(text, length)
    return BitString.from_str(text)


def _bits_arg(value, file, fmt, length=None):
    if value is None and file is None:
        return None
    return _parse_bits(value if value is not None else _read_text(file), fmt, length)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _load_config(args) -> ProtocolConfig:
    cfg = ProtocolConfig.from_json(_read_text(args.config)) if args.config else ProtocolConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(rng_seed=args.seed)
    return cfg


def _sources(args, cfg, rng):
    x1 = _bits_arg(args.x1, args.x1_file, args.format, cfg.n)
    x2 = _bits_arg(getattr(args, "x2", None), getattr(args, "x2_file", None), args.format, cfg.n)
    if x1 is None:
        x1 = BitString(rng.integers(0, 2, cfg.n, dtype=np.uint8))
    if x2 is None:
        x2 = BitString(rng.integers(0, 2, cfg.n, dtype=np.uint8))
    return x1, x2


# --------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    cfg = _load_config(args)
    plan = plan_protocol(cfg)
    rng = np.random.default_rng(cfg.rng_seed)
    x1, x2 = _sources(args, cfg, rng)
    res = run_with_plan(plan, x1, x2, rng)
    _write(args.report, res.report.to_json() + "\n")
    if args.transcript:
        _write(args.transcript, res.transcript.to_csv())
    if res.output is not None and args.output:
        _write(args.output, res.output.to_hex() if args.output_format == "hex" else res.output.to_str())
    return EXIT_ABORT if res.transcript.abort else EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    plan = plan_protocol(cfg)
    rng = np.random.default_rng(cfg.rng_seed)
    x1 = _bits_arg(args.x1, args.x1_file, args.format, cfg.n)
    if x1 is None:
        x1 = BitString(rng.integers(0, 2, cfg.n, dtype=np.uint8))
    tr = bell_test(plan, x1, rng)
    _write(args.transcript, tr.to_csv())
    if args.behavior:
        _write(args.behavior, plan.device.to_csv())
    return EXIT_OK


def cmd_bound(args) -> int:
    cfg = EatConfig.from_dict(json.loads(_read_text(args.config)))
    cert = certificate(cfg)
    _write(args.out, _dump_json({"config": cfg.to_dict(), "certificate": cert.to_dict()}))
    return EXIT_OK


def cmd_extract(args) -> int:
    x = _parse_bits(_read_text(args.source), args.format)
    t = args.t if args.t is not None else min_seed_length(x.length)
    if args.design:
        wd = WeakDesign.from_json(_read_text(args.design))
        rep = validate_weak_design(wd)
        if not rep.passed:
            raise InfeasibleConfigError("design", "; ".join(rep.failures))
    else:
        wd = build_weak_design(args.m, t)
    seed = _parse_bits(args.seed, args.seed_format, wd.d if args.seed_format == "hex" else None)
    out = trevisan_extract(x, seed, wd, RSHadamardCode(x.length, wd.t))
    if args.dump_design:
        _write(args.dump_design, wd.to_json() + "\n")
    _write(args.out, out.to_hex() if args.output_format == "hex" else out.to_str())
    return EXIT_OK


def cmd_twosource(args) -> int:
    x1 = _parse_bits(args.x1 if args.x1 is not None else _read_text(args.x1_file), args.format)
    x2 = _parse_bits(args.x2 if args.x2 is not None else _read_text(args.x2_file), args.format)
    mode = ExtractorMode(args.mode)
    report = {"mode": mode.value, "m": args.m, "n1": x1.length, "n2": x2.length}
    raz = None
    if args.k1 is not None and args.k2 is not None:
        raz = RazParams(x1.length, x2.length, args.k1, args.k2, args.m, args.delta_prime)
        report["raz"] = raz_params_check(raz).to_dict()
    out = two_source_extract(x1, x2, args.m, mode, raz)
    report["output"] = out.to_str()
    report["output_hex"] = out.to_hex()
    _write(args.out, _dump_json(report))
    return EXIT_OK


def cmd_score(args) -> int:
    b = behavior_from_csv(_read_text(args.behavior))
    nu = None
    if args.nu:
        nu = InputDistribution.windowed(json.loads(_read_text(args.nu)), args.eps)
    out = {"parties": b.parties, "eps": args.eps, "signalling_error": b.signalling_error()}
    if b.parties == 2:
        out["mdl_hardy"] = mdl_hardy_score(b, nu, args.eps).value
    else:
        out["mdl_ghz"] = mdl_ghz_score(b, nu, args.eps).value
        out["mermin"] = mermin_score(b)
    _write(args.out, _dump_json(out))
    return EXIT_OK


def cmd_certify_srs(args) -> int:
    t = args.t if args.t is not None else min_seed_length(args.n)
    params = desk_params(args.n, args.m, args.n, t)
    if args.eps is not None:
        params = dataclasses.replace(params, eps=args.eps)
    eps = params.eps
    fam = dict(family=args.family, family_bits=args.family_bits, family_seed=args.family_seed)
    if args.x1 is not None:
        srs = build_srs(_parse_bits(args.x1, args.format, args.n), params, args.m_prime,
                        args.rule, strict=False, **fam)
        _write(args.dump, srs.dumps())
    cert = certify_srs(Distribution.uniform(args.n), params, args.m_prime, args.rule, eps=eps, **fam)
    out = cert.to_dict()
    out["params"] = params.to_dict()
    _write(args.out, _dump_json(out))
    return EXIT_OK


# --------------------------------------------------------------------------


def _source_opts(p, both=True):
    p.add_argument("--x1", help="first source as bits (or hex with --format hex)")
    p.add_argument("--x1-file")
    if both:
        p.add_argument("--x2")
        p.add_argument("--x2-file")
    p.add_argument("--format", choices=("bits", "hex"), default="bits")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="blockamp", description="Randomness amplification toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="full protocol pipeline")
    p.add_argument("--config", help="ProtocolConfig JSON")
    p.add_argument("--seed", type=int, help="overrides rng_seed")
    _source_opts(p)
    p.add_argument("--report", default="-", help="SecurityReport JSON path (default stdout)")
    p.add_argument("--transcript", help="transcript CSV path")
    p.add_argument("--output", help="path for the extracted bits")
    p.add_argument("--output-format", choices=("bits", "hex"), default="bits")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="device rounds and transcript only")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    _source_opts(p, both=False)
    p.add_argument("--transcript", default="-")
    p.add_argument("--behavior", help="also write the device behaviour CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bound", help="entropy certificate from an EatConfig JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("extract", help="seeded extraction of one source string")
    p.add_argument("--source", required=True, help="file with bits or hex ('-' for stdin)")
    p.add_argument("--format", choices=("bits", "hex"), default="bits")
    p.add_argument("--seed", required=True)
    p.add_argument("--seed-format", choices=("bits", "hex"), default="bits")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--t", type=int)
    p.add_argument("--design", help="design JSON to use instead of building one")
    p.add_argument("--dump-design")
    p.add_argument("--out", default="-")
    p.add_argument("--output-format", choices=("bits", "hex"), default="bits")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("twosource", help="two-source extraction with a parameter report")
    _source_opts(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--mode", choices=[m.value for m in ExtractorMode], default="inner-product")
    p.add_argument("--k1", type=float)
    p.add_argument("--k2", type=float)
    p.add_argument("--delta-prime", type=float, default=0.1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_twosource)

    p = sub.add_parser("score", help="MDL score of a behaviour CSV")
    p.add_argument("--behavior", required=True)
    p.add_argument("--nu", help="JSON list of input probabilities")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("certify-srs", help="exact SRS block distances for a uniform source")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--t", type=int)
    p.add_argument("--m-prime", type=int, default=2)
    p.add_argument("--eps", type=float)
    p.add_argument("--family", choices=("full", "effective", "sampled"), default="effective")
    p.add_argument("--family-bits", type=int)
    p.add_argument("--family-seed", type=int, default=0)
    p.add_argument("--rule", default="prefix")
    p.add_argument("--x1", help="also dump the SRS built from this source")
    p.add_argument("--format", choices=("bits", "hex"), default="bits")
    p.add_argument("--dump", default="-")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_certify_srs)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleConfigError as exc:
        print(f"infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
