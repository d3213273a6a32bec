"""``ellax`` command line tool: single evaluations, verification suites, autobalancing.

Exit codes: 0 pass, 1 verification failure, 2 configuration error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import kernel as K
from .biorth import ArgumentPoint, BiorthContext
from .config import ConfigError, RunConfig, dump_complex, load_raw, parse_complex
from .errors import AccuracyError, DomainError, EllaxError, PoleError, SingularContextError
from .params import solve_last
from .selberg import SelbergEngine, selberg_closed_form_m0
from .suites import SUITE_NAMES, run_suite

SCHEMA = "ellax-report/1"
EVAL_TARGETS = ("gamma", "theta", "selberg", "selberg-closed", "F", "Fplus")


def _parse_z(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
        if len(parts) == 1:
            return parse_complex(parts[0])
    except ValueError as exc:
        raise ConfigError(f"cannot parse --z {text!r}") from exc
    raise ConfigError(f"--z expects RE,IM, got {text!r}")


def _emit(obj, out: str | None = None):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args) -> int:
    raw = load_raw(args.config)
    z = _parse_z(args.z) if args.z is not None else None
    est = 0.0
    if args.target in ("gamma", "theta"):
        if z is None:
            raise ConfigError(f"eval {args.target} needs --z")
        try:
            p = parse_complex(raw["p"])
            q = parse_complex(raw["q"]) if args.target == "gamma" else None
        except KeyError as exc:
            raise ConfigError(f"missing config field {exc.args[0]!r}") from exc
        value = K.gamma(p, q, z) if args.target == "gamma" else K.theta(p, z)
    else:
        cfg = RunConfig.from_dict(raw)
        params = cfg.params()
        if args.target == "selberg-closed":
            value = selberg_closed_form_m0(params)
        elif args.target == "selberg":
            eng = SelbergEngine(params, cfg.quadrature)
            value = eng.selberg()
            est = eng.max_error
        else:
            if z is None:
                raise ConfigError(f"eval {args.target} needs --z")
            if cfg.v is None:
                raise ConfigError(f"eval {args.target} needs v in the config")
            ctx = BiorthContext(params, cfg.quadrature)
            if args.target == "F":
                value = ctx.F(z, cfg.v)
            else:
                value = ctx.Fplus(ArgumentPoint(z, args.x_kind == "hatted"), cfg.v)
            est = ctx.engine.max_error
    value = complex(value)
    _emit({"re": value.real, "im": value.imag, "est_error": float(est)})
    return 0


def build_report(suite: str, raw: dict, seed: int | None, timing: bool) -> tuple[dict, int]:
    top = RunConfig.from_dict(raw if seed is None else {**raw, "seed": seed})
    top.params()  # balancing is checked before any suite runs
    names = list(SUITE_NAMES) if suite == "all" else [suite]
    records, cases = [], {}
    for name in names:
        case_cfgs, recs = run_suite(name, raw, seed)
        cases[name] = [c.echo() for c in case_cfgs]
        for r in recs:
            if suite == "all":
                r.name = f"{name}/{r.name}"
            records.append(r)
    records.sort(key=lambda r: r.name)
    overall = all(r.passed for r in records)
    report = {
        "schema": SCHEMA,
        "tool": "ellax",
        "version": __version__,
        "suite": suite,
        "pass": overall,
        "config": top.echo(),
        "cases": cases,
        "records": [r.to_dict(timing) for r in records],
    }
    if any(r.error is not None for r in records):
        code = 3
    else:
        code = 0 if overall else 1
    return report, code


def cmd_verify(args) -> int:
    raw = load_raw(args.config)
    report, code = build_report(args.suite, raw, args.seed, args.timing)
    _emit(report, args.out)
    return code


def cmd_autobalance(args) -> int:
    raw = load_raw(args.config)
    try:
        p, q = parse_complex(raw["p"]), parse_complex(raw["q"])
        m, n = int(raw["m"]), int(raw["n"])
        u = [parse_complex(x) for x in raw["u"]]
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc.args[0]!r}") from exc
    if len(u) != 2 * m + 5:
        raise ConfigError(f"autobalance needs {2 * m + 5} parameters, got {len(u)}")
    last = solve_last(p, q, m, n, u)
    if not 0 < abs(last) < 1:
        raise ConfigError(f"solved parameter u_{2 * m + 5} has modulus {abs(last):.6g}, outside (0, 1)")
    out = dict(raw)
    out["u"] = [dump_complex(x) for x in u + [last]]
    _emit(out)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ellax", description="Elliptic Selberg / Lax pair verification tool")
    parser.add_argument("--version", action="version", version=f"ellax {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="evaluate one function and print {re, im, est_error}")
    ev.add_argument("target", choices=EVAL_TARGETS)
    ev.add_argument("--config", default="default", help="JSON config file (default: bundled)")
    ev.add_argument("--z", help="point as RE,IM")
    ev.add_argument("--x-kind", choices=("plain", "hatted"), default="plain",
                    help="kind of the first Fplus argument")
    ev.set_defaults(func=cmd_eval)

    ve = sub.add_parser("verify", help="run a verification suite and emit a JSON report")
    ve.add_argument("suite", choices=SUITE_NAMES + ("all",))
    ve.add_argument("--config", default="default", help="JSON config file (default: bundled)")
    ve.add_argument("--out", help="write the report here instead of stdout")
    ve.add_argument("--seed", type=int, help="override the config seed")
    ve.add_argument("--timing", action="store_true", help="include per-check seconds (not byte-stable)")
    ve.set_defaults(func=cmd_verify)

    ab = sub.add_parser("autobalance", help="solve the last parameter from the balancing condition")
    ab.add_argument("--config", default="default", help="JSON config with 2m+5 parameters")
    ab.set_defaults(func=cmd_autobalance)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except PoleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AccuracyError, SingularContextError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EllaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
