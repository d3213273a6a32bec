"""JSON run configuration for the ``ellax`` command line tool.

Complex numbers may be written as plain numbers, as strings such as
``"0.3-0.2j"`` or as ``{"re": ..., "im": ...}``; argument points as
``{"kind": "plain" | "hatted", "value": <complex>}``.  A ``suites`` mapping
overlays per-suite settings on the top level, and a suite may list
``cases``, each a further overlay.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .biorth import ArgumentPoint
from .errors import DomainError, EllaxError
from .params import ParameterSet, solve_last
from .quadrature import QuadratureControls


class ConfigError(EllaxError):
    """Malformed or inconsistent configuration (exit code 2)."""


def parse_complex(value) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"expected a complex number, got {value!r}")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.strip().replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number {value!r}") from exc
    if isinstance(value, dict) and set(value) <= {"re", "im"} and value:
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    raise ConfigError(f"cannot parse complex number {value!r}")


def dump_complex(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def parse_point(value) -> ArgumentPoint:
    if isinstance(value, dict) and "kind" in value:
        kind = value["kind"]
        if kind not in ("plain", "hatted"):
            raise ConfigError(f"argument kind must be plain or hatted, got {kind!r}")
        return ArgumentPoint(parse_complex(value["value"]), kind == "hatted")
    return ArgumentPoint(parse_complex(value), False)


def dump_point(pt: ArgumentPoint) -> dict:
    return {"kind": pt.kind, "value": dump_complex(pt.value)}


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("v", "w", "v_prime", "w_prime"):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


@dataclass(frozen=True)
class RunConfig:
    p: complex
    q: complex
    m: int
    n: int
    u: tuple
    v: ArgumentPoint | None = None
    w: ArgumentPoint | None = None
    v_prime: ArgumentPoint | None = None
    w_prime: ArgumentPoint | None = None
    quadrature: QuadratureControls = field(default_factory=QuadratureControls)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    label: str = ""
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        try:
            p = parse_complex(raw["p"])
            q = parse_complex(raw["q"])
            m = int(raw["m"])
            n = int(raw["n"])
            u = [parse_complex(x) for x in raw["u"]]
        except KeyError as exc:
            raise ConfigError(f"missing config field {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from exc
        if len(u) == 2 * m + 5:
            u.append(solve_last(p, q, m, n, u))
        elif len(u) != 2 * m + 6:
            raise ConfigError(f"order m={m} needs {2 * m + 5} or {2 * m + 6} parameters, got {len(u)}")
        quad = raw.get("quadrature") or {}
        try:
            controls = QuadratureControls(
                N=None if quad.get("N") is None else int(quad["N"]),
                refine=float(quad.get("refine", QuadratureControls().refine)),
                max_N=None if quad.get("max_N") is None else int(quad["max_N"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad quadrature settings: {exc}") from exc
        pts = {}
        for key in ("v", "w", "v_prime", "w_prime"):
            pts[key] = parse_point(raw[key]) if raw.get(key) is not None else None
        known = {"p", "q", "m", "n", "u", "v", "w", "v_prime", "w_prime", "quadrature",
                 "tolerances", "seed", "label", "suites", "cases"}
        return cls(p=p, q=q, m=m, n=n, u=tuple(u), quadrature=controls,
                   tolerances=dict(raw.get("tolerances") or {}), seed=int(raw.get("seed", 0)),
                   label=str(raw.get("label", "")),
                   extra={k: v for k, v in raw.items() if k not in known}, **pts)

    def params(self) -> ParameterSet:
        try:
            return ParameterSet(self.p, self.q, self.m, self.n, self.u)
        except DomainError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self) -> dict:
        out = {"p": dump_complex(self.p), "q": dump_complex(self.q), "m": self.m, "n": self.n,
               "u": [dump_complex(x) for x in self.u], "seed": self.seed}
        for key in ("v", "w", "v_prime", "w_prime"):
            pt = getattr(self, key)
            if pt is not None:
                out[key] = dump_point(pt)
        out["quadrature"] = {"N": self.quadrature.N, "refine": self.quadrature.refine,
                             "max_N": self.quadrature.max_N}
        if self.label:
            out["label"] = self.label
        return out


def load_raw(path: str | Path | None) -> dict:
    """Read a JSON config; ``None`` or ``"default"`` loads the bundled one."""
    try:
        if path is None or str(path) == "default":
            text = resources.files("ellax").joinpath("data/default.json").read_text()
        else:
            text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return raw


def suite_raw(raw: dict, suite: str) -> dict:
    """Top level overlaid with ``suites[suite]`` (the ``suites`` key dropped)."""
    base = {k: v for k, v in raw.items() if k != "suites"}
    over = (raw.get("suites") or {}).get(suite) or {}
    return deep_merge(base, over)


def case_configs(raw: dict, suite: str, seed: int | None = None) -> list[RunConfig]:
    """One RunConfig per case of a suite (a single case when none are listed)."""
    merged = suite_raw(raw, suite)
    cases = merged.pop("cases", None) or [{}]
    out = []
    for k, case in enumerate(cases):
        cfg = deep_merge(merged, case)
        cfg.setdefault("label", f"case{k}")
        if seed is not None:
            cfg["seed"] = seed
        out.append(RunConfig.from_dict(cfg))
    return out
