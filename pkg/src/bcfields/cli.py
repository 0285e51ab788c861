"""Command-line entry point: ``bcfields <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from dataclasses import field as dc_field
from typing import Any, Sequence

from . import adelic, kms, klattice, verify
from .adelic import CylinderFunction, LevelSpec, make_point, parse_level, points, unit_points
from .errors import BCError, NEGATIVE_BETA_MESSAGE, ValidationError
from .numfield import (
    FieldSpec,
    enumerate_ideals,
    parse_field,
    split_prime,
    unit_roots,
)
from .zeta import parse_character, zeta_euler_smooth, zeta_partial, zeta_tail_bound

COMMANDS = ("field", "ideals", "zeta", "space", "state", "diagnostic", "lattice", "verify")


@dataclass
class RunConfig:
    command: str = ""
    field: str = "Q"
    level: str | None = None
    beta: float | None = None
    beta_grid: str | None = None
    bound: int = 10**4
    chi: str | None = None
    method: str = "dirichlet"
    w: str | None = None
    f: str = "constant"
    kind: str = "auto"
    nu: str | None = None
    table: bool = False
    lattice_op: str | None = None
    a: str | None = None
    b: str | None = None
    split: int | None = None
    profile: str = "quick"
    checks: str | None = None
    report: str | None = None
    inject_fault: str | None = None
    output: str | None = None
    precision: int = 17
    config: str | None = dc_field(default=None, repr=False)

    def to_json(self) -> str:
        d = {k: v for k, v in asdict(self).items() if k != "config"}
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**_checked_keys(json.loads(text)))


KEYS = {f.name for f in fields(RunConfig)} - {"config"}


def _checked_keys(d: dict) -> dict:
    if not isinstance(d, dict):
        raise ValidationError("config file must hold a JSON object")
    norm = {k.replace("-", "_"): v for k, v in d.items()}
    bad = sorted(k for k in norm if k not in KEYS)
    if bad:
        raise ValidationError(f"unknown config key(s): {', '.join(bad)}")
    return norm


# ---------------------------------------------------------------------------
# parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the same keys as the flags")
    common.add_argument("--field", default=argparse.SUPPRESS, help='"Q", "Q(sqrt-1)", "Q(sqrt5)", ...')
    common.add_argument("--output", "-o", default=argparse.SUPPRESS, help="write output here instead of stdout")
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS, help="significant digits (default 17)")

    p = argparse.ArgumentParser(prog="bcfields", description="Finite-level Bost-Connes systems for Q and quadratic fields.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    s = add("field", "field data and prime splitting")
    s.add_argument("--split", type=int, default=argparse.SUPPRESS, help="list the primes above p")

    s = add("ideals", "integral ideals up to a norm bound (CSV)")
    s.add_argument("--bound", type=int, default=argparse.SUPPRESS)

    s = add("zeta", "truncated Dedekind zeta (CSV)")
    _beta_args(s)
    s.add_argument("--bound", type=int, default=argparse.SUPPRESS)
    s.add_argument("--method", choices=("dirichlet", "euler"), default=argparse.SUPPRESS)

    s = add("space", "level points and cylinder masses")
    s.add_argument("--level", default=argparse.SUPPRESS, help='"12", "2^2,3^1" or "5:2^1"')
    _beta_args(s)
    s.add_argument("--table", action="store_true", default=argparse.SUPPRESS, help="CSV point,mass")

    s = add("state", "evaluate a KMS state on a cylinder function (JSON)")
    s.add_argument("--level", default=argparse.SUPPRESS)
    _beta_args(s)
    s.add_argument("--w", default=argparse.SUPPRESS, help="invertible point: integer or a,b")
    s.add_argument("--f", default=argparse.SUPPRESS,
                   help="constant[:c] | indicator:x | unit_indicator:p[:r] | zero_fiber:p[:r]^k | character:m:e1,e2")
    s.add_argument("--kind", choices=("auto", "extremal", "subcritical", "barycenter", "ground"), default=argparse.SUPPRESS)
    s.add_argument("--nu", default=argparse.SUPPRESS, help='"uniform" or "x=p;y=q" weights for a barycenter')
    s.add_argument("--bound", type=int, default=argparse.SUPPRESS)

    s = add("diagnostic", "uniqueness diagnostic over a beta grid (CSV)")
    s.add_argument("--chi", default=argparse.SUPPRESS, help='character selector "m:e1,e2,..."')
    _beta_args(s)
    s.add_argument("--bound", type=int, default=argparse.SUPPRESS)

    s = add("lattice", "K-lattice commensurability and groupoid coordinates")
    s.add_argument("lattice_op", choices=("comm", "groupoid"))
    s.add_argument("--level", default=argparse.SUPPRESS)
    s.add_argument("--a", default=argparse.SUPPRESS, help='"ideal=1/2;t=2;sign=+1;s=1"')
    s.add_argument("--b", default=argparse.SUPPRESS)

    s = add("verify", "run the invariant suite")
    s.add_argument("--profile", choices=("quick", "full"), default=argparse.SUPPRESS)
    s.add_argument("--checks", default=argparse.SUPPRESS, help="comma-separated check names (see --list)")
    s.add_argument("--report", default=argparse.SUPPRESS, help="CSV report path")
    s.add_argument("--inject-fault", dest="inject_fault", default=argparse.SUPPRESS, help="perturb a formula (local_mass)")
    s.add_argument("--list", action="store_true", help="print the check names and exit")
    return p


def _beta_args(s: argparse.ArgumentParser) -> None:
    s.add_argument("--beta", type=float, default=argparse.SUPPRESS)
    s.add_argument("--beta-grid", dest="beta_grid", default=argparse.SUPPRESS, help="start:stop:step (inclusive)")


def parse_config(argv: Sequence[str]) -> tuple[RunConfig, argparse.Namespace]:
    ns = build_parser().parse_args(list(argv))
    values: dict[str, Any] = {}
    if getattr(ns, "config", None):
        try:
            with open(ns.config, encoding="utf-8") as fh:
                values.update(_checked_keys(json.load(fh)))
        except OSError as err:
            raise ValidationError(f"cannot read config file: {err}") from err
        except json.JSONDecodeError as err:
            raise ValidationError(f"config file is not valid JSON: {err}") from err
    flags = {k: v for k, v in vars(ns).items() if k in KEYS}
    if values.get("command") not in (None, ns.command):
        raise ValidationError(f"config is for {values['command']!r}, command line says {ns.command!r}")
    beta_from_file = {k for k in ("beta", "beta_grid") if k in values}
    beta_from_flags = {k for k in ("beta", "beta_grid") if k in flags}
    if beta_from_flags and beta_from_file - beta_from_flags:
        # a flag replaces the file's choice of beta form
        for k in beta_from_file - beta_from_flags:
            values.pop(k)
    values.update(flags)
    values["command"] = ns.command
    cfg = RunConfig(**values)
    validate(cfg)
    return cfg, ns


def validate(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ValidationError(f"unknown command {cfg.command!r}")
    if cfg.beta is not None and cfg.beta_grid is not None:
        raise ValidationError("give either beta or beta_grid, not both")
    if cfg.precision < 1 or cfg.precision > 17:
        raise ValidationError("precision must be between 1 and 17")
    if cfg.bound < 1:
        raise ValidationError("bound must be >= 1")
    for b in _betas(cfg):
        if math.isnan(b):
            raise ValidationError("beta is NaN")
        if cfg.command in ("state", "space", "diagnostic"):
            if b < 0:
                raise ValidationError(f"{NEGATIVE_BETA_MESSAGE} (got beta = {b})")
            if b == 0:
                raise ValidationError("beta must be positive")
    parse_field(cfg.field)
    if cfg.command in ("space", "state", "lattice") and not cfg.level:
        raise ValidationError(f"{cfg.command} needs --level")
    if cfg.command == "diagnostic" and not cfg.chi:
        raise ValidationError("diagnostic needs --chi")
    if cfg.command == "lattice" and not (cfg.a and cfg.b):
        raise ValidationError("lattice needs --a and --b")
    if cfg.command in ("zeta", "diagnostic") and not _betas(cfg):
        raise ValidationError(f"{cfg.command} needs --beta or --beta-grid")


def parse_grid(text: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError as err:
        raise ValidationError(f"beta grid must be start:stop:step, got {text!r}") from err
    if step <= 0 or stop < start:
        raise ValidationError("beta grid needs step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


def _betas(cfg: RunConfig) -> list[float]:
    if cfg.beta_grid is not None:
        return parse_grid(cfg.beta_grid)
    return [] if cfg.beta is None else [float(cfg.beta)]


def threads() -> int:
    raw = os.environ.get("BC_FIELDS_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as err:
        raise ValidationError(f"BC_FIELDS_THREADS must be an integer, got {raw!r}") from err
    return max(1, n)


def _fan_out(fn, items):
    n = threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# output

def fmt(x, digits: int) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, f".{digits}g")
    return str(x)


def to_json(obj, digits: int) -> str:
    """JSON with floats written to ``digits`` significant digits (inf as a string)."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v, digits)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v, digits) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, complex):
        if obj.imag == 0:
            return to_json(obj.real, digits)
        return to_json({"re": obj.real, "im": obj.imag}, digits)
    if isinstance(obj, float):
        return json.dumps(fmt(obj, digits)) if math.isinf(obj) or math.isnan(obj) else fmt(obj, digits)
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(str(obj))


def to_csv(header: list[str], rows: list[list], digits: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x, digits) for x in row])
    return buf.getvalue()


def _cell(x, digits):
    if isinstance(x, complex):
        return fmt(x.real, digits) if x.imag == 0 else f"{fmt(x.real, digits)}{'+' if x.imag >= 0 else '-'}{fmt(abs(x.imag), digits)}j"
    return fmt(x, digits)


# ---------------------------------------------------------------------------
# argument helpers

def parse_point(level: LevelSpec, text: str) -> adelic.YPoint:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    try:
        x = (int(parts[0]), int(parts[1]) if len(parts) > 1 else 0)
    except (ValueError, IndexError) as err:
        raise ValidationError(f"bad point {text!r}; use an integer or a,b") from err
    return make_point(level, x)


def _prime(F: FieldSpec, text: str):
    p, _, r = text.partition(":")
    try:
        primes = split_prime(F, int(p))
    except ValueError as err:
        raise ValidationError(f"bad prime {text!r}") from err
    if r:
        primes = tuple(P for P in primes if P.root == int(r))
        if not primes:
            raise ValidationError(f"no prime above {p} with root {r}")
    elif len(primes) > 1:
        raise ValidationError(f"{p} splits in {F.label}; write {p}:root")
    return primes[0]


def parse_function(level: LevelSpec, text: str) -> CylinderFunction:
    F = level.field
    name, _, arg = text.partition(":")
    if name == "constant":
        return CylinderFunction.constant(level, float(arg) if arg else 1.0)
    if name == "indicator":
        return CylinderFunction.indicator(level, [parse_point(level, arg)])
    if name == "unit_indicator":
        return adelic.unit_indicator(level, _prime(F, arg))
    if name == "zero_fiber":
        base, _, k = arg.partition("^")
        Z, _ = adelic.zero_fiber_set(level, _prime(F, base), int(k) if k else 1)
        return CylinderFunction.indicator(level, Z)
    if name == "character":
        return kms.character_function(level, parse_character(arg))
    raise ValidationError(f"unknown function {text!r}")


def parse_nu(level: LevelSpec, text: str | None) -> dict:
    if text is None or text == "uniform":
        return kms.uniform_Y0_measure(level)
    nu = {}
    for item in text.split(";"):
        x, _, p = item.partition("=")
        nu[parse_point(level, x)] = float(p)
    return nu


def parse_lattice(F: FieldSpec, level: LevelSpec, text: str) -> klattice.KLattice1:
    d = {"ideal": "1", "t": "1", "sign": "+1", "s": "1"}
    for item in text.split(";"):
        if not item.strip():
            continue
        k, _, v = item.partition("=")
        k = k.strip()
        if k not in d:
            raise ValidationError(f"unknown lattice key {k!r} (use ideal, t, sign, s)")
        d[k] = v.strip()

    def elem(s):
        parts = s.split(",")
        return (int(parts[0]), int(parts[1]) if len(parts) > 1 else 0)
    try:
        sign = int(d["sign"])
        return klattice.make_lattice(F, d["ideal"], sign, elem(d["t"]), level, elem(d["s"]))
    except ValueError as err:
        if isinstance(err, BCError):
            raise
        raise ValidationError(f"bad lattice datum {text!r}: {err}") from err


# ---------------------------------------------------------------------------
# commands

def cmd_field(cfg: RunConfig) -> str:
    F = parse_field(cfg.field)
    d = {"field": F.label, "kind": F.kind, "d": F.d, "discriminant": F.discriminant,
         "is_imaginary": F.is_imaginary, "w_K": F.w_K, "cn1_imaginary": F.cn1_imaginary}
    if F.is_imaginary or F.is_rational:
        d["units"] = [list(u) for u in unit_roots(F)] if F.is_imaginary else [[1, 0], [-1, 0]]
    if cfg.split is not None:
        d["primes"] = [{"prime": str(P), "norm": P.norm, "f": P.f, "ramified": P.ramified, "root": P.root}
                       for P in split_prime(F, cfg.split)]
    return to_json(d, cfg.precision) + "\n"


def cmd_ideals(cfg: RunConfig) -> str:
    F = parse_field(cfg.field)
    rows = [[str(a), int(a.norm)] for a in enumerate_ideals(F, cfg.bound)]
    return to_csv(["ideal", "norm"], rows, cfg.precision)


def cmd_zeta(cfg: RunConfig) -> str:
    F = parse_field(cfg.field)

    def row(beta):
        if cfg.method == "dirichlet":
            v = zeta_partial(F, beta, cfg.bound)
        else:
            v = zeta_euler_smooth(F, beta, cfg.bound)
        tb = zeta_tail_bound(F, beta, cfg.bound)
        return [F.label, beta, cfg.bound, cfg.method, v, tb.bound, tb.rigorous]
    rows = _fan_out(row, _betas(cfg))
    return to_csv(["field", "beta", "bound", "method", "value", "tail_bound", "tail_rigorous"], rows, cfg.precision)


def cmd_space(cfg: RunConfig) -> str:
    F = parse_field(cfg.field)
    L = parse_level(F, cfg.level)
    betas = _betas(cfg)
    if cfg.table:
        if len(betas) != 1:
            raise ValidationError("--table needs a single --beta")
        rows = [[y.label, adelic.cylinder_measure(L, betas[0], y)] for y in points(L)]
        return to_csv(["point", "mass"], rows, cfg.precision)
    d = {"field": F.label, "level": str(L), "points": len(points(L)), "invertible_points": len(unit_points(L))}
    if betas:
        d["total_mass"] = [adelic.set_measure(L, b, points(L)) for b in betas]
    return to_json(d, cfg.precision) + "\n"


def cmd_state(cfg: RunConfig) -> str:
    F = parse_field(cfg.field)
    L = parse_level(F, cfg.level)
    f = parse_function(L, cfg.f)
    betas = _betas(cfg)
    kind = cfg.kind
    if kind == "ground":
        st = kms.ground_state(L, parse_point(L, cfg.w or "1"))
        beta = math.inf
    else:
        if len(betas) != 1:
            raise ValidationError("state needs a single --beta")
        beta = betas[0]
        if kind == "auto":
            kind = "extremal" if beta > 1 and cfg.nu is None else ("barycenter" if beta > 1 else "subcritical")
        if kind == "extremal":
            st = kms.extremal_state(L, beta, parse_point(L, cfg.w or "1"), cfg.bound)
        elif kind == "barycenter":
            st = kms.barycenter_state(L, beta, parse_nu(L, cfg.nu), cfg.bound)
        else:
            st = kms.subcritical_state(L, beta)
    v, tail = st.evaluate(f)
    return to_json({"kind": kind, "beta": beta, "value": complex(v), "tail": tail}, cfg.precision) + "\n"


def cmd_diagnostic(cfg: RunConfig) -> str:
    F = parse_field(cfg.field)
    chi = parse_character(cfg.chi)
    rows = _fan_out(lambda b: [F.label, cfg.chi, b, cfg.bound, kms.uniqueness_diagnostic(F, chi, b, cfg.bound)],
                    _betas(cfg))
    return to_csv(["field", "chi", "beta", "bound", "ratio"], rows, cfg.precision)


def cmd_lattice(cfg: RunConfig) -> str:
    F = parse_field(cfg.field)
    L = parse_level(F, cfg.level)
    a, b = parse_lattice(F, L, cfg.a), parse_lattice(F, L, cfg.b)
    if cfg.lattice_op == "comm":
        return fmt(klattice.commensurable(a, b), cfg.precision) + "\n"
    g, y = klattice.to_groupoid(a, b)
    label = f"({g.norm})" if F.is_rational else str(g)
    return to_json({"g": label, "g_norm": str(g.norm), "y": y.label}, cfg.precision) + "\n"


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    names = [n.strip() for n in cfg.checks.split(",")] if cfg.checks else None
    undo = verify.inject_fault(cfg.inject_fault) if cfg.inject_fault else None
    try:
        results = verify.run(cfg.profile, names)
    finally:
        if undo:
            undo()
    text = verify.report_csv(results)
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text, 0 if all(r.passed for r in results) else 1


def run(cfg: RunConfig) -> tuple[str, int]:
    if cfg.command == "verify":
        return cmd_verify(cfg)
    handler = {"field": cmd_field, "ideals": cmd_ideals, "zeta": cmd_zeta, "space": cmd_space,
               "state": cmd_state, "diagnostic": cmd_diagnostic, "lattice": cmd_lattice}[cfg.command]
    return handler(cfg), 0


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg, ns = parse_config(argv)
        if cfg.command == "verify" and getattr(ns, "list", False):
            sys.stdout.write("\n".join(verify.REGISTRY) + "\n")
            return 0
        text, code = run(cfg)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except BCError as err:
        print(f"bcfields: error: {err}", file=sys.stderr)
        return 2
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
