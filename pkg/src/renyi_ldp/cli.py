"""Command-line entry point: ``renyi-ldp <command> [options]``.

Options can also come from a flat ``key=value`` file given with
``--config``; flags on the command line win.  Tables go out as CSV with a
``# cfg:`` echo line before the header row, scalar results as flat JSON.
Exit status is 0 even when a result carries a mathematical flag, 2 for
usage errors and 3 when an enumeration budget is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import BudgetError, RenyiLDPError
from .inducing import (
    find_gamma0,
    induced_gibbs_bernoulli,
    induced_word_table,
    kac_spread,
    letter_grid,
)
from .ldp import (
    build_ensemble,
    corollary_functionals,
    expo_bound_check,
    equidist_table,
    rate_profile,
    smoothed_indicator,
    tightness_table,
)
from .pressure import pressure_bracket
from .renyi import RefMeasure, periodic_point
from .shift import enumerate_words, format_word
from .surd import quadratic_residual

COMMANDS = (
    "periodic",
    "pressure",
    "gamma0",
    "gibbs-check",
    "ensemble",
    "equidist",
    "corollary",
    "expo-check",
    "tightness",
    "rate-profile",
    "kac-spread",
)


class UsageError(RenyiLDPError):
    pass


@dataclass
class RunConfig:
    beta: float = 1.0
    n: int = 2
    n_min: int = 2
    n_max: int = 6
    max_digit: int = 3
    p_max: int = 200
    m_max: int = 200
    tol: float = 1e-3
    precision: int = 64
    format: str = ""
    budget: int = 10**8
    #: accepted for config compatibility; runs are sequential
    threads: int = 1
    level: int = 2
    letters: int = 2
    measure: str = "lebesgue"
    delta: float = 0.1
    gamma0: float = 0.0
    eps: float = 0.1
    ell_min: int = 1
    ell_max: int = 3
    t_min: float = -4.0
    t_max: float = 4.0
    t_steps: int = 9
    bins: int = 100
    phi: str = "id"
    psi: str = "one_plus_id"
    f2: str = "cos"
    out: str = "-"

    def validate(self) -> None:
        if not self.beta > 0:
            raise UsageError("beta must be > 0")
        for k in ("n", "n_min", "n_max", "max_digit", "p_max", "m_max", "precision", "budget", "threads", "level", "letters", "ell_min", "ell_max", "t_steps", "bins"):
            if getattr(self, k) < 1:
                raise UsageError(f"{k} must be >= 1")
        if self.n_min > self.n_max:
            raise UsageError("n_min must not exceed n_max")
        if self.ell_min > self.ell_max:
            raise UsageError("ell_min must not exceed ell_max")
        if not self.tol > 0:
            raise UsageError("tol must be > 0")
        if self.format not in ("", "csv", "json"):
            raise UsageError("format must be csv or json")
        RefMeasure.parse(self.measure)
        for k in ("phi", "psi", "f2"):
            if getattr(self, k) not in FUNCTIONS:
                raise UsageError(f"{k} must be one of {sorted(FUNCTIONS)}")

    def echo(self) -> str:
        return " ".join(f"{f.name}={getattr(self, f.name)}" for f in fields(self))


FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": lambda x: np.ones_like(np.asarray(x, dtype=float)),
    "id": lambda x: np.asarray(x, dtype=float),
    "one_plus_id": lambda x: 1.0 + np.asarray(x, dtype=float),
    "indicator_half": lambda x: (np.asarray(x, dtype=float) >= 0.5).astype(float),
    "cos": lambda x: np.cos(np.asarray(x, dtype=float)),
    "square": lambda x: np.asarray(x, dtype=float) ** 2,
}


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _coerce(name: str, value):
    f = {f.name: f for f in fields(RunConfig)}.get(name)
    if f is None:
        raise UsageError(f"unknown config key {name!r}")
    default = f.default
    try:
        if isinstance(default, bool):
            return str(value).lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(float(value)) if isinstance(value, str) and "e" in value.lower() else int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError:
        raise UsageError(f"bad value for {name}: {value!r}") from None
    return str(value)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="renyi-ldp", description="Periodic-orbit and pressure experiments for the Renyi map.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key=value file; flags override it")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        aliases = {"n_max": ["--nmax"], "n_min": ["--nmin"], "p_max": ["--pmax"], "m_max": ["--mmax"]}.get(f.name, [])
        ap.add_argument(flag, *aliases, dest=f.name, default=None, metavar=f.name.upper())
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        values.update(read_config(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in values.items()})
    cfg.validate()
    return cfg


# Emitters -----------------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def emit_csv(cfg: RunConfig, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# cfg: {cfg.echo()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(x) for x in r])
    return buf.getvalue()


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def emit_json(cfg: RunConfig, obj: dict) -> str:
    out = {k: _json_value(v) for k, v in obj.items()}
    out["cfg"] = cfg.echo()
    return json.dumps(out, indent=2, sort_keys=False) + "\n"


def _table_or_json(cfg: RunConfig, header, rows, default="csv") -> str:
    fmt = cfg.format or default
    if fmt == "json":
        body = {"cfg": cfg.echo(), "rows": [{h: _json_value(v) for h, v in zip(header, r)} for r in rows]}
        return json.dumps(body, indent=2) + "\n"
    return emit_csv(cfg, header, rows)


def _scalar(cfg: RunConfig, obj: dict, default="json") -> str:
    fmt = cfg.format or default
    if fmt == "csv":
        return emit_csv(cfg, list(obj), [list(obj.values())])
    return emit_json(cfg, obj)


# Commands -------------------------------------------------------------------------


def cmd_periodic(cfg: RunConfig) -> str:
    rows = []
    with mpmath.workprec(cfg.precision):
        for w in enumerate_words(cfg.n, cfg.max_digit, cfg.budget):
            pt = periodic_point(w, cfg.precision)
            res = quadratic_residual(pt.matrix, pt.xi)
            rows.append(
                [format_word(w), str(pt.xi), pt.xi.decimal(30), mpmath.nstr(pt.derivative, 17), mpmath.nstr(pt.weight(cfg.beta), 17), str(res)]
            )
    return _table_or_json(cfg, ["word", "surd", "xi", "derivative", "weight", "exact_residual"], rows)


def cmd_pressure(cfg: RunConfig) -> str:
    br = pressure_bracket(cfg.beta, cfg.n, cfg.max_digit, cfg.budget)
    return _scalar(
        cfg,
        {"lo": br.lo, "hi": br.hi, "width": br.width, "tail": br.tail, "dn": br.Dn, "zn_lower": br.Zn_lower, "divergent": br.divergent},
    )


def cmd_gamma0(cfg: RunConfig) -> str:
    g = find_gamma0(cfg.beta, cfg.p_max, cfg.m_max, tol=cfg.tol, level=cfg.level)
    return _scalar(
        cfg,
        {
            "gamma0": g.gamma0,
            "lo": g.gamma_lo,
            "hi": g.gamma_hi,
            "width": g.width,
            "defect": g.defect,
            "pressure_lo": g.bracket.lo,
            "pressure_hi": g.bracket.hi,
            "evaluations": g.evaluations,
        },
    )


def cmd_gibbs_check(cfg: RunConfig) -> str:
    measure = RefMeasure.parse(cfg.measure)
    t = induced_word_table(cfg.letters, cfg.p_max, cfg.m_max, cfg.budget)
    p, m = letter_grid(cfg.p_max, cfg.m_max)
    L = len(p)
    lam = t.ref_masses(measure)
    lo = np.exp(np.log(lam) - t.log_sup(cfg.beta, cfg.gamma0))
    hi = np.exp(np.log(lam) - t.log_inf(cfg.beta, cfg.gamma0))
    rows = []
    for k in range(len(t)):
        idx, parts = k, []
        for _ in range(cfg.letters):
            parts.append(idx % L)
            idx //= L
        word = ";".join(f"{p[j]}:{m[j]}" for j in reversed(parts))
        rows.append([word, int(t.length[k]), lam[k], lo[k], hi[k], hi[k] / lo[k]])
    return _table_or_json(cfg, ["word", "length", "mass", "ratio_lo", "ratio_hi", "spread"], rows)


def cmd_ensemble(cfg: RunConfig) -> str:
    e = build_ensemble(cfg.beta, cfg.n, cfg.max_digit, cfg.budget)
    w = e.weights
    rows = [[format_word(e.word(k)), e.xi[k], e.raw_weights[k], w[k], e.tail_defect] for k in range(len(e))]
    return _table_or_json(cfg, ["word", "xi", "weight", "weight_normalized", "tail_defect"], rows)


def cmd_equidist(cfg: RunConfig) -> str:
    f = smoothed_indicator(cfg.eps)
    rows = [[r.n, r.A_n, r.Z_lower, r.tail, r.tail / r.Z_lower] for r in equidist_table(cfg.beta, range(cfg.n_min, cfg.n_max + 1), cfg.max_digit, f, cfg.budget)]
    return _table_or_json(cfg, ["n", "a_n", "z_n_lower", "tail", "tail_defect"], rows)


def cmd_corollary(cfg: RunConfig) -> str:
    rows = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        e = build_ensemble(cfg.beta, n, cfg.max_digit, cfg.budget)
        v = corollary_functionals(e, FUNCTIONS[cfg.phi], FUNCTIONS[cfg.psi], FUNCTIONS[cfg.f2])
        rows.append([n, v.a, v.b, v.c, e.tail_defect])
    return _table_or_json(cfg, ["n", "a_value", "b_value", "c_value", "tail_defect"], rows)


def cmd_expo_check(cfg: RunConfig) -> str:
    rows = []
    for n in range(cfg.n_min, cfg.n_max + 1):
        r = expo_bound_check(cfg.beta, n, delta=cfg.delta, gamma0=cfg.gamma0, max_digit=cfg.max_digit, measure=cfg.measure)
        for x in r.rows:
            rows.append([n, x.m, x.lhs_upper, x.lhs_truncated, x.rhs, x.log_margin, x.passed, r.hypothesis_met, r.G[1]])
    return _table_or_json(cfg, ["n", "m", "lhs_upper", "lhs_truncated", "rhs", "log_margin", "passed", "hypothesis_met", "n_1"], rows)


def cmd_tightness(cfg: RunConfig) -> str:
    table = tightness_table(cfg.beta, range(cfg.n_min, cfg.n_max + 1), range(cfg.ell_min, cfg.ell_max + 1), cfg.max_digit, cfg.measure)
    prev: dict[int, float] = {}
    rows = []
    for r in sorted(table, key=lambda r: (r.n, r.ell)):
        mono = r.outside <= prev.get(r.n, math.inf) + 1e-15
        prev[r.n] = r.outside
        rows.append([r.ell, r.n, r.delta, r.N1, r.outside, r.outside_upper, r.log_rate, mono])
    return _table_or_json(cfg, ["ell", "n", "delta", "n_1", "outside", "outside_upper", "log_rate", "monotone_in_ell"], rows)


def cmd_rate_profile(cfg: RunConfig) -> str:
    ts = np.linspace(cfg.t_min, cfg.t_max, cfg.t_steps)
    pts = rate_profile(cfg.beta, FUNCTIONS[cfg.psi], ts, cfg.n, cfg.max_digit)
    rows = [[p.t, p.s, p.F_lower, p.slack] for p in pts]
    return _table_or_json(cfg, ["t", "s", "f_lower", "slack"], rows)


def cmd_kac_spread(cfg: RunConfig) -> str:
    g = find_gamma0(cfg.beta, cfg.p_max, cfg.m_max, tol=cfg.tol, level=cfg.level)
    ks = kac_spread(induced_gibbs_bernoulli(cfg.beta, g.gamma0, cfg.p_max, cfg.m_max), cfg.bins)
    edges = ks.histogram.edges
    rows = [[edges[i], edges[i + 1], m, ks.defect, g.width] for i, m in enumerate(ks.histogram.masses)]
    return _table_or_json(cfg, ["bin_lo", "bin_hi", "mass", "defect", "gamma0_width"], rows)


HANDLERS: dict[str, Callable[[RunConfig], str]] = {
    "periodic": cmd_periodic,
    "pressure": cmd_pressure,
    "gamma0": cmd_gamma0,
    "gibbs-check": cmd_gibbs_check,
    "ensemble": cmd_ensemble,
    "equidist": cmd_equidist,
    "corollary": cmd_corollary,
    "expo-check": cmd_expo_check,
    "tightness": cmd_tightness,
    "rate-profile": cmd_rate_profile,
    "kac-spread": cmd_kac_spread,
}


def run(command: str, cfg: RunConfig) -> str:
    return HANDLERS[command](cfg)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        text = run(args.command, cfg)
    except BudgetError as exc:
        print(f"renyi-ldp: budget error: {exc}", file=sys.stderr)
        return 3
    except (RenyiLDPError, ValueError, OSError) as exc:
        print(f"renyi-ldp: usage error: {exc}", file=sys.stderr)
        return 2
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
