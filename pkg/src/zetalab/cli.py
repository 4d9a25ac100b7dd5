"""Command-line surface: subcommands over all modules, config handling,
atomic CSV/JSON output, checkpointing and thread control.

Exit codes: 0 success, 1 a scan or check found violations/failures,
2 usage error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import analytic, approx, ntcore, series, spaces
from .errors import ZetalabError

CACHE_ENV = "ZETALAB_CACHE"

COMMANDS = ("sieve", "scan6", "selberg", "norms", "fprime", "beurling",
            "series-check", "riesz", "span")


@dataclass
class RunConfig:
    command: str
    sieve_limit: int
    threads: int
    checkpoint_path: str | None
    output: str | None
    format: str
    params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"command": self.command, "sieve_limit": self.sieve_limit,
                "threads": self.threads, "checkpoint_path": self.checkpoint_path,
                "output": self.output, "format": self.format, "params": self.params}


class UsageError(Exception):
    pass


def _parse_omega(text: str) -> analytic.OmegaSpec:
    if not text.startswith("affine:"):
        raise UsageError(f"unsupported omega spec {text!r}; expected affine:c0,c1")
    try:
        c0, c1 = (float(x) for x in text[len("affine:"):].split(","))
    except ValueError as exc:
        raise UsageError(f"bad omega spec {text!r}") from exc
    return analytic.OmegaSpec(c0, c1)


def _parse_m_list(text: str) -> list[int]:
    """Either comma-separated values or lo:hi:factor geometric progressions."""
    if ":" in text:
        lo, hi, fac = text.split(":")
        lo, hi, fac = int(lo), int(hi), int(fac)
        out = []
        m = lo
        while m <= hi:
            out.append(m)
            m *= fac
        return out
    return [int(x) for x in text.split(",")]


def _build_parser(strict: bool = True) -> argparse.ArgumentParser:
    req = strict  # required flags may arrive via --config, checked after merging
    p = argparse.ArgumentParser(prog="zetalab", description=__doc__)
    p.add_argument("--config", help="key=value config file; flags override it")
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--sieve-limit", type=int, default=None)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--checkpoint", dest="checkpoint_path", default=None)
        sp.add_argument("--output", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("sieve", help="build tables and write the binary cache")
    common(sp)
    sp.add_argument("--cache-path", default=None)

    sp = sub.add_parser("scan6", help="scan the growth condition over an m-range")
    common(sp)
    sp.add_argument("--s", type=float, required=req)
    sp.add_argument("--omega", type=str, required=req)
    sp.add_argument("--n-cap", type=int, required=req)
    sp.add_argument("--m-lo", type=int, default=2)
    sp.add_argument("--m-hi", type=int, default=None)
    sp.add_argument("--chunk-size", type=int, default=8192)
    sp.add_argument("--per-m-detail", action="store_true")

    sp = sub.add_parser("selberg", help="small values of m*|sum mu(k)/k|")
    common(sp)
    sp.add_argument("--limit", type=int, required=req)
    sp.add_argument("--threshold", type=str, default="1/2")

    sp = sub.add_parser("norms", help="weighted norm trend of the F_m sequences")
    common(sp)
    sp.add_argument("--p", type=float, required=req)
    sp.add_argument("--alpha", type=float, required=req)
    sp.add_argument("--m-list", type=str, required=req)
    sp.add_argument("--truncation", type=int, default=None)

    sp = sub.add_parser("fprime", help="window of the divisor-restricted sequence")
    common(sp)
    sp.add_argument("--t", type=int, required=req)
    sp.add_argument("--n-lo", type=int, default=1)
    sp.add_argument("--n-hi", type=int, required=req)

    sp = sub.add_parser("beurling", help="numeric check of the integral identity")
    common(sp)
    sp.add_argument("--count", type=int, default=50)
    sp.add_argument("--max-n", type=int, default=20)
    sp.add_argument("--truncation", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--s-values", type=str, default="2,3,1.5+2j")

    sp = sub.add_parser("series-check", help="operator identity checks on h_k")
    common(sp)
    sp.add_argument("--which", choices=("A07", "A08", "A06"), default="A07")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--order", type=int, default=64)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = sub.add_parser("riesz", help="basis constants and Gram eigenvalue extremes")
    common(sp)
    sp.add_argument("--a", type=float, required=req)
    sp.add_argument("--alpha", type=float, required=req)
    sp.add_argument("--kmax", type=int, default=50)

    sp = sub.add_parser("span", help="weighted distance from a power of (1-z) to the h_k span")
    common(sp)
    sp.add_argument("--a", type=float, required=req)
    sp.add_argument("--alpha", type=float, required=req)
    sp.add_argument("--kmax", type=int, default=8)
    sp.add_argument("--order", type=int, default=2048)
    return p


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(f"bad config line: {line!r}")
                key, val = (x.strip() for x in line.split("=", 1))
                values[key.replace("-", "_")] = val
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return values


def parse_config(argv: list[str]) -> RunConfig:
    lenient = _build_parser(strict=False)
    ns, _ = lenient.parse_known_args(argv)
    if ns.command is None:
        raise UsageError("no command given")
    actions = _build_parser()._subparsers._group_actions[0].choices[ns.command]._actions
    if getattr(ns, "config", None):
        file_vals = _read_config_file(ns.config)
        known = set(vars(ns))
        for key in file_vals:
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
        # config values become defaults (converted with the flag's own type),
        # then argv overrides them
        types = {a.dest: (bool if isinstance(a, argparse._StoreTrueAction) else a.type)
                 for a in actions}
        defaults = {}
        for key, val in file_vals.items():
            conv = types.get(key)
            if conv is bool:
                defaults[key] = val.lower() in ("1", "true", "yes")
            elif conv is not None:
                defaults[key] = conv(val)
            else:
                defaults[key] = val
        # defaults must land on the subparser, whose own defaults would
        # otherwise clobber parent-level ones during the subparse
        lenient._subparsers._group_actions[0].choices[ns.command].set_defaults(**defaults)
        ns = lenient.parse_args(argv)
    else:
        ns = lenient.parse_args(argv)
    for a in actions:
        if a.required and getattr(ns, a.dest, None) is None:
            raise UsageError(f"missing required option --{a.dest.replace('_', '-')}")
    if ns.threads < 1:
        raise UsageError("--threads must be >= 1")
    base = {"command", "sieve_limit", "threads", "checkpoint_path", "output",
            "format", "config"}
    params = {k: v for k, v in vars(ns).items() if k not in base}
    cfg = RunConfig(ns.command, ns.sieve_limit or 0, ns.threads,
                    ns.checkpoint_path, ns.output, ns.format, params)
    return cfg


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(cfg: RunConfig, rows: list[list], json_payload: dict) -> None:
    """Write the report atomically; stdout when no output path is set."""
    json_payload = {"config": cfg.to_json_dict(), **json_payload}
    if cfg.format == "json":
        text = json.dumps(json_payload, indent=2, default=str) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf)
        for row in rows:
            w.writerow(row)
        text = buf.getvalue()
    if cfg.output:
        _atomic_write(cfg.output, text)
    else:
        sys.stdout.write(text)


def _default_cache_dir() -> str:
    return os.environ.get(CACHE_ENV, os.path.join(os.path.expanduser("~"), ".cache", "zetalab"))


def _get_tables(cfg: RunConfig, needed: int) -> ntcore.SieveTables:
    limit = cfg.sieve_limit or needed
    if limit < needed:
        raise UsageError(f"--sieve-limit {limit} below the largest index "
                         f"this command touches ({needed})")
    return ntcore.build_sieve(limit)


def run(cfg: RunConfig) -> int:
    p = cfg.params
    if cfg.command == "sieve":
        tables = _get_tables(cfg, cfg.sieve_limit or 10**6)
        path = p.get("cache_path") or os.path.join(_default_cache_dir(),
                                                   f"sieve_{tables.limit}.ntco")
        os.makedirs(os.path.dirname(path), exist_ok=True)
        ntcore.save_sieve(tables, path)
        _emit(cfg, [["limit", "cache_path"], [tables.limit, path]],
              {"limit": tables.limit, "cache_path": path})
        return 0

    if cfg.command == "scan6":
        n_cap = p["n_cap"]
        m_hi = p["m_hi"] if p["m_hi"] is not None else n_cap - 1
        tables = _get_tables(cfg, max(n_cap, m_hi))
        report = analytic.condition6_scan(
            (p["m_lo"], m_hi), n_cap, p["s"], _parse_omega(p["omega"]), tables,
            parallelism=cfg.threads, checkpoint_path=cfg.checkpoint_path,
            chunk_size=p["chunk_size"], per_m_detail=p["per_m_detail"])
        rows = [["m", "max_ratio"]] + [[m, repr(v)] for m, v in report.per_m_csv_rows()]
        if not report.per_m_maxima:
            rows = [["max_ratio", "arg_m", "arg_n", "violations"],
                    [repr(report.max_ratio), *report.max_arg, len(report.violations)]]
        _emit(cfg, rows, report.to_json_dict())
        return 1 if report.violations else 0

    if cfg.command == "selberg":
        limit = p["limit"]
        tables = _get_tables(cfg, limit)
        thr = Fraction(p["threshold"])
        points = ntcore.selberg_points(tables, limit, thr)
        rows = [["m"]] + [[m] for m in points]
        _emit(cfg, rows, {"limit": limit, "threshold": str(thr), "points": points})
        return 0

    if cfg.command == "norms":
        m_list = _parse_m_list(p["m_list"])
        w = spaces.WeightParams(p["p"], p["alpha"])
        tables = _get_tables(cfg, max(m_list))
        report = spaces.fm_norm_trend(m_list, w, tables, p["truncation"])
        rows = [["m", "truncated_value", "tail_bound", "truncation_index"]]
        for m in sorted(report.per_m):
            res = report.per_m[m]
            rows.append([m, repr(res.truncated_value), repr(res.tail_bound),
                         res.truncation_index])
        _emit(cfg, rows, {"max_value": report.max_value,
                          "last_first_ratio": report.last_first_ratio,
                          "per_m": {m: report.per_m[m].truncated_value
                                    for m in sorted(report.per_m)}})
        return 0

    if cfg.command == "fprime":
        m = ntcore.primorial(p["t"])
        window = approx.window_Fprime(m, p["n_lo"], p["n_hi"])
        rows = [["n", "value_num", "value_den"]]
        rows += [[n, int(v), 1] for n, v in
                 zip(range(p["n_lo"], p["n_hi"] + 1), window.values)]
        _emit(cfg, rows, {"m": m, "values": [int(v) for v in window.values]})
        return 0

    if cfg.command == "beurling":
        rng = np.random.default_rng(p["seed"])
        s_values = [complex(x) for x in p["s_values"].split(",")]
        worst = 0.0
        failures = 0
        for _ in range(p["count"]):
            n_top = int(rng.integers(2, p["max_n"] + 1))
            coeffs = [Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 5)))
                      for _ in range(n_top - 1)]
            combo = approx.make_admissible(*coeffs)
            for s in s_values:
                lhs = analytic.beurling_lhs(combo, s, p["truncation"])
                rhs = analytic.beurling_rhs(combo, s)
                err = abs(lhs.value - rhs)
                bound = lhs.tail_bound + 1e-10 * max(abs(rhs), 1.0)
                worst = max(worst, err / max(abs(rhs), 1e-30))
                if err > bound:
                    failures += 1
        _emit(cfg, [["failures", "worst_relative_error"], [failures, repr(worst)]],
              {"failures": failures, "worst_relative_error": worst})
        return 1 if failures else 0

    if cfg.command == "series-check":
        which, k, order, a, b, tol = (p["which"], p["k"], p["order"], p["a"],
                                      p["b"], p["tol"])
        if which == "A07":
            got = series.apply_T_a(series.hk_series(k, order), 1.0).coeffs
            want = np.arange(1, len(got) + 1) % k
        elif which == "A08":
            f = series.binomial_series(b - a, order).scale(-1.0 / b)
            got = series.apply_T_ab(f, a, b).coeffs
            want = np.ones(len(got))
        else:  # A06
            f = series.hk_series(k, order).conv(series.binomial_series(1 - a, order))
            got = series.apply_T_ab(f, a, 1.0).coeffs
            want = np.arange(1, len(got) + 1) % k
        err = float(np.max(np.abs(got - want)))
        _emit(cfg, [["which", "max_abs_error", "tol"], [which, repr(err), tol]],
              {"which": which, "max_abs_error": err, "tol": tol})
        return 0 if err <= tol else 1

    if cfg.command == "riesz":
        params = series.OperatorParams(p["a"], p["alpha"])
        order = p["kmax"] + 1
        basis = [series.g_basis(k, params, order) for k in range(p["kmax"] + 1)]
        diag = series.dalpha_gram(basis, p["alpha"] + 2, params)
        _emit(cfg, [["C0", "C1", "H", "eig_min", "eig_max"],
                    [repr(diag.C0), repr(diag.C1), repr(diag.H_of_alpha),
                     repr(diag.eig_min), repr(diag.eig_max)]],
              {"C0": diag.C0, "C1": diag.C1, "H": diag.H_of_alpha,
               "eig_min": diag.eig_min, "eig_max": diag.eig_max,
               "bijective_range": params.bijective})
        return 0 if diag.C1 < 1.0 and diag.eig_min > 0 else 1

    if cfg.command == "span":
        a, alpha, kmax, order = p["a"], p["alpha"], p["kmax"], p["order"]
        weight = alpha
        target = series.binomial_series(1 - a, order)
        mult = series.binomial_series(1 - a, order)
        basis = [series.hk_series(k, order).conv(mult) for k in range(2, kmax + 2)]
        dists = [series.span_distance(target, basis[: j + 1], weight)
                 for j in range(len(basis))]
        rows = [["K", "distance"]] + [[j + 1, repr(d)] for j, d in enumerate(dists)]
        _emit(cfg, rows, {"distances": dists})
        return 0

    raise UsageError(f"unknown command {cfg.command}")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse's own usage failures
        return 0 if exc.code in (0, None) else 2
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except ZetalabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
