"""Command-line front end: ``python -m synclab <command>``.

Exit codes: 0 success, 1 a check failed, 2 invalid configuration, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import discord, protocol, selftest, sync
from .clock import default_povm_points

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

CSV_FIELDS = [
    "n", "povm_points", "dE", "dt", "dS", "t1_rhs", "t1_margin", "t1_holds",
    "lemma1_applicable", "lemma1_holds", "delta_BA", "delta_AB", "t2_rhs", "t2_holds", "seed",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    povm_points: int | None = None
    restarts: int = 64
    seed: int = 0
    grid: bool = False
    out_path: str | None = None
    threads: int | None = None
    n_min: int = 2
    n_max: int = 8
    control_product: bool = False

    def points_for(self, n):
        return default_povm_points(n) if self.povm_points is None else self.povm_points

    def validate(self, ns):
        for n in ns:
            if n < 2:
                raise ConfigError("n must be >= 2")
            if self.points_for(n) < 2 * n - 1:
                raise ConfigError(f"povm-points must be >= 2n-1 = {2 * n - 1}")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def discord_config(self):
        return discord.DiscordConfig(
            restarts=self.restarts, seed=self.seed, grid=self.grid, threads=self.threads
        )


def fmt(x):
    return f"{x:.12g}"


def flag(ok):
    return "PASS" if ok else "FAIL"


def cmd_spectrum(cfg, out):
    rep = protocol.verify_spectrum(cfg.n)
    print(f"spectrum n={cfg.n}", file=out)
    print(f"{'k':>4}  {'analytic':>16}  {'numeric':>16}", file=out)
    for k, (a, b) in enumerate(zip(rep.analytic, rep.numeric), 1):
        print(f"{k:>4}  {a:16.12f}  {abs(b) if abs(b) < 1e-14 else b:16.12f}", file=out)
    print("energy block dims: " + " ".join(str(d) for d in rep.block_dims), file=out)
    ok = rep.max_abs_dev < 1e-9
    print(f"max_abs_dev: {rep.max_abs_dev:.3e}", file=out)
    print(f"spectrum: {flag(ok)}", file=out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_protocol(cfg, out):
    t = protocol.run_protocol(cfg.n)
    print(f"protocol n={cfg.n}", file=out)
    print(f"{'stage':<20} {'entropy':>16}", file=out)
    for name, value in t.entropy_ledger.items():
        print(f"{name:<20} {value:16.12f}", file=out)
    ds = protocol.entropy_generated(t)
    print(f"dS: {ds:.6f}", file=out)
    print(f"S(sigma) analytic: {protocol.analytic_entropy(cfg.n):.6f}", file=out)
    audit = protocol.audit_transcript(t)
    for name, ok in audit.items():
        print(f"audit {name}: {flag(ok)}", file=out)
    return EXIT_OK if all(audit.values()) else EXIT_CHECK


def _lemma1_line(rep):
    if not rep.applicable:
        return "lemma1: N/A (dt > T/12)"
    verdict = "HOLDS" if rep.holds else "FAILS"
    return f"lemma1: 1/(4dt)={fmt(rep.lhs)} norm={fmt(rep.rhs)} {verdict}"


def cmd_bounds(cfg, out):
    n, points = cfg.n, cfg.points_for(cfg.n)
    if cfg.control_product:
        s = sync.product_control(n)
        dt = sync.canonical_time_deviation(s, points)
        lem = sync.check_lemma1(s, dt=dt)
        print(f"bounds n={n} povm_points={points} control=product", file=out)
        print(f"dt: {fmt(dt)}  T/sqrt(12): {fmt(s.period / np.sqrt(12))}", file=out)
        print(f"derivative_norm: {fmt(lem.rhs)}", file=out)
        print("theorem1: N/A (control state is not produced by the protocol)", file=out)
        print(_lemma1_line(lem), file=out)
        return EXIT_OK if lem.holds else EXIT_CHECK
    t1 = protocol.check_theorem1(n, points)
    lem = sync.check_lemma1(sync.two_clock_sync_state(n), dt=t1.dt)
    print(f"bounds n={n} povm_points={points}", file=out)
    print(f"dt: {fmt(t1.dt)}", file=out)
    print(f"dE: {fmt(t1.dE)}", file=out)
    print(f"dS: {fmt(t1.dS)}", file=out)
    print(f"theorem1 rhs: {fmt(t1.rhs)}  margin: {fmt(t1.margin)}", file=out)
    print(f"theorem1: {'HOLDS' if t1.holds else 'FAILS'}", file=out)
    print(_lemma1_line(lem), file=out)
    return EXIT_OK if t1.holds and lem.holds else EXIT_CHECK


def _basis_summary(result):
    # |u_k|^2 per component; phases are gauge-dependent
    probs = np.abs(result.basis) ** 2
    rows = [" ".join(f"{x:.6f}" for x in row) for row in probs.T]
    return rows


def cmd_discord(cfg, out):
    n, points = cfg.n, cfg.points_for(cfg.n)
    s = sync.two_clock_sync_state(n)
    dcfg = cfg.discord_config()
    ba = discord.minimize_discord(s.sigma, s.dims, "A", "z", dcfg)
    ab = discord.minimize_discord(s.sigma, s.dims, "B", "z", dcfg)
    rep = discord.check_theorem2(n, points, dcfg, sync=s)
    print(f"discord n={n} povm_points={points} restarts={cfg.restarts} seed={cfg.seed} grid={cfg.grid}", file=out)
    print(f"delta(B|A): {fmt(ba.value)}  [{ba.source}]", file=out)
    print(f"delta(A|B): {fmt(ab.value)}  [{ab.source}]", file=out)
    print(f"mutual_information: {fmt(discord.mutual_information(s.sigma, s.dims))}", file=out)
    print(f"dt: {fmt(rep.dt)}  dE: {fmt(rep.dE)}", file=out)
    print(f"theorem2 rhs: {fmt(rep.rhs)}", file=out)
    for label, res in (("A", ba), ("B", ab)):
        print(f"basis on {label} (|u_k|^2 per row):", file=out)
        for row in _basis_summary(res):
            print("  " + row, file=out)
    print(f"theorem2: {'HOLDS' if rep.holds else 'FAILS'}", file=out)
    return EXIT_OK if rep.holds else EXIT_CHECK


def sweep_row(n, cfg):
    points = cfg.points_for(n)
    t1 = protocol.check_theorem1(n, points)
    s = sync.two_clock_sync_state(n)
    lem = sync.check_lemma1(s, dt=t1.dt)
    t2 = discord.check_theorem2(n, points, cfg.discord_config(), sync=s)
    return {
        "n": n,
        "povm_points": points,
        "dE": fmt(t1.dE),
        "dt": fmt(t1.dt),
        "dS": fmt(t1.dS),
        "t1_rhs": fmt(t1.rhs),
        "t1_margin": fmt(t1.margin),
        "t1_holds": str(t1.holds).lower(),
        "lemma1_applicable": str(lem.applicable).lower(),
        "lemma1_holds": str(lem.holds).lower(),
        "delta_BA": fmt(t2.delta_BA),
        "delta_AB": fmt(t2.delta_AB),
        "t2_rhs": fmt(t2.rhs),
        "t2_holds": str(t2.holds).lower(),
        "seed": cfg.seed,
    }


def sweep_csv(cfg):
    """CSV text for ``n_min..n_max``; rows are computed concurrently but assembled in order."""
    ns = list(range(cfg.n_min, cfg.n_max + 1))
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        rows = list(pool.map(lambda n: sweep_row(n, cfg), ns))
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(cfg, out):
    text = sweep_csv(cfg)
    if cfg.out_path is None:
        out.write(text)
    else:
        try:
            with open(cfg.out_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {cfg.out_path}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"wrote {text.count(chr(10)) - 1} rows to {cfg.out_path}", file=out)
    rows = list(csv.DictReader(io.StringIO(text)))
    ok = all(r["t1_holds"] == "true" and r["t2_holds"] == "true" and r["lemma1_holds"] == "true" for r in rows)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_selftest(cfg, out):
    results = selftest.run_all(cfg.seed)
    modules = list(dict.fromkeys(r.module for r in results))
    ok = True
    for module in modules:
        mine = [r for r in results if r.module == module]
        for r in mine:
            print(f"  {module}/{r.name}: {flag(r.passed)} ({r.cases - r.failures}/{r.cases} cases)", file=out)
        passed = sum(r.passed for r in mine)
        print(f"{module}: {passed}/{len(mine)} suites {flag(passed == len(mine))}", file=out)
        ok &= passed == len(mine)
    return EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "protocol": cmd_protocol,
    "bounds": cmd_bounds,
    "discord": cmd_discord,
    "sweep": cmd_sweep,
    "selftest": cmd_selftest,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="synclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=2, help="clock dimension")
    common.add_argument("--povm-points", type=int, default=None, help="outcomes of the covariant POVM (default 8(2n-1))")
    common.add_argument("--restarts", type=int, default=64, help="random restarts of the discord minimizer")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", action="store_true", help="seed qubit-side discord search with a Bloch-angle grid")
    common.add_argument("--out", default=None, help="output file (sweep)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (env SYNCLAB_THREADS)")
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "sweep":
            p.add_argument("--n-min", type=int, default=2)
            p.add_argument("--n-max", type=int, default=8)
        if name == "bounds":
            p.add_argument("--control-product", action="store_true", help=argparse.SUPPRESS)
    return parser


def config_from_args(args):
    threads = args.threads
    if threads is None and os.environ.get("SYNCLAB_THREADS"):
        try:
            threads = int(os.environ["SYNCLAB_THREADS"])
        except ValueError:
            raise ConfigError("SYNCLAB_THREADS must be an integer") from None
    cfg = RunConfig(
        n=args.n,
        povm_points=args.povm_points,
        restarts=args.restarts,
        seed=args.seed,
        grid=args.grid,
        out_path=args.out,
        threads=threads,
        n_min=getattr(args, "n_min", 2),
        n_max=getattr(args, "n_max", 8),
        control_product=getattr(args, "control_product", False),
    )
    if args.command == "sweep":
        if cfg.n_min > cfg.n_max:
            raise ConfigError("n-min must not exceed n-max")
        cfg.validate(range(cfg.n_min, cfg.n_max + 1))
    elif args.command != "selftest":
        cfg.validate([cfg.n])
    else:
        cfg.validate([])
    return cfg


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return COMMANDS[args.command](cfg, out)
