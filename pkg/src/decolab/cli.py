"""Command-line entry point: ``decolab measure | verify | scan | random``.

Exit codes: 0 success, 1 a verification report failed, 2 bad input,
3 a solver did not converge.  Output is deterministic for a given seed.
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
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from . import channels as chn
from . import discord as dc
from . import qmat
from . import security as sc
from . import theorems as th
from .errors import DecolabError, NoConvergence
from .infotypes import fourier_mu_basis, standard_basis
from .states import DensityOperator, random_state, state_from_json, state_to_json

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
SUITES = ("thm1", "thm2", "thm3", "corollary", "inequalities", "channels", "triangle")
SUITE_DEFAULT_COUNT = {"thm1": 200, "thm2": 200, "thm3": 200, "corollary": 200, "inequalities": 200,
                       "triangle": 100}
SUITE_DEFAULT_DIMS = {"triangle": (2, 2)}
THREADS_ENV = "DECOLAB_THREADS"


class UsageError(Exception):
    """Bad command-line input; mapped to exit code 2."""


# -- formatting -------------------------------------------------------------------

def fmt_number(x) -> str:
    """12 significant digits, locale-free."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def csv_rows(rows: Iterable[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([fmt_number(v) for v in row])
    return buf.getvalue()


def to_csv(header: list[str], rows: Iterable[list]) -> str:
    return csv_rows([header]) + csv_rows(rows)


def to_json_line(obj) -> str:
    return json.dumps(th._jsonable(obj), sort_keys=True, allow_nan=True) + "\n"


class Output:
    """Single writer for stdout or a file."""

    def __init__(self, path: str | None):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8", newline="") if path else sys.stdout

    def write(self, text: str) -> None:
        self._fh.write(text)

    def close(self) -> None:
        if self.path:
            self._fh.close()
        else:
            self._fh.flush()


# -- inputs -----------------------------------------------------------------------

FIXTURE_PREFIX = "fixture:"


def fixture_path(name: str):
    ref = resources.files("decolab") / "data" / f"{name}.json"
    if not ref.is_file():
        names = sorted(p.name[:-5] for p in (resources.files("decolab") / "data").iterdir()
                       if p.name.endswith(".json"))
        raise UsageError(f"unknown fixture {name!r}; available: {', '.join(names)}")
    return ref


def read_json_input(source: str) -> tuple[dict, str]:
    if source.startswith(FIXTURE_PREFIX):
        ref = fixture_path(source[len(FIXTURE_PREFIX):])
        return json.loads(ref.read_text(encoding="utf-8")), source
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{source}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text), source
    except json.JSONDecodeError as exc:
        raise UsageError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None


def read_state(source: str) -> DensityOperator:
    obj, where = read_json_input(source)
    return state_from_json(obj, where=where)


def read_channel(source: str) -> tuple[chn.QuantumChannel, dict]:
    obj, where = read_json_input(source)
    return chn.channel_from_json(obj, where=where), obj


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--dims expects comma-separated integers, got {text!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise UsageError(f"--dims entries must be positive, got {text!r}")
    return dims


def parse_grid(text: str) -> list[float]:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; use start:stop:num or a,b,c") from None


def instance_seed(seed: int, index: int) -> int:
    """Independent per-instance seed, stable under reordering and threading."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn: Callable, items: list) -> Iterable:
    """Map with up to ``DECOLAB_THREADS`` workers, yielding in input order."""
    n = thread_count()
    if n == 1:
        for x in items:
            yield fn(x)
        return
    with ThreadPoolExecutor(max_workers=n) as ex:
        yield from ex.map(fn, items)


def optimizer_config(args) -> dc.BasisOptimizerConfig:
    kw = {"seed": args.seed}
    if args.restarts is not None:
        kw["restarts"] = args.restarts
    if args.tolerance is not None:
        kw["tolerance"] = args.tolerance
    try:
        return dc.BasisOptimizerConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- measure ----------------------------------------------------------------------

def cmd_measure(args, out: Output) -> int:
    rho = read_state(args.state)
    names = args.measure or ["deficit"]
    cfg = optimizer_config(args)
    samples = args.samples if args.samples is not None else 2000
    reports = [dc.measure(rho, n, cfg, samples=samples) for n in names]
    if args.format == "csv":
        out.write(to_csv(["measure", "value", "is_upper_bound", "starts", "best_hits"],
                         [[r.measure, r.value, r.is_upper_bound, r.optimizer_diag.get("starts", 0),
                           r.optimizer_diag.get("hits_within_tolerance", 0)] for r in reports]))
    else:
        for r in reports:
            out.write(to_json_line(r.to_dict()))
    unconverged = [r.measure for r in reports if r.optimizer_diag.get("converged") is False]
    if unconverged:
        print(f"solver did not converge for: {', '.join(unconverged)}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


# -- verify -----------------------------------------------------------------------

def _pure_instance(dims, s):
    rho = th.random_pure_tripartite(dims, s)
    z = th.random_basis(dims[0], s + 1)
    return rho, z


def suite_runner(args) -> tuple[list, Callable]:
    """Instances and the per-instance function for the chosen suite."""
    suite = args.suite
    if suite == "channels":
        specs = args.channel or [f"{FIXTURE_PREFIX}phase_flip_p{p:.1f}" for p in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)]
        loaded = [read_channel(s) for s in specs]
        samples = args.samples if args.samples is not None else 10_000

        def run_channel(i):
            ch, meta = loaded[i]
            s = instance_seed(args.seed, i)
            z = standard_basis(ch.d_in)
            reports = chn.verify_channel(ch, z, samples=samples, seed=s)
            if "p" in meta and ch.d_in == 2:
                p = float(meta["p"])
                leaked = chn.channel_info(ch, z, chn.LEAKED_TO_ENV)
                reports.append(th.equality("channel.phase_flip_leaked", leaked, 1 - qmat.shannon([p, 1 - p]), 1e-9, p=p))
                mu = chn.channel_info(ch, fourier_mu_basis(z), chn.LEAKED_TO_ENV)
                reports.append(th.equality("channel.phase_flip_mu_leaked", mu, 1.0, 1e-9, p=p))
            return reports
        return list(range(len(loaded))), run_channel

    count = args.count if args.count is not None else SUITE_DEFAULT_COUNT[suite]
    if count < 1:
        raise UsageError("--count must be at least 1")
    dims = parse_dims(args.dims) if args.dims else SUITE_DEFAULT_DIMS.get(suite, (2, 2, 2))
    fid_restarts = args.restarts if args.restarts is not None else 10

    if suite == "triangle":
        if len(dims) != 2:
            raise UsageError("the triangle suite takes bipartite --dims such as 2,2")
        def run_triangle(i):
            s = instance_seed(args.seed, i)
            rho = random_state("ginibre_mixed", dims, seed=s)
            z = th.random_basis(dims[0], s + 1)
            tri = sc.task_triangle(rho, z, n=1)
            e = tri.exponents
            return [th.equality("triangle.exponents", max(e), min(e), 1e-8,
                                relative_entropy=e[0], epr_rate=e[1], secure_rate=e[2])]
        return list(range(count)), run_triangle

    if len(dims) != 3:
        raise UsageError(f"the {suite} suite takes tripartite --dims such as 2,2,2")

    def run(i):
        s = instance_seed(args.seed, i)
        if suite == "thm1":
            rho, z = _pure_instance(dims, s)
            return th.verify_thm1(rho, z, restarts=fid_restarts, seed=s)
        if suite == "thm2":
            rho, z = _pure_instance(dims, s)
            return th.verify_thm2(rho, z, restarts=fid_restarts, seed=s)
        if suite == "thm3":
            rho, z = _pure_instance(dims, s)
            return th.verify_thm3(rho, z, samples=args.samples if args.samples is not None else 10_000, seed=s)
        if suite == "inequalities":
            rho, z = _pure_instance(dims, s)
            return th.verify_inequalities(rho, z, seed=s)
        # corollary: odd instances are decohered and repurified, even ones generic
        z = th.random_basis(dims[0], s + 1)
        decohered = i % 2 == 1
        rho = th.decohered_tripartite(dims, z, s) if decohered else th.random_pure_tripartite(dims, s)
        rep = th.verify_corollary(rho, z, samples=args.samples if args.samples is not None else 50, seed=s)
        got = bool(rep.diagnostics["classical"])
        return [rep, th.equality("corollary.classification", float(got), float(decohered), 0.0,
                                 decohered=decohered)]
    return list(range(count)), run


def cmd_verify(args, out: Output) -> int:
    items, fn = suite_runner(args)
    passed = failed = 0
    header = ["instance", "claim", "lhs", "rhs", "gap", "tolerance", "passed"]
    if args.format == "csv":
        out.write(to_csv(header, []))
    for i, reports in zip(items, ordered_map(fn, items)):
        for r in reports:
            passed += r.passed
            failed += not r.passed
            if args.format == "csv":
                out.write(csv_rows([[i, r.claim, r.lhs, r.rhs, r.abs_gap, r.tolerance, r.passed]]))
            else:
                out.write(to_json_line({"instance": i, **r.to_dict()}))
    print(f"summary: suite={args.suite} passed={passed} failed={failed} total={passed + failed}", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_FAIL


# -- scan -------------------------------------------------------------------------

def _scan_rows(args, grid: list[float]) -> tuple[list[str], list[list]]:
    target = args.target
    samples = args.samples if args.samples is not None else 10_000
    if target == "interferometer":
        header = ["v", "coherence_sq", "half_missing_quad", "half_mu_certainty", "half_std_error"]

        def row(iv):
            i, v = iv
            if not 0.0 <= v <= 1.0:
                raise UsageError(f"interferometer parameter must lie in [0, 1], got {v}")
            p = th.interferometer_profile(v, samples, instance_seed(args.seed, i))
            return [v, p["coherence_sq"], p["missing_quad"] / 2, p["mu_certainty"] / 2, p["std_error"] / 2]
        return header, list(ordered_map(row, list(enumerate(grid))))

    if target == "phase_flip":
        header = ["p", "leaked", "kept", "leaked_mu", "one_minus_hbin"]

        def row(p):
            if not 0.0 <= p <= 1.0:
                raise UsageError(f"phase-flip probability must lie in [0, 1], got {p}")
            ch = chn.phase_flip(p)
            z = standard_basis(2)
            return [p, chn.channel_info(ch, z, chn.LEAKED_TO_ENV), chn.channel_info(ch, z, chn.KEPT_BY_OUTPUT),
                    chn.channel_info(ch, fourier_mu_basis(z), chn.LEAKED_TO_ENV), 1 - qmat.shannon([p, 1 - p])]
        return header, list(ordered_map(row, grid))

    obj, where = read_json_input(target)
    for t in grid:
        if not 0.0 <= t <= 1.0:
            raise UsageError(f"mixing parameter must lie in [0, 1], got {t}")
    if isinstance(obj, dict) and "kraus" in obj:
        ch = chn.channel_from_json(obj, where=where)
        if ch.d_in != ch.d_out:
            raise UsageError("channel scans mix with the identity and need d_in == d_out")
        z = standard_basis(ch.d_in)
        header = ["t", "leaked", "kept"]

        def row(t):
            # (1 - t) E + t id
            mixed = chn.QuantumChannel(tuple(math.sqrt(1 - t) * k for k in ch.kraus) + (math.sqrt(t) * np.eye(ch.d_in),))
            return [t, chn.channel_info(mixed, z, chn.LEAKED_TO_ENV), chn.channel_info(mixed, z, chn.KEPT_BY_OUTPUT)]
        return header, list(ordered_map(row, grid))

    rho = state_from_json(obj, where=where)
    names = args.quantity or ["deficit"]
    for n in names:
        if n not in dc.MEASURES:
            raise UsageError(f"unknown quantity {n!r}; choose from {', '.join(dc.MEASURES)}")
    cfg = optimizer_config(args)
    d = rho.matrix.shape[0]
    header = ["t"] + names

    def row(t):
        # (1 - t) rho + t I/d
        noisy = DensityOperator((1 - t) * rho.matrix + t * np.eye(d) / d, rho.dims)
        return [t] + [dc.measure(noisy, n, cfg, samples=min(samples, 2000)).value for n in names]
    return header, list(ordered_map(row, grid))


def cmd_scan(args, out: Output) -> int:
    grid = parse_grid(args.grid)
    if not grid:
        raise UsageError("parameter grid is empty")
    header, rows = _scan_rows(args, grid)
    if args.format == "json":
        for r in rows:
            out.write(to_json_line(dict(zip(header, r))))
    else:
        out.write(to_csv(header, rows))
    return EXIT_OK


# -- random -----------------------------------------------------------------------

def cmd_random(args, out: Output) -> int:
    dims = parse_dims(args.dims or "2,2")
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    if not args.dir:
        raise UsageError("random needs --dir for the generated state files")
    target = Path(args.dir)
    target.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        out.write(csv_rows([["index", "path"]]))
    for i in range(args.count):
        rho = random_state(args.kind, dims, rank=args.rank, seed=instance_seed(args.seed, i))
        path = target / f"state_{i:04d}.json"
        path.write_text(json.dumps(state_to_json(rho), sort_keys=True) + "\n", encoding="utf-8")
        if args.format == "csv":
            out.write(csv_rows([[i, path.as_posix()]]))
        else:
            out.write(to_json_line({"index": i, "path": path.as_posix()}))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--restarts", type=int, default=None, help="optimizer restarts")
    common.add_argument("--tolerance", type=float, default=None, help="optimizer tolerance")
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo samples")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("--out", default=None, help="write output to this file instead of stdout")

    p = argparse.ArgumentParser(prog="decolab", description="Decoherence and discord measures for finite-dimensional states.")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", parents=[common], help="evaluate discord measures on a state file")
    m.add_argument("state", help="state JSON file, or fixture:NAME for a bundled example")
    m.add_argument("--measure", action="append", choices=dc.MEASURES, help="measure id (repeatable)")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--count", type=int, default=None, help="ensemble size")
    v.add_argument("--dims", default=None, help="subsystem dimensions, e.g. 2,2,2")
    v.add_argument("--channel", action="append", help="channel JSON file for the channels suite (repeatable)")

    s = sub.add_parser("scan", parents=[common], help="tabulate quantities over a parameter grid")
    s.add_argument("target", help="interferometer, phase_flip, or a state/channel JSON file")
    s.add_argument("--grid", required=True, help="start:stop:num or a comma-separated list")
    s.add_argument("--quantity", action="append", help="measure id for state scans (repeatable)")

    r = sub.add_parser("random", parents=[common], help="write a seeded random ensemble of states")
    r.add_argument("--kind", choices=("haar_pure", "ginibre_mixed"), default="ginibre_mixed")
    r.add_argument("--dims", default=None, help="subsystem dimensions, e.g. 2,2")
    r.add_argument("--rank", type=int, default=None, help="Ginibre rank (default full)")
    r.add_argument("--count", type=int, default=10)
    r.add_argument("--dir", default=None, help="directory for the state files")
    return p


COMMANDS = {"measure": cmd_measure, "verify": cmd_verify, "scan": cmd_scan, "random": cmd_random}
DEFAULT_FORMAT = {"measure": "json", "verify": "json", "scan": "csv", "random": "json"}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INPUT
    args.format = args.format or DEFAULT_FORMAT[args.command]
    for name in ("samples", "restarts"):
        val = getattr(args, name)
        if val is not None and val < 1:
            print(f"decolab: error: --{name} must be at least 1", file=sys.stderr)
            return EXIT_INPUT
    if args.tolerance is not None and not args.tolerance > 0:
        print("decolab: error: --tolerance must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        out = Output(args.out)
    except OSError as exc:
        print(f"decolab: error: cannot open {args.out} ({exc.strerror})", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, DecolabError) as exc:
        print(f"decolab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoConvergence as exc:
        print(f"decolab: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    finally:
        out.close()


if __name__ == "__main__":
    sys.exit(main())
