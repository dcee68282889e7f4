"""``softcover`` command line.

Exit codes: 0 ok, 1 invariant or verification failure, 2 config error,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import achievability as ach
from . import converse as conv
from . import feasible
from . import simulation as sim
from . import verify
from .config import FIGURE1, ConfigError, ExperimentConfig, load_config, parse_config
from .curve import digest
from .method_of_types import BudgetExceeded
from .prob import renyi_mi
from .svg import line_chart

log = logging.getLogger("softcover")

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3
CURVE_COLUMNS = ["rate", "e_c", "e_a", "alpha_star", "s_star", "qx_star", "px_star"]
INVARIANT_TOL = 1e-6


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SOFTCOVER_THREADS", "1")))
    except ValueError:
        return 1


def _write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v: float) -> str:
    return f"{v:.10g}"


# --- curve computation ------------------------------------------------------

def _one_rate(args):
    cfg, R = args
    W, py = cfg.channel, cfg.target
    inst = conv.ConverseInstance(W, py, R, cfg.qx_resolution, cfg.v_resolution, cfg.s_tol)
    c = conv.ec_curve(inst, [R])
    a = ach.ea_curve(W, py, [R], cfg.polytope_resolution, cfg.lambda_tol)
    return (float(R), float(c.values[0]), float(a.values[0]), float(a.param[0]),
            float(c.param[0]), c.argmin[0], a.argmin[0])


def compute_rows(cfg: ExperimentConfig) -> list[tuple]:
    feasible.build(cfg.channel, cfg.target)  # fail fast on an unreachable target
    jobs = [(cfg, R) for R in cfg.rates]
    n = _threads()
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            return list(pool.map(_one_rate, jobs))
    return [_one_rate(j) for j in jobs]


def check_rows(rows) -> list[str]:
    problems = []
    e_c = np.array([r[1] for r in rows])
    e_a = np.array([r[2] for r in rows])
    for r, c, a in zip((r[0] for r in rows), e_c, e_a):
        if c > a + INVARIANT_TOL:
            problems.append(f"rate {r:g}: e_c {c:.6g} exceeds e_a {a:.6g}")
    for name, col in (("e_c", e_c), ("e_a", e_a)):
        jumps = np.flatnonzero(np.diff(col) > INVARIANT_TOL)
        for j in jumps:
            problems.append(f"{name} increases between rates {rows[j][0]:g} and {rows[j + 1][0]:g}")
    return problems


def rows_to_csv(rows) -> str:
    out = []
    for R, c, a, alpha, s, qx, px in rows:
        out.append([_fmt(R), _fmt(c), _fmt(a), _fmt(alpha), _fmt(s), digest(qx), digest(px)])
    return _csv_text(CURVE_COLUMNS, out)


# --- commands ----------------------------------------------------------------

def cmd_exponents(args) -> int:
    cfg = load_config(args.config)
    rows = compute_rows(cfg)
    _write_atomic(args.out, rows_to_csv(rows))
    problems = check_rows(rows)
    for p in problems:
        print(f"invariant violated: {p}", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_INVARIANT if problems else EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if not cfg.sim.enabled:
        print("simulation disabled in config (sim.enabled = false); nothing to do")
        return EXIT_OK
    W, py = cfg.channel, cfg.target
    px = cfg.input_dist if cfg.input_dist is not None else feasible.build(W, py).anchor
    rates = [cfg.sim.rate] if cfg.sim.rate is not None else list(cfg.rates)
    nx, ny = W.shape
    out, violations = [], 0
    for R in rates:
        ec = conv.ec_curve(conv.ConverseInstance(W, py, R, cfg.qx_resolution, cfg.v_resolution,
                                                 cfg.s_tol)).values[0]
        for rep in sim.empirical_exponent(W, py, px, R, cfg.sim.n_list, cfg.sim.trials, cfg.seed):
            ceiling = ec + ((nx + 1) * ny * np.log2(rep.n + 1) + 2) / rep.n
            for t, (tv, e) in enumerate(zip(rep.per_code_tv, rep.per_code_exponents)):
                violations += e > ceiling
                out.append([rep.n, rep.M, _fmt(R), rep.seed, t, _fmt(tv), _fmt(e), _fmt(ceiling)])
            out.append([rep.n, rep.M, _fmt(R), rep.seed, "mean", _fmt(rep.tv),
                        _fmt(rep.exponent_estimate), _fmt(ceiling)])
    header = ["n", "M", "rate", "seed", "trial", "tv", "exponent_estimate", "ceiling"]
    _write_atomic(args.out, _csv_text(header, out))
    print(f"wrote {len(out)} rows to {args.out}")
    if violations:
        print(f"{violations} codes exceed the converse ceiling", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _alpha_grid(text: str) -> np.ndarray:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"--alphas: expected start:stop:step, got '{text}'") from None
    if step <= 0 or start <= 0:
        raise ConfigError("--alphas: need positive start and step")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def cmd_renyi(args) -> int:
    cfg = load_config(args.config)
    W = cfg.channel
    px = cfg.input_dist if cfg.input_dist is not None else feasible.build(W, cfg.target).anchor
    rows = [[_fmt(a), _fmt(renyi_mi(float(a), px, W))] for a in _alpha_grid(args.alphas)]
    _write_atomic(args.out, _csv_text(["alpha", "renyi_mi"], rows))
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = [args.suite] if args.suite else list(verify.SUITES)
    failed = 0
    for name in names:
        if name not in verify.SUITES:
            print(f"unknown suite '{name}'; choose from {', '.join(verify.SUITES)}", file=sys.stderr)
            return EXIT_CONFIG
        t0 = time.perf_counter()
        passed, total, worst = verify.SUITES[name]()
        ok = passed == total
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {passed}/{total} "
              f"(worst {worst:.3g}, {time.perf_counter() - t0:.1f}s)")
    return EXIT_OK if failed == 0 else EXIT_INVARIANT


def cmd_figure1(args) -> int:
    cfg = parse_config(FIGURE1)
    rows = compute_rows(cfg)
    out_dir = Path(args.out_dir)
    _write_atomic(out_dir / "figure1.csv", rows_to_csv(rows))
    rates = [r[0] for r in rows]
    svg = line_chart(rates, {"E_c(R)": [r[1] for r in rows], "E_a(R)": [r[2] for r in rows]},
                     "R (bits)", "exponent (bits)",
                     "BSC(0.1), P_X = [0.48, 0.52]")
    _write_atomic(out_dir / "figure1.svg", svg)
    problems = check_rows(rows)
    for p in problems:
        print(f"invariant violated: {p}", file=sys.stderr)
    print(f"wrote {out_dir / 'figure1.csv'} and {out_dir / 'figure1.svg'}")
    return EXIT_INVARIANT if problems else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softcover",
                                     description="Strong converse exponent bounds for soft covering.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="E_c and E_a on the config's rate grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("simulate", help="exact tv of random codes")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the self-check suites")
    p.add_argument("--suite", choices=list(verify.SUITES))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("renyi", help="Rényi mutual information on an order grid")
    p.add_argument("--config", required=True)
    p.add_argument("--alphas", required=True, help="start:stop:step")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_renyi)

    p = sub.add_parser("figure1", help="BSC(0.1) exponent curves as CSV and SVG")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_figure1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except feasible.Infeasible as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExceeded, sim.StateSpaceTooLarge) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
