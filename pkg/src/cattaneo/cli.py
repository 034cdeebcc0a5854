"""Command-line interface.

Subcommands: ``cf``, ``simulate``, ``density``, ``variance``, ``dirichlet``,
``validate``. Settings come from ``--config`` (TOML or JSON) with command-line
flags taking precedence. Exit codes: 0 ok, 1 validation failure, 2 usage or
parameter error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import analytic as an
from .process_sim import TrajectoryEnsemble, empirical_cf, run_ensemble, write_ensemble_csv
from .transforms import NonConvergence

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    params: an.CattaneoParams
    t_grid: list = field(default_factory=lambda: [1.0])
    xi_grid: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0])
    x_grid: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0])
    n_samples: int = 10_000
    seed: int = 1
    output_dir: Path = Path(".")
    threads: int = 1
    signal: str = "one"
    rate: float = 1.0
    x_max: float = 6.0
    dx: float = 0.01
    tolerances: dict = field(default_factory=dict)

    def validate(self, command: str):
        for name in ("t_grid", "xi_grid", "x_grid"):
            g = getattr(self, name)
            if not g:
                raise UsageError(f"{name} must be nonempty")
            if list(g) != sorted(g):
                raise UsageError(f"{name} must be sorted")
            if not all(math.isfinite(v) for v in g):
                raise UsageError(f"{name} must be finite")
        if any(t <= 0 for t in self.t_grid):
            raise UsageError("t_grid values must be > 0")
        if command == "validate" and self.n_samples < 100:
            raise UsageError("validate needs n_samples >= 100")
        if self.n_samples < 1:
            raise UsageError("n_samples must be >= 1")


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {path}")
    text = p.read_bytes()
    if p.suffix == ".json":
        return json.loads(text)
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    return tomllib.loads(text.decode())


def _floats(s: str) -> list:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {s!r}") from exc


def build_config(args: argparse.Namespace) -> RunConfig:
    raw = _load_config_file(args.config) if args.config else {}
    params = dict(raw.get("params", {}))
    for name in ("alpha", "beta", "lam", "k"):
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    defaults = {"alpha": 0.7, "beta": 0.4, "lam": 1.0, "k": 0.5}
    for name, v in defaults.items():
        params.setdefault(name, v)
    try:
        cp = an.CattaneoParams(**{k: float(v) for k, v in params.items()})
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid parameters: {exc}") from exc

    cfg = RunConfig(params=cp)
    mapping = {
        "t_grid": "t", "xi_grid": "xi", "x_grid": "x", "n_samples": "n", "seed": "seed",
        "output_dir": "out", "threads": "threads", "signal": "signal", "rate": "rate",
        "x_max": "x_max", "dx": "dx",
    }
    for key in mapping:
        if key in raw:
            setattr(cfg, key, raw[key])
    if "tolerances" in raw:
        cfg.tolerances = dict(raw["tolerances"])
    for key, flag in mapping.items():
        v = getattr(args, flag, None)
        if v is None:
            continue
        if key in ("t_grid", "xi_grid", "x_grid"):
            v = _floats(v)
        setattr(cfg, key, v)
    cfg.output_dir = Path(cfg.output_dir)
    cfg.t_grid = [float(v) for v in cfg.t_grid]
    cfg.xi_grid = [float(v) for v in cfg.xi_grid]
    cfg.x_grid = [float(v) for v in cfg.x_grid]
    cfg.n_samples = int(cfg.n_samples)
    cfg.seed = int(cfg.seed)
    cfg.threads = int(cfg.threads)
    return cfg


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _sidecar(path: Path, cfg: RunConfig, command: str, wall: float, extra: dict | None = None):
    meta = {
        "command": command,
        "params": asdict(cfg.params),
        "seed": cfg.seed,
        "tool": "cattaneo",
        "version": __version__,
        "wall_time_s": wall,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        meta.update(extra)
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, default=str))


def _write_csv(path: Path, header: list, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if not isinstance(v, str) else v for v in r])


# {{{ commands


def cmd_cf(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    rows = []
    for xi in cfg.xi_grid:
        for t in cfg.t_grid:
            u = an.char_fn(cfg.params, xi, t)
            if abs(u.imag) > 1e-10:
                raise ArithmeticError(f"characteristic function not real at xi={xi}, t={t}: {u}")
            rows.append((xi, t, u.real, u.imag))
    path = cfg.output_dir / "cf.csv"
    _write_csv(path, ["xi", "t", "re_u", "im_u"], rows)
    _sidecar(path, cfg, "cf", time.perf_counter() - t0, {"xi_grid": cfg.xi_grid, "t_grid": cfg.t_grid})
    print(path)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    try:
        cfg.params.require_simulable()
    except ValueError as exc:
        raise UsageError(
            f"refusing to simulate: {exc}. The process representation works only for beta in (0, 1/2); "
            "use `cf` or `density` for analytic results."
        ) from exc
    for t in cfg.t_grid:
        t0 = time.perf_counter()
        e = run_ensemble(cfg.params, t, cfg.n_samples, cfg.seed, threads=cfg.threads)
        path = cfg.output_dir / f"samples_t{t:g}.csv"
        write_ensemble_csv(e, path, extra={"command": "simulate", "threads": cfg.threads},
                           wall_time=time.perf_counter() - t0)
        print(path)
    return EXIT_OK


def cmd_density(cfg: RunConfig) -> int:
    from .validation import density_of_W

    for t in cfg.t_grid:
        t0 = time.perf_counter()
        d = density_of_W(cfg.params, t, x_max=cfg.x_max, dx=cfg.dx)
        path = cfg.output_dir / f"density_t{t:g}.csv"
        _write_csv(path, ["x", "density"], zip(d.x, d.values))
        _sidecar(path, cfg, "density", time.perf_counter() - t0, {"t": t, "integral": d.integral()})
        print(path)
    return EXIT_OK


def cmd_variance(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    p = cfg.params
    rows = []
    for t in cfg.t_grid:
        row = [t, an.mean_subordinator(p, t), an.variance_paper(p, t), an.variance_time_change(p, t)]
        if p.simulable:
            e = run_ensemble(p, t, cfg.n_samples, cfg.seed, threads=cfg.threads)
            row += list(e.variance())
        else:
            row += [math.nan, math.nan]
        rows.append(row)
    path = cfg.output_dir / "variance.csv"
    _write_csv(path, ["t", "U", "var_published", "var_time_change", "var_mc", "var_mc_se"], rows)
    _sidecar(path, cfg, "variance", time.perf_counter() - t0, {"n_samples": cfg.n_samples})
    print(path)
    return EXIT_OK


def cmd_dirichlet(cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    p = cfg.params
    try:
        sig = an.boundary_signal(cfg.signal, cfg.rate)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    special = 0 < p.alpha < 1 and abs(p.k - p.lam ** (p.alpha / 2)) <= 1e-12 * max(1.0, p.k)
    header = ["x", "t", "u_inversion"] + (["u_convolution", "difference"] if special else [])
    rows = []
    for x in cfg.x_grid:
        for t in cfg.t_grid:
            u = an.dirichlet_invert(p, x, t, sig)
            row = [x, t, u]
            if special:
                c = an.dirichlet_special_case(p, x, t, sig)
                row += [c, c - u]
            rows.append(row)
    path = cfg.output_dir / "dirichlet.csv"
    _write_csv(path, header, rows)
    _sidecar(path, cfg, "dirichlet", time.perf_counter() - t0, {"signal": sig.name, "special_case": special})
    print(path)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, only=None) -> int:
    from .validation import SuiteConfig, run_suite

    t0 = time.perf_counter()
    scfg = SuiteConfig(
        params=cfg.params, n_samples=cfg.n_samples, seed=cfg.seed, threads=cfg.threads,
        tolerances=cfg.tolerances,
    )
    reports = run_suite(scfg, only=only)
    path = cfg.output_dir / "validation.json"
    asserted = [r for r in reports if r.kind == "asserted"]
    failed = [r for r in asserted if r.verdict != "pass"]
    engine = [r for r in failed if r.note.startswith("engine:")]
    payload = {
        "reports": [r.to_dict() for r in reports],
        "summary": {
            "asserted": len(asserted),
            "failed": len(failed),
            "engine_failures": len(engine),
            "reported": len(reports) - len(asserted),
        },
    }
    path.write_text(json.dumps(payload, indent=2, default=str))
    _sidecar(path, cfg, "validate", time.perf_counter() - t0, {"n_samples": cfg.n_samples})
    for r in failed:
        print(f"FAILED {r.quantity}: estimate {r.mc_estimate} oracle {r.oracle} ({r.threshold}) {r.note}")
    print(path)
    return EXIT_FAIL if failed else EXIT_OK


# }}}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON file; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--lam", type=float, help="tempering rate lambda")
    common.add_argument("--k", type=float)
    common.add_argument("--t", help="comma-separated times")
    common.add_argument("--n", type=int, help="Monte Carlo sample size")

    parser = argparse.ArgumentParser(prog="cattaneo", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("cf", parents=[common], help="characteristic function table")
    p.add_argument("--xi", help="comma-separated frequencies")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo samples of W(t)")
    p = sub.add_parser("density", parents=[common], help="density of W(t) from its characteristic function")
    p.add_argument("--x-max", dest="x_max", type=float)
    p.add_argument("--dx", type=float)
    sub.add_parser("variance", parents=[common], help="variance formulas and Monte Carlo variance")
    p = sub.add_parser("dirichlet", parents=[common], help="half-line Dirichlet problem")
    p.add_argument("--x", help="comma-separated positions")
    p.add_argument("--signal", help="boundary signal: one, exp, zero")
    p.add_argument("--rate", type=float, help="decay rate of the exp signal")
    p = sub.add_parser("validate", parents=[common], help="Monte Carlo versus analytic validation suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


COMMANDS = {
    "cf": cmd_cf,
    "simulate": cmd_simulate,
    "density": cmd_density,
    "variance": cmd_variance,
    "dirichlet": cmd_dirichlet,
}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = build_config(args)
        cfg.validate(args.command)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "validate":
            only = [int(v) for v in args.only.split(",")] if args.only else None
            return cmd_validate(cfg, only)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergence as exc:
        print(f"error: inversion engine did not converge: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
