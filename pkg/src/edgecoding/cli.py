"""Command-line front end.

Commands: analyze, simulate, optimize-hybrid, sweep, verify. Settings come
from an optional JSON file (``--config``) overridden by flags; defaults are
the K=N=6, m=60, mu=0.5, tau=0.005, eta=0.8 example system.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from ._accel import backend as accel_backend
from .latency import mc_latency_closed
from .model import ConfigError, SystemConfig
from .montecarlo import SchemeSpec, summarize, trial_delays
from .optimizer import candidate_table_csv, evaluate_candidates, optimize, optimize_gammas
from .gf import mds_generator
from .placement import Schedule, mds_placement
from . import verify as vf

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VERIFY = 0, 2, 3, 4

CSV_COLUMNS = (
    "gamma", "scheme", "q", "rho1", "rho2", "trials", "seed",
    "mean_delta_C", "mean_delta_D", "mean_delta", "ci95",
)
# appended so each row can be regenerated on its own
CONTEXT_COLUMNS = ("eta", "K", "N", "m", "mu", "tau")

SYSTEM_KEYS = ("K", "N", "m", "mu", "tau", "eta", "gamma", "L")
OPTION_KEYS = ("scheme", "gamma_grid", "trials", "seed", "out", "simulate_closed")
DEFAULT_OPTIONS = {
    "scheme": ["uc", "mc", "hs"],
    "gamma_grid": "0:2:0.1",
    "trials": 10_000,
    "seed": 2019,
    "out": None,
    "simulate_closed": False,
}


@dataclass
class RunConfig:
    systems: list[SystemConfig]
    schemes: list[str]
    gammas: list[float]
    trials: int
    seed: int
    out: str | None
    simulate_closed: bool = False

    @property
    def system(self) -> SystemConfig:
        return self.systems[0]


def parse_gamma_grid(text) -> list[float]:
    """``start:stop:step`` (inclusive), a single number, or a list."""
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    parts = str(text).split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"gamma grid must be start:stop:step, got {text!r}")
    start, stop, step = (Fraction(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError(f"gamma grid needs step > 0 and stop >= start, got {text!r}")
    n = int((stop - start) / step)
    return [float(start + i * step) for i in range(n + 1)]


def _number(value, name, integer, problems):
    if isinstance(value, bool):
        problems.append(f"{name}: expected a number, got {value!r}")
        return None
    if integer:
        if isinstance(value, int):
            return value
        if isinstance(value, str) and value.strip().lstrip("-").isdigit():
            return int(value)
        if isinstance(value, float) and value.is_integer():
            return int(value)
        problems.append(f"{name}: expected an integer, got {value!r}")
        return None
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(Fraction(str(value).strip()))
    except (ValueError, ZeroDivisionError):
        problems.append(f"{name}: expected a number, got {value!r}")
        return None


def _split_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [v for v in str(value).split(",") if v.strip()]


def parse_config(file_values: dict, flag_values: dict) -> RunConfig:
    """Merge file and flag settings (flags win) and validate everything.

    Raises ConfigError listing every problem found.
    """
    problems = []
    unknown = sorted(set(file_values) - set(SYSTEM_KEYS) - set(OPTION_KEYS))
    for key in unknown:
        problems.append(f"unknown config key {key!r}")
    merged = dict(DEFAULT_OPTIONS)
    merged.update({k: v for k, v in file_values.items() if k not in unknown})
    merged.update({k: v for k, v in flag_values.items() if v is not None})

    defaults = SystemConfig()
    system = {}
    for key in SYSTEM_KEYS:
        if key == "eta":
            continue
        raw = merged.get(key, getattr(defaults, key))
        system[key] = _number(raw, key, key in ("K", "N", "m", "L"), problems)
    etas = [
        _number(v, "eta", False, problems)
        for v in _split_list(merged.get("eta", defaults.eta))
    ]
    if not etas:
        problems.append("eta: at least one value required")

    schemes = [s.strip().lower() for s in _split_list(merged["scheme"])]
    for s in schemes:
        if s not in ("uc", "mc", "hs"):
            problems.append(f"scheme: unknown scheme {s!r} (choose uc, mc, hs)")
    try:
        gammas = parse_gamma_grid(merged["gamma_grid"])
        if any(g < 0 for g in gammas):
            problems.append("gamma_grid: gamma must be >= 0")
    except (ValueError, ZeroDivisionError) as exc:
        problems.append(f"gamma_grid: {exc}")
        gammas = []
    trials = _number(merged["trials"], "trials", True, problems)
    if trials is not None and trials < 1:
        problems.append(f"trials must be >= 1, got {trials}")
    seed = _number(merged["seed"], "seed", True, problems)
    if seed is not None and seed < 0:
        problems.append(f"seed must be >= 0, got {seed}")

    systems = []
    if not any(v is None for v in system.values()) and None not in etas:
        for eta in etas:
            try:
                systems.append(SystemConfig(**{**system, "eta": eta}))
            except ConfigError as exc:
                problems.extend(p for p in exc.problems if p not in problems)
    if problems:
        raise ConfigError(problems)
    return RunConfig(
        systems=systems,
        schemes=schemes,
        gammas=gammas,
        trials=trials,
        seed=seed,
        out=merged.get("out"),
        simulate_closed=bool(merged.get("simulate_closed")),
    )


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS + CONTEXT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def _context(cfg: SystemConfig) -> dict:
    return {"eta": cfg.eta, "K": cfg.K, "N": cfg.N, "m": cfg.m, "mu": cfg.mu, "tau": cfg.tau}


def _row(cfg, gamma, scheme, q, rho1, rho2, trials, seed, dc, dd, delta, ci) -> dict:
    return {
        "gamma": gamma, "scheme": scheme, "q": q, "rho1": rho1, "rho2": rho2,
        "trials": trials, "seed": seed, "mean_delta_C": dc, "mean_delta_D": dd,
        "mean_delta": delta, "ci95": ci, **_context(cfg),
    }


def _report_row(cfg, gamma, label, spec, report) -> dict:
    q, rho1, rho2 = spec.describe(cfg)
    return _row(
        cfg, gamma, label, q, rho1, rho2, report.trials, report.base_seed,
        report.mean_delta_C, report.mean_delta_D, report.mean_delta, report.ci95_delta,
    )


def _closed_row(cfg, gamma, label, spec, lat, seed) -> dict:
    q, rho1, rho2 = spec.describe(cfg)
    return _row(cfg, gamma, label, q, rho1, rho2, 0, seed, lat.delta_C, lat.delta_D, lat.delta, 0.0)


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------- commands


def cmd_analyze(run: RunConfig) -> int:
    rows = []
    for cfg in run.systems:
        mc = mc_latency_closed(cfg)
        _log(
            f"[eta={cfg.eta:g}] delta_MC(gamma) = {mc.delta_C:.3f} + {mc.delta_D:g}*gamma"
        )
        opts = optimize_gammas(cfg, run.gammas) if "hs" in run.schemes else [None] * len(run.gammas)
        for gamma, opt in zip(run.gammas, opts):
            if "mc" in run.schemes:
                rows.append(_closed_row(cfg, gamma, "mc", SchemeSpec("mc"), mc.at_gamma(gamma), run.seed))
            if opt is not None and opt.found:
                rows.append(
                    _closed_row(cfg, gamma, "hs", SchemeSpec("hs", opt.params), opt.latency, run.seed)
                )
        if "uc" in run.schemes:
            _log("uc has no closed form; use `simulate` or `sweep`")
    _emit(csv_text(rows), run.out)
    return EXIT_OK


def cmd_simulate(run: RunConfig) -> int:
    rows = []
    for cfg in run.systems:
        specs = []
        for s in run.schemes:
            if s == "hs":
                opt = optimize(cfg.replace(gamma=run.gammas[0]))
                if not opt.found:
                    _log(f"[eta={cfg.eta:g}] no valid hybrid parameters; skipping hs")
                    continue
                specs.append(SchemeSpec("hs", opt.params))
            else:
                specs.append(SchemeSpec(s))
        for spec in specs:
            dc, dd = trial_delays(cfg, spec, run.trials, run.seed)
            for gamma in run.gammas:
                rows.append(_report_row(cfg, gamma, spec.kind, spec, summarize(dc, dd, gamma, run.seed)))
    _emit(csv_text(rows), run.out)
    return EXIT_OK


def cmd_optimize(run: RunConfig) -> int:
    chunks = []
    for cfg in run.systems:
        table = evaluate_candidates(cfg)
        if not table:
            _log(f"[eta={cfg.eta:g}] no hybrid candidate satisfies the constraints")
        for gamma in run.gammas:
            opt = optimize(cfg.replace(gamma=gamma), table)
            if opt.found:
                p = opt.params
                _log(
                    f"[eta={cfg.eta:g} gamma={gamma:g}] best q={p.q} rho1={p.mprime / cfg.m:.6g} "
                    f"rho2={p.rho2} delta={opt.latency.delta:.6g}"
                )
        chunks.append(candidate_table_csv(cfg, table))
    _emit("".join(chunks), run.out)
    return EXIT_OK


def crossovers(rows: list[dict]) -> list[tuple[float, str, str]]:
    """Grid gammas where the best-to-worst scheme ordering changes."""
    by_gamma: dict = {}
    for r in rows:
        by_gamma.setdefault((r["eta"], r["gamma"]), {})[r["scheme"]] = r["mean_delta"]
    out = []
    prev = {}
    for (eta, gamma), means in sorted(by_gamma.items()):
        order = "<".join(sorted(means, key=lambda s: (means[s], s)))
        if eta in prev and prev[eta][1] != order:
            out.append((eta, gamma, f"{prev[eta][1]} -> {order}"))
        prev[eta] = (gamma, order)
    return out


def sweep_rows(run: RunConfig) -> list[dict]:
    rows = []
    for cfg in run.systems:
        cache = {}

        def delays(spec, cfg=cfg):
            if spec not in cache:
                cache[spec] = trial_delays(cfg, spec, run.trials, run.seed)
            return cache[spec]

        mc = mc_latency_closed(cfg)
        opts = optimize_gammas(cfg, run.gammas) if "hs" in run.schemes else None
        for i, gamma in enumerate(run.gammas):
            if "uc" in run.schemes:
                spec = SchemeSpec("uc")
                dc, dd = delays(spec)
                rows.append(_report_row(cfg, gamma, "uc", spec, summarize(dc, dd, gamma, run.seed)))
            if "mc" in run.schemes:
                spec = SchemeSpec("mc")
                rows.append(_closed_row(cfg, gamma, "mc", spec, mc.at_gamma(gamma), run.seed))
                if run.simulate_closed:
                    dc, dd = delays(spec)
                    rows.append(_report_row(cfg, gamma, "mc_sim", spec, summarize(dc, dd, gamma, run.seed)))
            if opts is not None and opts[i].found:
                spec = SchemeSpec("hs", opts[i].params)
                rows.append(_closed_row(cfg, gamma, "hs", spec, opts[i].latency, run.seed))
                if run.simulate_closed:
                    dc, dd = delays(spec)
                    rows.append(_report_row(cfg, gamma, "hs_sim", spec, summarize(dc, dd, gamma, run.seed)))
    return rows


def cmd_sweep(run: RunConfig) -> int:
    rows = sweep_rows(run)
    _emit(csv_text(rows), run.out)
    main_rows = [r for r in rows if r["scheme"] in ("uc", "mc", "hs")]
    changes = crossovers(main_rows)
    if not changes:
        _log("no change in scheme ordering on the swept grid")
    for eta, gamma, what in changes:
        _log(f"[eta={eta:g}] ordering changes at gamma={gamma:g}: {what}")
    return EXIT_OK


def _corrupt_schedule(cfg: SystemConfig) -> Schedule:
    # every EN computes the same rows, so rows beyond m*mu are never covered
    base = tuple(range(cfg.rows_per_en))
    return Schedule(rows=tuple(base for _ in range(cfg.K)), kind="uncoded", n_rows=cfg.m)


def cmd_verify(run: RunConfig, samples: int = 100, corrupt_uc: bool = False) -> int:
    results = []
    for cfg in run.systems:
        size = vf.check_size(cfg)
        if size:
            raise ConfigError(size)
        if "uc" in run.schemes:
            schedule = _corrupt_schedule(cfg) if corrupt_uc else None
            results.append(("uc" + ("(corrupted)" if corrupt_uc else ""), vf.check_uc(cfg, samples, run.seed, schedule)))
        if "mc" in run.schemes:
            results.append(("mc", vf.check_mc(cfg, samples, run.seed)))
            sched = mds_placement(cfg)
            code = mds_generator(sched.n_rows, cfg.m, cfg.L)
            results.append(("mc[all subsets]", vf.check_all_subsets(cfg, sched, code, cfg.min_finishers, "mc")))
        if "hs" in run.schemes:
            for params, subsets in vf.check_hs_candidates(cfg):
                tag = f"hs q={params.q} mprime={params.mprime} rho2={params.rho2}"
                results.append((tag, vf.check_hs(cfg, params, samples, run.seed)))
                results.append((tag + " [all subsets]", subsets))
    failed = False
    for name, res in results:
        status = "PASS" if res.ok else "FAIL"
        print(f"{status} {name}: {res.passed}/{res.total}")
        for f in res.failures[:5]:
            print(f"    failure: {f}")
        failed |= not res.ok
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON file with settings")
    common.add_argument("--scheme", help="comma-separated subset of uc,mc,hs")
    common.add_argument("--gamma-grid", dest="gamma_grid", help="start:stop:step (inclusive)")
    common.add_argument("--trials", help="Monte Carlo trials")
    common.add_argument("--seed", help="base seed")
    common.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")
    common.add_argument("--eta", help="setup rate; a comma list runs one system per value")
    common.add_argument("--mu", help="storage fraction, e.g. 0.5 or 1/3")
    common.add_argument("--m", dest="m", help="model rows")
    common.add_argument("--k", dest="K", help="edge nodes")
    common.add_argument("--n", dest="N", help="users")
    common.add_argument("--tau", help="seconds per IV")
    common.add_argument("--gamma", help="single gamma (shorthand for --gamma-grid g)")
    common.add_argument("--L", dest="L", help="field size exponent for verify (4, 8, 16)")

    parser = argparse.ArgumentParser(prog="edgecoding", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="closed-form MC and optimized HS latency")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo latency of chosen schemes")
    sub.add_parser("optimize-hybrid", parents=[common], help="hybrid candidate table and optimum")
    sw = sub.add_parser("sweep", parents=[common], help="latency of UC, MC, HS versus gamma")
    sw.add_argument("--simulate-closed", dest="simulate_closed", action="store_true", default=None,
                    help="also simulate MC and HS (rows mc_sim, hs_sim)")
    vp = sub.add_parser("verify", parents=[common], help="GF(2^L) decodability checks")
    vp.add_argument("--samples", type=int, default=100)
    vp.add_argument("--corrupt-uc", action="store_true", help="negative control: non-covering UC schedule")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {
        k: getattr(args, k, None)
        for k in ("scheme", "gamma_grid", "trials", "seed", "out", "eta", "mu", "m", "K", "N",
                  "tau", "L", "simulate_closed")
    }
    if args.gamma is not None:
        if flags["gamma_grid"] is None:
            flags["gamma_grid"] = args.gamma
        flags["gamma"] = args.gamma
    file_values = {}
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                file_values = json.load(fh)
            if not isinstance(file_values, dict):
                raise ConfigError("config file must hold a JSON object")
        if args.command == "verify" and flags["scheme"] is None and "scheme" not in file_values:
            flags["scheme"] = "uc,mc,hs"
        if args.command == "verify":
            defaults = {"K": 4, "m": 4, "N": 4}
            for key, value in defaults.items():
                if flags.get(key) is None and key not in file_values:
                    flags[key] = value
        run = parse_config(file_values, flags)
    except OSError as exc:
        _log(f"error: cannot read config: {exc}")
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        _log(f"error: config is not valid JSON: {exc}")
        return EXIT_CONFIG
    except ConfigError as exc:
        _log("configuration error:")
        for p in exc.problems:
            _log(f"  - {p}")
        return EXIT_CONFIG

    _log(f"kernel backend: {accel_backend()}")
    try:
        if args.command == "analyze":
            return cmd_analyze(run)
        if args.command == "simulate":
            return cmd_simulate(run)
        if args.command == "optimize-hybrid":
            return cmd_optimize(run)
        if args.command == "sweep":
            return cmd_sweep(run)
        if args.command == "verify":
            return cmd_verify(run, args.samples, args.corrupt_uc)
    except ConfigError as exc:
        _log("configuration error:")
        for p in exc.problems:
            _log(f"  - {p}")
        return EXIT_CONFIG
    except OSError as exc:
        _log(f"error: I/O failure: {exc}")
        return EXIT_IO
    parser.error(f"unknown command {args.command}")
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
