"""Command-line interface.

Exit codes: 0 success / informative, 1 negative verdict, 2 usage or
configuration error, 3 guard tripped (prior bounds violated, replay mismatch,
internal consistency failure).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import traceback
from pathlib import Path

import numpy as np

from . import io as sio
from . import linalg as la
from . import worked_example as ex
from .analysis import ExperimentLog, check_informativity
from .design import (
    Replay,
    ReplayPlant,
    SimulatedPlant,
    baseline_sample_counts,
    make_policy,
    online_experiment,
)
from .exceptions import (
    IdentificationError,
    NotInformative,
    PriorBoundsViolated,
    ReplayMismatch,
    ShortexpError,
)
from .linalg import Mode
from .lti import are_isomorphic, is_minimal, random_minimal_system, simulate
from .realization import identify

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

logger = logging.getLogger("shortexp")


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# run


def _load_plant(cfg: dict, mode: Mode, seed: int, base: Path):
    """Return (plant, hidden system or None, default policy or None)."""
    plant_cfg = cfg.get("plant")
    if not isinstance(plant_cfg, dict):
        raise ConfigError("config needs a 'plant' object")
    sources = [k for k in ("system", "system_path", "replay_log", "random") if k in plant_cfg]
    if len(sources) != 1:
        raise ConfigError(f"plant needs exactly one source, got {sources or 'none'}")
    src = sources[0]
    if src == "replay_log":
        log = sio.read_log(base / plant_cfg["replay_log"], mode)
        return ReplayPlant(log), None, Replay(log.u)
    if src == "system":
        system = sio.system_from_dict(plant_cfg["system"], mode)
    elif src == "system_path":
        system = sio.read_system(base / plant_cfg["system_path"], mode)
    else:
        r = plant_cfg["random"]
        system = random_minimal_system(int(r["n"]), int(r["m"]), int(r["p"]), seed=seed)
        system = system.astype(mode)
    if "x0" in plant_cfg:
        x0 = plant_cfg["x0"]
    else:
        x0 = np.random.default_rng(seed).integers(-3, 4, size=system.n)
    return SimulatedPlant(system, x0), system, None


def _run_once(cfg: dict, L: int, N: int, mode: Mode, seed: int, out_dir: Path, base: Path) -> int:
    plant, system, default_policy = _load_plant(cfg, mode, seed, base)
    pol_cfg = cfg.get("policy")
    if isinstance(pol_cfg, dict) and pol_cfg.get("kind") == "replay" and "log" in pol_cfg:
        policy = Replay(sio.read_log(base / pol_cfg["log"], mode).u)
    elif pol_cfg is None and default_policy is not None:
        policy = default_policy
    else:
        if isinstance(pol_cfg, dict) and pol_cfg.get("kind") == "seeded-random" and "seed" not in pol_cfg:
            pol_cfg = dict(pol_cfg, seed=seed)
        policy = make_policy(pol_cfg)

    log, trace = online_experiment(plant, L, N, policy)
    report = check_informativity(log, L, N)
    out_dir.mkdir(parents=True, exist_ok=True)
    extra = {
        "seed": seed,
        "mode": mode.value,
        "T": log.t,
        "final_k": trace.final_k,
        "policy": policy.describe(),
    }
    sio.write_log(out_dir / "log.csv", log, comment=f"seed={seed} mode={mode.value}")
    (out_dir / "trace.jsonl").write_text(sio.trace_to_jsonl(trace, meta=extra))
    if system is not None:
        sio.write_system(out_dir / "system.json", system, seed=seed)
    (out_dir / "report.json").write_text(sio.report_to_json(report, **extra) + "\n")
    print(
        f"t={log.t} k={trace.final_k} ell_min={report.ell_min} n_min={report.n_min} "
        f"L_a={report.L_actual} rank_H={report.rank_H} informative={report.informative}"
    )
    return EXIT_OK if report.informative else EXIT_NEGATIVE


def cmd_run(args) -> int:
    if not args.config:
        raise ConfigError("run needs --config")
    cfg_path = Path(args.config)
    try:
        cfg = json.loads(cfg_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    base = cfg_path.parent
    L = args.L if args.L is not None else cfg.get("L")
    N = args.upper_n if args.upper_n is not None else cfg.get("N")
    if L is None or N is None or int(L) < 0 or int(N) < 0:
        raise ConfigError("bounds L and N must be given and nonnegative")
    mode = Mode(args.mode or cfg.get("mode", "exact"))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    out_dir = Path(args.out_dir or cfg.get("out_dir", "out"))
    trials = args.trials or 1
    if trials == 1:
        return _run_once(cfg, int(L), int(N), mode, seed, out_dir, base)
    codes = []
    for i in range(trials):
        print(f"trial {i} (seed {seed + i}): ", end="")
        codes.append(_run_once(cfg, int(L), int(N), mode, seed + i, out_dir / f"trial_{i}", base))
    return max(codes)


# --------------------------------------------------------------------------
# check / identify / compare


def _read_log_arg(args) -> ExperimentLog:
    if not args.log:
        raise ConfigError("--log is required")
    if args.L is None or args.upper_n is None:
        raise ConfigError("-L and --upper-n are required")
    try:
        return sio.read_log(args.log, Mode(args.mode or "exact"))
    except OSError as exc:
        raise ConfigError(f"cannot read log: {exc}") from exc


def cmd_check(args) -> int:
    log = _read_log_arg(args)
    try:
        report = check_informativity(log, args.L, args.upper_n)
    except PriorBoundsViolated as exc:
        print(str(exc))
        return EXIT_NEGATIVE
    print(sio.report_to_json(report))
    return EXIT_OK if report.informative else EXIT_NEGATIVE


def cmd_identify(args) -> int:
    log = _read_log_arg(args)
    try:
        report = check_informativity(log, args.L, args.upper_n)
        model = identify(log, report)
    except (NotInformative, PriorBoundsViolated) as exc:
        print(f"not identifiable: {exc}")
        return EXIT_NEGATIVE
    out = Path(args.out) if args.out else Path(args.out_dir or ".") / "model.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    sio.write_system(
        out,
        model.system,
        residual=model.residual,
        x0=[la.fmt_scalar(v) for v in model.x0],
        source_log=str(args.log),
        report=report.to_dict(),
    )
    print(f"n={model.system.n} residual={model.residual}")
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.counts:
        m, L, N, ell, n = args.counts
        online, pe, fixed = baseline_sample_counts(m, L, N, ell, n)
        print(f"{'method':<28}{'samples':>10}")
        print(f"{'online (shortest)':<28}{online:>10}")
        print(f"{'persistency of excitation':<28}{pe:>10}")
        print(f"{'fixed depth L':<28}{fixed:>10}")
        return EXIT_OK
    if not (args.model and args.truth):
        raise ConfigError("compare needs MODEL and TRUTH system files, or --counts")
    mode = Mode(args.mode or "exact")
    a = sio.read_system(args.model, mode)
    b = sio.read_system(args.truth, mode)
    if not (is_minimal(a) and is_minimal(b)):
        print("both systems must be minimal")
        return EXIT_NEGATIVE
    iso = are_isomorphic(a, b)
    print(f"isomorphic={iso}")
    return EXIT_OK if iso else EXIT_NEGATIVE


# --------------------------------------------------------------------------
# reproduce the reference example


def reproduce(mode: Mode = Mode.EXACT, recording: ExperimentLog | None = None) -> list[tuple[str, bool, str]]:
    """Run the reference example and return (check, passed, detail) rows in order."""
    rows: list[tuple[str, bool, str]] = []

    def check(name, got, want):
        rows.append((name, got == want, f"got {got}, expected {want}"))

    def check_table(name, got, want):
        got = [[la.fmt_scalar(v) for v in r] for r in got]
        want = [[la.fmt_scalar(v) for v in r] for r in want]
        if np.shape(got) != np.shape(want):
            rows.append((name, False, f"shape {np.shape(got)}, expected {np.shape(want)}"))
            return
        diff = [(i, s) for i, r in enumerate(got) for s, v in enumerate(r) if v != want[i][s]]
        detail = "identical" if not diff else f"first difference at row {diff[0][0] + 1}, t={diff[0][1]}"
        rows.append((name, not diff, detail))

    system = ex.system(mode)
    rec = recording if recording is not None else ex.log(mode)
    plant = ReplayPlant(rec) if recording is not None else SimulatedPlant(system, ex.X0)
    try:
        log, trace = online_experiment(plant, ex.L, ex.N, Replay(rec.u))
    except ShortexpError as exc:
        rows.append(("online experiment (L=4, N=4)", False, f"{type(exc).__name__}: {exc}"))
        return rows
    cps = {c.t: (c.ell_min, c.n_min, c.L_actual) for c in trace.checkpoints}
    trans = {k: (b, c) for k, (a, b, c) in trace.rank_transitions().items()}
    # checkpoints and rank transitions interleaved in time order, so the first
    # failure reported is the earliest divergence
    for (t, ell, n, La), k in zip(ex.CHECKPOINTS, [1, 2, 3, None]):
        check(f"(ell_min, n_min, L_a) at t={t}", cps.get(t), (ell, n, La))
        if k is not None:
            check(f"rank H_k,t after first / last input at depth {k}", trans.get(k), ex.RANK_TRANSITIONS[k])
    check("termination time T", log.t, ex.T)
    check("final depth k = L_a", trace.final_k, 3)
    report = check_informativity(log, ex.L, ex.N)
    check("informative at T", report.informative, True)
    check("rank H_3,14", report.rank_H, 11)
    truth = simulate(system, ex.X0, log.u)
    check_table("input table", log.u, ex.log(mode).u)
    check_table("output table (true system)", log.y, truth.y)

    try:
        log36, trace36 = online_experiment(SimulatedPlant(system, ex.X0), 3, 6, Replay(ex.log(mode).u))
        check("L=3, N=6: same data", log36 == log, True)
        check("L=3, N=6: L_a at t=2", trace36.checkpoints[0].L_actual, 3)
    except ShortexpError as exc:
        rows.append(("L=3, N=6 run", False, f"{type(exc).__name__}: {exc}"))

    mod = ex.modified_log(mode)
    check_table("modified data: outputs", mod.y, simulate(system, ex.X0, mod.u).y)
    check("modified data: rank H_3(u)", la.rank(la.hankel(mod.u, 3)), 8)
    mrep = check_informativity(mod, ex.L, ex.N)
    check("modified data: rank H_3,14", mrep.rank_H, 10)
    check("modified data: informative", mrep.informative, False)

    check("sample counts (online, PE, fixed depth)",
          baseline_sample_counts(**ex.LARGE_CASE), ex.LARGE_CASE_COUNTS)
    return rows


def cmd_reproduce(args) -> int:
    mode = Mode(args.mode or "exact")
    recording = sio.read_log(args.log, mode) if args.log else None
    rows = reproduce(mode, recording)
    width = max(len(r[0]) for r in rows)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    failed = [r for r in rows if not r[1]]
    if failed:
        print(f"first failing check: {failed[0][0]} ({failed[0][2]})")
        return EXIT_NEGATIVE
    print(f"all {len(rows)} checks passed ({mode.value} mode)")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shortexp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, log=False):
        p.add_argument("-L", type=int, dest="L", help="upper bound on the lag")
        p.add_argument("--upper-n", type=int, dest="upper_n", help="upper bound on the state dimension")
        p.add_argument("--mode", choices=[m.value for m in Mode])
        p.add_argument("--out-dir")
        if log:
            p.add_argument("--log", help="CSV log with header t,u_1..u_m,y_1..y_p")

    p = sub.add_parser("run", help="run an online experiment")
    common(p)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="check informativity of a recorded log")
    common(p, log=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("identify", help="identify a model from an informative log")
    common(p, log=True)
    p.add_argument("--out", help="model JSON path (default OUT_DIR/model.json)")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("reproduce-paper", help="replay the built-in reference example")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--log", help="replace the recorded experiment (for mutation tests)")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("compare", help="compare two models, or tabulate sample counts")
    p.add_argument("model", nargs="?")
    p.add_argument("truth", nargs="?")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--counts", type=int, nargs=5, metavar=("M", "L", "N", "ELL", "NTRUE"))
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PriorBoundsViolated, ReplayMismatch, IdentificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except AssertionError:
        traceback.print_exc()
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
