"""Command line front end.

Subcommands: retrieve, sweep, audit-privacy, audit-symmetry, rates, selftest.
Settings come from built-in defaults, then ``--config`` (JSON), then flags.
Artifacts are written atomically into ``--out`` and contain no timestamps,
so identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import analysis, audit
from .adversary import AdversarySpec, Placement, Strategy, expand_exhaustive
from .galois import GF
from .protocol import InfeasibleParameters, RoundFailure, SchemeParams
from .simulation import DEFAULT_MODULUS, SweepSummary, build_system, parameter_grid, run_retrieval, sweep
from .storage import load_files

PRESETS = {
    "small": {"n": 9, "k": 4, "t": 1, "b": 1, "r": 1, "M": 2},
    "medium": {"n": 14, "k": 4, "t": 2, "b": 1, "r": 1, "M": 2},
}

CONFIG_KEYS = {
    "params", "p", "seed", "file_index", "symmetric", "adversary", "files",
    "keep_transcript", "grid", "trials", "audit",
}


class UsageError(Exception):
    pass


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_config(args) -> dict:
    cfg: dict = {"params": dict(PRESETS["small"]), "p": DEFAULT_MODULUS, "seed": 0}
    if args.config:
        try:
            user = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(user, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(user) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "params" in user:
            cfg["params"] = {}
        for key, value in user.items():
            if key == "params":
                cfg["params"].update(value)
            else:
                cfg[key] = value
    if getattr(args, "preset", None):
        cfg["params"] = dict(PRESETS[args.preset])
    for name in ("n", "k", "t", "b", "r", "M"):
        v = getattr(args, name, None)
        if v is not None:
            cfg["params"][name] = v
    if args.seed is not None:
        cfg["seed"] = args.seed
    if getattr(args, "p", None) is not None:
        cfg["p"] = args.p
    return cfg


def scheme_params(cfg: dict) -> SchemeParams:
    prm = cfg["params"]
    missing = {"n", "k", "t", "b", "r"} - set(prm)
    if missing:
        raise UsageError(f"params missing {sorted(missing)}")
    return SchemeParams(prm["n"], prm["k"], prm["t"], prm["b"], prm["r"], prm.get("M", 2))


def adversary_from(cfg: dict, b: int, r: int):
    """Configured adversary; defaults to the scheme's own budget, "none" disables it."""
    raw = cfg.get("adversary")
    if raw is None:
        return AdversarySpec(b=b, r=r, seed=cfg["seed"])
    if raw == "none":
        return None
    raw = dict(raw)
    raw.setdefault("b", b)
    raw.setdefault("r", r)
    raw.setdefault("seed", cfg["seed"])
    try:
        return AdversarySpec.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad adversary spec: {exc}") from exc


# subcommands


def cmd_retrieve(args, cfg, out: Path) -> int:
    params = scheme_params(cfg)
    files = None
    if cfg.get("files"):
        field, files = load_files(cfg["files"])
        if field.p != cfg["p"]:
            raise UsageError(f"file modulus {field.p} differs from configured p={cfg['p']}")
        params = params.with_files(len(files))
    system = build_system(params, cfg["p"], cfg["seed"], files)
    i = args.index or cfg.get("file_index", 1)
    adversary = adversary_from(cfg, params.b, params.r)
    if adversary is not None and adversary.placement is Placement.EXHAUSTIVE:
        raise UsageError("retrieve needs a single placement; use sweep for exhaustive enumeration")
    symmetric = args.symmetric or bool(cfg.get("symmetric", False))
    record = {
        "params": {"n": params.n, "k": params.k, "t": params.t, "b": params.b, "r": params.r, "M": params.M},
        "derived": {"rho": params.rho, "L": params.L, "S": params.S, "rate": str(params.rate)},
        "p": cfg["p"],
        "seed": cfg["seed"],
        "file_index": i,
        "symmetric": symmetric,
        "adversary": adversary.to_dict() if adversary else None,
    }
    try:
        res = run_retrieval(system, i, adversary, symmetric, cfg["seed"],
                            keep_transcript=args.transcript or bool(cfg.get("keep_transcript")))
    except RoundFailure as exc:
        record.update(success=False, error=str(exc), rate=None)
        write_atomic(out / "retrieve.json", dump_json(record))
        print(f"retrieval failed: {exc}", file=sys.stderr)
        return 1
    result = res.to_dict()
    record.update(result)
    record["rate"] = result["rate_observed"]
    write_atomic(out / "retrieve.json", dump_json(record))
    print(f"success={res.success} rate={res.rate_observed} downloaded={res.downloaded_symbols}")
    return 0 if res.success else 1


def _grid_from(cfg: dict) -> list:
    grid = cfg.get("grid")
    if grid is None:
        prm = cfg["params"]
        return [tuple(prm[key] for key in ("n", "k", "t", "b", "r")) + (prm.get("M", 2),)]
    if isinstance(grid, dict):
        try:
            return parameter_grid(grid["n_max"], grid.get("k_max", 4), grid.get("t_max", 2),
                                  grid.get("b_max", 2), grid.get("r_max", 2), grid.get("M", 2))
        except KeyError as exc:
            raise UsageError(f"grid object needs {exc}") from exc
    return [tuple(point) if not isinstance(point, dict) else point for point in grid]


def sweep_csv(summaries) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SweepSummary.FIELDS, lineterminator="\n")
    writer.writeheader()
    for s in summaries:
        writer.writerow(s.to_row())
    return buf.getvalue()


def cmd_sweep(args, cfg, out: Path) -> int:
    grid = _grid_from(cfg)
    # per-point budgets replace b and r of this template
    adversary = adversary_from(cfg, 0, 0)
    if args.exhaustive and adversary is not None:
        adversary = AdversarySpec.from_dict({**adversary.to_dict(), "placement": "exhaustive-enumeration"})
    trials = args.trials or cfg.get("trials", 10)
    summaries = sweep(grid, trials, adversary, cfg["seed"], cfg["p"], args.jobs,
                      symmetric=args.symmetric or bool(cfg.get("symmetric", False)))
    write_atomic(out / "sweep.csv", sweep_csv(summaries))
    feasible = [s for s in summaries if s.feasible]
    ok = sum(1 for s in feasible if s.successes == s.runs)
    print(f"{len(summaries)} grid points, {len(feasible)} feasible, {ok} fully successful")
    return 0 if ok == len(feasible) else 1


def _audit_task(task):
    kind, params, T, p, opts = task
    field = GF(p)
    if kind == "exact":
        return audit.audit_privacy_exact(params, T, field, masked=opts["masked"])
    return audit.audit_privacy_statistical(
        params, T, opts["trials"], opts["significance"], field, seed=opts["seed"], masked=opts["masked"]
    )


def cmd_audit_privacy(args, cfg, out: Path) -> int:
    params = scheme_params(cfg)
    acfg = dict(cfg.get("audit", {}))
    mode = args.mode or acfg.get("mode", "auto")
    # the storage modulus is irrelevant for query privacy; use a tiny field
    p = args.audit_p or acfg.get("p") or audit.audit_field(params).p
    sets = acfg.get("colluding_sets")
    if sets is None:
        sets = [list(T) for T in itertools.combinations(range(1, params.n + 1), params.t)]
    opts = {
        "masked": not (args.mutate or acfg.get("mutate", False)),
        "trials": args.trials or acfg.get("trials", 100_000),
        "significance": args.significance or acfg.get("significance", 0.01),
        "seed": cfg["seed"],
    }
    if mode == "auto":
        nvars = params.t * params.L * params.M * params.S
        mode = "exact" if p ** nvars * params.M <= audit.MAX_ENUMERATION else "statistical"
    if mode not in ("exact", "statistical"):
        raise UsageError(f"unknown audit mode {mode!r}")
    tasks = [(mode, params, tuple(T), p, opts) for T in sets]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            verdicts = list(pool.map(_audit_task, tasks))
    else:
        verdicts = [_audit_task(task) for task in tasks]
    write_atomic(out / "audit_privacy.json", dump_json([v.to_dict() for v in verdicts]))
    passed = sum(v.passed for v in verdicts)
    print(f"{mode} privacy audit over GF({p}): {passed}/{len(verdicts)} colluding sets pass")
    return 0 if passed == len(verdicts) else 1


def cmd_audit_symmetry(args, cfg, out: Path) -> int:
    params = scheme_params(cfg)
    p = args.audit_p or audit.audit_field(params).p
    i = args.index or cfg.get("file_index", 1)
    verdict = audit.audit_symmetry_exact(params, i, GF(p), masked=not args.no_mask)
    write_atomic(out / "audit_symmetry.json", dump_json(verdict.to_dict()))
    print(f"symmetric-variant audit over GF({p}): {'pass' if verdict.passed else 'FAIL'}")
    return 0 if verdict.passed else 1


def cmd_rates(args, cfg, out: Path) -> int:
    if args.figure:
        points = analysis.rate_curves_figure(args.m_max)
    else:
        params = scheme_params(cfg)
        n, k, t, b, r = params.n, params.k, params.t, params.b, params.r
        points = [analysis.RatePoint(analysis.OURS, n, k, t, b, r, None, analysis.rate_ours(n, k, t, b, r))]
        if b == 0 or r == 0:
            zg = analysis.rate_zg_asymptotic(n, k, t, b, r)
            scheme = analysis.ZG_UNRESPONSIVE if r > 0 else analysis.ZG_BYZANTINE
            points.append(analysis.RatePoint(scheme, n, k, t, b, r, None, zg.rate, zg.positive))
    write_atomic(out / "rates.csv", analysis.rates_csv(points))
    print(f"wrote {len(points)} rate points")
    return 0


def selftest(seed=0, seeds: int = 2) -> dict:
    """Exhaustive placements on the small preset plus the exact privacy audit on the tiny instance."""
    checks = {}
    params = SchemeParams(9, 4, 1, 1, 1, 2)
    total = ok = 0
    for sd in range(seeds):
        system = build_system(params, DEFAULT_MODULUS, f"{seed}/selftest/{sd}")
        template = AdversarySpec(b=1, r=1, strategy=Strategy.REPLACE_UNIFORM_RANDOM, seed=f"{seed}/{sd}")
        for spec in expand_exhaustive(template, params.n):
            for i in (1, 2):
                total += 1
                try:
                    res = run_retrieval(system, i, spec, seed=f"{seed}/{sd}/{spec.seed}")
                    ok += res.success and res.rate_observed == params.rate
                except RoundFailure:
                    pass
    checks["small_preset_exhaustive"] = {"runs": total, "successes": ok, "passed": ok == total}
    tiny = SchemeParams(3, 1, 1, 0, 0, 2)
    field = GF(5)
    verdicts = [audit.audit_privacy_exact(tiny, (j,), field) for j in range(1, 4)]
    mutated = [audit.audit_privacy_exact(tiny, (j,), field, masked=False) for j in range(1, 4)]
    checks["exact_privacy"] = {"passed": all(v.passed for v in verdicts)}
    checks["exact_privacy_mutation_detected"] = {"passed": not any(v.passed for v in mutated)}
    return checks


def cmd_selftest(args, cfg, out: Path) -> int:
    checks = selftest(cfg["seed"])
    write_atomic(out / "selftest.json", dump_json(checks))
    for name, c in checks.items():
        print(f"{'PASS' if c['passed'] else 'FAIL'} {name}")
    return 0 if all(c["passed"] for c in checks.values()) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps and audits")
    common.add_argument("-v", "--verbose", action="store_true")

    prm = argparse.ArgumentParser(add_help=False)
    prm.add_argument("--preset", choices=sorted(PRESETS), help="small = (9,4,1,1,1), medium = (14,4,2,1,1), both with M=2")
    for name in ("n", "k", "t", "b", "r"):
        prm.add_argument(f"--{name}", type=int)
    prm.add_argument("--M", type=int, help="number of files")
    prm.add_argument("--p", type=int, help="field modulus for storage (default 65537)")

    parser = argparse.ArgumentParser(prog="rspir", description="RS-coded PIR with colluding, byzantine and unresponsive servers")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("retrieve", parents=[common, prm], help="run one retrieval")
    p.add_argument("--index", type=int, help="desired file (1-based)")
    p.add_argument("--symmetric", action="store_true", help="servers add the shared mask")
    p.add_argument("--transcript", action="store_true", help="keep per-round queries and responses")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("sweep", parents=[common, prm], help="retrievals over a parameter grid")
    p.add_argument("--trials", type=int)
    p.add_argument("--exhaustive", action="store_true", help="enumerate all adversary placements")
    p.add_argument("--symmetric", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("audit-privacy", parents=[common, prm], help="t-privacy audit")
    p.add_argument("--mode", choices=["exact", "statistical", "auto"])
    p.add_argument("--trials", type=int)
    p.add_argument("--significance", type=float)
    p.add_argument("--audit-p", type=int, help="field for the audit (default: smallest prime > n)")
    p.add_argument("--mutate", action="store_true", help="drop the query masking (must fail)")
    p.set_defaults(func=cmd_audit_privacy)

    p = sub.add_parser("audit-symmetry", parents=[common, prm], help="symmetric-variant audit")
    p.add_argument("--index", type=int)
    p.add_argument("--audit-p", type=int)
    p.add_argument("--no-mask", action="store_true", help="disable the shared mask (must fail)")
    p.set_defaults(func=cmd_audit_symmetry)

    p = sub.add_parser("rates", parents=[common, prm], help="closed-form rates")
    p.add_argument("--figure", action="store_true", help="rate-versus-M curves at (n,k,t)=(12,2,3)")
    p.add_argument("--m-max", type=int, default=100)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("selftest", parents=[common], help="exhaustive small-preset suite and exact privacy audit")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return args.func(args, cfg, Path(args.out))
    except UsageError as exc:
        parser.error(str(exc))
    except InfeasibleParameters as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return 3
    except (ValueError, audit.EnumerationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
