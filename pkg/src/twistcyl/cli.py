"""Command-line front end: build, verify, sweep and lemma fuzzing.

Exit codes: 0 when everything passes, 1 on a certificate failure and 2 on an
invalid configuration.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .embedding import BudgetError, boundary_loops, build, build_report, triangulate, write_obj
from .flat_domain import PATTERN_IDS, BandCollisionError, PatternError, lemma_line_fuzz, pattern_catalog
from .limits import (DEFAULT_EPSILONS, SCHEMA_VERSION, RunConfig, Tolerances, monotonicity, records_csv, run,
                     sweep_summary, verify_embedding)
from .topology import LinkingError, hopf_perturbation_suite, hull_diameter_fuzz, linking

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# output helpers


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, path) -> None:
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **obj}, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# config


def _epsilon_list(text):
    try:
        return [float(v) for v in str(text).replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from None


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; keys are flag names with or without dashes."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, val = (s.strip() for s in line.split(sep, 1))
        out[key.lstrip("-").replace("-", "_")] = val
    return out


def _common(p: argparse.ArgumentParser, seed: int = 0) -> None:
    p.add_argument("--config", help="flat key = value file; flags given on the command line win")
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out", help="primary output file (OBJ for build, CSV for sweep)")
    p.add_argument("--report", help="JSON report path (stdout if omitted)")


def _geometry(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=64, help="isometry grid resolution")
    p.add_argument("--mesh-grid", type=int, default=32, help="flat-piece resolution of the checked mesh")
    p.add_argument("--band-columns", type=int, default=24)
    p.add_argument("--loop-samples", type=int, default=1024)
    p.add_argument("--layer-gap", type=float, default=None, help="distance between stacked layers")
    t = Tolerances()
    p.add_argument("--tol-gram", type=float, default=t.gram)
    p.add_argument("--tol-linking", type=float, default=t.linking)
    p.add_argument("--tol-chain", type=float, default=t.chain_slack)
    p.add_argument("--tol-arc", type=float, default=t.arc_rel)
    p.add_argument("--tol-separation", type=float, default=t.separation_fraction,
                   help="required min separation as a fraction of the layer gap")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    ap = argparse.ArgumentParser(prog="twistcyl", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["build"] = sub.add_parser("build", help="assemble one embedding, export OBJ + report")
    p.add_argument("--pattern", default="P1", choices=PATTERN_IDS)
    p.add_argument("--epsilon", type=float, default=0.1)
    _geometry(p)
    _common(p)

    p = subs["verify"] = sub.add_parser("verify", help="run every certificate on one embedding")
    p.add_argument("--pattern", default="P1", choices=PATTERN_IDS)
    p.add_argument("--epsilon", type=float, default=0.1)
    _geometry(p)
    _common(p)

    p = subs["sweep"] = sub.add_parser("sweep", help="convergence sweep over epsilon")
    p.add_argument("--pattern", default="all", help="pattern id, comma list, or 'all'")
    p.add_argument("--epsilons", type=_epsilon_list, nargs="+", default=[list(DEFAULT_EPSILONS)])
    p.add_argument("--slack", type=float, default=0.1, help="per-step monotonicity slack")
    p.add_argument("--jobs", type=int, default=1)
    _geometry(p)
    _common(p)

    p = subs["lemmas"] = sub.add_parser("lemmas", help="randomized lemma suites")
    p.add_argument("--trials", type=int, default=1000, help="per suite; the linking suite runs half")
    _common(p, seed=42)
    return ap, subs


def parse_args(argv=None) -> argparse.Namespace:
    ap, subs = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            values = read_config_file(args.config)
        except OSError as exc:
            ap.error(f"cannot read config: {exc}")
        except ConfigError as exc:
            ap.error(str(exc))
        p = subs[args.command]
        known = {a.dest for a in p._actions} - {"help", "config"}
        unknown = sorted(set(values) - known)
        if unknown:
            p.error(f"unknown config key(s): {', '.join(unknown)}")
        # string defaults go through each action's type, exactly as flags would
        p.set_defaults(**values)
        args = ap.parse_args(argv)
    return args


def run_config(args) -> RunConfig:
    if args.grid < 4 or args.mesh_grid < 4 or args.band_columns < 2 or args.loop_samples < 128:
        raise ConfigError("grid sizes too small")
    if args.layer_gap is not None and args.layer_gap < 0:
        raise ConfigError("layer gap must be nonnegative")
    tol = Tolerances(gram=args.tol_gram, linking=args.tol_linking, chain_slack=args.tol_chain,
                     arc_rel=args.tol_arc, separation_fraction=args.tol_separation)
    return RunConfig(grid_resolution=args.grid, mesh_resolution=args.mesh_grid, band_columns=args.band_columns,
                     loop_samples=args.loop_samples, layer_gap=args.layer_gap, seed=args.seed, tolerances=tol)


def _check_epsilon(eps: float) -> None:
    if not eps > 0:
        raise ConfigError(f"epsilon must be positive, got {eps}")


# ---------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    cfg = run_config(args)
    _check_epsilon(args.epsilon)
    emb = build(pattern_catalog(args.pattern), args.epsilon, layer_gap=cfg.layer_gap)
    report = build_report(emb, cfg.grid_resolution, cfg.loop_samples)
    F, G = boundary_loops(emb, cfg.loop_samples)
    try:
        lk = linking(F, G, seed=cfg.seed)
        report["linking"] = {"gauss": lk.gauss_value, "crossings": lk.crossing_value}
        linked = abs(abs(lk.gauss_value) - 1) <= cfg.tolerances.linking and lk.agreed
    except LinkingError as exc:
        report["linking"] = {"error": str(exc)}
        linked = False
    report["invariants"] = {
        "isometry": report["max_gram_defect"] <= cfg.tolerances.gram,
        "continuity": report["max_junction_defect"] <= 1e-9,
        "hopf_link": bool(linked),
    }
    report["pass"] = all(report["invariants"].values())
    if args.out:
        mesh = triangulate(emb, cfg.grid_resolution)
        buf = io.StringIO()
        write_obj(mesh, buf, loops=(F, G))
        write_atomic(args.out, buf.getvalue())
        report["mesh"] = {"path": str(args.out), "vertices": len(mesh.vertices), "faces": len(mesh.faces)}
    _emit(_dump(report), args.report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_verify(args) -> int:
    cfg = run_config(args)
    _check_epsilon(args.epsilon)
    emb = build(pattern_catalog(args.pattern), args.epsilon, layer_gap=cfg.layer_gap)
    bundle = verify_embedding(emb, cfg)
    _emit(json.dumps(bundle, indent=2, sort_keys=True) + "\n", args.report)
    return EXIT_OK if bundle["pass"] else EXIT_FAIL


def _sweep_job(job):
    pid, eps, cfg = job
    _, bundle, rec = run(pid, eps, cfg)
    return bundle, rec


def _patterns(text: str) -> list:
    if text == "all":
        return list(PATTERN_IDS)
    ids = [s.strip() for s in text.split(",") if s.strip()]
    for pid in ids:
        if pid not in PATTERN_IDS:
            raise ConfigError(f"unknown pattern {pid!r}; expected one of {PATTERN_IDS} or 'all'")
    return ids


def cmd_sweep(args) -> int:
    cfg = run_config(args)
    pids = _patterns(args.pattern)
    eps = [e for group in args.epsilons for e in (group if isinstance(group, list) else [group])]
    if not eps:
        raise ConfigError("no epsilons given")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("epsilons must be strictly decreasing")
    for e in eps:
        _check_epsilon(e)
        if e > 0.5:
            raise BandCollisionError(f"bands collide: epsilon={e} exceeds 0.5")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    jobs = [(pid, e, cfg) for pid in pids for e in eps]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    # results come back in job order, so the merge is deterministic
    by_pattern = {pid: [] for pid in pids}
    failures = []
    for (pid, e, _), (bundle, rec) in zip(jobs, results):
        by_pattern[pid].append(rec)
        if not bundle["pass"]:
            failures.append({"pattern": pid, "epsilon": e,
                             "failed": sorted(k for k, v in bundle["checks"].items() if not v)})
    records = [r for pid in pids for r in by_pattern[pid]]
    mono_ok = all(m["nonincreasing"] for pid in pids for m in monotonicity(by_pattern[pid], args.slack).values())
    _emit(records_csv(records), args.out)
    summary = json.loads(sweep_summary(by_pattern))
    summary.update({"verification_failures": failures, "monotone": mono_ok, "slack": args.slack,
                    "pass": mono_ok and not failures})
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.report:
        write_atomic(args.report, text)
    elif args.out:
        sys.stdout.write(text)
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_lemmas(args) -> int:
    if args.trials < 0:
        raise ConfigError("--trials must be nonnegative")
    n = args.trials
    report = {"seed": args.seed, "trials": n, "suites": {}}
    if n > 0:
        report["suites"] = {
            "line_lemma": lemma_line_fuzz(n, args.seed, tol=1e-9),
            "hull_diameter": hull_diameter_fuzz(n, args.seed, tol=1e-12),
            "hopf_linking": hopf_perturbation_suite(n // 2, args.seed),
        }
    bad = sum(s.get("violations", 0) + s.get("disagreements", 0) for s in report["suites"].values())
    report["pass"] = bad == 0
    _emit(_dump(report), args.report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


COMMANDS = {"build": cmd_build, "verify": cmd_verify, "sweep": cmd_sweep, "lemmas": cmd_lemmas}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BandCollisionError as exc:
        msg = str(exc)
        print(msg if "bands collide" in msg else f"bands collide: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, PatternError, BudgetError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
