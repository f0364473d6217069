"""Command line: ``ssbm gen | run | analyze | oracle | landscape``.

Exit codes: 0 success, 2 validation or configuration error, 3 I/O error,
4 size-cap refusal.
"""

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__, kernels
from .analysis import (
    histogram_from_values,
    pattern_census,
    psi_landscape,
    read_trajectory_csv,
    summarize_cuts,
    threshold_states,
    write_histogram_csv,
    write_landscape_csv,
    write_trajectory_header,
    write_trajectory_rows,
)
from .core import NestSchedule, RunConfig, UpdateRule, run
from .errors import QueryError, SizeError, SSBMError
from .oracle import exact_best, local_search_1opt
from .problems import gen_circulant, gen_complete, j_upper_bound, load_instance, save_instance

log = logging.getLogger("ssbm")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_SIZE = 4

RUN_DEFAULTS = {
    "rule": "evolved",
    "schedule": "0:100",
    "j": 0.0,
    "samples": 1,
    "seed": 0,
    "noise_sigma": 1e-3,
    "record_every": 10,
    "per_step_noise": False,
    "gamma": 2 * np.pi,
    "theta_b": 0.0,
    "workers": 1,
    "threshold": "midpoint",
}

MANIFEST = "manifest.json"
TRAJECTORY = "trajectory.csv"
FINAL_STATES = "final_states.csv"
BOUNDARY_STATES = "boundary_states.csv"


def sample_seed(master_seed, index):
    """64-bit seed of one sample, a function of (master seed, sample index) only."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _ints(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# -- gen -------------------------------------------------------------------


def cmd_gen(args):
    if args.type == "circulant":
        if not args.offsets:
            raise SSBMError("--offsets is required for circulant graphs")
        inst = gen_circulant(args.n, args.offsets, args.sign)
    else:
        inst = gen_complete(args.n, args.weights, args.seed)
    save_instance(inst, args.out)
    deg = inst.degree
    print(f"wrote {args.out}")
    print(f"nodes {inst.n}  edges {inst.num_edges}  antiferro {inst.n_antiferro}  ferro {inst.n_ferro}")
    print(f"degree min {int(deg.min())} max {int(deg.max())}")
    if inst.num_edges:
        print(f"j_upper_bound {j_upper_bound(inst):.6g}")
    return EXIT_OK


# -- run -------------------------------------------------------------------


def resolve_run_config(args):
    """Defaults < JSON config file < explicit flags."""
    resolved = dict(RUN_DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - set(RUN_DEFAULTS)
        if unknown:
            raise SSBMError(f"unknown config keys: {', '.join(sorted(unknown))}")
        resolved.update(data)
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    resolved["schedule"] = str(NestSchedule.parse(resolved["schedule"]))
    if int(resolved["samples"]) < 1:
        raise SSBMError("--samples must be >= 1")
    return resolved


def config_fingerprint(resolved, instance_fp):
    semantic = {k: v for k, v in resolved.items() if k not in ("workers", "threshold")}
    semantic["instance"] = instance_fp
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"), default=float)
    return hashlib.sha256(blob.encode()).hexdigest()


def _sample_config(resolved, index):
    rule = UpdateRule(resolved["rule"], float(resolved["gamma"]), float(resolved["theta_b"]))
    return RunConfig(
        rule=rule,
        schedule=NestSchedule.parse(resolved["schedule"]),
        j_magnitude=float(resolved["j"]),
        noise_sigma=float(resolved["noise_sigma"]),
        seed=sample_seed(resolved["seed"], index),
        record_every=int(resolved["record_every"]),
        per_step_noise=bool(resolved["per_step_noise"]),
    )


_WORKER = {}


def _init_worker(instance, resolved):
    _WORKER["instance"] = instance
    _WORKER["resolved"] = resolved


def _run_sample(index):
    return run(_WORKER["instance"], _sample_config(_WORKER["resolved"], index))


def run_batch(instance, resolved, workers=1):
    """Yield ``(index, RunRecord)`` in sample order; results do not depend on ``workers``."""
    samples = int(resolved["samples"])
    # fail fast on a bad rule/instance pairing before spawning workers
    cfg0 = _sample_config(resolved, 0)
    if cfg0.rule.kind == "basic" and instance.num_edges:
        run(instance, cfg0)
    if workers <= 1 or samples == 1:
        _init_worker(instance, resolved)
        for i in range(samples):
            yield i, _run_sample(i)
        return
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(instance, resolved)) as ex:
        yield from enumerate(ex.map(_run_sample, range(samples)))


def _fmt(x):
    return repr(float(x))


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def cmd_run(args):
    instance = load_instance(args.instance)
    resolved = resolve_run_config(args)
    os.makedirs(args.out, exist_ok=True)
    inst_fp = instance.fingerprint()
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()

    traj_path = os.path.join(args.out, TRAJECTORY)
    final_path = os.path.join(args.out, FINAL_STATES)
    bound_path = os.path.join(args.out, BOUNDARY_STATES)
    header_states = ["sample_id", "seed"] + [f"phi_{i}" for i in range(instance.n)]
    with open(traj_path, "w", newline="") as ftraj, open(final_path, "w", newline="") as ffin, open(
        bound_path, "w", newline=""
    ) as fbound:
        write_trajectory_header(ftraj)
        fin = csv.writer(ffin, lineterminator="\n")
        fin.writerow(header_states)
        bnd = csv.writer(fbound, lineterminator="\n")
        bnd.writerow(["sample_id", "step"] + header_states[2:])
        for idx, rec in run_batch(instance, resolved, int(resolved["workers"])):
            write_trajectory_rows(ftraj, idx, rec)
            fin.writerow([idx, rec.seed] + [_fmt(x) for x in rec.final_state])
            for step in sorted(rec.states):
                bnd.writerow([idx, step] + [_fmt(x) for x in rec.states[step]])
            log.info("sample %d done: final cut %s", idx, rec.cut[-1])

    elapsed = time.perf_counter() - t0
    manifest = {
        "tool": "ssbm",
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "config": resolved,
        "config_fingerprint": config_fingerprint(resolved, inst_fp),
        "instance": {"path": os.path.abspath(args.instance), "fingerprint": inst_fp, "n": instance.n, "edges": instance.num_edges},
        "master_seed": int(resolved["seed"]),
        "samples": int(resolved["samples"]),
        "sample_seeds": [sample_seed(resolved["seed"], i) for i in range(int(resolved["samples"]))],
        "files": {name: _sha256(os.path.join(args.out, name)) for name in (TRAJECTORY, FINAL_STATES, BOUNDARY_STATES)},
        "wall_clock": {"started": started.isoformat(), "elapsed_seconds": round(elapsed, 3)},
    }
    with open(os.path.join(args.out, MANIFEST), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    print(f"wrote {resolved['samples']} samples to {args.out} in {elapsed:.1f}s")
    return EXIT_OK


# -- analyze ---------------------------------------------------------------


def read_final_states(path):
    """``(sample_ids, states)`` from a final-state CSV."""
    ids, rows = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["sample_id", "seed"]:
            raise SSBMError(f"{path}: unexpected header")
        for row in reader:
            ids.append(int(row[0]))
            rows.append([float(x) for x in row[2:]])
    return ids, np.asarray(rows, dtype=np.float64)


def cmd_analyze(args):
    run_dir = args.out
    traj = read_trajectory_csv(os.path.join(run_dir, TRAJECTORY))
    if not traj:
        raise QueryError("trajectory is empty")
    final_cuts = np.array([traj[s]["cut_value"][-1] for s in sorted(traj)])
    final_step = int(traj[min(traj)]["step"][-1])
    steps = args.steps or [final_step]
    bin_width = args.bin_width
    histograms = {}
    for step in steps:
        values = []
        for sid in sorted(traj):
            hit = np.flatnonzero(traj[sid]["step"] == step)
            if hit.size == 0:
                raise QueryError(f"step {step} was not recorded for sample {sid}")
            values.append(traj[sid]["cut_value"][hit[0]])
        hist = histogram_from_values(values, step, bin_width)
        path = os.path.join(run_dir, f"histogram_step{step}.csv")
        write_histogram_csv(path, hist)
        histograms[step] = {"path": os.path.basename(path), "nonzero_bins": len(hist.nonzero())}

    threshold = args.threshold
    if threshold is None:
        try:
            with open(os.path.join(run_dir, MANIFEST)) as fh:
                threshold = json.load(fh)["config"].get("threshold", "midpoint")
        except (OSError, KeyError, ValueError):
            threshold = "midpoint"
    _, states = read_final_states(os.path.join(run_dir, FINAL_STATES))
    census = pattern_census(threshold_states(s, threshold) for s in states)
    with open(os.path.join(run_dir, "census.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pattern", "count"])
        w.writerows(census.table())

    summary = {
        "final_step": final_step,
        "threshold": threshold,
        "cut": summarize_cuts(final_cuts),
        "census": {
            "samples": census.n_samples,
            "unresolved": census.n_unresolved,
            "distinct": census.distinct,
            "modal_count": census.modal_count,
            "modal_fraction": census.modal_fraction,
        },
        "histograms": {str(k): v for k, v in histograms.items()},
    }
    with open(os.path.join(run_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    c = summary["cut"]
    print(f"samples {c['count']}  best cut {c['best']}  mean {c['mean']:.3f}  std {c['std']:.3f}")
    print(
        f"census: distinct {census.distinct}  modal fraction {census.modal_fraction:.3f}"
        f"  unresolved {census.n_unresolved}"
    )
    return EXIT_OK


# -- oracle / landscape ----------------------------------------------------


def cmd_oracle(args):
    instance = load_instance(args.instance)
    if args.local_search:
        res = local_search_1opt(instance, starts=args.starts, seed=args.seed)
        print(f"method local-search-1opt  starts {args.starts}  seed {args.seed}")
    else:
        res = exact_best(instance)
        print(f"method exact  enumerated {res.enumerated_count}")
    print(f"best_cut {res.best_cut:g}")
    print(f"best_energy {res.best_energy:g}")
    if not args.local_search:
        print(f"optimal_patterns {len(res.optimal_codes)}")
        for p in res.optimal_configs[: args.show]:
            print(f"  {p}")
    return EXIT_OK


def cmd_landscape(args):
    phi, values = psi_landscape(args.kind, args.res)
    write_landscape_csv(args.out, phi, values)
    print(f"wrote {args.res}x{args.res} {args.kind} grid to {args.out}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="ssbm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a problem instance file")
    g.add_argument("--type", choices=("circulant", "complete"), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--offsets", type=_ints)
    g.add_argument("--sign", type=int, choices=(1, -1), default=1)
    g.add_argument("--weights", choices=("all-af", "random-pm1"), default="random-pm1")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run independent samples of the dynamics")
    r.add_argument("--instance", required=True)
    r.add_argument("--config", help="JSON file with run settings; flags override it")
    r.add_argument("--rule", choices=("basic", "psi", "composite", "evolved"))
    r.add_argument("--schedule", help='phases "n:steps[,n:steps...]"')
    r.add_argument("--j", type=float)
    r.add_argument("--samples", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    r.add_argument("--per-step-noise", dest="per_step_noise", action="store_const", const=True)
    r.add_argument("--record-every", dest="record_every", type=int)
    r.add_argument("--gamma", type=float)
    r.add_argument("--theta-b", dest="theta_b", type=float)
    r.add_argument("--threshold", choices=("midpoint", "band"))
    r.add_argument("--workers", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="histograms, census and summary of a run directory")
    a.add_argument("--out", required=True, help="run output directory")
    a.add_argument("--steps", type=_ints)
    a.add_argument("--bin-width", dest="bin_width", type=float, default=1.0)
    a.add_argument("--threshold", choices=("midpoint", "band"))
    a.set_defaults(func=cmd_analyze)

    o = sub.add_parser("oracle", help="exact optimum or 1-opt baseline")
    o.add_argument("--instance", required=True)
    mode = o.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--local-search", dest="local_search", action="store_true")
    o.add_argument("--starts", type=int, default=20)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--show", type=int, default=10, help="optimal patterns to print")
    o.set_defaults(func=cmd_oracle)

    lnd = sub.add_parser("landscape", help="export the pairwise coupling term on a grid")
    lnd.add_argument("--kind", choices=("antiferro", "ferro"), required=True)
    lnd.add_argument("--res", type=int, default=101)
    lnd.add_argument("--out", required=True)
    lnd.set_defaults(func=cmd_landscape)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except SizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (SSBMError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
