"""``sumset-fuchs`` command line runner.

Every command is a pure function of its configuration: all randomness comes
from the master seed through :func:`derive_seed`, outputs are written with
fixed 17-significant-digit float formatting, and the worker count only
affects wall time.

Exit codes: 0 success, 1 a checked theorem failed, 2 usage error, 3 runtime
error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .concentration import (
    deviations_for_seed,
    fit_scaling,
    hoeffding_empirical,
    summarize_deviations,
)
from .kernel import Parameters, predicted_error_exponent
from .repcount import rep_series, sandwich_check, write_rep_csv
from .sequence import derive_seed, format_sequence, sequence_for
from .shell import build_partition, count_shell_general, enumerate_shell, verify_partition

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
OUT_ENV = "SUMSET_FUCHS_OUT"
COMMANDS = ("generate", "repcount", "sigma", "shell", "partition", "scaling", "hoeffding", "discrepancy")


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class ExperimentConfig:
    k: int
    beta: object
    n_grid: list
    seeds: list
    mode: str = "random"
    trials: int = 1000
    output_dir: Path = Path("sumset_out")
    workers: int = 1
    master_seed: int = 0
    weights: list | None = None
    overwrite: bool = False
    params: Parameters = field(init=False)

    def __post_init__(self):
        try:
            self.params = Parameters(self.k, self.beta)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"k/beta: {exc}") from None
        if not self.n_grid:
            raise ConfigError("n: grid is empty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError("n: grid must be strictly increasing")
        if self.n_grid[0] < 1:
            raise ConfigError("n: values must be >= 1")
        if not self.seeds:
            raise ConfigError("seeds: must be nonempty")
        if self.mode not in ("random", "midpoint"):
            raise ConfigError(f"mode: expected 'random' or 'midpoint', got {self.mode!r}")
        if self.workers < 1:
            raise ConfigError("workers: must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")


def _int_list(value, name):
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    if isinstance(value, (int, float)):
        value = [value]
    try:
        out = []
        for v in value:
            f = float(v)
            if not f.is_integer():
                raise ValueError(v)
            out.append(int(f))
        return out
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a list of integers, got {value!r}") from None


def _as_int(value, name):
    try:
        f = float(value)
        if not f.is_integer():
            raise ValueError
        return int(f)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected an integer, got {value!r}") from None


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    raw = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config: {exc}") from None
    known = {"k", "beta", "n", "n_grid", "seeds", "seed", "master_seed", "seed_count",
             "mode", "trials", "out", "output_dir", "workers", "weights", "overwrite"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown config key")
    for flag, key in (("k", "k"), ("beta", "beta"), ("n", "n"), ("seed", "master_seed"),
                      ("seed_count", "seed_count"), ("mode", "mode"), ("trials", "trials"),
                      ("out", "out"), ("workers", "workers")):
        val = getattr(args, flag)
        if val is not None:
            raw[key] = val
            if key == "master_seed":
                raw.pop("seed", None)
                raw.pop("seeds", None)
    if args.overwrite:
        raw["overwrite"] = True

    if "k" not in raw:
        raise ConfigError("k: required")
    if "beta" not in raw:
        raise ConfigError("beta: required")
    grid = raw.get("n", raw.get("n_grid"))
    if grid is None:
        raise ConfigError("n: required")
    n_grid = _int_list(grid, "n")
    master = _as_int(raw.get("master_seed", raw.get("seed", 0)), "seed")
    if not 0 <= master < 2**64:
        raise ConfigError("seed: must be a 64-bit unsigned integer")
    if "seeds" in raw:
        seeds = _int_list(raw["seeds"], "seeds")
    else:
        count = _as_int(raw.get("seed_count", 1), "seed_count")
        if count < 1:
            raise ConfigError("seed_count: must be >= 1")
        seeds = [derive_seed(master, "sequence", i) for i in range(count)]
    weights = _int_list(raw["weights"], "weights") if "weights" in raw else None
    out = raw.get("out", raw.get("output_dir", os.environ.get(OUT_ENV, "sumset_out")))
    return ExperimentConfig(
        k=_as_int(raw["k"], "k"),
        beta=str(raw["beta"]),
        n_grid=n_grid,
        seeds=seeds,
        mode=str(raw.get("mode", "random")),
        trials=_as_int(raw.get("trials", 1000), "trials"),
        output_dir=Path(out),
        workers=_as_int(raw.get("workers", 1), "workers"),
        master_seed=master,
        weights=weights,
        overwrite=bool(raw.get("overwrite", False)),
    )


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = cfg.output_dir
    if out.exists() and not out.is_dir():
        raise ConfigError(f"out: {out} is not a directory")
    if out.exists() and any(out.iterdir()) and not cfg.overwrite:
        raise ConfigError(f"out: {out} is not empty (pass --overwrite)")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _announce(path: Path):
    print(f"{path} sha256={_digest(path)}")


def _map(fn, items, workers: int):
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _seed_items(cfg):
    if cfg.mode == "midpoint":
        return [(0, None)]
    return list(enumerate(cfg.seeds))


def _tag(i, seed):
    return "midpoint" if seed is None else f"{i:03d}"


# ---------------------------------------------------------------------------
# per-item workers (top level so they pickle)
# ---------------------------------------------------------------------------

def _generate_one(item, p, n, mode):
    i, seed = item
    return format_sequence(sequence_for(p, n, seed, mode))


def _repcount_one(item, p, n, mode):
    i, seed = item
    return rep_series(sequence_for(p, n + p.k, seed, mode).slim(), n)


def _sigma_one(item, p, grid, mode):
    i, seed = item
    top = max(grid)
    seq = sequence_for(p, top + p.k, seed, mode)
    rep = rep_series(seq.slim(), top)
    return [sandwich_check(seq, n, rep) for n in grid]


def _shell_one(n, p):
    sh = enumerate_shell(p, n)
    mf = int(sh.fiber_sizes.max()) if len(sh) else 0
    return n, len(sh), sh.tuple_count, mf


def _partition_one(n, p):
    sh = enumerate_shell(p, n)
    return verify_partition(build_partition(p, n, sh))


def _count_one(n, weights, alpha):
    return count_shell_general(weights, alpha, n)


def _hoeffding_one(n, p, trials, seed, ys):
    sh = enumerate_shell(p, n)
    part = build_partition(p, n, sh)
    if len(part) == 0:
        return n, None
    sizes = part.sizes
    sumsq = part.class_sumsq()
    # largest class; ties broken by sum of squared fibers, then by class order
    best = int(np.lexsort((-np.arange(len(sizes)), sumsq, sizes))[-1])
    return n, hoeffding_empirical(part[best], p, n, trials, seed, ys)


def _discrepancy_one(item, p, grid, mode):
    i, seed = item
    return deviations_for_seed(p, grid, seed, mode)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    n = max(cfg.n_grid)
    items = _seed_items(cfg)
    texts = _map(partial(_generate_one, p=cfg.params, n=n, mode=cfg.mode), items, cfg.workers)
    for (i, seed), text in zip(items, texts):
        path = out / f"sequence_{_tag(i, seed)}.txt"
        path.write_text(text)
        _announce(path)
    return EXIT_OK


def cmd_repcount(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    n = max(cfg.n_grid)
    items = _seed_items(cfg)
    reps = _map(partial(_repcount_one, p=cfg.params, n=n, mode=cfg.mode), items, cfg.workers)
    for (i, seed), rep in zip(items, reps):
        path = write_rep_csv(rep, out / f"repcount_{_tag(i, seed)}.csv")
        _announce(path)
    return EXIT_OK


def cmd_sigma(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    items = _seed_items(cfg)
    results = _map(partial(_sigma_one, p=cfg.params, grid=cfg.n_grid, mode=cfg.mode), items, cfg.workers)
    rows, failed = [], 0
    for (i, seed), reports in zip(items, results):
        for r in reports:
            rows.append([r.n, "" if seed is None else str(seed), r.sigma_n, r.S_n, r.sigma_n_plus_k,
                         "1" if r.ok else "0"])
            failed += not r.ok
    path = _write_csv(out / "sigma.csv", ["n", "seed", "sigma", "S", "sigma_n_plus_k", "ok"], rows)
    _announce(path)
    if failed:
        print(f"sandwich violated at {failed} (n, seed) points", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_shell(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    rows = _map(partial(_shell_one, p=cfg.params), cfg.n_grid, cfg.workers)
    path = _write_csv(out / "shell.csv", ["n", "prefixes", "tuples", "max_fiber"], rows)
    _announce(path)
    return EXIT_OK


def _fit_row(name, grid, values, target):
    pts = [(n, v) for n, v in zip(grid, values) if v > 0]
    if len(pts) < 3 or len({n for n, _ in pts}) < 2:
        return [name, "nan", "nan", "nan", fmt(target)]
    f = fit_scaling(pts)
    return [name, fmt(f.slope), fmt(f.stderr), fmt(f.r_squared), fmt(target)]


def partition_targets(p: Parameters) -> dict:
    a = p.alpha_float
    if a > 2:
        d2 = 2 * (a - 1) / a**2
    elif a < 2:
        d2 = 1 / a
    else:
        d2 = 0.5
    return {"s": (p.k - 2) / a, "max_class": 1 / a, "D2": d2}


def cmd_partition(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    p = cfg.params
    reports = _map(partial(_partition_one, p=p), cfg.n_grid, cfg.workers)
    targets = partition_targets(p)
    fits = [
        _fit_row("s", cfg.n_grid, [r.s for r in reports], targets["s"]),
        _fit_row("max_class", cfg.n_grid, [r.max_class for r in reports], targets["max_class"]),
        _fit_row("D2", cfg.n_grid, [r.D2 for r in reports], targets["D2"]),
    ]
    slopes = {row[0]: row[1] for row in fits}
    bad = 0
    for r in reports:
        r.slopes = slopes
        path = out / f"partition_n{r.n}.json"
        path.write_text(r.to_json())
        _announce(path)
        bad += not r.ok
    path = _write_csv(out / "fits.csv", ["quantity", "slope", "stderr", "r2", "target_slope"], fits)
    _announce(path)
    print("quantity slope target")
    for row in fits:
        print(f"{row[0]} {row[1]} {row[4]}")
    if bad:
        print(f"partition claims violated at {bad} grid points", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_scaling(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    p = cfg.params
    weights = cfg.weights or [1] * (p.k - 1) + [2]
    counts = _map(partial(_count_one, weights=weights, alpha=p.alpha), cfg.n_grid, cfg.workers)
    _announce(_write_csv(out / "shell_counts.csv", ["n", "count"], zip(cfg.n_grid, counts)))
    target = (len(weights) - 1) / p.alpha_float
    fits = [_fit_row("weighted_shell_count", cfg.n_grid, counts, target)]
    path = _write_csv(out / "fits.csv", ["quantity", "slope", "stderr", "r2", "target_slope"], fits)
    _announce(path)
    print(f"weighted_shell_count slope={fits[0][1]} target={fits[0][4]}")
    return EXIT_OK


HOEFFDING_YS = (0.0, 0.5, 1.0, 1.5, 2.0)


def cmd_hoeffding(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    p = cfg.params
    results = _map(partial(_hoeffding_one, p=p, trials=cfg.trials, seed=cfg.master_seed, ys=HOEFFDING_YS),
                   cfg.n_grid, cfg.workers)
    rows = []
    for n, rep in results:
        if rep is None:
            continue
        for r in rep.rows:
            rows.append([n, rep.class_size, rep.D, r.y, r.frequency, r.bound, r.stderr, "1" if r.ok else "0"])
    path = _write_csv(out / "hoeffding.csv",
                      ["n", "class_size", "D", "y", "frequency", "bound", "stderr", "ok"], rows)
    _announce(path)
    return EXIT_OK


def cmd_discrepancy(cfg: ExperimentConfig) -> int:
    out = _prepare_out(cfg)
    p = cfg.params
    items = _seed_items(cfg)
    per_seed = _map(partial(_discrepancy_one, p=p, grid=cfg.n_grid, mode=cfg.mode), items, cfg.workers)
    samples = [s for chunk in per_seed for s in chunk]
    rows = [[s.n, "" if s.seed is None else str(s.seed), s.sigma_n, s.S_n, s.expected, s.dev_sigma, s.dev_S]
            for s in samples]
    _announce(_write_csv(out / "deviations.csv",
                         ["n", "seed", "sigma", "S", "expected", "dev_sigma", "dev_S"], rows))
    summary = summarize_deviations(samples)
    target = float(predicted_error_exponent(p).exponent)
    grid = [r["n"] for r in summary]
    fits = [
        _fit_row("median_abs_dev_S", grid, [r["median_abs_dev_S"] for r in summary], target),
        _fit_row("median_abs_dev_sigma", grid, [r["median_abs_dev_sigma"] for r in summary], target),
    ]
    _announce(_write_csv(out / "fits.csv", ["quantity", "slope", "stderr", "r2", "target_slope"], fits))
    path = out / "summary.json"
    path.write_text(json.dumps({"k": p.k, "beta": str(p.beta), "alpha": str(p.alpha),
                                "target_exponent": target, "per_n": summary},
                               indent=2, sort_keys=True) + "\n")
    _announce(path)
    for row in fits:
        print(f"{row[0]} slope={row[1]} predicted={row[4]}")
    return EXIT_OK


HANDLERS = {
    "generate": cmd_generate,
    "repcount": cmd_repcount,
    "sigma": cmd_sigma,
    "shell": cmd_shell,
    "partition": cmd_partition,
    "scaling": cmd_scaling,
    "hoeffding": cmd_hoeffding,
    "discrepancy": cmd_discrepancy,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sumset-fuchs", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="TOML file with flat key = value settings")
    ap.add_argument("--k", type=int)
    ap.add_argument("--beta", help="target exponent, e.g. 1, 1.5 or 3/2")
    ap.add_argument("--n", help="comma separated, strictly increasing n grid")
    ap.add_argument("--seed", help="master seed (64-bit unsigned)")
    ap.add_argument("--seed-count", dest="seed_count", help="number of derived sequence seeds")
    ap.add_argument("--mode", choices=("random", "midpoint"))
    ap.add_argument("--trials", type=int)
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./sumset_out)")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--overwrite", action="store_true")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"sumset-fuchs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"sumset-fuchs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"sumset-fuchs: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
