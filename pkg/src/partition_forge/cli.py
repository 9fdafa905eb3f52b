"""Command-line entry point: ``partition-forge <command> [options]``.

Every command records a run in ``manifest.json`` inside its output
directory (command line, resolved options, seed, SHA-256 of inputs and
outputs, version, timestamps). Exit codes: 0 success, 1 bad input or
usage, 2 runtime failure or partial pool failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PartitionForgeError, ValidationError

logger = logging.getLogger("partition_forge")

SEED_ENV = "PARTITION_FORGE_SEED"
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


class PartialFailure(Exception):
    """Some pool members failed; the others were written."""


# ---------------------------------------------------------------- manifests

def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _digests(paths) -> dict[str, str]:
    out = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for name in ("properties.csv", "results.csv"):
                if (p / name).exists():
                    out[str(p / name)] = sha256(p / name)
        elif p.exists():
            out[str(p)] = sha256(p)
    return out


def _read_manifest(directory) -> dict:
    path = Path(directory) / "manifest.json"
    if path.exists():
        with open(path) as fh:
            return json.load(fh)
    return {}


def record_run(directory, argv, options, seed, inputs, outputs, started) -> None:
    """Append a run entry to ``directory/manifest.json`` (created if needed).

    A warning is logged when an earlier run with the same command line saw
    inputs with different digests.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = _read_manifest(directory)
    digests = _digests(inputs)
    for prev in manifest.get("runs", []):
        if prev.get("argv") == list(argv) and prev.get("inputs") != digests:
            logger.warning("inputs changed since an earlier identical run in %s", directory)
            break
    manifest.setdefault("runs", []).append({
        "argv": list(argv),
        "config": {k: v for k, v in sorted(options.items()) if _jsonable(v)},
        "seed": seed,
        "inputs": digests,
        "version": __version__,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": _digests(sorted(str(o) for o in outputs)),
    })
    with open(directory / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _jsonable(v) -> bool:
    return v is None or isinstance(v, (str, int, float, bool, list))


# ------------------------------------------------------------------ config

def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("_", "-")] = value
    return out


def resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


# ----------------------------------------------------------------- loaders

def _graph(args):
    from .graph import load_edge_list, load_trust

    g = load_edge_list(args.graph, args.format)
    if getattr(args, "trust", None):
        g = load_trust(args.trust, g)
    return g


def _records(args, g):
    """Archive records from ``--pool`` or a single record from ``--partition``."""
    from .ga import Archive, SolutionRecord
    from .partition import read_partition

    if args.pool:
        return list(Archive.load(args.pool, g))
    p = read_partition(args.partition, g)
    return [SolutionRecord(0, p, "given", float("nan"), 0)]


def _out_dir(args, default_file):
    """Where results go: the pool directory, or next to ``--out``."""
    if getattr(args, "pool", None) and not args.out:
        return Path(args.pool), Path(args.pool) / default_file
    out = Path(args.out or default_file)
    return out.parent if str(out.parent) else Path("."), out


# ---------------------------------------------------------------- commands

def cmd_generate(args, seed):
    from .ga import GAConfig, run_ga

    g = _graph(args)
    cfg = GAConfig(population=args.population, generations=args.generations,
                   offspring_per_gen=args.offspring, k_min=args.k_min, k_max=args.k_max,
                   mutation_prob=args.mutation_prob, archive_cap=args.archive_cap, seed=seed)
    archive = run_ga(g, args.fitness, cfg,
                     progress=lambda gen, best: logger.info("generation %d best %.6f", gen, best))
    out = Path(args.out)
    previous = _read_manifest(out).get("runs", [])
    archive.save(out, g, extra={"runs": previous})
    logger.info("archived %d solutions in %s", len(archive), out)
    return out, [out / "manifest.json", out / "properties.csv", out / "partitions"], [args.graph]


def cmd_detect(args, seed):
    from .detect import DETECTORS
    from .partition import write_partition

    g = _graph(args)
    p = DETECTORS[args.algo](g, seed=seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_partition(p, out, g.original_ids())
    logger.info("%s found %d communities", args.algo, p.k)
    return out.parent, [out], [args.graph]


def cmd_metrics(args, seed):
    from .tables import write_properties_csv

    g = _graph(args)
    records = _records(args, g)
    out_dir, out = _out_dir(args, "properties.csv")
    out_dir.mkdir(parents=True, exist_ok=True)
    write_properties_csv(out, [(r.id, r.fitness_tag, r.ensure_properties(g)) for r in records])
    return out_dir, [out], [args.graph, args.pool or args.partition]


def _write_task(args, rows_by_solution, task, centrality=""):
    from .tables import merge_results_csv, result_rows

    out_dir, out = _out_dir(args, "results.csv")
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, failures = [], []
    for sid, res, err in rows_by_solution:
        rows.extend(result_rows(sid, task, res, centrality, err))
        if res is None:
            failures.append(sid)
    merge_results_csv(out, rows)
    if failures:
        log = out_dir / "failures.log"
        with open(log, "w") as fh:
            for sid, res, err in rows_by_solution:
                if res is None:
                    fh.write(f"{sid}\t{err}\n")
        return out_dir, [out, log], failures
    return out_dir, [out], failures


def cmd_task_anomaly(args, seed):
    from .anomaly import evaluate_pool_anomaly
    from .graph import load_labels

    g = _graph(args)
    labels = load_labels(args.labels, g)
    results = evaluate_pool_anomaly(_records(args, g), g, labels, args.folds, seed)
    out_dir, outs, failures = _write_task(args, results, "anomaly")
    inputs = [args.graph, args.labels, args.pool or args.partition]
    if failures:
        raise PartialFailure((out_dir, outs, inputs, len(failures)))
    return out_dir, outs, inputs


def cmd_task_trust(args, seed):
    from .graph import load_ratings
    from .trust import evaluate_pool_trust

    g = _graph(args)
    ratings = load_ratings(args.ratings, g)
    results = evaluate_pool_trust(_records(args, g), g, ratings, args.centrality, args.holdout, seed)
    out_dir, outs, failures = _write_task(args, results, "trust", args.centrality)
    inputs = [args.graph, args.trust, args.ratings, args.pool or args.partition]
    if failures:
        raise PartialFailure((out_dir, outs, inputs, len(failures)))
    return out_dir, outs, inputs


def _pool_oracle(args, pool_dir, seed):
    """Oracle for one pool: precomputed ``results.csv`` values, else live runs.

    Live runs need ``--graph`` plus ``--labels`` (anomaly) or ``--trust`` and
    ``--ratings`` (trust); their results are merged into the pool's
    ``results.csv`` after fitting.
    """
    from .tables import read_results_csv

    centrality = args.centrality if args.task == "trust" else ""
    results = Path(pool_dir) / "results.csv"
    known = {}
    if results.exists():
        known = read_results_csv(results, args.task, args.metric, args.cls, centrality)
    if not getattr(args, "graph", None):
        if not known:
            raise ValidationError(f"{pool_dir}: no {args.task} results and no --graph to compute them")

        def lookup(sid):
            if sid not in known:
                raise KeyError(f"no {args.task} result for solution {sid}")
            return known[sid]
        return lookup, None

    from .ga import Archive
    g = _graph(args)
    records = Archive.load(pool_dir, g).by_id()
    fresh = []
    if args.task == "anomaly":
        from .anomaly import train_eval_anomaly
        from .graph import load_labels

        labels = load_labels(args.labels, g)

        def run(sid):
            return train_eval_anomaly(g, records[sid].partition, labels, args.folds, seed)
    else:
        from .graph import load_ratings
        from .trust import _Cosine, train_eval_trust, trust_split

        ratings = load_ratings(args.ratings, g)
        split = trust_split(g, args.holdout, seed)
        cos = _Cosine(ratings, g.node_count)

        def run(sid):
            return train_eval_trust(g, ratings, records[sid].partition, centrality,
                                    args.holdout, seed, split, cos)

    def live(sid):
        if sid in known:
            return known[sid]
        try:
            res = run(sid)
        except Exception as exc:
            fresh.append((sid, None, f"{type(exc).__name__}: {exc}"))
            raise
        fresh.append((sid, res, ""))
        return res.metric(args.metric, args.cls)
    return live, fresh


def _pool(pool_dir):
    from .meta import Pool

    return Pool.from_properties_csv(Path(pool_dir) / "properties.csv")


def _budget(args):
    from .meta import SampleBudget

    return SampleBudget(seed_size=args.seed_size, batch=args.batch,
                        max_fraction=args.budget_frac, bag_count=args.bags)


def cmd_meta_fit(args, seed):
    from .meta import active_fit
    from .tables import merge_results_csv, result_rows, write_csv

    oracle, fresh = _pool_oracle(args, args.pool, seed)
    fit = active_fit(_pool(args.pool), oracle, _budget(args), seed)
    fit.model.target_name = f"{args.task}:{args.metric}:{args.cls}"
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fit.model.save(out)
    sampled = out.with_name(out.stem + "_sampled.csv")
    write_csv(sampled, ("order", "solution_id", "target"),
              ([i, sid, fit.targets.get(sid, "")] for i, sid in enumerate(fit.sampled_ids)))
    summary = out.with_name(out.stem + "_summary.csv")
    write_csv(summary, ("pool_size", "sampled", "holdout", "rmse_holdout"),
              [[len(_pool(args.pool)), len(fit.sampled_ids), len(fit.holdout_ids), fit.rmse_holdout]])
    outs = [out, sampled, summary]
    if fresh:
        centrality = args.centrality if args.task == "trust" else ""
        rows = [row for sid, res, err in sorted(fresh, key=lambda t: t[0])
                for row in result_rows(sid, args.task, res, centrality, err)]
        merge_results_csv(Path(args.pool) / "results.csv", rows)
    logger.info("holdout RMSE %.4f from %d oracle queries", fit.rmse_holdout, len(fit.sampled_ids))
    return out.parent, outs, [args.pool, getattr(args, "graph", None)]


def cmd_meta_rank(args, seed):
    from .meta import MetaModel, rank_solutions
    from .tables import write_csv

    model = MetaModel.load(args.model)
    pool = _pool(args.pool)
    order = rank_solutions(model, pool)
    pred = dict(zip(pool.ids.tolist(), model.predict(pool.features).tolist()))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, ("rank", "solution_id", "predicted"),
              ([r, sid, pred[sid]] for r, sid in enumerate(order, start=1)))
    return out.parent, [out], [args.model, args.pool]


def cmd_meta_transfer(args, seed):
    from .meta import transfer_eval
    from .tables import write_csv

    args.graph = None  # transfer reads precomputed results for both pools
    train_oracle, _ = _pool_oracle(args, args.train, seed)
    test_oracle, _ = _pool_oracle(args, args.test, seed)
    err = transfer_eval(_pool(args.train), _pool(args.test), train_oracle, test_oracle,
                        _budget(args), seed, args.sample_size)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, ("train", "test", "task", "metric", "rmse"),
              [[args.train, args.test, args.task, args.metric, err]])
    logger.info("transfer RMSE %.4f", err)
    return out.parent, [out], [args.train, args.test]


def cmd_report(args, seed):
    from .report import (report_distributions, report_extremes, write_correlation,
                         write_distributions, write_extremes)
    from .tables import read_properties_csv, read_results_csv

    props = {sid: pv for sid, _, pv in read_properties_csv(Path(args.pool) / "properties.csv")}
    centrality = args.centrality if args.task == "trust" else ""
    metric = read_results_csv(Path(args.pool) / "results.csv", args.task, args.metric,
                              args.cls, centrality)
    out = Path(args.out or args.pool)
    out.mkdir(parents=True, exist_ok=True)
    ext = report_extremes(metric, props, args.frac, args.metric)
    write_extremes(ext, out / "extremes.csv", out / "extremes_summary.csv")
    ids = sorted(props)
    write_distributions(report_distributions([props[i] for i in ids]), out / "distributions.csv")
    write_correlation([props[i] for i in ids], out / "correlation.csv")
    both = [i for i in ids if i in metric]
    write_correlation([props[i] for i in both], out / "correlation_metric.csv",
                      extra=(args.metric, [metric[i] for i in both]))
    outs = [out / n for n in ("extremes.csv", "extremes_summary.csv", "distributions.csv",
                              "correlation.csv", "correlation_metric.csv")]
    return out, outs, [args.pool]


# ------------------------------------------------------------------ parser

def _common():
    p = _Parser(add_help=False)
    p.add_argument("--config", help="key = value file; explicit flags win")
    p.add_argument("--seed", type=int, help=f"RNG seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _graph_args(p, required=True):
    p.add_argument("--graph", required=required, help="edge list `u v [w]`")
    p.add_argument("--format", choices=("whitespace", "csv"), default="whitespace")


def _source_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--partition", help="partition file `node community`")
    src.add_argument("--pool", help="archive directory written by generate")


def _metric_args(p):
    p.add_argument("--task", choices=("anomaly", "trust"), required=True)
    p.add_argument("--metric", default="f1",
                   choices=("precision", "recall", "f1", "accuracy", "auc"))
    p.add_argument("--cls", type=int, choices=(0, 1), default=1)
    p.add_argument("--centrality", default="max_degree", help="trust task centrality")


def _budget_args(p):
    p.add_argument("--budget-frac", type=float, default=0.05)
    p.add_argument("--seed-size", type=int, default=32)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--bags", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    from .detect import DETECTORS
    from .ga import FITNESS_ALIASES
    from .trust import CENTRALITIES

    common = _common()
    parser = _Parser(prog="partition-forge", description="Generate, score and rank community structures of a graph.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    cmds = parser.add_subparsers(dest="command", metavar="command", required=True,
                                 parser_class=_Parser)

    p = cmds.add_parser("generate", parents=[common], help="evolve an archive of partitions")
    _graph_args(p)
    p.add_argument("--fitness", required=True, choices=sorted(FITNESS_ALIASES))
    p.add_argument("--out", required=True, help="archive directory")
    p.add_argument("--population", type=int, default=1000)
    p.add_argument("--generations", type=int, default=50)
    p.add_argument("--offspring", type=int, default=None, help="children per generation")
    p.add_argument("--k-min", type=int, default=20)
    p.add_argument("--k-max", type=int, default=160)
    p.add_argument("--mutation-prob", type=float, default=0.1)
    p.add_argument("--archive-cap", type=int, default=100_000)
    p.set_defaults(run=cmd_generate)

    p = cmds.add_parser("detect", parents=[common], help="run a baseline detector")
    _graph_args(p)
    p.add_argument("--algo", required=True, choices=sorted(DETECTORS))
    p.add_argument("--out", required=True, help="partition file to write")
    p.set_defaults(run=cmd_detect)

    p = cmds.add_parser("metrics", parents=[common], help="compute the 11 properties")
    _graph_args(p)
    _source_args(p)
    p.add_argument("--out", help="CSV path (default: properties.csv, or inside --pool)")
    p.set_defaults(run=cmd_metrics)

    task = cmds.add_parser("task", help="evaluate partitions on a downstream task")
    tasks = task.add_subparsers(dest="task_name", metavar="task", required=True, parser_class=_Parser)
    p = tasks.add_parser("anomaly", parents=[common], help="node anomaly detection")
    _graph_args(p)
    p.add_argument("--labels", required=True, help="`node label` file")
    _source_args(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", help="results CSV (default: results.csv, or inside --pool)")
    p.set_defaults(run=cmd_task_anomaly)
    p = tasks.add_parser("trust", parents=[common], help="trust edge prediction")
    _graph_args(p)
    p.add_argument("--trust", required=True, help="`truster trustee` file")
    p.add_argument("--ratings", required=True, help="CSV user,item,rating with header")
    p.add_argument("--centrality", default="max_degree",
                   choices=sorted(set(CENTRALITIES) | {"degree", "trustor", "trustee", "closeness"}))
    p.add_argument("--holdout", type=float, default=0.2)
    _source_args(p)
    p.add_argument("--out", help="results CSV (default: results.csv, or inside --pool)")
    p.set_defaults(run=cmd_task_trust)

    meta = cmds.add_parser("meta", help="meta-predictor over a pool")
    metas = meta.add_subparsers(dest="meta_name", metavar="action", required=True, parser_class=_Parser)
    p = metas.add_parser("fit", parents=[common], help="actively fit a model on a pool")
    p.add_argument("--pool", required=True)
    _metric_args(p)
    _budget_args(p)
    p.add_argument("--out", default="model.json")
    _graph_args(p, required=False)
    p.add_argument("--labels")
    p.add_argument("--trust")
    p.add_argument("--ratings")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--holdout", type=float, default=0.2)
    p.set_defaults(run=cmd_meta_fit)
    p = metas.add_parser("rank", parents=[common], help="rank a pool by predicted metric")
    p.add_argument("--model", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--out", default="ranked.csv")
    p.set_defaults(run=cmd_meta_rank)
    p = metas.add_parser("transfer", parents=[common], help="train on one pool, test on another")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    _metric_args(p)
    _budget_args(p)
    p.add_argument("--sample-size", type=int, default=200)
    p.add_argument("--out", default="transfer.csv")
    p.set_defaults(run=cmd_meta_transfer)

    p = cmds.add_parser("report", parents=[common], help="extremes, distributions, correlations")
    p.add_argument("--pool", required=True)
    _metric_args(p)
    p.add_argument("--frac", type=float, default=0.03)
    p.add_argument("--out", help="output directory (default: the pool)")
    p.set_defaults(run=cmd_report)
    return parser


def _with_config(argv: list[str]) -> list[str]:
    """Splice ``--config`` entries in right after the command words."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    config = read_config(known.config)
    rest, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok == "--config":
            skip = True
        elif not tok.startswith("--config="):
            rest.append(tok)
    argv = rest
    config = {"config": known.config, **config}
    commands = ("generate", "detect", "metrics", "task", "meta", "report")
    start = next((i for i, tok in enumerate(argv) if tok in commands), None)
    if start is None:
        return argv
    words = start + (2 if argv[start] in ("task", "meta") else 1)
    extra = []
    for key, value in config.items():
        extra += [f"--{key}", value]
    return argv[:words] + extra + argv[words:]


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING - 10 * min(verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    try:
        full = _with_config(argv)
    except (OSError, ValidationError) as exc:
        print(f"partition-forge: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    parser = build_parser()
    try:
        args = parser.parse_args(full)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)
    try:
        seed = resolve_seed(args.seed)
        np.seterr(all="ignore")
        out_dir, outs, inputs = args.run(args, seed)
    except PartialFailure as exc:
        out_dir, outs, inputs, failed = exc.args[0]
        record_run(out_dir, argv, vars(args), seed, [i for i in inputs if i], outs, started)
        print(f"partition-forge: {failed} solution(s) failed; see {out_dir / 'failures.log'}",
              file=sys.stderr)
        return EXIT_RUNTIME
    except (ValidationError, FileNotFoundError, IsADirectoryError, KeyError, ValueError) as exc:
        print(f"partition-forge: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PartitionForgeError, Exception) as exc:  # noqa: BLE001 - reported as runtime failure
        logger.debug("runtime failure", exc_info=True)
        print(f"partition-forge: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    record_run(out_dir, argv, vars(args), seed, [i for i in inputs if i], outs, started)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
