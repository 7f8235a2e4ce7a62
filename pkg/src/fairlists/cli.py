"""Command-line surface.

Subcommands: prep, mine, learn, enumerate, global, local, audit, report.
Exit codes: 0 success, 1 usage error, 2 data error, 3 search budget exhausted
without an optimality certificate (learn/enumerate with --strict).

Every run writes a manifest.txt (sorted key=value lines) capturing the full
configuration including the seed; re-running the same configuration
reproduces byte-identical result files.
"""

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor


from . import recipe as recipe_mod
from .audit import flip_influence, lookup_oracle, rule_list_oracle
from .dataset import SplitSpec, load_csv, mine_antecedents, split_dataset
from .enumeration import enumerate_models
from .errors import FairlistsError
from .metrics import MetricKind
from .rationalize import (
    BlackBoxPredictions,
    default_k,
    load_predictions,
    local_cohort,
    rationalize_global,
)
from .rules import parse_canonical, render
from .search import SearchConfig, corels_optimize

GLOBAL_LAMBDA_GRID = [0.005, 0.01]
GLOBAL_BETA_GRID = [0.0, 0.1, 0.2, 0.5, 0.7, 0.9]
LOCAL_LAMBDA = 0.005
LOCAL_BETA_GRID = [0.1, 0.3, 0.5, 0.7, 0.9]


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_manifest(outdir, args, extra=None):
    entries = {}
    for key, value in sorted(vars(args).items()):
        if key in ("func",) or value is None:
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(_fmt(v) for v in value)
        entries[key] = _fmt(value)
    if extra:
        entries.update({k: _fmt(v) for k, v in extra.items()})
    with open(os.path.join(outdir, "manifest.txt"), "w") as fh:
        for key in sorted(entries):
            fh.write("%s=%s\n" % (key, entries[key]))


def _write_models(path, models):
    """models.txt: model_id, objective, misc, unfairness, fidelity, K, canonical."""
    from .rules import canonical_form

    with open(path, "w") as fh:
        for i, (rl, mm) in enumerate(models):
            fh.write(
                "%d\t%s\t%s\t%s\t%s\t%d\t%s\n"
                % (
                    i,
                    _fmt(mm.objective),
                    _fmt(mm.misc),
                    _fmt(mm.unfairness),
                    _fmt(mm.fidelity),
                    mm.K,
                    canonical_form(rl),
                )
            )


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _search_config(args, lam=None, beta=None):
    return SearchConfig(
        lam=args.lam[0] if lam is None else lam,
        beta=args.beta[0] if beta is None else beta,
        metric=MetricKind.from_flag(args.metric),
        max_length=args.max_length,
        node_budget=args.node_budget,
    )


def _load_data(args):
    return load_csv(args.data, sensitive=args.sensitive, label=args.label)


def _mine(args, d):
    return mine_antecedents(
        d,
        min_support=args.min_support,
        include_negations=not args.no_negations,
        include_sensitive=getattr(args, "include_sensitive", False),
    )


def cmd_prep(args):
    directives = recipe_mod.parse_recipe(args.recipe)
    header, rows = recipe_mod.apply_recipe(args.input, directives)
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return 0


def cmd_mine(args):
    d = _load_data(args)
    ants = _mine(args, d)
    os.makedirs(args.output, exist_ok=True)
    rows = [
        (a.id, d.feature_names[a.feature], int(a.negated), a.support)
        for a in ants.antecedents
    ]
    _write_csv(os.path.join(args.output, "antecedents.csv"), ["id", "feature", "negated", "support"], rows)
    _write_manifest(args.output, args, {"n_antecedents": len(ants)})
    return 0


def _emit_single(args, models, uncertified):
    os.makedirs(args.output, exist_ok=True)
    _write_models(os.path.join(args.output, "models.txt"), models)
    rows = [
        (i, args.lam[0], args.beta[0], mm.objective, mm.fidelity, mm.unfairness, mm.K)
        for i, (_, mm) in enumerate(models)
    ]
    _write_csv(
        os.path.join(args.output, "tradeoff.csv"),
        ["model_id", "lambda", "beta", "objective", "fidelity", "unfairness", "K"],
        rows,
    )
    _write_manifest(args.output, args, {"n_models": len(models)})
    if uncertified and args.strict:
        return 3
    return 0


def cmd_learn(args):
    d = _load_data(args)
    ants = _mine(args, d)
    cfg = _search_config(args)
    result = corels_optimize(ants, d, cfg)
    from .enumeration import metrics_of

    return _emit_single(args, [(result.best, metrics_of(result))], not result.certified_optimal)


def cmd_enumerate(args):
    d = _load_data(args)
    ants = _mine(args, d)
    cfg = _search_config(args)
    models = enumerate_models(ants, d, cfg, max_models=args.max_models)
    uncertified = any(not mm.certified_optimal for _, mm in models)
    return _emit_single(args, models, uncertified)


def _cell_name(lam, beta):
    return "l%g_b%g" % (lam, beta)


def cmd_global(args):
    d = _load_data(args)
    b = load_predictions(args.blackbox)
    test_set = test_preds = None
    if args.split:
        fracs = tuple(float(f) for f in args.split.split(","))
        b.aligned_with(d)
        perm_parts = split_dataset(d, SplitSpec(fractions=fracs, seed=args.seed))
        _, suing, test_set = perm_parts
        # predictions follow their rows through the split
        suing_preds = b.preds[suing.row_ids]
        test_preds = BlackBoxPredictions(preds=b.preds[test_set.row_ids], source=b.source)
        d = suing
        b = BlackBoxPredictions(preds=suing_preds, source=b.source)
    cells = [(lam, beta) for lam in args.lam for beta in args.beta]

    def run_cell(cell):
        lam, beta = cell
        cfg = _search_config(args, lam=lam, beta=beta)
        report, ants = rationalize_global(
            d,
            b,
            cfg,
            max_models=args.max_models,
            min_support=args.min_support,
            include_negations=not args.no_negations,
            test_set=test_set,
            test_preds=test_preds,
        )
        return cell, report, ants

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = dict(
                (cell, (rep, ants)) for cell, rep, ants in pool.map(run_cell, cells)
            )
    else:
        results = {}
        for cell in cells:
            _, rep, ants = run_cell(cell)
            results[cell] = (rep, ants)

    os.makedirs(args.output, exist_ok=True)
    tradeoff_rows = []
    audit_rows = []
    from .enumeration import ModelMetrics

    for lam, beta in cells:
        report, ants = results[(lam, beta)]
        celldir = os.path.join(args.output, _cell_name(lam, beta))
        os.makedirs(celldir, exist_ok=True)
        models = [
            (
                m.rule_list,
                ModelMetrics(
                    objective=m.objective,
                    misc=m.misc,
                    unfairness=m.unfairness,
                    fidelity=m.fidelity,
                    K=m.K,
                    certified_optimal=True,
                ),
            )
            for m in report.models
        ]
        _write_models(os.path.join(celldir, "models.txt"), models)
        extra = {
            "baseline_unfairness": report.baseline_unfairness,
            "selected": report.selected if report.selected is not None else "none",
        }
        if report.test_fidelity is not None:
            extra["test_fidelity"] = report.test_fidelity
            extra["test_unfairness"] = report.test_unfairness
        _write_manifest(celldir, args, extra)
        for m in report.models:
            tradeoff_rows.append(
                (m.model_id, lam, beta, m.objective, m.fidelity, m.unfairness, m.K)
            )
        if report.selected is not None:
            chosen = report.models[report.selected].rule_list
            tag = "%s:model%d" % (_cell_name(lam, beta), report.selected)
            ranking = flip_influence(rule_list_oracle(chosen, ants), d, model_tag=tag)
            for j, name in enumerate(ranking.feature_names):
                audit_rows.append((name, ranking.scores[j], int(ranking.ranks[j]), tag))
    bb_ranking = flip_influence(lookup_oracle(d.features, b.preds), d, model_tag="blackbox", missing_ok=True)
    if bb_ranking is not None:
        for j, name in enumerate(bb_ranking.feature_names):
            audit_rows.append((name, bb_ranking.scores[j], int(bb_ranking.ranks[j]), "blackbox"))
    _write_csv(
        os.path.join(args.output, "tradeoff.csv"),
        ["model_id", "lambda", "beta", "objective", "fidelity", "unfairness", "K"],
        tradeoff_rows,
    )
    _write_csv(
        os.path.join(args.output, "audit.csv"),
        ["feature", "score", "rank", "model_tag"],
        audit_rows,
    )
    _write_manifest(args.output, args, {"n_cells": len(cells)})
    return 0


def cmd_local(args):
    d = _load_data(args)
    b = load_predictions(args.blackbox)
    k = args.k if args.k else default_k(d.n_rows) if args.k_frac is None else max(
        1, math.ceil(args.k_frac * d.n_rows)
    )
    coverage_rows = []
    cdf_rows = []
    for beta in args.beta:
        cfg = _search_config(args, lam=args.lam[0], beta=beta)
        report = local_cohort(
            d,
            b,
            cfg,
            k=k,
            max_models=args.max_models,
            minority_value=args.minority_value,
            negative_class=args.negative_class,
            threshold=args.threshold,
            min_support=args.min_support,
            include_negations=not args.no_negations,
            threads=args.threads,
        )
        coverage_rows.append((beta, report.coverage))
        values = sorted(
            r.best_unfairness for r in report.subjects if not math.isnan(r.best_unfairness)
        )
        for i, v in enumerate(values):
            cdf_rows.append((beta, v, (i + 1) / len(values)))
    os.makedirs(args.output, exist_ok=True)
    _write_csv(os.path.join(args.output, "coverage.csv"), ["beta", "coverage"], coverage_rows)
    _write_csv(
        os.path.join(args.output, "cdf.csv"),
        ["beta", "unfairness", "cumulative_fraction"],
        cdf_rows,
    )
    _write_manifest(args.output, args, {"k": k})
    return 0


def cmd_audit(args):
    d = _load_data(args)
    rows = []
    if args.model:
        with open(args.model) as fh:
            text = fh.read().strip()
        rl = parse_canonical(text.split("\t")[-1])
        ants = _mine(args, d)
        ranking = flip_influence(rule_list_oracle(rl, ants), d, model_tag="surrogate")
        for j, name in enumerate(ranking.feature_names):
            rows.append((name, ranking.scores[j], int(ranking.ranks[j]), "surrogate"))
    if args.blackbox:
        b = load_predictions(args.blackbox)
        b.aligned_with(d)
        ranking = flip_influence(lookup_oracle(d.features, b.preds), d, model_tag="blackbox", missing_ok=True)
        if ranking is not None:
            for j, name in enumerate(ranking.feature_names):
                rows.append((name, ranking.scores[j], int(ranking.ranks[j]), "blackbox"))
    os.makedirs(args.output, exist_ok=True)
    _write_csv(os.path.join(args.output, "audit.csv"), ["feature", "score", "rank", "model_tag"], rows)
    _write_manifest(args.output, args)
    return 0


def cmd_report(args):
    d = _load_data(args)
    ants = _mine(args, d)
    lines = []
    with open(os.path.join(args.run, "models.txt")) as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 7:
                continue
            rl = parse_canonical(parts[6])
            lines.append(
                "model %s  objective=%s misc=%s unfairness=%s fidelity=%s K=%s\n  %s"
                % (parts[0], parts[1], parts[2], parts[3], parts[4], parts[5], render(rl, ants, d.feature_names))
            )
    out = os.path.join(args.output, "report.txt")
    os.makedirs(args.output, exist_ok=True)
    with open(out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def _add_data_args(p):
    p.add_argument("--data", required=True, help="binary CSV (see prep)")
    p.add_argument("--sensitive", required=True, help="sensitive column name")
    p.add_argument("--label", required=True, help="label column name")
    p.add_argument("--min-support", type=float, default=0.05)
    p.add_argument("--no-negations", action="store_true")
    p.add_argument("--include-sensitive", action="store_true", help="allow rules on the sensitive column")


def _add_search_args(p, lam_default, beta_default):
    p.add_argument("--lambda", dest="lam", type=float, action="append", default=None)
    p.add_argument("--beta", type=float, action="append", default=None)
    p.add_argument("--metric", choices=["dp", "sp", "oae", "cpa"], default="dp")
    p.add_argument("--max-length", type=int, default=5)
    p.add_argument("--node-budget", type=int, default=10_000_000)
    p.add_argument("--max-models", type=int, default=50)
    p.add_argument("--strict", action="store_true", help="exit 3 when the node budget forfeits the optimality certificate")
    p.set_defaults(_lam_default=lam_default, _beta_default=beta_default)


def build_parser():
    parser = argparse.ArgumentParser(prog="fairlists")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("prep", help="binarize a raw CSV with a recipe file")
    p.add_argument("--input", required=True)
    p.add_argument("--recipe", required=True)
    p.add_argument("--output", required=True, help="output CSV path")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("mine", help="mine antecedents from a binary CSV")
    _add_data_args(p)
    p.add_argument("--output", required=True, help="output directory")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("learn", help="single optimal rule list")
    _add_data_args(p)
    _add_search_args(p, [0.005], [0.0])
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("enumerate", help="K-best rule list enumeration")
    _add_data_args(p)
    _add_search_args(p, [0.005], [0.0])
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("global", help="model rationalization over a suing group")
    _add_data_args(p)
    _add_search_args(p, GLOBAL_LAMBDA_GRID, GLOBAL_BETA_GRID)
    p.add_argument("--blackbox", required=True, help="black-box predictions CSV")
    p.add_argument("--split", default=None, help="train,suing,test fractions (else the whole file is the suing group)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("local", help="outcome rationalization for the rejected minority cohort")
    _add_data_args(p)
    _add_search_args(p, [LOCAL_LAMBDA], LOCAL_BETA_GRID)
    p.add_argument("--blackbox", required=True)
    p.add_argument(
        "--minority-value", type=int, default=None,
        help="sensitive value defining the cohort (default: the less frequent one)",
    )
    p.add_argument("--negative-class", type=int, default=0)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-frac", type=float, default=None)
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("audit", help="flip-influence feature ranking")
    _add_data_args(p)
    p.add_argument("--model", default=None, help="file holding a canonical rule list (or a models.txt line)")
    p.add_argument("--blackbox", default=None)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("report", help="human-readable rendering of a models.txt")
    _add_data_args(p)
    p.add_argument("--run", required=True, help="directory containing models.txt")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if getattr(args, "lam", "absent") is None:
        args.lam = list(args._lam_default)
    if getattr(args, "beta", "absent") is None:
        args.beta = list(args._beta_default)
    try:
        return args.func(args)
    except FairlistsError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
