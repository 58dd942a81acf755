"""Command-line entry points.

    signet generate    sample a planted-fraud graph to edge/label files
    signet embed       compute spectral coordinates for a graph file
    signet train       train a DAE or CNN on one split and save a checkpoint
    signet eval        score a saved checkpoint on a graph
    signet experiment  run the full grid and emit CSV / table reports

Experiment settings come from built-in defaults, then an optional
``--config`` file of ``key = value`` lines, then explicit flags.  Exit code
is 0 on success and 2 when some experiment cells failed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace

import numpy as np

from . import cnn as cnn_mod
from . import dae as dae_mod
from .graph import (GeneratorConfig, generate_planted_graph, load_edge_list,
                    load_labels, save_edge_list, save_labels)
from .harness import (ExperimentConfig, build_features, child_seed,
                      load_experiment_graph, run_experiment, stratified_split,
                      accuracy)
from .nn import TrainConfig, load_checkpoint
from .spectral import (eigen_top_k, normalize_coordinates,
                       reconstruction_residual, save_embedding)


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _parse_scalar(text: str):
    low = text.lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    if low == "none":
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_value(text: str):
    if "," in text:
        return tuple(_parse_scalar(t.strip()) for t in text.split(",") if t.strip())
    return _parse_scalar(text)


def parse_config_file(path) -> dict:
    """Line-oriented ``key = value`` settings; # starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep or not key.strip():
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            out[key.strip()] = _parse_value(val.strip())
    return out


_SEQUENCE_FIELDS = {"algorithms", "input_modes", "ratios", "ks",
                    "dae_hidden", "cnn_widths"}


def make_experiment_config(settings: dict) -> ExperimentConfig:
    """ExperimentConfig from flat settings; dotted keys reach sub-configs."""
    base, train_kw, gen_kw = {}, {}, {}
    valid = {f.name for f in fields(ExperimentConfig)}
    for key, val in settings.items():
        if key.startswith("train."):
            train_kw[key[len("train."):]] = val
        elif key.startswith("generator."):
            gen_kw[key[len("generator."):]] = val
        elif key in valid:
            if key in _SEQUENCE_FIELDS and not isinstance(val, (tuple, list)):
                val = (val,)
            base[key] = val
        else:
            raise ValueError(f"unknown config key {key!r}")
    try:
        if train_kw:
            base["train"] = replace(TrainConfig(), **train_kw)
        if gen_kw:
            base["generator"] = replace(GeneratorConfig(), **gen_kw)
    except TypeError as exc:
        raise ValueError(f"bad train./generator. key: {exc}") from None
    return ExperimentConfig(**base)


def _collect_settings(args) -> dict:
    settings = parse_config_file(args.config) if args.config else {}
    if args.k is not None:
        settings["ks"] = tuple(args.k)
    if args.ratio is not None:
        settings["ratios"] = tuple(args.ratio)
    if args.runs is not None:
        settings["runs"] = args.runs
    if args.seed is not None:
        settings["master_seed"] = args.seed
    if args.input_mode is not None:
        settings["input_modes"] = tuple(args.input_mode)
    if args.algo is not None:
        settings["algorithms"] = tuple(args.algo)
    if args.graph is not None:
        settings["graph_path"] = args.graph
    if args.labels is not None:
        settings["labels_path"] = args.labels
    if args.measure_time:
        settings["measure_time"] = True
    return settings


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--k", type=int, nargs="+", help="spectral dimension(s)")
    p.add_argument("--ratio", type=float, nargs="+", help="training split percentage(s)")
    p.add_argument("--runs", type=int, help="number of repeated runs")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--input-mode", nargs="+", help="feature mode(s)")
    p.add_argument("--algo", nargs="+", help="algorithm(s): dae cnn knn svm")
    p.add_argument("--graph", help="edge-list file (otherwise the generator is used)")
    p.add_argument("--labels", help="label file for --graph")
    p.add_argument("--measure-time", action="store_true",
                   help="record wall-clock per epoch (breaks byte-reproducibility)")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    params = GeneratorConfig(
        block_pos_prob=args.block_pos_prob, cross_neg_prob=args.cross_neg_prob,
        fraud_degree=args.fraud_degree, fraud_neg_fraction=args.fraud_neg_fraction,
        benign_noise_prob=args.benign_noise_prob)
    graph = generate_planted_graph(args.n_benign, args.n_fraud, params,
                                   seed=args.seed)
    save_edge_list(graph, args.edges_out)
    save_labels(graph.labels, args.labels_out)
    print(f"wrote {graph.n} nodes, {graph.edge_count} edges "
          f"({graph.pos_edge_count}+ / {graph.neg_edge_count}-) "
          f"to {args.edges_out}; labels to {args.labels_out}")
    return 0


def cmd_embed(args) -> int:
    graph = load_edge_list(args.graph)
    emb = eigen_top_k(graph, args.k, tol=args.tol)
    resid = reconstruction_residual(graph, emb)
    if args.normalize:
        emb = normalize_coordinates(emb)
    save_embedding(emb, args.out)
    lam = ", ".join(f"{v:.4f}" for v in emb.eigenvalues)
    print(f"top-{emb.k} eigenvalues: [{lam}]")
    print(f"relative reconstruction residual: {resid:.6f}")
    print(f"wrote coordinates for {emb.n} nodes to {args.out}")
    return 0


def _training_setup(args):
    """Shared by train/eval: config, graph, features, split."""
    settings = _collect_settings(args)
    config = make_experiment_config(settings)
    graph = load_experiment_graph(config, run=0)
    mode = config.input_modes[0]
    k = config.ks[0]
    flat, mats = build_features(config, graph, mode, k)
    labels = np.asarray(graph.labels, dtype=np.int64)
    ratio = config.ratios[0]
    split_seed = child_seed(config.master_seed, 0, f"split:{ratio:g}")
    train_ids, test_ids = stratified_split(labels, ratio, split_seed,
                                           config.stratify)
    return config, graph, mode, k, flat, mats, labels, train_ids, test_ids


def cmd_train(args) -> int:
    (config, graph, mode, k, flat, mats, labels,
     train_ids, test_ids) = _training_setup(args)
    algo = config.algorithms[0]
    if algo not in ("dae", "cnn"):
        raise ValueError("train saves checkpoints for 'dae' or 'cnn' only; "
                         "baselines run inside 'signet experiment'")
    seed = child_seed(config.master_seed, 0, algo)
    tcfg = replace(config.train, seed=seed)
    meta = {"input_mode": mode, "k": k, "s": config.s,
            "ratio": config.ratios[0], "master_seed": config.master_seed}

    if algo == "dae":
        stack = dae_mod.AutoencoderStack(flat.shape[1], config.dae_hidden, seed=seed)
        dae_mod.pretrain(stack, flat, tcfg, mode=config.pretrain_mode)
        history = dae_mod.fine_tune(stack, flat[train_ids], labels[train_ids], tcfg)
        preds = np.argmax(dae_mod.predict(stack, flat[test_ids]), axis=1)
        dae_mod.save_dae(stack, args.out, extra_meta=meta)
    else:
        rows, cols = mats.shape[1], mats.shape[2]
        widths = tuple(w for w in config.cnn_widths if w <= rows) or (1,)
        bank = cnn_mod.ConvFilterBank(rows, cols, widths, config.cnn_filters,
                                      seed=seed)
        history = cnn_mod.train(bank, mats[train_ids], labels[train_ids], tcfg)
        preds = np.argmax(bank.predict_proba(mats[test_ids]), axis=1)
        cnn_mod.save_cnn(bank, args.out, extra_meta=meta)

    acc = accuracy(preds, labels[test_ids])
    print(f"{algo}: trained {history['epochs_run']} epochs on "
          f"{len(train_ids)} nodes ({config.ratios[0]:g}% split)")
    print(f"test accuracy on {len(test_ids)} held-out nodes: {acc:.4f}")
    print(f"checkpoint written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    kind, _, meta = load_checkpoint(args.checkpoint)
    # checkpoint metadata pins the feature pipeline unless overridden
    if args.input_mode is None and "input_mode" in meta:
        args.input_mode = [meta["input_mode"]]
    if args.k is None and "k" in meta:
        args.k = [int(meta["k"])]
    if args.ratio is None and "ratio" in meta:
        args.ratio = [float(meta["ratio"])]
    if args.seed is None and "master_seed" in meta:
        args.seed = int(meta["master_seed"])
    (config, graph, mode, k, flat, mats, labels,
     train_ids, test_ids) = _training_setup(args)
    ids = np.arange(graph.n) if args.all_nodes else test_ids

    if kind == "dae":
        stack, _ = dae_mod.load_dae(args.checkpoint)
        preds = np.argmax(dae_mod.predict(stack, flat[ids]), axis=1)
    elif kind == "cnn":
        bank, _ = cnn_mod.load_cnn(args.checkpoint)
        preds = np.argmax(bank.predict_proba(mats[ids]), axis=1)
    else:
        raise ValueError(f"cannot evaluate checkpoint of kind {kind!r}")

    scope = "all" if args.all_nodes else "held-out"
    print(f"{kind} ({mode}, k={k}): accuracy on {len(ids)} {scope} nodes: "
          f"{accuracy(preds, labels[ids]):.4f}")
    return 0


def cmd_experiment(args) -> int:
    config = make_experiment_config(_collect_settings(args))
    report = run_experiment(config)
    sys.stdout.write(report.to_table())
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        print(f"CSV report written to {args.csv}")
    if not report.ok:
        bad = [c for c in report.cells if c.error is not None]
        print(f"{len(bad)} of {len(report.cells)} cells failed", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signet",
        description="Fraud detection on signed graphs via spectral coordinates")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a planted-fraud graph")
    p.add_argument("--n-benign", type=int, default=1000)
    p.add_argument("--n-fraud", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--block-pos-prob", type=float,
                   default=GeneratorConfig.block_pos_prob)
    p.add_argument("--cross-neg-prob", type=float,
                   default=GeneratorConfig.cross_neg_prob)
    p.add_argument("--fraud-degree", type=int, default=GeneratorConfig.fraud_degree)
    p.add_argument("--fraud-neg-fraction", type=float,
                   default=GeneratorConfig.fraud_neg_fraction)
    p.add_argument("--benign-noise-prob", type=float,
                   default=GeneratorConfig.benign_noise_prob)
    p.add_argument("--edges-out", required=True)
    p.add_argument("--labels-out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("embed", help="spectral coordinates of a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--normalize", action="store_true",
                   help="write unit-norm coordinate rows")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="train one DAE/CNN and save a checkpoint")
    _add_experiment_args(p)
    p.add_argument("--out", required=True, help="checkpoint path (.npz)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint on a graph")
    _add_experiment_args(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--all-nodes", action="store_true",
                   help="score every labeled node, not just the held-out split")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="run the full experiment grid")
    _add_experiment_args(p)
    p.add_argument("--csv", help="write the CSV report here")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"signet {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
