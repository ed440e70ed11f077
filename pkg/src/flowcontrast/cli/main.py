"""Command-line entry point.

Subcommands mirror the pipeline stages: ``synth`` writes a planted-class
dataset, ``preprocess`` turns a CSV into train/test graphs, ``train``
fits encoder and generator, ``embed`` writes edge embeddings, ``eval``
scores them (figures rendered next to the CSV/JSON reports), and
``gradcheck`` verifies analytic gradients on a tiny instance. Exit codes:
0 success, 2 configuration or schema problems, 3 numeric failures.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
import time
from pathlib import Path

import numpy as np

from ..checkpoint import load_checkpoint, save_checkpoint
from ..downeval import compute_metrics, kmeans_embed, linear_probe, map_clusters, roc_points
from ..errors import ConfigError, NumericError
from ..flowdata import (
    FeatureSchema,
    build_graph,
    dump_graph,
    export_records_csv,
    fit_standardizer,
    holdout_split,
    load_graph,
    parse_netflow_csv,
    stratified_downsample,
    synth_dataset,
    synth_schema,
)
from ..negat import encode_graph, init_encoder
from ..negsc import ContrastConfig, init_generator, train
from ..negsc.train import epoch_loss_and_grads
from ..numcore import grad_check
from . import figures
from .config import RunConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _log(path: Path, message: str) -> None:
    stamp = datetime.datetime.now().isoformat(timespec="seconds")
    with path.open("a", encoding="utf-8") as fh:
        fh.write(f"[{stamp}] {message}\n")


def _write_csv(path: Path, rows, comment: str | None = None) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        csv.writer(fh).writerows(rows)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_labels(path: Path, records) -> None:
    rows = [["record_index", "label", "attack"]]
    rows += [[i, rec.label, rec.attack] for i, rec in enumerate(records)]
    _write_csv(path, rows)


def _read_labels(path: Path) -> tuple[np.ndarray, np.ndarray]:
    attacks, labels = [], []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = (line for line in fh if not line.startswith("#"))
        reader = csv.DictReader(rows)
        for row in reader:
            labels.append(int(row["label"]))
            attacks.append(row["attack"])
    return np.array(attacks), np.array(labels, dtype=np.intp)


def _write_embeddings(path: Path, matrix: np.ndarray) -> None:
    rows = [[f"z{j}" for j in range(matrix.shape[1])]]
    rows += [[f"{x:.17g}" for x in row] for row in matrix]
    _write_csv(path, rows)


def _read_embeddings(path: Path) -> np.ndarray:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = (line for line in fh if not line.startswith("#"))
        reader = csv.reader(rows)
        next(reader)  # header
        data = [[float(x) for x in row] for row in reader]
    return np.asarray(data, dtype=np.float64)


def _prep_dir(cfg: RunConfig) -> Path:
    return Path(cfg.out_dir) / "prep"


# -- commands ----------------------------------------------------------------


def cmd_synth(cfg: RunConfig, args) -> int:
    out = Path(cfg.out_dir) / "synth"
    out.mkdir(parents=True, exist_ok=True)
    records = synth_dataset(
        classes=cfg.synth_classes,
        nodes=cfg.synth_nodes,
        edges=cfg.synth_edges,
        separation=cfg.synth_separation,
        feature_dim=cfg.synth_feature_dim,
        seed=cfg.seed,
        cross_rate=cfg.synth_cross_rate,
    )
    schema = synth_schema(cfg.synth_feature_dim)
    export_records_csv(records, schema, out / "flows.csv")
    (out / "schema.cfg").write_text(
        "".join(f"{k} = {v}\n" for k, v in schema.to_mapping().items()), encoding="utf-8"
    )
    _write_json(out / "manifest.json", {
        "config_hash": cfg.config_hash(),
        "records": len(records),
        "classes": cfg.synth_classes,
        "files": ["flows.csv", "schema.cfg"],
    })
    print(f"wrote {len(records)} synthetic flows to {out / 'flows.csv'}")
    return EXIT_OK


def cmd_preprocess(cfg: RunConfig, args) -> int:
    if not cfg.data or not cfg.schema:
        raise ConfigError("preprocess needs both data and schema paths")
    out = _prep_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()
    schema = FeatureSchema.from_file(cfg.schema)
    records, report = parse_netflow_csv(cfg.data, schema)
    if not records:
        raise ConfigError(f"{cfg.data}: no usable records")
    if cfg.downsample_fraction < 1.0:
        records = stratified_downsample(records, cfg.downsample_fraction, cfg.seed)
    train_recs, test_recs = holdout_split(records, cfg.train_ratio, cfg.seed)
    standardizer = fit_standardizer(train_recs, schema, cfg.encoding)
    for name, recs in (("train", train_recs), ("test", test_recs)):
        graph = build_graph(recs, standardizer.transform(recs),
                            node_key=cfg.node_key, node_dim=cfg.node_dim)
        dump_graph(graph, out / f"{name}_edges.csv", out / f"{name}_meta.json", chash)
        _write_labels(out / f"{name}_labels.csv", recs)
    _write_json(out / "standardizer.json",
                {"config_hash": chash, **standardizer.to_mapping()})
    _write_json(out / "report.json", {
        "config_hash": chash,
        "rows_read": report.total_rows,
        "rows_skipped": report.skipped,
        "skip_reasons": dict(report.reasons),
        "records_after_downsample": len(records),
        "train_records": len(train_recs),
        "test_records": len(test_recs),
        "feature_dim": standardizer.feature_dim,
    })
    _log(out / "preprocess.log", f"preprocess done: {len(train_recs)}/{len(test_recs)} records")
    print(f"preprocess: {len(train_recs)} train / {len(test_recs)} test records, "
          f"{report.skipped} skipped")
    return EXIT_OK


def _load_split_graph(cfg: RunConfig, split: str, edges=None, meta=None):
    prep = _prep_dir(cfg)
    return load_graph(edges or prep / f"{split}_edges.csv",
                      meta or prep / f"{split}_meta.json")


def cmd_train(cfg: RunConfig, args) -> int:
    out = Path(cfg.out_dir) / "train"
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()
    graph = _load_split_graph(cfg, "train")
    encoder = init_encoder(
        node_dim=cfg.node_dim, edge_dim=graph.feature_dim,
        layers=cfg.layers, heads=cfg.heads,
        d_proj=cfg.d_proj, d_out=cfg.d_out, seed=cfg.seed,
    )
    generator = init_generator(encoder.embed_dim, d_proj=cfg.gen_d_proj, seed=cfg.seed + 1)
    started = time.perf_counter()
    result = train(graph, encoder, generator, cfg.contrast_config())
    elapsed = time.perf_counter() - started
    arrays = {**result.encoder.as_dict(), **result.generator.as_dict()}
    save_checkpoint(out / "checkpoint.npz", arrays, {
        "config_hash": chash,
        "seed": cfg.seed,
        "node_dim": cfg.node_dim,
        "edge_dim": graph.feature_dim,
        "layers": cfg.layers,
        "heads": cfg.heads,
        "d_proj": cfg.d_proj,
        "d_out": cfg.d_out,
        "gen_d_proj": cfg.gen_d_proj,
        "embed_dim": encoder.embed_dim,
    })
    rows = [["epoch", "loss", "loss_edges", "loss_topology"]]
    rows += [
        [e.epoch, f"{e.loss:.17g}", f"{e.loss_edges:.17g}", f"{e.loss_topology:.17g}"]
        for e in result.trace
    ]
    _write_csv(out / "loss_trace.csv", rows, comment=f"config_hash={chash}")
    if result.trace:
        figures.loss_figure(result.trace, out / "loss_curve.png")
    for e in result.trace:
        _log(out / "train.log", f"epoch {e.epoch}: loss={e.loss:.6f} wall={e.wall_time:.3f}s")
    _log(out / "train.log", f"training done in {elapsed:.2f}s")
    final = result.trace[-1].loss if result.trace else float("nan")
    print(f"train: {len(result.trace)} epochs, final loss {final:.6f}")
    return EXIT_OK


def cmd_embed(cfg: RunConfig, args) -> int:
    out = Path(cfg.out_dir) / "embed"
    out.mkdir(parents=True, exist_ok=True)
    ckpt_path = args.checkpoint or Path(cfg.out_dir) / "train" / "checkpoint.npz"
    arrays, meta = load_checkpoint(ckpt_path)
    encoder = init_encoder(
        node_dim=meta["node_dim"], edge_dim=meta["edge_dim"],
        layers=meta["layers"], heads=meta["heads"],
        d_proj=meta["d_proj"], d_out=meta["d_out"], seed=0,
    ).replace_arrays(arrays)
    splits = [args.split] if args.split else ["train", "test"]
    written = {}
    for split in splits:
        graph = _load_split_graph(cfg, split, args.graph_edges, args.graph_meta)
        emb = encode_graph(graph, encoder)
        path = out / f"{split}_embeddings.csv"
        _write_embeddings(path, emb.edge_emb)
        written[split] = {"rows": int(emb.edge_emb.shape[0]),
                          "cols": int(emb.edge_emb.shape[1])}
        print(f"embed: {split}: {emb.edge_emb.shape[0]} edges x {emb.edge_emb.shape[1]} dims")
    _write_json(out / "embed_meta.json", {
        "config_hash": cfg.config_hash(),
        "checkpoint_config_hash": meta.get("config_hash", ""),
        "embed_dim": meta["embed_dim"],
        "splits": written,
    })
    return EXIT_OK


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / (np.linalg.norm(x, axis=1, keepdims=True) + 1e-12)


def _cluster_eval(cfg, fit_emb, fit_y, ev_emb):
    # the contrastive objective is cosine-geometric, so clustering runs on
    # the unit sphere rather than on raw norms
    fit_unit, ev_unit = _unit_rows(fit_emb), _unit_rows(ev_emb)
    classes = sorted(set(fit_y.tolist()))
    km = kmeans_embed(fit_unit, len(classes), seed=cfg.seed)
    mapping, _ = map_clusters(km.assignments, fit_y)
    dists = np.sqrt(((ev_unit[:, None, :] - km.centroids[None]) ** 2).sum(axis=2))
    nearest = dists.argmin(axis=1)
    pred = np.array([mapping[c] for c in nearest])
    scores = np.full((ev_emb.shape[0], len(classes)), -1e18)
    for j, c in enumerate(classes):
        cols = [k for k, v in mapping.items() if v == c]
        if cols:
            scores[:, j] = -dists[:, cols].min(axis=1)
    return pred, scores, classes


def _probe_eval(cfg, fit_emb, fit_y, ev_emb):
    probe = linear_probe(fit_emb, fit_y, epochs=cfg.probe_epochs, lr=cfg.probe_lr)
    classes = probe.classes.tolist()
    return probe.predict(ev_emb), probe.scores(ev_emb), classes


def cmd_eval(cfg: RunConfig, args) -> int:
    out = Path(cfg.out_dir) / "eval"
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()
    mode = args.mode or cfg.mode
    split = args.split or "test"
    prep = _prep_dir(cfg)
    embed_dir = Path(cfg.out_dir) / "embed"

    fit_emb = _read_embeddings(args.fit_embeddings or embed_dir / "train_embeddings.csv")
    fit_attack, fit_label = _read_labels(args.fit_labels or prep / "train_labels.csv")
    ev_emb = _read_embeddings(args.embeddings or embed_dir / f"{split}_embeddings.csv")
    ev_attack, ev_label = _read_labels(args.labels or prep / f"{split}_labels.csv")
    fit_y = fit_attack if cfg.target == "attack" else fit_label
    ev_y = ev_attack if cfg.target == "attack" else ev_label

    if mode == "cluster":
        pred, scores, classes = _cluster_eval(cfg, fit_emb, fit_y, ev_emb)
    elif mode == "probe":
        pred, scores, classes = _probe_eval(cfg, fit_emb, fit_y, ev_emb)
    else:
        raise ConfigError(f"unknown eval mode {mode!r}")

    positive = 1 if cfg.target == "label" else None
    report = compute_metrics(ev_y, pred, positive=positive)
    roc = roc_points(scores, ev_y, classes=classes)

    (out / "metrics.json").write_text(
        report.to_json(
            mode=mode,
            target=cfg.target,
            split=split,
            config_hash=chash,
            auc=roc.auc_summary(),
        ) + "\n",
        encoding="utf-8",
    )
    _write_csv(out / "confusion.csv", report.confusion.to_rows(), comment=f"config_hash={chash}")
    _write_csv(out / "roc_points.csv", roc.to_rows(), comment=f"config_hash={chash}")
    figures.confusion_figure(report, out / "confusion_matrix.png")
    figures.roc_figure(roc, out / "roc_curves.png")
    print(f"eval[{mode}/{cfg.target}/{split}]: accuracy {report.accuracy:.2f}%  "
          f"weighted F1 {report.weighted['f1']:.2f}%  micro AUC {roc.micro.auc:.3f}")
    return EXIT_OK


def cmd_gradcheck(cfg: RunConfig, args) -> int:
    out = Path(cfg.out_dir) / "gradcheck"
    out.mkdir(parents=True, exist_ok=True)
    records = synth_dataset(classes=2, nodes=6, edges=18, separation=3.0,
                            feature_dim=3, seed=cfg.seed + 11)
    graph = build_graph(records, np.array([r.numeric for r in records]))
    encoder = init_encoder(node_dim=1, edge_dim=3, layers=1, heads=2,
                           d_proj=3, d_out=3, seed=cfg.seed + 5)
    generator = init_generator(encoder.embed_dim, d_proj=3, seed=cfg.seed + 6)
    check_cfg = ContrastConfig(
        centers=2, neighbors=2, negatives=1,
        temperature=cfg.temperature, epsilon=cfg.epsilon,
        sinkhorn_iters=300, sinkhorn_tol=1e-9, gwd_outer=5,
        learning_rate=cfg.learning_rate, epochs=1, seed=cfg.seed,
    )
    _, _, frozen = epoch_loss_and_grads(graph, encoder, generator, check_cfg)

    def value_and_grad(params):
        value, grads, _ = epoch_loss_and_grads(
            graph, encoder.replace_arrays(params), generator.replace_arrays(params),
            check_cfg, frozen=frozen,
        )
        if args.corrupt_gradients:
            grads = dict(grads)
            grads["gen.w_comb"] = 2.0 * grads["gen.w_comb"]
        return value, grads

    params = {**encoder.as_dict(), **generator.as_dict()}
    report = grad_check(value_and_grad, params, perturbation=1e-6)
    print(report.summary())
    _write_json(out / "gradcheck.json", {
        "config_hash": cfg.config_hash(),
        "perturbation": report.perturbation,
        "per_param": report.per_param,
        "max_rel_error": report.max_rel_error,
        "passed": report.passed(1e-4),
    })
    if not report.passed(1e-4):
        print("gradient check FAILED (max relative error >= 1e-4)", file=sys.stderr)
        return EXIT_NUMERIC
    print("gradient check passed")
    return EXIT_OK


def cmd_defaults(cfg: RunConfig, args) -> int:
    sys.stdout.write(cfg.defaults_text())
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowcontrast",
        description="Self-supervised contrastive learning on NetFlow graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key-value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--out", help="output directory (overrides config and env)")

    p = sub.add_parser("synth", help="generate a planted-class synthetic dataset")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="parse, downsample, split, standardize, build graphs")
    common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train encoder and generator")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="write edge embeddings from a checkpoint")
    common(p)
    p.add_argument("--split", choices=["train", "test"], help="embed a single split")
    p.add_argument("--checkpoint", help="explicit checkpoint path")
    p.add_argument("--graph-edges", dest="graph_edges", help="explicit graph edge list")
    p.add_argument("--graph-meta", dest="graph_meta", help="explicit graph metadata")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("eval", help="score embeddings and render reports")
    common(p)
    p.add_argument("--mode", choices=["cluster", "probe"])
    p.add_argument("--split", choices=["train", "test"])
    p.add_argument("--embeddings", help="embeddings CSV to evaluate")
    p.add_argument("--labels", help="labels CSV for the evaluated embeddings")
    p.add_argument("--fit-embeddings", dest="fit_embeddings",
                   help="embeddings CSV used to fit the downstream model")
    p.add_argument("--fit-labels", dest="fit_labels",
                   help="labels CSV for the fitting embeddings")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference check of all gradients")
    common(p)
    p.add_argument("--corrupt-gradients", action="store_true",
                   help="debug: corrupt one analytic gradient to prove the check fails")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("defaults", help="print every config key with its default")
    common(p)
    p.set_defaults(func=cmd_defaults)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.set, args.out)
        return args.func(cfg, args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
