"""Planted-class synthetic flow generator for desk-scale validation.

Each class gets a Gaussian feature cloud (unit variance, means spaced a
chosen distance apart along the first axis) and a node community; edges of
a class mostly connect endpoints inside the class's community. With a
large separation a nearest-class-mean rule on the raw features is nearly
perfect, which gives downstream tests a known-good planted structure.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .ingest import BENIGN, FlowRecord
from .schema import FeatureSchema

_PROTOCOLS = ("tcp", "udp", "icmp")


def class_names(classes: int) -> list[str]:
    return [BENIGN] + [f"Attack{c}" for c in range(1, classes)]


def synth_schema(feature_dim: int) -> FeatureSchema:
    return FeatureSchema(
        src_ip="SRC_IP",
        src_port="SRC_PORT",
        dst_ip="DST_IP",
        dst_port="DST_PORT",
        categorical=("PROTO",),
        numeric=tuple(f"F{j:02d}" for j in range(feature_dim)),
        label="Label",
        attack="Attack",
    )


def synth_dataset(
    classes: int,
    nodes: int,
    edges: int,
    separation: float,
    feature_dim: int = 6,
    seed: int = 0,
    cross_rate: float = 0.05,
) -> list[FlowRecord]:
    """Generate ``edges`` flow records over ``nodes`` endpoints.

    Class c edge features ~ N(mean_c, I) with consecutive means
    ``separation`` apart; endpoints are drawn from class c's community,
    except a ``cross_rate`` fraction whose destination leaves it.
    """
    if classes < 2:
        raise ValueError("need at least 2 classes")
    if edges < classes:
        raise ValueError(f"need at least one edge per class ({classes}), got {edges}")
    if nodes < 2 * classes:
        raise ValueError("need at least two nodes per class community")
    rng = np.random.default_rng(seed)
    names = class_names(classes)
    communities = np.array_split(np.arange(nodes), classes)
    counts = [edges // classes + (1 if c < edges % classes else 0) for c in range(classes)]

    records: list[FlowRecord] = []
    for c in range(classes):
        mean = np.zeros(feature_dim)
        mean[0] = c * separation
        comm = communities[c]
        for _ in range(counts[c]):
            feats = rng.normal(loc=mean, scale=1.0, size=feature_dim)
            src = int(rng.choice(comm))
            if classes > 1 and rng.random() < cross_rate:
                other = int(rng.integers(classes - 1))
                other = other if other < c else other + 1
                dst = int(rng.choice(communities[other]))
            else:
                dst = int(rng.choice(comm))
            records.append(
                FlowRecord(
                    src_ip=f"10.0.{src // 256}.{src % 256}",
                    dst_ip=f"10.0.{dst // 256}.{dst % 256}",
                    src_port=int(rng.integers(1024, 65535)),
                    dst_port=int(rng.integers(1024, 65535)),
                    categorical=(str(rng.choice(_PROTOCOLS)),),
                    numeric=tuple(float(x) for x in feats),
                    label=0 if c == 0 else 1,
                    attack=names[c],
                )
            )
    order = rng.permutation(len(records))
    return [records[i] for i in order]


def export_records_csv(records: list[FlowRecord], schema: FeatureSchema, path) -> None:
    """Write records back out in the same CSV shape the parser reads."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.all_columns())
        for rec in records:
            if schema.has_ports:
                row = [rec.src_ip, rec.src_port, rec.dst_ip, rec.dst_port]
            else:
                row = [rec.src_ip, rec.dst_ip]
            row += list(rec.categorical)
            row += [f"{x:.17g}" for x in rec.numeric]
            row += [rec.label, rec.attack]
            writer.writerow(row)
