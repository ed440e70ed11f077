"""Column-role mapping for NetFlow-style CSV files.

A schema file uses the key-value format, e.g.::

    endpoints = IPV4_SRC_ADDR, L4_SRC_PORT, IPV4_DST_ADDR, L4_DST_PORT
    numeric = IN_BYTES, OUT_BYTES, IN_PKTS, OUT_PKTS
    categorical = PROTOCOL, TCP_FLAGS
    label = Label
    attack = Attack

``endpoints`` takes either two columns (source ip, destination ip) or four
(source ip, source port, destination ip, destination port).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SchemaError
from ..kvconfig import read_kv_file, split_list


@dataclass(frozen=True)
class FeatureSchema:
    """Maps CSV columns to roles and fixes the edge feature layout.

    Encoded edge features are the categorical columns (in schema order)
    followed by the numeric columns; with one-hot encoding the categorical
    block expands, so the final feature dimension is known only after
    fitting the standardizer.
    """

    src_ip: str
    dst_ip: str
    numeric: tuple[str, ...]
    categorical: tuple[str, ...] = ()
    src_port: str | None = None
    dst_port: str | None = None
    label: str = "Label"
    attack: str = "Attack"

    def __post_init__(self):
        if not self.src_ip or not self.dst_ip:
            raise SchemaError("schema needs both source and destination ip columns")
        if not self.label or not self.attack:
            raise SchemaError("schema needs label and attack columns")
        if len(self.numeric) + len(self.categorical) < 1:
            raise SchemaError("schema needs at least one feature column")
        if (self.src_port is None) != (self.dst_port is None):
            raise SchemaError("ports must be mapped for both endpoints or neither")
        cols = list(self.all_columns())
        dupes = {c for c in cols if cols.count(c) > 1}
        if dupes:
            raise SchemaError(f"columns mapped to more than one role: {sorted(dupes)}")

    @property
    def has_ports(self) -> bool:
        return self.src_port is not None

    @property
    def raw_feature_dim(self) -> int:
        """Feature count before any one-hot expansion."""
        return len(self.numeric) + len(self.categorical)

    def all_columns(self):
        if self.has_ports:
            cols = [self.src_ip, self.src_port, self.dst_ip, self.dst_port]
        else:
            cols = [self.src_ip, self.dst_ip]
        cols += list(self.categorical) + list(self.numeric) + [self.label, self.attack]
        return cols

    @classmethod
    def from_file(cls, path) -> "FeatureSchema":
        return cls.from_mapping(read_kv_file(path))

    @classmethod
    def from_mapping(cls, kv: dict) -> "FeatureSchema":
        try:
            endpoints = split_list(kv["endpoints"])
            numeric = tuple(split_list(kv.get("numeric", "")))
            categorical = tuple(split_list(kv.get("categorical", "")))
            label = kv["label"]
            attack = kv["attack"]
        except KeyError as exc:
            raise SchemaError(f"schema file missing key {exc.args[0]!r}") from None
        if len(endpoints) == 2:
            src_ip, dst_ip = endpoints
            src_port = dst_port = None
        elif len(endpoints) == 4:
            src_ip, src_port, dst_ip, dst_port = endpoints
        else:
            raise SchemaError("endpoints must list 2 (ips) or 4 (ips + ports) columns")
        return cls(
            src_ip=src_ip,
            dst_ip=dst_ip,
            src_port=src_port,
            dst_port=dst_port,
            numeric=numeric,
            categorical=categorical,
            label=label,
            attack=attack,
        )

    def to_mapping(self) -> dict[str, str]:
        if self.has_ports:
            endpoints = f"{self.src_ip}, {self.src_port}, {self.dst_ip}, {self.dst_port}"
        else:
            endpoints = f"{self.src_ip}, {self.dst_ip}"
        return {
            "endpoints": endpoints,
            "numeric": ", ".join(self.numeric),
            "categorical": ", ".join(self.categorical),
            "label": self.label,
            "attack": self.attack,
        }
