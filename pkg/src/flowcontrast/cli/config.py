"""Run configuration: one key-value file, flag overrides, stable hash.

Every artifact a command writes embeds the hash of the fully resolved
configuration, so outputs can always be traced back to the settings that
produced them.
"""

from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass

from ..errors import ConfigError
from ..kvconfig import format_kv, read_kv_file
from ..negsc import ContrastConfig

OUTDIR_ENV = "FLOWCONTRAST_OUTDIR"


@dataclass
class RunConfig:
    # pipeline inputs
    data: str = ""
    schema: str = ""
    out_dir: str = "runs/default"
    seed: int = 0
    downsample_fraction: float = 1.0
    train_ratio: float = 0.7
    node_key: str = "ip"            # ip | ip:port
    encoding: str = "ordinal"       # ordinal | onehot
    target: str = "attack"          # attack (multiclass) | label (binary)
    # encoder
    layers: int = 1
    heads: int = 3
    d_proj: int = 32
    d_out: int = 32
    node_dim: int = 1
    activation: str = "relu"        # fixed; validated
    optimizer: str = "adam"         # fixed; validated
    # contrastive objective
    centers: int = 64
    neighbors: int = 4
    negatives: int = 5
    temperature: float = 0.2
    epsilon: float = 0.05
    sinkhorn_iters: int = 200
    sinkhorn_tol: float = 1e-6
    gwd_outer: int = 10
    learning_rate: float = 1e-3
    epochs: int = 20
    gen_d_proj: int = 32
    # downstream evaluation
    mode: str = "cluster"           # cluster | probe
    probe_epochs: int = 300
    probe_lr: float = 0.1
    # synthetic data generation
    synth_classes: int = 3
    synth_nodes: int = 60
    synth_edges: int = 600
    synth_separation: float = 6.0
    synth_feature_dim: int = 6
    synth_cross_rate: float = 0.05

    def validate(self) -> "RunConfig":
        if self.activation != "relu":
            raise ConfigError("only the relu activation is supported")
        if self.optimizer != "adam":
            raise ConfigError("only the adam optimizer is supported")
        if self.mode not in ("cluster", "probe"):
            raise ConfigError(f"mode must be cluster or probe, got {self.mode!r}")
        if self.target not in ("attack", "label"):
            raise ConfigError(f"target must be attack or label, got {self.target!r}")
        if self.node_key not in ("ip", "ip:port"):
            raise ConfigError(f"node_key must be ip or ip:port, got {self.node_key!r}")
        if self.encoding not in ("ordinal", "onehot"):
            raise ConfigError(f"encoding must be ordinal or onehot, got {self.encoding!r}")
        if not (0.0 < self.downsample_fraction <= 1.0):
            raise ConfigError("downsample_fraction must be in (0, 1]")
        if not (0.0 < self.train_ratio < 1.0):
            raise ConfigError("train_ratio must be in (0, 1)")
        self.contrast_config()  # validates the objective block
        return self

    def contrast_config(self) -> ContrastConfig:
        return ContrastConfig(
            centers=self.centers,
            neighbors=self.neighbors,
            negatives=self.negatives,
            temperature=self.temperature,
            epsilon=self.epsilon,
            sinkhorn_iters=self.sinkhorn_iters,
            sinkhorn_tol=self.sinkhorn_tol,
            gwd_outer=self.gwd_outer,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            seed=self.seed,
        )

    def to_kv(self) -> dict[str, str]:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            out[f.name] = f"{value:.17g}" if isinstance(value, float) else str(value)
        return out

    def config_hash(self) -> str:
        # out_dir is where artifacts land, not what they contain; identical
        # settings must hash identically wherever they are written
        pairs = {k: v for k, v in self.to_kv().items() if k != "out_dir"}
        canonical = "".join(f"{k}={v}\n" for k, v in sorted(pairs.items()))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    @classmethod
    def load(cls, path=None, overrides: list[str] | None = None,
             out_dir: str | None = None) -> "RunConfig":
        """Build from an optional file plus ``key=value`` override strings.

        The output directory resolves in priority order: explicit flag,
        then the environment override, then the config file value.
        """
        kv = read_kv_file(path) if path else {}
        for item in overrides or []:
            if "=" not in item:
                raise ConfigError(f"override must look like key=value, got {item!r}")
            key, value = item.split("=", 1)
            kv[key.strip()] = value.strip()
        cfg = cls()
        fields = {f.name: f for f in dataclasses.fields(cls)}
        for key, raw in kv.items():
            if key not in fields:
                raise ConfigError(f"unknown config key {key!r}")
            kind = fields[key].type
            try:
                if kind == "int":
                    setattr(cfg, key, int(raw))
                elif kind == "float":
                    setattr(cfg, key, float(raw))
                else:
                    setattr(cfg, key, raw)
            except ValueError:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from None
        env_dir = os.environ.get(OUTDIR_ENV)
        if env_dir:
            cfg.out_dir = env_dir
        if out_dir:
            cfg.out_dir = out_dir
        return cfg.validate()

    def defaults_text(self) -> str:
        return format_kv(self.to_kv())
