"""One serializable config object covering a whole run.

Defaults follow the reference experimental setup: T=100 snapshots, window
n=10, hop count h=2, five walks of length 10 per node, 64-dim embeddings
(128 concatenated), a 64-dim two-layer / four-head Transformer encoder, and
Adam at lr 0.001 with an 8:2 chronological split.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .features import FeatureConfig
from .model import ModelConfig, data_config_hash
from .semantic import SkipGramConfig, WalkConfig
from .training import TrainConfig


@dataclass(frozen=True)
class RunConfig:
    dataset: str = ""  # path to the edge file
    format: str = "csv"  # "csv" | "events"
    name: str = ""  # dataset label; defaults to the file stem
    T: int = 100
    n: int = 10
    h: int = 2
    num_walks: int = 5
    walk_length: int = 10
    embedding_dim: int = 64
    context_window: int = 5
    negatives_per_target: int = 5
    skipgram_epochs: int = 5
    skipgram_lr: float = 0.025
    d_model: int = 64
    transformer_layers: int = 2
    attention_heads: int = 4
    mlp_hidden: int = 64
    dropout: float = 0.1
    lr: float = 0.001
    epochs: int = 100
    patience: int = 10
    split_ratio: float = 0.8
    lambda_link: float = 1.0
    lambda_sign: float = 1.0
    lambda_weight: float = 1.0
    first_diff: str = "zero"
    seed: int = 0
    jobs: int = 1
    deterministic: bool = True
    out: str = "runs"

    def override(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)

    # -- sub-configs -------------------------------------------------------

    def walk_config(self) -> WalkConfig:
        return WalkConfig(num_walks=self.num_walks, walk_length=self.walk_length, seed=self.seed)

    def skipgram_config(self) -> SkipGramConfig:
        return SkipGramConfig(
            dim=self.embedding_dim,
            context_window=self.context_window,
            negatives_per_target=self.negatives_per_target,
            epochs=self.skipgram_epochs,
            initial_lr=self.skipgram_lr,
            seed=self.seed,
            init_seed=self.seed,
        )

    def feature_config(self, variant: str = "full") -> FeatureConfig:
        return FeatureConfig(
            hops=self.h,
            first_diff=self.first_diff,
            walks=self.walk_config(),
            skipgram=self.skipgram_config(),
            variant=variant,
        )

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            d_model=self.d_model,
            semantic_in=2 * self.embedding_dim,
            structural_in=8,
            transformer_layers=self.transformer_layers,
            attention_heads=self.attention_heads,
            mlp_hidden=self.mlp_hidden,
            dropout=self.dropout,
            seed=self.seed,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            lr=self.lr,
            epochs=self.epochs,
            patience=self.patience,
            split_ratio=self.split_ratio,
            lambda_link=self.lambda_link,
            lambda_sign=self.lambda_sign,
            lambda_weight=self.lambda_weight,
            seed=self.seed,
            deterministic=self.deterministic,
        )

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def data_hash(self) -> str:
        """Hash of everything that shapes features and data; guards checkpoints."""
        keys = (
            "dataset",
            "format",
            "name",
            "T",
            "n",
            "h",
            "num_walks",
            "walk_length",
            "embedding_dim",
            "context_window",
            "negatives_per_target",
            "skipgram_epochs",
            "skipgram_lr",
            "first_diff",
            "seed",
        )
        d = self.to_dict()
        return data_config_hash({k: d[k] for k in keys})

    @property
    def dataset_name(self) -> str:
        return self.name or Path(self.dataset).stem
