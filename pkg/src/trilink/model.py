"""Dual-channel spatial-temporal encoder with a three-headed decoder.

Two independent MLPs decouple each node's inputs: the semantic branch turns
the window-level embedding row into h_e, the structural branch turns each
snapshot's vector into h_t.  A Transformer encoder (learned positional
embeddings, post-norm layers) contextualizes the per-node h_t sequence, and a
learnable attention pooling collapses it into h_s.  Candidate edges are
scored by three heads: link existence from [h_e_i | h_e_j | h_s_i | h_s_j],
sign and weight from [h_s_i | h_s_j] through one shared hidden layer.

Ablation variants rewire exactly one piece: ``no_transformer`` takes the last
snapshot's h_t as h_s (no temporal stack at all), ``no_decoupling`` runs a
single MLP on the concatenated 136-dim input and shares one pooled state for
every head.  ``no_embedding`` / ``no_feature`` only change the inputs and are
handled at feature assembly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
import torch
from torch import nn

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    d_model: int = 64
    semantic_in: int = 128
    structural_in: int = 8
    transformer_layers: int = 2
    attention_heads: int = 4
    mlp_hidden: int = 64
    dropout: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.d_model % self.attention_heads != 0:
            raise ValueError("d_model must be divisible by attention_heads")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


@dataclass
class PredictionTriple:
    """Per-candidate-edge outputs; probabilities are sigmoids of the logits."""

    link_logit: torch.Tensor
    link_prob: torch.Tensor
    sign_logit: torch.Tensor
    sign_prob: torch.Tensor
    weight: torch.Tensor


class AttentionPooling(nn.Module):
    """score_tau = u^T tanh(U h_tau + b); softmax over time; weighted sum."""

    def __init__(self, d_model: int):
        super().__init__()
        self.proj = nn.Linear(d_model, d_model)  # U, b
        self.u = nn.Parameter(torch.empty(d_model))
        nn.init.normal_(self.u, std=d_model**-0.5)

    def forward(self, h_seq: torch.Tensor, return_weights: bool = False):
        scores = torch.tanh(self.proj(h_seq)) @ self.u  # B x n
        alpha = torch.softmax(scores, dim=-1)
        pooled = torch.einsum("bn,bnd->bd", alpha, h_seq)
        if return_weights:
            return pooled, alpha
        return pooled


class JointPredictor(nn.Module):
    """Full forward stack for one window's candidate edges."""

    def __init__(self, config: ModelConfig, window_len: int, variant: str = "full"):
        super().__init__()
        if variant not in ("full", "no_transformer", "no_embedding", "no_feature", "no_decoupling"):
            raise ValueError(f"unknown variant {variant!r}")
        self.config = config
        self.window_len = window_len
        self.variant = variant
        d = config.d_model

        if variant == "no_decoupling":
            self.fused_mlp = nn.Sequential(
                nn.Linear(config.semantic_in + config.structural_in, config.mlp_hidden),
                nn.ReLU(),
                nn.Linear(config.mlp_hidden, d),
            )
        else:
            self.semantic_mlp = nn.Sequential(
                nn.Linear(config.semantic_in, config.mlp_hidden),
                nn.ReLU(),
                nn.Linear(config.mlp_hidden, d),
            )
            self.structural_mlp = nn.Sequential(
                nn.Linear(config.structural_in, config.mlp_hidden),
                nn.ReLU(),
                nn.Linear(config.mlp_hidden, d),
            )

        if variant != "no_transformer":
            self.positional = nn.Parameter(torch.zeros(window_len, d))
            nn.init.normal_(self.positional, std=0.02)
            layer = nn.TransformerEncoderLayer(
                d_model=d,
                nhead=config.attention_heads,
                dim_feedforward=2 * d,
                dropout=config.dropout,
                batch_first=True,
            )
            self.transformer = nn.TransformerEncoder(layer, num_layers=config.transformer_layers)
            self.pooling = AttentionPooling(d)

        edge_dim = 2 * d if variant == "no_decoupling" else 4 * d
        self.link_hidden = nn.Linear(edge_dim, config.mlp_hidden)  # W1, b1
        self.link_out = nn.Linear(config.mlp_hidden, 1)  # w1, b1'
        self.pair_hidden = nn.Linear(2 * d, config.mlp_hidden)  # W2, b2 (shared)
        self.sign_out = nn.Linear(config.mlp_hidden, 1)  # w2, b2'
        self.weight_out = nn.Linear(config.mlp_hidden, 1)  # w3, b3'

    # -- encoder ---------------------------------------------------------

    def spatial_encode(self, semantic: torch.Tensor, structural: torch.Tensor):
        """Per-node h_e (B x d) and per-snapshot h_t (B x n x d)."""
        if self.variant == "no_decoupling":
            sem_rep = semantic.unsqueeze(1).expand(-1, structural.shape[1], -1)
            fused = torch.cat([sem_rep, structural], dim=-1)
            h_t = self.fused_mlp(fused)
            return None, h_t
        if semantic.shape[-1] != self.config.semantic_in:
            raise ValueError(f"semantic width {semantic.shape[-1]} != {self.config.semantic_in}")
        if structural.shape[-1] != self.config.structural_in:
            raise ValueError(f"structural width {structural.shape[-1]} != {self.config.structural_in}")
        return self.semantic_mlp(semantic), self.structural_mlp(structural)

    def temporal_encode(self, h_seq: torch.Tensor) -> torch.Tensor:
        """Contextualize each node's snapshot sequence (positions added)."""
        if h_seq.shape[1] != self.window_len:
            raise ValueError(f"sequence length {h_seq.shape[1]} != trained positional table {self.window_len}")
        return self.transformer(h_seq + self.positional.to(h_seq.dtype))

    def attention_pool(self, h_seq: torch.Tensor, return_weights: bool = False):
        return self.pooling(h_seq, return_weights=return_weights)

    def node_states(self, semantic: torch.Tensor, structural: torch.Tensor):
        """(h_e, h_s) for a block of nodes; h_e is h_s under no_decoupling."""
        h_e, h_t = self.spatial_encode(semantic, structural)
        if self.variant == "no_transformer":
            h_s = h_t[:, -1, :]
        else:
            h_s = self.attention_pool(self.temporal_encode(h_t))
        if self.variant == "no_decoupling":
            h_e = h_s
        return h_e, h_s

    # -- decoder ---------------------------------------------------------

    def edge_repr(self, src_idx: torch.Tensor, dst_idx: torch.Tensor, h_e, h_s):
        """Directed edge representations (z_e for link, z_s for sign/weight)."""
        z_s = torch.cat([h_s[src_idx], h_s[dst_idx]], dim=-1)
        if self.variant == "no_decoupling":
            z_e = z_s
        else:
            z_e = torch.cat([h_e[src_idx], h_e[dst_idx], h_s[src_idx], h_s[dst_idx]], dim=-1)
        return z_e, z_s

    def link_head(self, z_e: torch.Tensor) -> torch.Tensor:
        return self.link_out(torch.relu(self.link_hidden(z_e))).squeeze(-1)

    def sign_weight_head(self, z_s: torch.Tensor):
        g = torch.relu(self.pair_hidden(z_s))  # shared hidden layer
        return self.sign_out(g).squeeze(-1), self.weight_out(g).squeeze(-1)

    def forward(self, semantic: torch.Tensor, structural: torch.Tensor, pairs: torch.Tensor) -> PredictionTriple:
        """Score candidate edges given node feature blocks.

        ``pairs`` holds local (row) indices into the feature blocks, one
        (src, dst) per candidate edge.
        """
        h_e, h_s = self.node_states(semantic, structural)
        z_e, z_s = self.edge_repr(pairs[:, 0], pairs[:, 1], h_e, h_s)
        l1 = self.link_head(z_e)
        l2, y3 = self.sign_weight_head(z_s)
        return PredictionTriple(
            link_logit=l1,
            link_prob=torch.sigmoid(l1),
            sign_logit=l2,
            sign_prob=torch.sigmoid(l2),
            weight=y3,
        )


def build_model(config: ModelConfig, window_len: int, variant: str = "full") -> JointPredictor:
    """Construct a predictor with deterministic, seed-derived initialization."""
    torch.manual_seed(config.seed)
    return JointPredictor(config, window_len, variant)


def data_config_hash(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]


def save_checkpoint(model: JointPredictor, path, data_hash: str = "") -> None:
    torch.save(
        {
            "version": CHECKPOINT_VERSION,
            "model_config": asdict(model.config),
            "window_len": model.window_len,
            "variant": model.variant,
            "data_hash": data_hash,
            "state_dict": model.state_dict(),
        },
        path,
    )


def load_checkpoint(path, expected_data_hash: Optional[str] = None) -> JointPredictor:
    payload = torch.load(path, weights_only=False)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
    if expected_data_hash is not None and payload["data_hash"] != expected_data_hash:
        raise ValueError(
            f"checkpoint data hash {payload['data_hash']} does not match current data config {expected_data_hash}"
        )
    model = JointPredictor(ModelConfig(**payload["model_config"]), payload["window_len"], payload["variant"])
    model.load_state_dict(payload["state_dict"])
    return model
