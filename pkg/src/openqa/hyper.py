"""Shared training/model hyperparameters with desk-scale defaults."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Hyper:
    d: int = 32          # embedding / model width
    h: int = 32          # recurrent hidden size
    heads: int = 2       # transformer attention heads
    layers: int = 1      # transformer encoder layers
    lr: float = 0.05
    epochs: int = 300
    seed: int = 13
