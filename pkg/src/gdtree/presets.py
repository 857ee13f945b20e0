"""Tuned per-dataset hyperparameter presets for the bundled benchmarks."""

from __future__ import annotations

import re

from .cart import CartConfig
from .losses import LossConfig
from .training import TrainConfig

GDT_PRESETS = {
    "banknote": TrainConfig(
        depth=7, lr_index=0.05, lr_values=0.05, lr_leaf=0.10,
        loss=LossConfig(kind="focal", focal_gamma=3.0, poly_enabled=True, poly_epsilon=2.0),
    ),
    "transfusion": TrainConfig(
        depth=8, lr_index=0.01, lr_values=0.10, lr_leaf=0.01,
        loss=LossConfig(kind="ce"),
    ),
}

CART_PRESETS = {
    "banknote": CartConfig(max_depth=9, criterion="gini",
                           min_samples_leaf=1, min_samples_split=5),
    "transfusion": CartConfig(max_depth=9, criterion="entropy",
                              min_samples_leaf=1, min_samples_split=5),
}


def _norm(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


def gdt_preset(dataset_name: str) -> TrainConfig | None:
    key = _norm(dataset_name)
    for frag, cfg in GDT_PRESETS.items():
        if frag in key:
            return cfg
    return None


def cart_preset(dataset_name: str) -> CartConfig | None:
    key = _norm(dataset_name)
    for frag, cfg in CART_PRESETS.items():
        if frag in key:
            return cfg
    return None
