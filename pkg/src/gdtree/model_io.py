"""Model persistence: one self-contained, versioned JSON document.

The file carries the dense parameters, the hardened+pruned tree, the fitted
preprocessing, the training configuration and a summary of the fit, so
inference needs nothing but the model file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset, PreprocessModel
from .training import TrainConfig
from .tree import DenseTreeParams, VanillaTree

MODEL_FORMAT_VERSION = 1


@dataclass
class ModelBundle:
    params: DenseTreeParams
    tree: VanillaTree
    preprocess: PreprocessModel
    train_config: TrainConfig
    report_summary: dict

    def predict_proba(self, data: Dataset) -> np.ndarray:
        transformed = self.preprocess.transform(data)
        return self.tree.predict_proba(transformed.X)

    def predict(self, data: Dataset) -> np.ndarray:
        return np.argmax(self.predict_proba(data), axis=1)

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "model_type": "gdtree",
            "dense_params": self.params.to_dict(),
            "tree": self.tree.to_dict(),
            "preprocess": self.preprocess.to_dict(),
            "train_config": self.train_config.to_dict(),
            "report": self.report_summary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelBundle":
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {d.get('format_version')!r}")
        return cls(
            params=DenseTreeParams.from_dict(d["dense_params"]),
            tree=VanillaTree.from_dict(d["tree"]),
            preprocess=PreprocessModel.from_dict(d["preprocess"]),
            train_config=TrainConfig.from_dict(d["train_config"]),
            report_summary=d["report"],
        )


def save_model(path, bundle: ModelBundle) -> None:
    with open(path, "w") as fh:
        json.dump(bundle.to_dict(), fh)


def load_model(path) -> ModelBundle:
    with open(path) as fh:
        return ModelBundle.from_dict(json.load(fh))
