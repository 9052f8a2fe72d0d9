from .base import Classifier, Prediction
from .external import ExternalClassifier
from .knn import KnnClassifier, knn_classify
from .mlp import (
    LAYER_SIZES,
    MlpClassifier,
    MlpModel,
    TrainConfig,
    load_weights,
    mlp_infer,
    mlp_train,
    save_weights,
)

__all__ = [
    "Classifier",
    "ExternalClassifier",
    "KnnClassifier",
    "LAYER_SIZES",
    "MlpClassifier",
    "MlpModel",
    "Prediction",
    "TrainConfig",
    "knn_classify",
    "load_weights",
    "mlp_infer",
    "mlp_train",
    "save_weights",
]
