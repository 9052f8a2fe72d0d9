"""Fully connected ReLU network trained with plain minibatch SGD."""
import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatch, EmptyDataset, LabelOutOfRange, ShapeMismatch, TruncatedFile, WrongMagic
from ..rng import DEFAULT_SEED
from .base import Classifier, Prediction, check_image

log = logging.getLogger(__name__)

LAYER_SIZES = (784, 512, 512, 10)
WEIGHTS_MAGIC = b"MLPW"
WEIGHTS_VERSION = 1


@dataclass
class MlpModel:
    """Weights ``(fan_in, fan_out)`` and biases ``(fan_out,)`` per dense layer."""

    weights: list
    biases: list

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeMismatch("need one bias vector per weight matrix")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeMismatch(f"layer {i}: weights {w.shape} / biases {b.shape}")
            if i and w.shape[0] != self.weights[i - 1].shape[1]:
                raise ShapeMismatch(f"layer {i} expects {w.shape[0]} inputs, previous layer gives "
                                    f"{self.weights[i - 1].shape[1]}")

    @property
    def sizes(self) -> tuple:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    @classmethod
    def zeros(cls, sizes=LAYER_SIZES, dtype=np.float32) -> "MlpModel":
        return cls([np.zeros((a, b), dtype) for a, b in zip(sizes[:-1], sizes[1:])],
                   [np.zeros(b, dtype) for b in sizes[1:]])

    @classmethod
    def he_init(cls, sizes=LAYER_SIZES, seed: int = 0, dtype=np.float32) -> "MlpModel":
        rng = np.random.default_rng(seed)
        weights = [(rng.standard_normal((a, b)) * np.sqrt(2.0 / a)).astype(dtype)
                   for a, b in zip(sizes[:-1], sizes[1:])]
        return cls(weights, [np.zeros(b, dtype) for b in sizes[1:]])

    def copy(self) -> "MlpModel":
        return MlpModel([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: MlpModel, x: np.ndarray):
    """Return the activations of every layer; the last entry is the logits."""
    acts = [x]
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w + b
        acts.append(z if i == len(model.weights) - 1 else np.maximum(z, 0))
    return acts


def scale_inputs(images, dtype=np.float32) -> np.ndarray:
    images = np.asarray(images)
    return images.reshape(len(images), -1).astype(dtype) / 255


def predict_scores(model: MlpModel, images) -> np.ndarray:
    x = scale_inputs(images, model.weights[0].dtype)
    return softmax(forward(model, x)[-1].astype(np.float64))


def mlp_infer(model: MlpModel, img) -> Prediction:
    img = check_image(img) if model.sizes[0] == 784 else np.asarray(img)
    return Prediction.from_scores(predict_scores(model, img[None])[0])


def cross_entropy(model: MlpModel, x: np.ndarray, labels: np.ndarray) -> float:
    probs = softmax(forward(model, x)[-1].astype(np.float64))
    return float(-np.mean(np.log(probs[np.arange(len(labels)), labels] + 1e-300)))


def gradients(model: MlpModel, x: np.ndarray, labels: np.ndarray):
    """Gradients of the mean cross-entropy w.r.t. each layer's (weights, biases)."""
    acts = forward(model, x)
    delta = softmax(acts[-1])
    delta[np.arange(len(labels)), labels] -= 1
    delta /= len(labels)
    grads = []
    for i in range(len(model.weights) - 1, -1, -1):
        grads.append((acts[i].T @ delta, delta.sum(axis=0)))
        if i:
            delta = (delta @ model.weights[i].T) * (acts[i] > 0)
    return grads[::-1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 32
    epochs: int = 5
    seed: int = DEFAULT_SEED
    subset: int | None = None

    def __post_init__(self):
        if not self.learning_rate > 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError(f"invalid training configuration {self}")
        if self.subset is not None and self.subset < 1:
            raise ValueError("subset size must be positive")


def mlp_train(images, labels, config: TrainConfig = TrainConfig(), sizes=LAYER_SIZES,
              on_epoch=None) -> MlpModel:
    images = np.asarray(images)
    labels = np.asarray(labels).astype(np.int64)
    if len(images) == 0:
        raise EmptyDataset("no training images")
    if len(images) != len(labels):
        raise DimensionMismatch(f"{len(images)} images but {len(labels)} labels")
    if labels.min() < 0 or labels.max() >= sizes[-1]:
        raise LabelOutOfRange("training labels out of range")
    if config.subset is not None:
        images, labels = images[:config.subset], labels[:config.subset]
    x = scale_inputs(images)
    if x.shape[1] != sizes[0]:
        raise DimensionMismatch(f"images have {x.shape[1]} pixels, network expects {sizes[0]}")

    model = MlpModel.he_init(sizes, config.seed)
    order_rng = np.random.default_rng([config.seed, 1])
    lr = np.float32(config.learning_rate)
    for epoch in range(config.epochs):
        order = order_rng.permutation(len(x))
        for start in range(0, len(x), config.batch_size):
            batch = order[start:start + config.batch_size]
            for (dw, db), w, b in zip(gradients(model, x[batch], labels[batch]), model.weights, model.biases):
                w -= lr * dw
                b -= lr * db
        if on_epoch is not None:
            on_epoch(epoch, model)
        log.info("epoch %d/%d done", epoch + 1, config.epochs)
    return model


def accuracy(model: MlpModel, images, labels, batch: int = 2000) -> float:
    labels = np.asarray(labels)
    hits = 0
    for start in range(0, len(labels), batch):
        scores = predict_scores(model, images[start:start + batch])
        hits += int((scores.argmax(axis=1) == labels[start:start + batch]).sum())
    return hits / len(labels)


def save_weights(model: MlpModel, path) -> None:
    """Write ``MLPW``, version byte, layer count, (rows, cols) per layer, then each
    layer's weights and biases, all little-endian float32 / uint32, row-major."""
    parts = [WEIGHTS_MAGIC, struct.pack("<BI", WEIGHTS_VERSION, len(model.weights))]
    parts += [struct.pack("<II", *w.shape) for w in model.weights]
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_weights(path, expected_sizes=None) -> MlpModel:
    raw = Path(path).read_bytes()
    if raw[:4] != WEIGHTS_MAGIC:
        raise WrongMagic(f"{path}: not an MLPW weights file")
    if len(raw) < 9:
        raise TruncatedFile(f"{path}: header cut short")
    version, count = struct.unpack_from("<BI", raw, 4)
    if version != WEIGHTS_VERSION:
        raise WrongMagic(f"{path}: unsupported weights version {version}")
    pos = 9
    if len(raw) < pos + 8 * count:
        raise TruncatedFile(f"{path}: layer table cut short")
    shapes = [struct.unpack_from("<II", raw, pos + 8 * i) for i in range(count)]
    pos += 8 * count
    sizes = (shapes[0][0],) + tuple(cols for _, cols in shapes) if shapes else ()
    if expected_sizes is not None and tuple(expected_sizes) != sizes:
        raise ShapeMismatch(f"{path}: layer sizes {sizes}, expected {tuple(expected_sizes)}")
    needed = pos + 4 * sum(rows * cols + cols for rows, cols in shapes)
    if len(raw) < needed:
        raise TruncatedFile(f"{path}: {len(raw)} bytes, layer table needs {needed}")
    if len(raw) > needed:
        raise ShapeMismatch(f"{path}: {len(raw) - needed} trailing bytes")
    weights, biases = [], []
    for rows, cols in shapes:
        w = np.frombuffer(raw, dtype="<f4", count=rows * cols, offset=pos).reshape(rows, cols)
        pos += 4 * rows * cols
        b = np.frombuffer(raw, dtype="<f4", count=cols, offset=pos)
        pos += 4 * cols
        weights.append(w.astype(np.float32))
        biases.append(b.astype(np.float32))
    model = MlpModel(weights, biases)
    if not all(np.isfinite(w).all() for w in weights + biases):
        raise ShapeMismatch(f"{path}: non-finite parameters")
    return model


class MlpClassifier(Classifier):
    name = "2-HL NN"

    def __init__(self, model: MlpModel):
        self.model = model

    def predict(self, img) -> Prediction:
        return mlp_infer(self.model, img)

    def predict_batch(self, images, case_ids=None) -> list[Prediction]:
        images = np.asarray(images)
        if len(images) == 0:
            return []
        if images.shape[1:] != (28, 28):
            check_image(images[0])
        return [Prediction.from_scores(row) for row in predict_scores(self.model, images)]
