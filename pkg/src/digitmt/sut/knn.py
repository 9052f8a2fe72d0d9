import numpy as np

from ..errors import DimensionMismatch, EmptyReference
from .base import N_CLASSES, Classifier, Prediction


def knn_classify(reference_images, reference_labels, k: int, img) -> Prediction:
    """Majority vote of the ``k`` nearest references (Euclidean on raw intensities).

    Equal distances keep reference order; equal votes go to the lowest digit.
    Scores are the vote fractions.
    """
    refs = np.asarray(reference_images)
    labels = np.asarray(reference_labels).astype(np.int64)
    if len(refs) == 0:
        raise EmptyReference("k-NN needs at least one reference image")
    if len(refs) != len(labels):
        raise DimensionMismatch(f"{len(refs)} reference images but {len(labels)} labels")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    flat = refs.reshape(len(refs), -1).astype(np.int64)
    query = np.asarray(img).reshape(-1).astype(np.int64)
    if query.size != flat.shape[1]:
        raise DimensionMismatch(f"query has {query.size} pixels, references have {flat.shape[1]}")
    # squared distance is exact in int64 and orders like the Euclidean one
    dist = ((flat - query) ** 2).sum(axis=1)
    nearest = np.argsort(dist, kind="stable")[:k]
    votes = np.bincount(labels[nearest], minlength=N_CLASSES)[:N_CLASSES]
    return Prediction.from_scores(votes / votes.sum())


class KnnClassifier(Classifier):
    name = "k-NN"

    def __init__(self, reference_images, reference_labels, k: int = 1):
        self.reference_images = np.asarray(reference_images)
        self.reference_labels = np.asarray(reference_labels)
        self.k = k
        if len(self.reference_images) == 0:
            raise EmptyReference("k-NN needs at least one reference image")

    def predict(self, img) -> Prediction:
        return knn_classify(self.reference_images, self.reference_labels, self.k, img)
