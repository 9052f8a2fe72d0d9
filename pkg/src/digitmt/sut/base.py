from dataclasses import dataclass

import numpy as np

from ..errors import WrongImageSize

IMAGE_SHAPE = (28, 28)
N_CLASSES = 10


@dataclass(frozen=True)
class Prediction:
    label: int
    scores: tuple

    @classmethod
    def from_scores(cls, scores) -> "Prediction":
        scores = tuple(float(s) for s in scores)
        # np.argmax returns the first maximum, i.e. the lowest digit on ties
        return cls(int(np.argmax(scores)), scores)


def check_image(img) -> np.ndarray:
    img = np.asarray(img)
    if img.shape != IMAGE_SHAPE:
        raise WrongImageSize(f"classifier input must be 28x28, got {img.shape}")
    return img


class Classifier:
    """Anything that maps 28x28 uint8 images to :class:`Prediction` objects.

    Subclasses implement :meth:`predict`; :meth:`predict_batch` may be
    overridden where batching is cheaper.
    """

    name = "classifier"

    def predict(self, img) -> Prediction:
        raise NotImplementedError

    def predict_batch(self, images, case_ids=None) -> list[Prediction]:
        """Predict many images; ``case_ids`` only matter to SUTs that log or echo them."""
        return [self.predict(img) for img in images]

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
