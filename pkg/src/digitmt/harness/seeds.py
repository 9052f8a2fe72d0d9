"""Seed images: loading, and the precondition that the SUT gets them right."""
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError, NoValidSeeds
from ..imaging import read_pgm
from ..objectmorph.segments import load_annotations
from ..sut.base import Classifier, check_image

log = logging.getLogger(__name__)

_SEED_NAME = re.compile(r"^(?P<stem>.*_(?P<label>\d))\.pgm$")


@dataclass(frozen=True, eq=False)
class SeedCase:
    seed_id: str
    label: int
    image: np.ndarray
    annotations: tuple | None = None


def default_seeds_dir() -> Path:
    return Path(str(resources.files("digitmt") / "data" / "seeds"))


def load_seeds(seeds_dir=None, annotations_dir=None) -> list[SeedCase]:
    """Read ``<name>_<digit>.pgm`` files; annotations come from ``<name>_<digit>.seg`` if present.

    Seeds are returned sorted by seed id.
    """
    seeds_dir = Path(seeds_dir) if seeds_dir is not None else default_seeds_dir()
    annotations_dir = Path(annotations_dir) if annotations_dir is not None else seeds_dir
    if not seeds_dir.is_dir():
        raise FileNotFoundError(f"seed directory {seeds_dir} does not exist")
    seeds = []
    for path in sorted(seeds_dir.glob("*.pgm")):
        match = _SEED_NAME.match(path.name)
        if not match:
            raise ConfigError(f"{path}: seed files must be named <name>_<digit>.pgm")
        image = check_image(read_pgm(path))
        seg = annotations_dir / f"{match['stem']}.seg"
        annotations = tuple(load_annotations(seg)) if seg.exists() else None
        seeds.append(SeedCase(match["stem"], int(match["label"]), image, annotations))
    if not seeds:
        raise ConfigError(f"no seed images in {seeds_dir}")
    return seeds


def check_seeds(seeds, sut: Classifier) -> list[tuple]:
    """Pair every seed with the SUT's prediction for it."""
    predictions = sut.predict_batch(np.stack([s.image for s in seeds]), [f"seed/{s.seed_id}" for s in seeds])
    return list(zip(seeds, predictions))


def validate_seeds(seeds, sut: Classifier) -> list[SeedCase]:
    accepted = []
    for seed, prediction in check_seeds(seeds, sut):
        if prediction.label == seed.label:
            accepted.append(seed)
        else:
            log.warning("seed %s rejected: %s predicted %d, expected %d",
                        seed.seed_id, sut.name, prediction.label, seed.label)
    if not accepted:
        raise NoValidSeeds(f"{sut.name} misclassifies every seed; nothing to test")
    return accepted
