"""Linear extrapolation of generation time, against a manual-production baseline."""
from dataclasses import dataclass, field

# Measured generation times (seconds, images) per approach and the manual
# baseline (images per subject, minutes) reported for the original experiment.
REFERENCE_RATES = {"image": (2521.80, 7290), "object": (570.66, 3906)}
MANUAL_IMAGES = 456
MANUAL_MINUTES = 40.0


@dataclass(frozen=True)
class ExtrapolationInputs:
    rates: dict = field(default_factory=lambda: dict(REFERENCE_RATES))
    manual_images: int = MANUAL_IMAGES
    manual_minutes: float = MANUAL_MINUTES

    def __post_init__(self):
        if not self.rates:
            raise ValueError("need at least one approach")
        for name, (seconds, images) in self.rates.items():
            if not (seconds > 0 and images > 0):
                raise ValueError(f"{name}: seconds and images must be positive, got {seconds}, {images}")
        if not (self.manual_images > 0 and self.manual_minutes > 0):
            raise ValueError("manual baseline needs positive images and minutes")


@dataclass(frozen=True)
class Extrapolation:
    target_per_approach: int
    approaches: int
    automated_hours: float
    manual_hours: float

    @property
    def total_images(self) -> int:
        return self.target_per_approach * self.approaches

    @property
    def reduction(self) -> float:
        """Fraction of the manual time saved by automated generation."""
        return 1.0 - self.automated_hours / self.manual_hours


def extrapolate_time(inputs: ExtrapolationInputs = ExtrapolationInputs(),
                     target_images_per_approach: int = 50_000) -> Extrapolation:
    seconds = sum(target_images_per_approach * s / n for s, n in inputs.rates.values())
    total = target_images_per_approach * len(inputs.rates)
    manual_hours = total * inputs.manual_minutes / inputs.manual_images / 60
    return Extrapolation(target_images_per_approach, len(inputs.rates), seconds / 3600, manual_hours)
