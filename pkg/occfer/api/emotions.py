from enum import IntEnum
from typing import Tuple


class EmotionLabel(IntEnum):
    """
    The eight emotion classes shared by FER+ and AffectNet. The ordering is alphabetical and fixed, so the integer
    value of a label is its class index everywhere in the code base (datasets, logits, confusion matrices).
    """

    ANGER = 0
    CONTEMPT = 1
    DISGUST = 2
    FEAR = 3
    HAPPINESS = 4
    NEUTRAL = 5
    SADNESS = 6
    SURPRISE = 7

    @property
    def display_name(self) -> str:
        return self.name.lower()

    @classmethod
    def from_name(cls, name: str) -> "EmotionLabel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"Unknown emotion name: {name!r}") from None


EMOTION_NAMES: Tuple[str, ...] = tuple(label.display_name for label in EmotionLabel)
NUM_CLASSES = len(EmotionLabel)
