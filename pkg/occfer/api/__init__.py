from .data_structures import DatasetSplit, ImageRecord, IngestionReport, OcclusionMode
from .emotions import EMOTION_NAMES, NUM_CLASSES, EmotionLabel
from .errors import *  # noqa
from .training_hooks_mixin import TrainingHooksMixin
