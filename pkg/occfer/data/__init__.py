from .datasets import FaceDataset, compute_channel_means
from .ferplus import FERPLUS_LABEL_COLUMNS, CorpusSplits, load_ferplus
from .manifest import load_manifest, partition_by_split, write_manifest
from .sampling import downsample_per_class, join_training_sets
from .synthetic import generate_synthetic, glyph_templates
