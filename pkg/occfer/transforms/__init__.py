from .functional import (
    gray_to_rgb,
    hflip,
    occlude_upper_half,
    occluded_rows_after_resize,
    resize,
)
from .pipeline import ImagePipeline, build_pipeline
