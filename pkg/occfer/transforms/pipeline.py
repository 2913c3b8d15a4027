import gin
import numpy as np

from occfer.api.data_structures import OcclusionMode

from .functional import gray_to_rgb, hflip, occlude_upper_half, occluded_rows_after_resize, resize


class ImagePipeline:
    """
    The deterministic preprocessing applied to every image: gray_to_rgb -> occlusion -> resize -> random horizontal
    flip (only when `flip_augment` is set and a random generator is passed). The output is a float32 array of shape
    (3, target_size, target_size) with raw intensities in [0, 255]; channel-mean subtraction happens inside the model.

    Args:
        occlusion: the occlusion mode.
        flip_augment: whether to flip the image with probability 0.5.
        target_size: the output height and width.
        occlude_before_resize: whether to occlude the source image (default) or the resized canvas. When occluding
            before resizing, the output rows sampled from the occluded band are set to the fill again, so that the
            bilinear kernel does not blur face content into the occluded region.
    """

    def __init__(
        self,
        occlusion: OcclusionMode,
        flip_augment: bool,
        target_size: int,
        occlude_before_resize: bool = True,
    ):
        if target_size < 1:
            raise ValueError(f"Target size must be positive, got {target_size}")
        self.occlusion = occlusion
        self.flip_augment = flip_augment
        self.target_size = target_size
        self.occlude_before_resize = occlude_before_resize

    def __call__(self, image: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
        image = gray_to_rgb(image)
        source_h = image.shape[0]
        if self.occlusion.is_occluded and self.occlude_before_resize:
            image = occlude_upper_half(image, self.occlusion.fill)
        image = resize(image, self.target_size, self.target_size)
        if self.occlusion.is_occluded:
            if self.occlude_before_resize:
                n_rows = occluded_rows_after_resize(source_h, self.target_size)
                image[:n_rows] = self.occlusion.fill
            else:
                image = occlude_upper_half(image, self.occlusion.fill)
        if self.flip_augment and rng is not None and rng.random() < 0.5:
            image = hflip(image)
        return np.ascontiguousarray(image.transpose(2, 0, 1), dtype=np.float32)

    def evaluation_copy(self) -> "ImagePipeline":
        """
        The same pipeline without flip augmentation, used for validation and testing.
        """
        return ImagePipeline(
            occlusion=self.occlusion,
            flip_augment=False,
            target_size=self.target_size,
            occlude_before_resize=self.occlude_before_resize,
        )

    def __repr__(self) -> str:
        return (
            f"ImagePipeline(occlusion={self.occlusion}, flip_augment={self.flip_augment}, "
            f"target_size={self.target_size}, occlude_before_resize={self.occlude_before_resize})"
        )


@gin.configurable()
def build_pipeline(
    occlusion: OcclusionMode,
    flip_augment: bool,
    target_size: int,
    occlude_before_resize: bool = True,
) -> ImagePipeline:
    return ImagePipeline(
        occlusion=occlusion,
        flip_augment=flip_augment,
        target_size=target_size,
        occlude_before_resize=occlude_before_resize,
    )
