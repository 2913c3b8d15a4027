"""
Pure value-in/value-out transforms on (height, width, channels) pixel grids. None of them mutates its input.
"""
import numpy as np
import torch
import torch.nn.functional as F


def _as_hwc(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim == 2:
        return image[:, :, None]
    if image.ndim != 3:
        raise ValueError(f"Expected a 2-D or 3-D pixel grid, got shape {image.shape}")
    return image


def occlude_upper_half(image: np.ndarray, fill: int | float = 0) -> np.ndarray:
    """
    Set the rows [0, floor(height / 2)) to `fill` in all the channels.
    """
    image = np.asarray(image)
    if image.shape[0] < 2:
        raise ValueError(f"Occlusion needs an image of height >= 2, got {image.shape[0]}")
    occluded = image.copy()
    occluded[: image.shape[0] // 2] = fill
    return occluded


def hflip(image: np.ndarray) -> np.ndarray:
    return np.asarray(image)[:, ::-1].copy()


def resize(image: np.ndarray, target_h: int, target_w: int) -> np.ndarray:
    """
    Bilinear resize (half-pixel centres, no antialiasing). The output is float32 and keeps the dimensionality of the
    input.
    """
    if target_h < 1 or target_w < 1:
        raise ValueError(f"Target size must be positive, got {target_h}x{target_w}")
    image = np.asarray(image)
    hwc = _as_hwc(image)
    tensor = torch.from_numpy(np.ascontiguousarray(hwc, dtype=np.float32)).permute(2, 0, 1)
    resized = F.interpolate(
        tensor[None], size=(target_h, target_w), mode="bilinear", align_corners=False
    )[0]
    output = resized.permute(1, 2, 0).contiguous().numpy()
    return output[:, :, 0] if image.ndim == 2 else output


def gray_to_rgb(image: np.ndarray) -> np.ndarray:
    image = _as_hwc(image)
    if image.shape[2] == 3:
        return image
    if image.shape[2] != 1:
        raise ValueError(f"Expected 1 or 3 channels, got {image.shape[2]}")
    return np.repeat(image, 3, axis=2)


def occluded_rows_after_resize(source_h: int, target_h: int) -> int:
    """
    The number of output rows whose bilinear sampling centre falls inside the occluded band [0, floor(source_h / 2))
    of the source image, i.e. the smallest integer y with (y + 0.5) * source_h / target_h >= floor(source_h / 2).
    """
    numerator = 2 * (source_h // 2) * target_h - source_h
    if numerator <= 0:
        return 0
    return min(target_h, -(-numerator // (2 * source_h)))
