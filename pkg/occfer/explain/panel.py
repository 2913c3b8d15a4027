import json
from pathlib import Path
from typing import List, Sequence

import numpy as np
import torch
import torch.nn.functional as F
from matplotlib import colormaps
from PIL import Image, ImageDraw

from occfer.api.emotions import EmotionLabel
from occfer.transforms.functional import gray_to_rgb

from .grad_cam import HeatMap, heatmap_half_masses


def upsample_heatmap(values: np.ndarray, height: int, width: int) -> np.ndarray:
    """
    Bilinear upsampling of a heat map to the image size, clipped to [0, 1].
    """
    grid = torch.as_tensor(np.asarray(values, dtype=np.float64)).view(1, 1, *np.shape(values))
    resized = F.interpolate(grid, size=(height, width), mode="bilinear", align_corners=False)
    return resized[0, 0].clamp(0.0, 1.0).numpy()


def overlay_heatmap(
    image: np.ndarray, heatmap: np.ndarray | HeatMap, alpha: float = 0.5, colormap: str = "jet"
) -> np.ndarray:
    """
    Blend the colour-mapped heat map into the image. Every pixel is mixed with weight `alpha * h`, so pixels
    where the heat map is zero keep their original value.

    Args:
        image: an uint8 image of shape (H, W) or (H, W, C).
        heatmap: the heat map, at any resolution.
        alpha: the opacity of the heat map where it reaches 1.
        colormap: a matplotlib colormap name.

    Returns:
        an uint8 RGB image of shape (H, W, 3).
    """
    rgb = gray_to_rgb(np.asarray(image)).astype(np.float64)
    values = heatmap.values if isinstance(heatmap, HeatMap) else np.asarray(heatmap)
    h = upsample_heatmap(values, rgb.shape[0], rgb.shape[1])
    colors = colormaps[colormap](h)[..., :3] * 255.0
    weight = (alpha * h)[..., None]
    blended = rgb * (1.0 - weight) + colors * weight
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def render_panel(
    images: Sequence[np.ndarray],
    heatmaps: Sequence[HeatMap],
    predicted_labels: Sequence[EmotionLabel | int],
    path: str | Path,
    caption_height: int = 14,
    colormap: str = "jet",
) -> Path:
    """
    Write an explanation panel: one column per image with the image on top, the heat map overlay below and the
    predicted label as caption. A JSON sidecar (same name, `.json`) holds the per-image statistics.

    Args:
        images: the images as shown to the model (same size), uint8 of shape (H, W) or (H, W, C).
        heatmaps: one heat map per image.
        predicted_labels: one predicted label per image.
        path: the output PNG path.
        caption_height: the height of the caption strip in pixels.
        colormap: a matplotlib colormap name.

    Returns:
        the path of the panel.
    """
    if len(images) == 0:
        raise ValueError("Cannot render an empty panel")
    if not len(images) == len(heatmaps) == len(predicted_labels):
        raise ValueError(
            f"Got {len(images)} images, {len(heatmaps)} heat maps and {len(predicted_labels)} labels"
        )
    rgb_images = [gray_to_rgb(np.asarray(image)) for image in images]
    height, width = rgb_images[0].shape[:2]
    if any(image.shape[:2] != (height, width) for image in rgb_images):
        raise ValueError("All panel images must have the same size")

    panel = Image.new("RGB", (width * len(images), 2 * height + caption_height), "white")
    draw = ImageDraw.Draw(panel)
    sidecar: List[dict] = []
    for column, (image, heatmap, label) in enumerate(zip(rgb_images, heatmaps, predicted_labels)):
        label = EmotionLabel(label)
        x = column * width
        panel.paste(Image.fromarray(image.astype(np.uint8)), (x, 0))
        overlay = overlay_heatmap(image, heatmap, colormap=colormap)
        panel.paste(Image.fromarray(overlay), (x, height))
        draw.text((x + 1, 2 * height), label.display_name, fill="black")
        upper, lower = heatmap_half_masses(heatmap.values)
        sidecar.append(
            {
                "index": column,
                "predicted_label": label.display_name,
                "target_class": heatmap.target_class.display_name,
                "probability": heatmap.probability,
                "heatmap_max": float(heatmap.values.max()),
                "heatmap_mean": float(heatmap.values.mean()),
                "upper_half_mass": upper,
                "lower_half_mass": lower,
            }
        )

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    panel.save(path, format="PNG")
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return path
