from .grad_cam import GradCAM, HeatMap, grad_cam, grad_cam_from_activations, heatmap_half_masses
from .panel import overlay_heatmap, render_panel, upsample_heatmap
