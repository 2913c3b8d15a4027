from .descriptors import (
    ArchitectureDescriptor,
    ConvLayerSpec,
    HeadSpec,
    build_toy_descriptor,
    build_vggf_descriptor,
    build_vggface_descriptor,
    count_parameters,
)
from .factory import build_model, init_head_weights, load_pretrained_backbone, read_name_map
from .network import FaceExpressionNet, cross_entropy_from_probabilities, predict_proba
