import warnings
from pathlib import Path
from typing import Dict, Sequence

import gin
import torch

from occfer.api.errors import ConfigError, ShapeMismatchError

from .descriptors import ArchitectureDescriptor
from .network import FaceExpressionNet

HEAD_INIT_STD = 0.1


def init_head_weights(
    model: FaceExpressionNet, seed: int, std: float = HEAD_INIT_STD
) -> FaceExpressionNet:
    """
    Draw the softmax layer weights i.i.d. from N(0, std^2) with a dedicated generator and zero its biases. The
    backbone parameters are left untouched.
    """
    generator = torch.Generator().manual_seed(seed)
    weight = model.head.weight
    with torch.no_grad():
        sample = torch.randn(weight.shape, generator=generator, dtype=torch.float64) * std
        weight.copy_(sample.to(weight.dtype))
        model.head.bias.zero_()
    return model


def read_name_map(name_map_path: str | Path) -> Dict[str, str]:
    """
    Parse a name-map file with one `theirName -> ourName` pair per line. Blank lines and lines starting with `#`
    are ignored.
    """
    name_map = {}
    for line_number, line in enumerate(Path(name_map_path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            raise ConfigError(f"{name_map_path}:{line_number}: expected `theirName -> ourName`")
        their_name, our_name = (part.strip() for part in line.split("->", maxsplit=1))
        name_map[their_name] = our_name
    return name_map


def read_weight_file(weights_path: str | Path) -> Dict[str, torch.Tensor]:
    from occfer.trainer.checkpoint import is_checkpoint_file, load_checkpoint

    weights_path = Path(weights_path)
    if is_checkpoint_file(weights_path):
        return load_checkpoint(weights_path).model_state
    state = torch.load(weights_path, map_location="cpu", weights_only=True)
    if isinstance(state, dict) and "state_dict" in state:
        state = state["state_dict"]
    return {name: tensor for name, tensor in state.items() if isinstance(tensor, torch.Tensor)}


def load_pretrained_backbone(
    model: FaceExpressionNet,
    weights: Dict[str, torch.Tensor],
    name_map: Dict[str, str] | None = None,
) -> Sequence[str]:
    """
    Copy pretrained backbone tensors into the model. The softmax layer is never loaded since it is re-initialised
    for the 8 emotion classes.

    Args:
        model: the model to update in place.
        weights: the pretrained tensors keyed by their (foreign) names.
        name_map: maps foreign names to the model's state dict names. Without it, names are used as they are.

    Returns:
        the names of the loaded model tensors.
    """
    own_state = model.state_dict()
    skipped = set(model.head_parameter_names())
    loaded = []
    with torch.no_grad():
        for their_name, tensor in weights.items():
            our_name = name_map.get(their_name) if name_map is not None else their_name
            if our_name is None or our_name in skipped or our_name not in own_state:
                continue
            target = own_state[our_name]
            if tuple(target.shape) != tuple(tensor.shape):
                raise ShapeMismatchError(our_name, tuple(target.shape), tuple(tensor.shape))
            target.copy_(tensor.to(target.dtype))
            loaded.append(our_name)
    return loaded


@gin.configurable()
def build_model(
    descriptor: ArchitectureDescriptor,
    pretrained_path: str | Path | None = None,
    name_map_path: str | Path | None = None,
    head_init_seed: int = 0,
    channel_means: Sequence[float] = (0.0, 0.0, 0.0),
) -> FaceExpressionNet:
    """
    Instantiate a model, load pretrained backbone weights if available and initialise the softmax layer.

    Args:
        descriptor: the architecture descriptor.
        pretrained_path: a checkpoint of this package or a torch state dict file. When missing, the backbone keeps
            its random initialisation and a warning is issued.
        name_map_path: an optional name-map file for foreign state dicts.
        head_init_seed: the seed of the softmax layer initialisation.
        channel_means: the per-channel input means.

    Returns:
        the model.
    """
    torch.manual_seed(head_init_seed)
    model = FaceExpressionNet(descriptor, channel_means=channel_means)
    if pretrained_path is not None and Path(pretrained_path).exists():
        name_map = read_name_map(name_map_path) if name_map_path is not None else None
        loaded = load_pretrained_backbone(model, read_weight_file(pretrained_path), name_map)
        print(f"Loaded {len(loaded)} pretrained tensors from {pretrained_path}")
    elif pretrained_path is not None or descriptor.name != "toy":
        warnings.warn(
            f"No pretrained weights for {descriptor.name} (path: {pretrained_path}); "
            "the backbone is randomly initialised"
        )
    return init_head_weights(model, seed=head_init_seed)
