from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Sequence, Tuple

import gin

from occfer.api.emotions import NUM_CLASSES

VGGFACE_BLOCKS = ((64, 64), (128, 128), (256, 256, 256), (512, 512, 512), (512, 512, 512))
VGGFACE_FIRST_DROPOUT_BLOCK = 3
VGGFACE_FIRST_DROPOUT_RATE = 0.30
VGGFACE_DROPOUT_STEP = 0.05
VGGF_DROPOUT_RATE = 0.2


@dataclass(frozen=True)
class ConvLayerSpec:
    out_channels: int
    kernel: int
    stride: int = 1
    padding: int = 0
    followed_by_pool: bool = False
    pool_kernel: int = 2
    pool_stride: int = 2
    dropout_rate: float | None = None

    def __post_init__(self):
        if self.dropout_rate is not None and not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"Dropout rate must lie in [0, 1), got {self.dropout_rate}")


@dataclass(frozen=True)
class HeadSpec:
    global_max_pool: bool = True
    num_classes: int = NUM_CLASSES


@dataclass(frozen=True)
class ArchitectureDescriptor:
    """
    A layered description of a backbone: the conv layers in order (each one followed by a ReLU, then optionally by
    dropout and a max-pool), a global max-pool head and an 8-way softmax layer.

    Attributes:
        name: the name of the architecture ("vggface", "vggf" or "toy").
        conv_layers: the conv layers in order.
        head: the classifier head.
        input_size: the expected spatial size of the (square) input.
        input_channels: the number of input channels.
        input_scale: the factor applied to the mean-subtracted input.
    """

    name: str
    conv_layers: Tuple[ConvLayerSpec, ...]
    head: HeadSpec = field(default_factory=HeadSpec)
    input_size: int = 224
    input_channels: int = 3
    input_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "conv_layers", tuple(self.conv_layers))
        if self.head.num_classes != NUM_CLASSES:
            raise ValueError(f"The head must have {NUM_CLASSES} classes, got {self.head.num_classes}")
        if len(self.conv_layers) < 1:
            raise ValueError("A descriptor needs at least one conv layer")

    @property
    def num_conv_layers(self) -> int:
        return len(self.conv_layers)

    @property
    def feature_channels(self) -> int:
        return self.conv_layers[-1].out_channels

    @property
    def dropout_rates(self) -> Tuple[float | None, ...]:
        return tuple(layer.dropout_rate for layer in self.conv_layers)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ArchitectureDescriptor":
        return cls(
            name=data["name"],
            conv_layers=tuple(ConvLayerSpec(**layer) for layer in data["conv_layers"]),
            head=HeadSpec(**data["head"]),
            input_size=data["input_size"],
            input_channels=data["input_channels"],
            input_scale=data["input_scale"],
        )


@gin.configurable()
def build_vggface_descriptor(input_size: int = 224) -> ArchitectureDescriptor:
    """
    The 13 conv layers of VGG-face (2-2-3-3-3 blocks of 3x3 convs) without the fc layers. The blocks 1-4 end with a
    2x2 max-pool, the last block feeds the global max-pool head. Six dropout layers follow the conv layers of blocks
    4 and 5 with rates 0.30, 0.35, ..., 0.55.
    """
    layers = []
    dropout_idx = 0
    for block_idx, block in enumerate(VGGFACE_BLOCKS):
        for layer_idx, channels in enumerate(block):
            dropout_rate = None
            if block_idx >= VGGFACE_FIRST_DROPOUT_BLOCK:
                dropout_rate = round(
                    VGGFACE_FIRST_DROPOUT_RATE + VGGFACE_DROPOUT_STEP * dropout_idx, 2
                )
                dropout_idx += 1
            is_block_end = layer_idx == len(block) - 1
            layers.append(
                ConvLayerSpec(
                    out_channels=channels,
                    kernel=3,
                    stride=1,
                    padding=1,
                    followed_by_pool=is_block_end and block_idx < len(VGGFACE_BLOCKS) - 1,
                    dropout_rate=dropout_rate,
                )
            )
    return ArchitectureDescriptor(name="vggface", conv_layers=tuple(layers), input_size=input_size)


@gin.configurable()
def build_vggf_descriptor(input_size: int = 224) -> ArchitectureDescriptor:
    """
    The 5 conv layers of VGG-f (the 8-layer net without its 3 fc layers). Local response normalisation is left out.
    Dropout with rate 0.2 follows the conv layers 3, 4 and 5.
    """
    layers = (
        ConvLayerSpec(64, kernel=11, stride=4, padding=0, followed_by_pool=True, pool_kernel=3),
        ConvLayerSpec(256, kernel=5, stride=1, padding=2, followed_by_pool=True, pool_kernel=3),
        ConvLayerSpec(256, kernel=3, stride=1, padding=1, dropout_rate=VGGF_DROPOUT_RATE),
        ConvLayerSpec(256, kernel=3, stride=1, padding=1, dropout_rate=VGGF_DROPOUT_RATE),
        ConvLayerSpec(256, kernel=3, stride=1, padding=1, dropout_rate=VGGF_DROPOUT_RATE),
    )
    return ArchitectureDescriptor(name="vggf", conv_layers=layers, input_size=input_size)


@gin.configurable()
def build_toy_descriptor(
    conv_channels: Sequence[int] = (16, 32, 64),
    input_size: int = 32,
    dropout_rate: float | None = None,
) -> ArchitectureDescriptor:
    """
    A small backbone for desk-scale experiments: 3x3 convs with a 2x2 max-pool after every layer but the last.
    The input is scaled to roughly unit range since no pretrained weights are involved.
    """
    if not 2 <= len(conv_channels) <= 6:
        raise ValueError(f"The toy backbone needs 2 to 6 conv layers, got {len(conv_channels)}")
    layers = tuple(
        ConvLayerSpec(
            out_channels=channels,
            kernel=3,
            stride=1,
            padding=1,
            followed_by_pool=idx < len(conv_channels) - 1,
            dropout_rate=dropout_rate if idx == len(conv_channels) - 1 else None,
        )
        for idx, channels in enumerate(conv_channels)
    )
    return ArchitectureDescriptor(
        name="toy", conv_layers=layers, input_size=input_size, input_scale=1.0 / 255.0
    )


def count_parameters(descriptor: ArchitectureDescriptor) -> int:
    """
    The closed-form number of trainable parameters: k * k * c_in * c_out + c_out per conv layer plus the weights and
    biases of the softmax layer.
    """
    total = 0
    in_channels = descriptor.input_channels
    for layer in descriptor.conv_layers:
        total += layer.kernel * layer.kernel * in_channels * layer.out_channels + layer.out_channels
        in_channels = layer.out_channels
    return total + in_channels * descriptor.head.num_classes + descriptor.head.num_classes
