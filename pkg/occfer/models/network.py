from typing import List, Sequence, Tuple

import torch
import torch.nn.functional as F
from torch import nn
from torchtyping import TensorType

from occfer.api.errors import ShapeMismatchError

from .descriptors import ArchitectureDescriptor


class FaceExpressionNet(nn.Module):
    """
    A convolutional classifier instantiated from an `ArchitectureDescriptor`. Every conv layer is followed by a ReLU
    and, depending on the descriptor, by dropout and a max-pool. The last conv activation is reduced by a global
    spatial max-pool and fed to the 8-unit softmax layer (`head`).

    The channel means subtracted from the input live in the `channel_mean` buffer, so they travel with the
    state dict (and therefore with the checkpoints).

    Args:
        descriptor: the architecture descriptor.
        channel_means: the per-channel means subtracted from the raw [0, 255] input.
    """

    def __init__(
        self,
        descriptor: ArchitectureDescriptor,
        channel_means: Sequence[float] = (0.0, 0.0, 0.0),
    ):
        super().__init__()
        self.descriptor = descriptor
        self.input_scale = descriptor.input_scale
        self.register_buffer(
            "channel_mean",
            torch.tensor(list(channel_means), dtype=torch.float32).view(-1, 1, 1),
        )
        convs, dropouts, pools = [], [], []
        in_channels = descriptor.input_channels
        for layer in descriptor.conv_layers:
            convs.append(
                nn.Conv2d(
                    in_channels,
                    layer.out_channels,
                    kernel_size=layer.kernel,
                    stride=layer.stride,
                    padding=layer.padding,
                )
            )
            dropouts.append(
                nn.Dropout(layer.dropout_rate) if layer.dropout_rate is not None else nn.Identity()
            )
            pools.append(
                nn.MaxPool2d(layer.pool_kernel, layer.pool_stride)
                if layer.followed_by_pool
                else nn.Identity()
            )
            in_channels = layer.out_channels
        self.convs = nn.ModuleList(convs)
        self.dropouts = nn.ModuleList(dropouts)
        self.pools = nn.ModuleList(pools)
        self.head = nn.Linear(in_channels, descriptor.head.num_classes)

    @property
    def conv_layers(self) -> List[nn.Conv2d]:
        return list(self.convs)

    def conv_weight_names(self) -> List[str]:
        return [f"convs.{idx}.weight" for idx in range(len(self.convs))]

    def head_parameter_names(self) -> List[str]:
        return ["head.weight", "head.bias"]

    def set_channel_means(self, channel_means: Sequence[float]):
        with torch.no_grad():
            self.channel_mean.copy_(
                torch.tensor(list(channel_means), dtype=self.channel_mean.dtype).view(-1, 1, 1)
            )

    def check_input(self, x: torch.Tensor):
        expected = (
            self.descriptor.input_channels,
            self.descriptor.input_size,
            self.descriptor.input_size,
        )
        if x.dim() != 4 or tuple(x.shape[1:]) != expected:
            raise ShapeMismatchError("input batch", ("batch", *expected), tuple(x.shape))

    def normalize(self, x: TensorType["batch", 3, "height", "width", float]) -> torch.Tensor:
        return (x - self.channel_mean.to(x.dtype)) * self.input_scale

    def features(
        self, x: TensorType["batch", 3, "height", "width", float], capture_layer: int | None = None
    ) -> Tuple[torch.Tensor, torch.Tensor | None]:
        """
        Run the backbone.

        Args:
            x: the raw input batch.
            capture_layer: index of the conv layer whose (post-ReLU) activation is also returned.

        Returns:
            the last conv activation map and the captured activation (or None).
        """
        self.check_input(x)
        out = self.normalize(x)
        captured = None
        for idx, (conv, dropout, pool) in enumerate(zip(self.convs, self.dropouts, self.pools)):
            out = F.relu(conv(out))
            if idx == capture_layer:
                captured = out
            out = pool(dropout(out))
        return out, captured

    def classify_features(
        self, feature_map: TensorType["batch", "channels", "height", "width", float]
    ) -> TensorType["batch", 8, float]:
        """
        The head: global spatial max-pool followed by the softmax layer (returns logits).
        """
        pooled = torch.amax(feature_map, dim=(2, 3))
        return self.head(pooled)

    def forward(
        self, x: TensorType["batch", 3, "height", "width", float]
    ) -> TensorType["batch", 8, float]:
        feature_map, _ = self.features(x)
        return self.classify_features(feature_map)

    def predict_proba(
        self, x: TensorType["batch", 3, "height", "width", float]
    ) -> TensorType["batch", 8, float]:
        return torch.softmax(self(x), dim=1)


def predict_proba(
    model: FaceExpressionNet, batch: TensorType["batch", 3, "height", "width", float]
) -> TensorType["batch", 8, float]:
    """
    Class probabilities of a batch. Dropout is active only if the model is in training mode.
    """
    return model.predict_proba(batch)


def cross_entropy_from_probabilities(
    probabilities: TensorType["batch", 8, float], labels: TensorType["batch", int]
) -> TensorType[float]:
    """
    Mean negative log-likelihood of the true classes.
    """
    true_class_probabilities = probabilities.gather(1, labels.long().view(-1, 1)).squeeze(1)
    return -torch.log(true_class_probabilities).mean()
