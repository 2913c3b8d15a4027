from typing import Any, Dict, List

from torch import nn


class TrainingHooksMixin:
    """
    A mixin class for training hooks. It provides a simple way to attach epoch-level callbacks (e.g. DSD pruning) to
    the Trainer. The hooks are called recursively so that a hook of a unique object is called only once. The
    recursion is defined by the `hook_objects` property that returns the list of underlying objects that will be
    entered recursively.
    """

    @property
    def hook_objects(self) -> List["TrainingHooksMixin"]:
        """
        The property should return the list of underlying objects that will be used in the recursive hook calls.
        """
        return []

    def _gather_all_recursive_hook_objects_dict(self) -> Dict[int, "TrainingHooksMixin"]:
        hook_unique_object_dict = {}
        for hook_object in self.hook_objects:
            hook_unique_object_dict[id(hook_object)] = hook_object
            hook_unique_object_dict.update(hook_object._gather_all_recursive_hook_objects_dict())
        return hook_unique_object_dict

    def _gather_all_recursive_hook_objects(self) -> List["TrainingHooksMixin"]:
        return list(self._gather_all_recursive_hook_objects_dict().values())

    def on_start_epoch(self, epoch_idx: int, recursive: bool = True) -> Dict[str, Any]:
        """
        Hook called before the first mini-batch of an epoch.

        Args:
            epoch_idx: the index of the epoch within the current training stage.
            recursive: whether to call the hook on all the recursive hook objects.

        Returns:
            A dictionary of metrics aggregated across all the hooks and logged by the Trainer. May be empty.
        """
        update_outputs: Dict[str, Any] = {}
        if recursive:
            for hook_object in self._gather_all_recursive_hook_objects():
                update_outputs |= hook_object.on_start_epoch(epoch_idx, recursive=False)
        return update_outputs

    def on_end_epoch(
        self, epoch_idx: int, model: nn.Module, recursive: bool = True
    ) -> Dict[str, Any]:
        """
        Hook called after the last mini-batch of an epoch and before the validation pass.

        Args:
            epoch_idx: the index of the epoch within the current training stage.
            model: the model being trained. Hooks may modify its parameters in place.
            recursive: whether to call the hook on all the recursive hook objects.

        Returns:
            A dictionary of metrics aggregated across all the hooks and logged by the Trainer. May be empty.
        """
        update_outputs: Dict[str, Any] = {}
        if recursive:
            for hook_object in self._gather_all_recursive_hook_objects():
                update_outputs |= hook_object.on_end_epoch(epoch_idx, model, recursive=False)
        return update_outputs
