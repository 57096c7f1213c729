"""Exception hierarchy shared across the codec."""


class LcmcError(Exception):
    """Base class for all codec errors."""


class InvalidArgument(LcmcError):
    """A caller-supplied value violates a documented precondition."""


class ContainerError(LcmcError):
    """Base class for bitstream container violations."""


class BadMagic(ContainerError):
    pass


class UnsupportedVersion(ContainerError):
    pass


class TruncatedStream(ContainerError):
    pass


class DuplicateLayer(ContainerError):
    pass


class LayerOrderError(ContainerError):
    pass


class LadderViolation(ContainerError):
    """An enhancement layer is present without the layers below it."""


class InvariantViolation(ContainerError):
    """Generic container invariant failure; the message names the rule."""


class UnknownCodec(ContainerError):
    pass


class PayloadDecodeError(LcmcError):
    """A layer payload is corrupt or inconsistent with its declared layout."""


class TextEncodingError(PayloadDecodeError):
    """Decompressed semantic payload is not valid UTF-8."""


class BackendError(LcmcError):
    """The extractor/generator backend failed or is unreachable."""


class EncodeError(LcmcError):
    """Encoding failed; ``layer`` names the layer that could not be produced."""

    def __init__(self, layer: str, message: str):
        super().__init__(f"layer {layer}: {message}")
        self.layer = layer
