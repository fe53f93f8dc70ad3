"""Channel set, primary-radio activity and spectrum sensing."""

from .channels import ChannelModel, PrActivity, build_channels, uniform_channels
from .sensing import SpectrumModel, SpectrumObservation, sense_spectrum

__all__ = [
    "ChannelModel",
    "PrActivity",
    "SpectrumModel",
    "SpectrumObservation",
    "build_channels",
    "sense_spectrum",
    "uniform_channels",
]
