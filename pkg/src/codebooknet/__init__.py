"""Codebook-defined neural decoders for short binary linear block codes."""

__version__ = "0.1.0"
