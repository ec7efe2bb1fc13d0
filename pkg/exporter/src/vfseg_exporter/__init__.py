"""Offline export of frozen encoder/tagger outputs into engine containers."""

__version__ = "0.1.0"
