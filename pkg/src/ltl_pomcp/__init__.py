"""Planning for LTL objectives in POMDPs via certified belief supports."""

__version__ = "0.1.0"
