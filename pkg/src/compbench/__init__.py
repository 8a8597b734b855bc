"""Compositional text-to-image evaluation toolkit.

Builds the 6,000-prompt compositional benchmark suite, scores generated
images with pluggable model backends, correlates automatic metrics with
human ratings, and selects high-reward samples for fine-tuning.
"""

__version__ = "0.1.0"
