"""Learning stage: refine preliminary sampling images into object masks.

Consumes dataset trees through their file contracts (JSON manifest with
sha256 checksums, OSMI raw images) and trains a depthwise-separable
encoder/decoder segmentation network on (preliminary image, true mask)
pairs.
"""

__version__ = "0.1.0"
