"""Input validation helpers.

Images throughout the package are numpy arrays of shape (height, width,
channels) with real values nominally in [0, 1]. These helpers normalize
and check that contract at API boundaries, sklearn-style.
"""

import numpy as np

from .errors import ImageTooSmall, OddChannelCount, ShapeMismatch


def check_image(x, name="image", channels=None, dtype=None):
    """Coerce `x` to a (H, W, C) float array and validate it.

    2-D inputs are treated as single-channel. Raises ShapeMismatch on wrong
    rank or non-finite values, and when `channels` is given and does not
    match.
    """
    x = np.asarray(x)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3:
        raise ShapeMismatch(f"{name} must be (H, W, C), got shape {x.shape}")
    if x.shape[0] < 1 or x.shape[1] < 1 or x.shape[2] < 1:
        raise ShapeMismatch(f"{name} has an empty dimension: {x.shape}")
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    if not np.all(np.isfinite(x)):
        raise ShapeMismatch(f"{name} contains NaN or Inf values")
    if channels is not None and x.shape[2] not in np.atleast_1d(channels):
        raise ShapeMismatch(
            f"{name} must have {channels} channel(s), got {x.shape[2]}")
    if dtype is not None and x.dtype != dtype:
        x = x.astype(dtype)
    return x


def check_same_shape(a, b, name_a="test", name_b="reference"):
    a = check_image(a, name_a)
    b = check_image(b, name_b)
    if a.shape != b.shape:
        raise ShapeMismatch(
            f"{name_a} shape {a.shape} != {name_b} shape {b.shape}")
    return a, b


def check_min_side(x, minimum, name="image"):
    if min(x.shape[0], x.shape[1]) < minimum:
        raise ImageTooSmall(
            f"{name} sides must be >= {minimum}, got {x.shape[:2]}")
    return x


def check_even_channels(x, name="image"):
    if x.shape[2] % 2 != 0:
        raise OddChannelCount(
            f"{name} channel count must be even, got {x.shape[2]}")
    return x
