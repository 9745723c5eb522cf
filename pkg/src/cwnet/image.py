"""8-bit PNG I/O and the reference quality metrics (PSNR, SSIM).

Pixel values live in [0, 1] everywhere inside the package; conversion to and
from 8-bit bytes happens only here. PSNR is capped at PSNR_CAP so that
identical images score a finite, comparable value.
"""

import enum
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.ndimage import correlate1d

from .errors import UnsupportedFormat
from .validation import check_image, check_min_side, check_same_shape

PSNR_CAP = 50.0
_MSE_FLOOR = 1e-10

SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


class MetricKind(enum.Enum):
    PSNR = "psnr"
    SSIM = "ssim"


@dataclass(frozen=True)
class QualityScore:
    value: float
    metric_kind: MetricKind

    def __float__(self):
        return float(self.value)


def load_image(path):
    """Load an 8-bit grayscale or RGB PNG as a float32 (H, W, C) array.

    Values are byte/255. Palette and non-8-bit images are rejected.
    """
    try:
        img = Image.open(path)
    except FileNotFoundError:
        raise
    except (OSError, ValueError) as exc:
        raise UnsupportedFormat(f"cannot read {path}: {exc}") from exc
    with img:
        if img.mode not in ("L", "RGB"):
            raise UnsupportedFormat(
                f"{path}: mode {img.mode!r} not supported; "
                "need 8-bit grayscale (L) or RGB")
        data = np.asarray(img, dtype=np.uint8)
    if data.ndim == 2:
        data = data[:, :, None]
    return data.astype(np.float32) / np.float32(255.0)


def quantize(img):
    """Clamp to [0, 1] and map to bytes with round-half-away-from-zero."""
    img = check_image(img)
    clamped = np.clip(img, 0.0, 1.0)
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def save_image(img, path):
    """Write a 1- or 3-channel image as an 8-bit PNG.

    Values are clamped to [0, 1] and quantized with round(v * 255), so
    load_image(save_image(x)) reproduces clamp-quantize(x) exactly.
    """
    img = check_image(img, channels=(1, 3))
    data = quantize(img)
    if data.shape[2] == 1:
        pil = Image.fromarray(data[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(data, mode="RGB")
    pil.save(path, format="PNG")


def psnr(test, reference):
    """Peak signal-to-noise ratio in dB against a [0, 1] dynamic range.

    Returns PSNR_CAP (50 dB) whenever MSE < 1e-10; the cap is also an upper
    bound for near-identical pairs so scores stay comparable.
    """
    test, reference = check_same_shape(test, reference)
    mse = float(np.mean((test.astype(np.float64) - reference.astype(np.float64)) ** 2))
    if mse < _MSE_FLOOR:
        value = PSNR_CAP
    else:
        value = min(10.0 * np.log10(1.0 / mse), PSNR_CAP)
    return QualityScore(float(value), MetricKind.PSNR)


def _gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    w = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return w / w.sum()


def _windowed_mean(x, w):
    # Separable windowed mean; borders are cropped afterwards so the pad
    # mode never reaches the reported values.
    y = correlate1d(x, w, axis=0, mode="nearest")
    y = correlate1d(y, w, axis=1, mode="nearest")
    m = len(w) // 2
    return y[m:-m, m:-m]


def ssim(test, reference):
    """Mean structural similarity with the standard 11x11 Gaussian window.

    Constants K1=0.01, K2=0.03, sigma=1.5, dynamic range 1.0. Local
    statistics are window-weighted moments; only fully valid windows
    contribute. Channels are averaged.
    """
    test, reference = check_same_shape(test, reference)
    check_min_side(test, SSIM_WINDOW)
    x = test.astype(np.float64)
    y = reference.astype(np.float64)
    w = _gaussian_window()
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2

    mx = _windowed_mean(x, w)
    my = _windowed_mean(y, w)
    mxx = _windowed_mean(x * x, w)
    myy = _windowed_mean(y * y, w)
    mxy = _windowed_mean(x * y, w)
    vx = mxx - mx * mx
    vy = myy - my * my
    cxy = mxy - mx * my

    num = (2.0 * mx * my + c1) * (2.0 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return QualityScore(float(np.mean(num / den)), MetricKind.SSIM)
