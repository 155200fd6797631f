"""Grayscale raster I/O and convolution primitives.

Images are plain 2-D float64 numpy arrays in row-major order, intensities
nominally in [0, 1] after loading.  Binary PGM (P5) is the native format;
PNG decoding is available when Pillow is installed.
"""

import csv
import math
import os

import numpy as np
from scipy.ndimage import convolve1d

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageFormatError(ValueError):
    """Malformed or unsupported image file."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


def _read_pgm_token(buf, pos):
    """Return (token, new_pos), skipping whitespace and # comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            while pos < n and buf[pos:pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ImageFormatError("unexpected end of PGM header", offset=start)
    return buf[start:pos], pos


def load_pgm(path):
    """Read a binary (P5) PGM file into a float image scaled to [0, 1]."""
    with open(path, "rb") as f:
        buf = f.read()
    if buf[:2] != b"P5":
        raise ImageFormatError("not a binary PGM (missing P5 magic)", offset=0)
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_pgm_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ImageFormatError(f"non-numeric PGM header field {tok!r}",
                                   offset=pos - len(tok)) from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"invalid PGM dimensions {width}x{height}", offset=2)
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"unsupported PGM maxval {maxval}", offset=2)
    pos += 1  # single whitespace after maxval
    bytes_per = 1 if maxval < 256 else 2
    need = width * height * bytes_per
    payload = buf[pos:pos + need]
    if len(payload) < need:
        raise ImageFormatError(
            f"truncated PGM payload: expected {need} bytes, got {len(payload)}",
            offset=pos + len(payload))
    dtype = ">u2" if bytes_per == 2 else np.uint8
    data = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    return data.reshape(height, width) / maxval


def load_image(path):
    """Load a grayscale image (PGM mandatory, PNG via Pillow) scaled to [0, 1].

    Color inputs are converted to luma with the standard 0.299/0.587/0.114
    weights before scaling.
    """
    with open(path, "rb") as f:
        magic = f.read(8)
    if magic[:2] == b"P5":
        return load_pgm(path)
    if magic == b"\x89PNG\r\n\x1a\n":
        try:
            from PIL import Image
        except ImportError:
            raise ImageFormatError(
                "PNG support requires Pillow (pip install bftex[png])") from None
        with Image.open(path) as im:
            arr = np.asarray(im)
        maxval = 65535.0 if arr.dtype == np.uint16 else 255.0
        arr = arr.astype(np.float64)
        if arr.ndim == 3:
            arr = (LUMA_WEIGHTS[0] * arr[..., 0] + LUMA_WEIGHTS[1] * arr[..., 1]
                   + LUMA_WEIGHTS[2] * arr[..., 2])
        return arr / maxval
    raise ImageFormatError(f"unsupported image format in {path!r}", offset=0)


def save_pgm(img, path, maxval=255):
    """Write an 8-bit binary PGM, clamping intensities to [0, 1] first."""
    img = np.asarray(img, dtype=np.float64)
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        f.write(q.tobytes())


def save_csv_matrix(img, path):
    """Write an image as full-precision CSV (one row per scanline)."""
    img = np.asarray(img, dtype=np.float64)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for row in img:
            writer.writerow([repr(float(v)) for v in row])


def load_csv_matrix(path):
    with open(path, newline="") as f:
        rows = [[float(v) for v in row] for row in csv.reader(f) if row]
    return np.asarray(rows, dtype=np.float64)


def gaussian_kernel_1d(sigma):
    """Sampled 1-D Gaussian, radius ceil(3*sigma), normalized to unit sum."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def gaussian_derivative_kernel_1d(sigma, order):
    """Sampled derivative-of-Gaussian kernel (order 1 or 2).

    Scaled so that correlation reproduces the exact derivative of a
    polynomial ramp: order 1 responds 1 to slope-1 ramps, order 2 responds
    0 to constants and linear ramps and 2 to x^2.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    if order == 1:
        taps = x * g / (sigma * sigma)
        return taps / np.dot(x, taps)
    if order == 2:
        taps = (x * x / sigma ** 4 - 1.0 / sigma ** 2) * g
        taps -= taps.mean()  # exact zero response to constants
        return taps * (2.0 / np.dot(x * x, taps))
    raise ValueError(f"derivative order must be 1 or 2, got {order}")


def convolve_separable(img, kernel_row=None, kernel_col=None):
    """Separable correlation with clamp-to-edge borders.

    With one kernel given, it is applied along both axes (the usual
    isotropic Gaussian case).  Kernels here are symmetric or are built for
    correlation semantics, so no flipping is performed.
    """
    img = np.asarray(img, dtype=np.float64)
    if kernel_col is None:
        kernel_col = kernel_row
    if kernel_row is None:
        kernel_row = kernel_col
    out = convolve1d(img, kernel_col[::-1], axis=0, mode="nearest")
    return convolve1d(out, kernel_row[::-1], axis=1, mode="nearest")


def gaussian_blur(img, sigma):
    k = gaussian_kernel_1d(sigma)
    return convolve_separable(img, k)
