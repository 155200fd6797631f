"""Comparison preprocessors: gamma correction, plain DoG, Gaussian derivatives.

These are the alternatives the experiment harness pits against the ON/OFF
band-pass preprocessing.  Each is a pure function of the input raster.
"""

import numpy as np

from .image import (convolve_separable, gaussian_derivative_kernel_1d,
                    gaussian_kernel_1d)
from .retina import dog_filter

BASELINE_NAMES = ("none", "bf", "gamma", "dog", "gderiv0", "gderiv1", "gderiv2")


def gamma_correct(img, gamma):
    """Pointwise power-law mapping out = img ** gamma (img in [0, 1])."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return np.power(np.asarray(img, dtype=np.float64), gamma)


def dog_only(img, sigma1, sigma2):
    """Plain signed difference-of-Gaussians response, no ON/OFF split."""
    from .retina import BfParams
    return dog_filter(img, BfParams(sigma1=sigma1, sigma2=sigma2))


def gaussian_derivative(img, sigma, order):
    """Gaussian derivative filtering.

    order 0: plain Gaussian blur.
    order 1: gradient magnitude sqrt(Gx^2 + Gy^2).
    order 2: Laplacian-of-Gaussian response Gxx + Gyy.
    """
    img = np.asarray(img, dtype=np.float64)
    g = gaussian_kernel_1d(sigma)
    if order == 0:
        return convolve_separable(img, g)
    if order == 1:
        d1 = gaussian_derivative_kernel_1d(sigma, 1)
        gx = convolve_separable(img, kernel_row=d1, kernel_col=g)
        gy = convolve_separable(img, kernel_row=g, kernel_col=d1)
        return np.sqrt(gx * gx + gy * gy)
    if order == 2:
        d2 = gaussian_derivative_kernel_1d(sigma, 2)
        gxx = convolve_separable(img, kernel_row=d2, kernel_col=g)
        gyy = convolve_separable(img, kernel_row=g, kernel_col=d2)
        return gxx + gyy
    raise ValueError(f"order must be 0, 1 or 2, got {order}")
