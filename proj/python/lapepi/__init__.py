# SPDX-License-Identifier: Apache-2.0
"""Laplacian-pyramid EPI light-field reconstruction (native extension)."""

from ._core import (
    LapepiError,
    LapEpiPyramid,
    Network,
    PyramidConfig,
    __version__,
    alias_sweep,
    angular_interpolate,
    build_lapepi,
    dft2_amplitude,
    psnr,
    random_epi,
    ssim,
    toy_epi,
    train_on_epis,
)

__all__ = [
    "LapepiError",
    "LapEpiPyramid",
    "Network",
    "PyramidConfig",
    "__version__",
    "alias_sweep",
    "angular_interpolate",
    "build_lapepi",
    "dft2_amplitude",
    "psnr",
    "random_epi",
    "ssim",
    "toy_epi",
    "train_on_epis",
]
