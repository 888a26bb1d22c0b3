"""
Fourier conventions shared by the spectral code.

Frequencies are ξ_k = 2πk/L with k in the centered range [-n/2, n/2), L = n·δ.
Transforms follow φ̂(ξ) = ∫ φ(x) e^{-i x·ξ} dx, approximated by δ^d times the
DFT of the samples.
"""
from typing import Sequence

import numpy as np

# Directions evaluated per block in the direct transform (bounds memory for d = 3).
DIRECT_BLOCK = 256


def angular_frequencies(n: int, spacing: float) -> np.ndarray:
    """ξ_k = 2πk/(nδ) in FFT order."""
    return 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)


def frequency_magnitude(shape: Sequence[int], spacing: float, real: bool = False) -> np.ndarray:
    """|ξ| on the FFT grid of ``shape`` (last axis halved when ``real``)."""
    axes = []
    for axis, n in enumerate(shape):
        if real and axis == len(shape) - 1:
            axes.append(2.0 * np.pi * np.fft.rfftfreq(n, d=spacing))
        else:
            axes.append(angular_frequencies(n, spacing))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.sqrt(sum(component ** 2 for component in mesh))


def zero_pad(values: np.ndarray, size: int) -> np.ndarray:
    """Embed ``values`` in the leading corner of a zero array with ``size`` points per axis."""
    padded = np.zeros((size,) * values.ndim)
    padded[tuple(slice(0, n) for n in values.shape)] = values
    return padded


def direct_transform(values: np.ndarray, spacing: float, coordinates: Sequence[np.ndarray],
                     frequencies: np.ndarray) -> np.ndarray:
    """
    δ^d Σ_j φ_j e^{-i x_j·ξ} at arbitrary frequencies ``frequencies`` (shape (K, d)).

    The sum is separable, so each axis contributes one (K, n) phase matrix.
    """
    d = values.ndim
    xi = np.atleast_2d(frequencies)
    out = np.empty(xi.shape[0], dtype=complex)
    cell = spacing ** d
    for start in range(0, xi.shape[0], DIRECT_BLOCK):
        block = xi[start:start + DIRECT_BLOCK]
        phases = [np.exp(-1j * np.outer(block[:, axis], coordinates[axis])) for axis in range(d)]
        if d == 1:
            out[start:start + len(block)] = phases[0] @ values
        elif d == 2:
            out[start:start + len(block)] = np.einsum("ka,ab,kb->k", phases[0], values, phases[1])
        else:
            partial = np.einsum("abc,kc->kab", values, phases[2])
            out[start:start + len(block)] = np.einsum("ka,kb,kab->k", phases[0], phases[1], partial)
    return cell * out
