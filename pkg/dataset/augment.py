"""
Appearance augmentation of encoder inputs.

Operates on float images in [0, 1]. Each transform fires with probability
`probability` and draws its parameters from the generator it is given, so
an augmented batch is reproducible from the training seed.

Author: EchoViews Contributors
License: MIT
"""

from dataclasses import dataclass

import numpy as np


def random_gamma(image: np.ndarray, rng: np.random.Generator, limits=(0.8, 1.25)) -> np.ndarray:
    return np.power(np.clip(image, 0.0, 1.0), rng.uniform(*limits))


def random_brightness_contrast(
    image: np.ndarray,
    rng: np.random.Generator,
    brightness=(-0.1, 0.1),
    contrast=(0.8, 1.2),
) -> np.ndarray:
    return image * rng.uniform(*contrast) + rng.uniform(*brightness)


def multiplicative_noise(image: np.ndarray, rng: np.random.Generator, limits=(0.9, 1.1)) -> np.ndarray:
    return image * rng.uniform(limits[0], limits[1], size=image.shape)


def gaussian_noise(image: np.ndarray, rng: np.random.Generator, variance=(10.0, 50.0)) -> np.ndarray:
    """Additive noise; `variance` is given on the 0-255 intensity scale."""
    sigma = np.sqrt(rng.uniform(*variance)) / 255.0
    return image + rng.normal(0.0, sigma, size=image.shape)


@dataclass(frozen=True)
class Augmenter:
    """Chain of the four appearance transforms, output clipped to [0, 1]."""

    probability: float = 0.5

    def __call__(self, image: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        result = np.asarray(image, dtype=np.float64)
        for transform in (random_gamma, random_brightness_contrast, multiplicative_noise, gaussian_noise):
            if rng.uniform() < self.probability:
                result = transform(result, rng)
        return np.clip(result, 0.0, 1.0)
