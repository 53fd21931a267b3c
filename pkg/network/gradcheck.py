"""
Central-difference gradient checks.

The scalar checked is L = sum(R * layer(x)) for a fixed random R, so the
analytic gradients come from one backward pass of R. Parameter and input
entries are drawn at random and perturbed by +-h in place.

Relative error per entry: |a - n| / max(|a|, |n|, floor).

Author: EchoViews Contributors
License: MIT
"""

from dataclasses import dataclass, field

import numpy as np

from utils.base_layer import Layer
from utils.constants import GRADCHECK_FLOOR, GRADCHECK_STEP


@dataclass
class GradCheckResult:
    """
    Attributes:
        layer_name: Checked layer
        max_relative_error: Worst entry
        n_checked: Number of entries compared
        worst_entry: Name and flat index of the worst entry
        errors: Relative error of every checked entry
    """

    layer_name: str
    max_relative_error: float
    n_checked: int
    worst_entry: str = ""
    errors: list[float] = field(default_factory=list)

    def passed(self, tolerance: float) -> bool:
        return self.max_relative_error < tolerance


def relative_error(analytic: float, numeric: float, floor: float = GRADCHECK_FLOOR) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradients(
    layer: Layer,
    x: np.ndarray,
    rng: np.random.Generator,
    n_params: int = 20,
    n_inputs: int = 10,
    step: float = GRADCHECK_STEP,
    floor: float = GRADCHECK_FLOOR,
) -> GradCheckResult:
    """
    Compare backward-pass gradients of `layer` against central differences.

    Run in float64: cast the layer and `x` beforehand.

    Args:
        layer: Layer under test
        x: Input batch
        rng: Generator choosing the projection and the sampled entries
        n_params: Parameter entries to check (spread over all parameters)
        n_inputs: Input entries to check
        step: Finite-difference step h
        floor: Denominator floor of the relative error

    Returns:
        GradCheckResult over all checked entries
    """
    x = np.array(x, dtype=np.float64)
    projection = rng.standard_normal(layer.forward(x).shape)

    def objective() -> float:
        return float(np.sum(projection * layer.forward(x)))

    layer.forward(x)
    input_grad = layer.backward(projection)
    analytic = dict(layer.named_gradients())
    params = dict(layer.named_parameters())

    names = sorted(params)
    sizes = np.array([params[n].size for n in names], dtype=np.float64)
    errors: list[float] = []
    worst = (0.0, "")

    def compare_entry(array: np.ndarray, flat_index: int, expected: float, label: str) -> None:
        nonlocal worst
        view = array.reshape(-1)
        original = view[flat_index]
        view[flat_index] = original + step
        plus = objective()
        view[flat_index] = original - step
        minus = objective()
        view[flat_index] = original
        numeric = (plus - minus) / (2.0 * step)
        error = relative_error(float(expected), numeric, floor)
        errors.append(error)
        if error >= worst[0]:
            worst = (error, label)

    if names and n_params > 0:
        picks = rng.choice(len(names), size=n_params, p=sizes / sizes.sum())
        for pick in picks:
            name = names[pick]
            index = int(rng.integers(params[name].size))
            compare_entry(params[name], index, analytic[name].reshape(-1)[index], f"{name}[{index}]")

    for _ in range(n_inputs):
        index = int(rng.integers(x.size))
        compare_entry(x, index, input_grad.reshape(-1)[index], f"input[{index}]")

    return GradCheckResult(
        layer_name=layer.name,
        max_relative_error=max(errors) if errors else 0.0,
        n_checked=len(errors),
        worst_entry=worst[1],
        errors=errors,
    )
