from typing import Callable


def central_difference(f: Callable[[float], float], x: float, h: float) -> float:
    """Second-order central difference of ``f`` at ``x`` with step ``h``."""
    return (f(x + h) - f(x - h)) / (2.0 * h)


def richardson_derivative(
    f: Callable[[float], float],
    x: float,
    h: float,
) -> float:
    """Central difference with one level of Richardson extrapolation.

    Combines the steps ``h`` and ``h/2`` so the O(h²) truncation term
    cancels, leaving an O(h⁴) remainder.

    Args:
        f: Smooth scalar function
        x: Point of differentiation
        h: Base step, must be positive

    Returns:
        Estimate of f'(x)

    Raises:
        ValueError: If ``h`` is not positive

    Example:
        >>> import math
        >>> round(richardson_derivative(math.sin, 0.0, 1e-3), 12)
        1.0
    """
    if not h > 0.0:
        raise ValueError(f"step {h} must be positive")

    coarse = central_difference(f, x, h)
    fine = central_difference(f, x, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0
