"""Adaptive Gauss-Kronrod (G7/K15) quadrature on composite panels.

Integrands are vectorized: they receive a numpy array of nodes and
return an array of the same shape. Panels are refined in batches, every
panel whose error exceeds its share of the tolerance is halved.
"""
from dataclasses import dataclass
from typing import Callable
from typing import Sequence

import numpy as np

from gapflow import NumericError
from gapflow import QUADRATURE_MAX_PANELS
from gapflow import QUADRATURE_RTOL
from gapflow.utils import get_logger

logger = get_logger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

# nodes and weights for Gauss-Kronrod 7-15 on [-1, 1]
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.0,
        0.129484966168869693270611432679082,
        0.0,
        0.279705391489276667901467771423780,
        0.0,
        0.381830050505118944950369775488975,
        0.0,
        0.417959183673469387755102040816327,
    ]
)

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureResult:
    """value, error estimate, number of panels and the integral of |f|"""

    value: float
    error: float
    panels: int
    abs_value: float


def _panel_rules(f: Integrand, left: np.ndarray, right: np.ndarray) -> tuple:
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        fx = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise NumericError(
            "integrand returned non-finite values",
            {"interval": (float(left.min()), float(right.max()))},
        )
    kronrod = half * (fx @ KRONROD_WEIGHTS)
    gauss = half * (fx @ GAUSS_WEIGHTS)
    absolute = half * (np.abs(fx) @ KRONROD_WEIGHTS)
    return kronrod, np.abs(kronrod - gauss), absolute


def integrate(
    f: Integrand,
    breakpoints: Sequence[float],
    rtol: float = QUADRATURE_RTOL,
    atol: float = 0.0,
    max_panels: int = QUADRATURE_MAX_PANELS,
) -> QuadratureResult:
    """Integrate f over [breakpoints[0], breakpoints[-1]].

    The breakpoints seed the initial panels, so narrow features of the
    integrand should be bracketed by them. Refinement stops when the summed
    error estimate is below max(rtol * |I|, atol), with |I| floored at
    1e-6 of the integral of |f| so cancelling integrands terminate.
    """
    points = np.unique(np.asarray(breakpoints, dtype=float))
    if points.size < 2:
        return QuadratureResult(0.0, 0.0, 0, 0.0)

    left = points[:-1]
    right = points[1:]
    values, errors, absolutes = _panel_rules(f, left, right)
    span = float(right[-1] - left[0])

    while True:
        total = float(values.sum())
        err_total = float(errors.sum())
        abs_total = float(absolutes.sum())
        target = max(rtol * max(abs(total), 1e-6 * abs_total), atol)
        if err_total <= target:
            break

        width = right - left
        splittable = width > 64 * np.finfo(float).eps * np.maximum(np.abs(left), np.abs(right))
        split = (errors > target * width / span) & splittable
        if not split.any():
            logger.debug(f"quadrature stalled at rounding level: error {err_total:.3e}, target {target:.3e}")
            break
        if left.size + int(split.sum()) > max_panels:
            logger.error(f"quadrature exceeded {max_panels} panels on [{left[0]}, {right[-1]}]")
            raise NumericError(
                f"quadrature did not converge within {max_panels} panels",
                {
                    "interval": (float(left[0]), float(right[-1])),
                    "panels": int(left.size),
                    "estimate": total,
                    "error": err_total,
                    "target": target,
                },
            )

        mid = 0.5 * (left[split] + right[split])
        new_left = np.concatenate([left[split], mid])
        new_right = np.concatenate([mid, right[split]])
        new_values, new_errors, new_absolutes = _panel_rules(f, new_left, new_right)

        keep = ~split
        left = np.concatenate([left[keep], new_left])
        right = np.concatenate([right[keep], new_right])
        values = np.concatenate([values[keep], new_values])
        errors = np.concatenate([errors[keep], new_errors])
        absolutes = np.concatenate([absolutes[keep], new_absolutes])

    logger.debug(f"quadrature converged with {left.size} panels")
    return QuadratureResult(total, err_total, int(left.size), abs_total)


def integrate_to_infinity(
    f: Integrand,
    breakpoints: Sequence[float],
    tail_mass: Callable[[float], float],
    step: float,
    rtol: float = QUADRATURE_RTOL,
    max_panels: int = QUADRATURE_MAX_PANELS,
) -> QuadratureResult:
    """Integrate f over [breakpoints[0], inf).

    After the seeded range, the domain is extended by chunks of width
    `step` until tail_mass(end), a bound on the integral of |f| beyond
    `end`, drops below 1e-16 of the accumulated value.
    """
    result = integrate(f, breakpoints, rtol=rtol, max_panels=max_panels)
    value, error, panels, absolute = result.value, result.error, result.panels, result.abs_value
    end = float(breakpoints[-1])
    chunks = 0
    while tail_mass(end) >= 1e-16 * max(absolute, np.finfo(float).tiny):
        chunks += 1
        if panels > max_panels or chunks > 4096:
            raise NumericError(
                "tail extension did not converge",
                {"interval": (float(breakpoints[0]), end), "panels": panels, "estimate": value},
            )
        chunk = integrate(f, [end, end + step], rtol=rtol, max_panels=max_panels)
        value += chunk.value
        error += chunk.error
        absolute += chunk.abs_value
        panels += chunk.panels
        end += step
    return QuadratureResult(value, error, panels, absolute)
