"""Coefficient tests for membership of gap series in h-infinity_v."""
import math
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from gapflow import BOUNDED_SLOPE
from gapflow import CIRCLE_SAMPLES_CAP
from gapflow import DomainError
from gapflow import GROWING_SLOPE
from gapflow import KWW_GRID_POINTS
from gapflow import UndefinedWitnessError
from gapflow.evaluation import eval_circle
from gapflow.evaluation import eval_point
from gapflow.evaluation import log_radius
from gapflow.evaluation import split_index
from gapflow.gapseries import coefficient_ratios
from gapflow.gapseries import GapSeries
from gapflow.gapseries import validate_gap
from gapflow.utils import get_logger
from gapflow.weights import checked_split
from gapflow.weights import regularity_check
from gapflow.weights import Weight

logger = get_logger(__name__)

Reciprocal = Union[Weight, Callable[[float], float]]

# radii used to tabulate 1/mu when mu is given as a function
BLOCH_KNOTS = tuple([0.0] + [1.0 - 2.0 ** (-k / 2) for k in range(1, 101)])


class Trend(Enum):
    BOUNDED = "bounded"
    GROWING = "growing"
    INCONCLUSIVE = "inconclusive"


class Verdict(Enum):
    MEMBER = "member"
    NON_MEMBER = "non-member"
    INCONCLUSIVE = "inconclusive"


@dataclass
class MembershipReport:
    """
    gamma_N = sum_{n_k <= N} |a_k| / g(N) at every checkpoint N = n_k.

    slope is the fitted trend of gamma_N / score against log N over the last
    quartile of checkpoints; score is sup |a_k| / g(n_k).
    """

    checkpoints: List[Tuple[int, float]] = field(default_factory=list)
    gamma_sup: float = 0.0
    trend: Trend = Trend.INCONCLUSIVE
    verdict: Verdict = Verdict.INCONCLUSIVE
    slope: Optional[float] = None
    score: float = 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.checkpoints, columns=["N", "gamma_N"])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "checkpoints": [[n, g] for n, g in self.checkpoints],
            "gamma_sup": self.gamma_sup,
            "trend": self.trend.value,
            "verdict": self.verdict.value,
            "slope": self.slope,
            "score": self.score,
        }


@dataclass(frozen=True)
class FastCriterion:
    """score C, regularity A_hat and the cap C A/(A-1) on gamma (None if A <= 1)"""

    score: float
    a_hat: float
    cap: Optional[float]


def _classify(log_n: np.ndarray, gamma: np.ndarray, score: float) -> Tuple[Trend, Optional[float]]:
    if score == 0.0:
        return Trend.BOUNDED, 0.0
    if gamma.size < 2:
        return Trend.INCONCLUSIVE, None
    tail = max(2, math.ceil(gamma.size / 4))
    slope = float(np.polyfit(log_n[-tail:], gamma[-tail:] / score, 1)[0])
    if slope < BOUNDED_SLOPE and math.isfinite(float(gamma.max())):
        return Trend.BOUNDED, slope
    if slope > GROWING_SLOPE:
        return Trend.GROWING, slope
    return Trend.INCONCLUSIVE, slope


def gamma_profile(s: GapSeries, w: Weight) -> MembershipReport:
    """Running prefix sums of |a_k| against g at every frequency."""
    magnitudes = np.abs(s.coefficients)
    prefix = np.cumsum(magnitudes)
    g = np.array([w.g(float(n)) for n in s.frequencies])
    gamma = prefix / g
    score = float((magnitudes / g).max())
    log_n = np.log(np.array(s.frequencies, dtype=float))

    trend, slope = _classify(log_n, gamma, score)
    verdict = {
        Trend.BOUNDED: Verdict.MEMBER,
        Trend.GROWING: Verdict.NON_MEMBER,
        Trend.INCONCLUSIVE: Verdict.INCONCLUSIVE,
    }[trend]
    report = MembershipReport(
        checkpoints=[(n, float(x)) for n, x in zip(s.frequencies, gamma)],
        gamma_sup=float(gamma.max()),
        trend=trend,
        verdict=verdict,
        slope=slope,
        score=score,
    )
    logger.info(f"gamma profile over {len(s)} checkpoints: sup {report.gamma_sup:.4g}, {trend.value}")
    return report


def coefficient_bound(s: GapSeries, w: Weight) -> float:
    """sup_k |a_k| / g(n_k); necessary for membership, not sufficient."""
    return float(coefficient_ratios(s, w).max())


def majorant_bound(
    s: GapSeries, w: Weight, r: Optional[float] = None, M: Optional[float] = None, *, eps: Optional[float] = None
) -> float:
    """
    sum_{n_k <= N M} |a_k| + sum_{n_k > N M} gamma_sup g(n_k) r^(n_k)

    with N the split index of r (r_N < r <= r_(N+1), r_N = 2^(-1/N)). Dominates
    |u| on the circle of radius r.
    """
    log_r = log_radius(r, eps)
    N = split_index(log_r)
    M, _ = checked_split(w, s.lam, M)
    gamma_sup = gamma_profile(s, w).gamma_sup

    head = 0.0
    tail = 0.0
    for n, a in s.terms:
        if n <= N * M:
            head += abs(a)
        elif gamma_sup > 0:
            tail += math.exp(math.log(gamma_sup) + float(w.log_v_u(math.log(n))) + n * log_r)
    logger.debug(f"majorant at N={N}, M={M}: head {head:.4g}, tail {tail:.4g}")
    return head + tail


def _reciprocal_weight(mu: Reciprocal) -> Weight:
    if isinstance(mu, Weight):
        return mu
    return Weight.from_reciprocal(mu, BLOCH_KNOTS)


def derivative_series(s: GapSeries) -> GapSeries:
    """Terms (n_k, n_k a_k)."""
    return validate_gap([(n, n * a) for n, a in s.terms], s.truncated, s.note)


def bloch_membership(s: GapSeries, mu: Reciprocal) -> MembershipReport:
    """
    Bloch-type test: gamma profile of (n_k, n_k a_k) against v = 1/mu.

    mu is either the Weight 1/mu itself or a callable mu(r) decreasing to 0,
    which is tabulated on BLOCH_KNOTS.
    """
    return gamma_profile(derivative_series(s), _reciprocal_weight(mu))


def bloch_coefficient_score(s: GapSeries, mu: Reciprocal) -> float:
    """sup_k n_k |a_k| mu(1 - 1/n_k)"""
    return coefficient_bound(derivative_series(s), _reciprocal_weight(mu))


def fast_criterion(s: GapSeries, w: Weight) -> FastCriterion:
    """
    For weights with g(lam y) >= A g(y), A > 1, on the series' frequencies the
    prefix sums are geometric and gamma <= C A / (A - 1).
    """
    score = coefficient_bound(s, w)
    if len(s) < 2:
        return FastCriterion(score, math.inf, score)
    a_hat = regularity_check(w, s.lam, s.frequencies[:-1])
    cap = score * a_hat / (a_hat - 1.0) if a_hat > 1.0 else None
    return FastCriterion(score, a_hat, cap)


def kww_witness(s: GapSeries, w: Weight, N: int, phi_samples: int = KWW_GRID_POINTS) -> Tuple[float, float]:
    """
    Search phi maximizing the prefix sum s_N over n_k <= N M at r_N = 2^(-1/N).

    Returns (phi_star, alpha_hat) with
    alpha_hat = s_N(phi_star) / sum_{n_k <= N M} |a_k| r_N^(n_k), in (0, 1].
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if phi_samples < 1:
        raise DomainError(f"phi_samples must be >= 1, got {phi_samples}")
    M, _ = checked_split(w, s.lam)
    head = [(n, a) for n, a in s.terms if n <= N * M]
    if not head or all(a == 0 for _, a in head):
        raise UndefinedWitnessError(f"prefix up to N*M={N * M} has no nonzero coefficient")
    prefix = validate_gap(head)

    eps = -math.expm1(-math.log(2.0) / N)
    log_r = math.log1p(-eps)
    scale = sum(abs(a) * math.exp(n * log_r) for n, a in head)
    if scale == 0.0:
        raise UndefinedWitnessError(f"prefix terms underflow at r_N for N={N}")

    degree = prefix.frequencies[-1]
    m = max(phi_samples, min(4 * (2 * degree + 1), CIRCLE_SAMPLES_CAP))
    values = eval_circle(prefix, eps=eps, m=m)
    j = int(np.argmax(values))
    step = 2.0 * math.pi / m
    phi_star = j * step
    best = float(values[j])

    try:
        refined = minimize_scalar(
            lambda phi: -eval_point(prefix, eps=eps, phi=phi),
            bracket=(phi_star - step, phi_star, phi_star + step),
            method="golden",
        )
        if -refined.fun > best:
            phi_star = float(refined.x) % (2.0 * math.pi)
            best = -float(refined.fun)
    except ValueError as e:
        logger.debug(f"golden refinement skipped: {e}")

    alpha_hat = min(best / scale, 1.0)
    logger.info(f"KWW witness at N={N}: phi*={phi_star:.6g}, alpha_hat={alpha_hat:.4g} on {m} samples")
    return phi_star, alpha_hat
