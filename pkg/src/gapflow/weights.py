"""Admissible weights v on [0, 1), the companion g(x) = v(1 - 1/x), and
doubling / regularity certificates.

All evaluation goes through u = -log(1 - r) so radii within 1e-300 of 1
can be handled; public functions also accept eps = 1 - r directly.
"""
import math
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator

from gapflow import ConfigurationError
from gapflow import DomainError
from gapflow.quadrature import integrate
from gapflow.utils import get_logger

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

DEFAULT_D_GRID = tuple(2.0**-k for k in range(1, 61))

# reciprocal weights: mu(last knot) below this share of mu(0) counts as vanishing;
# otherwise the drop over the last half of the u range must keep this share of the first
RECIPROCAL_SMALL = 1e-3
RECIPROCAL_TAIL_SHARE = 1e-3


class Family(Enum):
    POWER = "power"
    LOG_POWER = "log-power"
    ITERATED_LOG = "iterated-log"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class Weight:
    """
    A weight v with v(0) = 1, strictly increasing, v(r) -> inf as r -> 1.

    family (Family) -- closed-form family or tabulated knots

    power(a):          v = (1 - r)^-a
    log-power(a):      v = (1 + log(1/(1 - r)))^a
    iterated-log(a,d): v = prod_{j=1..d} L_j^a with L_1 = 1 + u, L_{j+1} = 1 + log L_j
    tabulated(knots):  monotone PCHIP through (u, log v), linear in u past the last knot

    scale is the normalization constant forcing v(0) = 1 (tabulated only).
    """

    family: Family
    a: float = 1.0
    depth: int = 1
    knots: Optional[Tuple[Tuple[float, float], ...]] = None
    scale: float = field(default=1.0, init=False)
    _spline: Any = field(default=None, init=False, repr=False, compare=False)
    _tail: Tuple[float, float, float] = field(default=(0.0, 0.0, 0.0), init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.family, Family):
            raise ConfigurationError(f"unknown weight family: {self.family}")
        if self.family is Family.TABULATED:
            self._build_spline()
            return
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ConfigurationError(f"{self.family.value} weight needs a positive parameter a, got {self.a}")
        if self.family is Family.ITERATED_LOG and self.depth < 1:
            raise ConfigurationError(f"iterated-log depth must be >= 1, got {self.depth}")

    def _build_spline(self) -> None:
        if not self.knots or len(self.knots) < 2:
            raise ConfigurationError("tabulated weight needs at least two knots")
        r = np.array([k[0] for k in self.knots], dtype=float)
        v = np.array([k[1] for k in self.knots], dtype=float)
        if r[0] != 0.0:
            raise DomainError(f"first knot must sit at r=0, got r={r[0]}")
        if np.any(r >= 1.0) or np.any(np.diff(r) <= 0):
            raise DomainError("knot radii must be strictly increasing inside [0, 1)")
        if np.any(v <= 0) or np.any(np.diff(v) <= 0):
            raise DomainError("knot values must be positive and strictly increasing")
        u = -np.log1p(-r)
        y = np.log(v / v[0])
        object.__setattr__(self, "scale", float(v[0]))
        object.__setattr__(self, "_spline", PchipInterpolator(u, y, extrapolate=False))
        slope = (y[-1] - y[-2]) / (u[-1] - u[-2])
        object.__setattr__(self, "_tail", (float(u[-1]), float(y[-1]), float(slope)))

    @classmethod
    def power(cls, a: float) -> "Weight":
        return cls(Family.POWER, a=float(a))

    @classmethod
    def log_power(cls, a: float) -> "Weight":
        return cls(Family.LOG_POWER, a=float(a))

    @classmethod
    def iterated_log(cls, a: float, depth: int) -> "Weight":
        return cls(Family.ITERATED_LOG, a=float(a), depth=int(depth))

    @classmethod
    def tabulated(cls, knots: Sequence[Tuple[float, float]]) -> "Weight":
        return cls(Family.TABULATED, knots=tuple((float(r), float(v)) for r, v in knots))

    @classmethod
    def from_reciprocal(cls, mu: Callable[[float], float], knots_r: Sequence[float]) -> "Weight":
        """Tabulate v = 1/mu for a decreasing weight mu on the given radii."""
        values = [float(mu(r)) for r in knots_r]
        if any(m <= 0 or not math.isfinite(m) for m in values):
            raise DomainError("mu must be positive and finite on [0, 1)")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise DomainError("mu must be strictly decreasing towards 0")
        # a positive limit shows as a flat tail between 1 - sqrt(eps) and 1 - eps
        eps_last = 1.0 - float(knots_r[-1])
        mid = next(i for i, r in enumerate(knots_r) if 1.0 - r <= math.sqrt(eps_last))
        small = values[-1] < RECIPROCAL_SMALL * values[0]
        tail_drop, head_drop = values[mid] - values[-1], values[0] - values[mid]
        if not small and tail_drop < RECIPROCAL_TAIL_SHARE * head_drop:
            raise DomainError(f"mu must decrease to 0, it levels off near {values[-1]:.6g}")
        return cls.tabulated([(r, 1.0 / m) for r, m in zip(knots_r, values)])

    def log_v_u(self, u: ArrayLike) -> ArrayLike:
        """log v as a function of u = -log(1 - r), u >= 0."""
        u = np.asarray(u, dtype=float)
        if self.family is Family.POWER:
            out = self.a * u
        elif self.family is Family.LOG_POWER:
            out = self.a * np.log1p(u)
        elif self.family is Family.ITERATED_LOG:
            level = 1.0 + u
            total = np.log(level)
            for _ in range(self.depth - 1):
                level = 1.0 + np.log(level)
                total = total + np.log(level)
            out = self.a * total
        else:
            u_last, y_last, slope = self._tail
            inside = self._spline(np.minimum(u, u_last))
            out = np.where(u <= u_last, inside, y_last + slope * (u - u_last))
        return out if out.ndim else float(out)

    def u_of_log_v(self, w: ArrayLike) -> ArrayLike:
        """Inverse of log_v_u: the u >= 0 with log v = w."""
        w = np.asarray(w, dtype=float)
        if self.family is Family.POWER:
            out = w / self.a
        elif self.family is Family.LOG_POWER:
            out = np.expm1(w / self.a)
        elif self.family is Family.TABULATED:
            u_last, y_last, slope = self._tail
            beyond = u_last + (w - y_last) / slope
            out = np.where(w > y_last, beyond, self._bisect(np.minimum(w, y_last), upper=u_last))
        else:
            out = self._bisect(w)
        return out if out.ndim else float(out)

    def _bisect(self, targets: np.ndarray, upper: Optional[float] = None) -> np.ndarray:
        t = np.atleast_1d(np.asarray(targets, dtype=float))
        lo = np.zeros_like(t)
        if upper is None:
            hi = np.ones_like(t)
            while True:
                short = np.asarray(self.log_v_u(hi)) < t
                if not short.any():
                    break
                if np.any(hi[short] > 1e300):
                    raise DomainError("weight inversion target out of range")
                hi = np.where(short, 2.0 * hi, hi)
        else:
            hi = np.full_like(t, upper)
        for _ in range(1100):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.log_v_u(mid)) < t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
                break
        out = 0.5 * (lo + hi)
        return out.reshape(np.shape(targets))

    def v_eps(self, eps: float) -> float:
        """v at r = 1 - eps, 0 < eps <= 1."""
        if self.family is Family.POWER:
            return eps ** (-self.a)
        if self.family is Family.LOG_POWER:
            return (1.0 - math.log(eps)) ** self.a
        return math.exp(self.log_v_u(-math.log(eps)))

    def g(self, x: float) -> float:
        if self.family is Family.POWER:
            return x**self.a
        if self.family is Family.LOG_POWER:
            return (1.0 + math.log(x)) ** self.a
        return math.exp(self.log_v_u(math.log(x)))

    def to_dict(self) -> Dict[str, Any]:
        if self.family is Family.TABULATED:
            return {"family": self.family.value, "knots": [list(k) for k in self.knots or ()]}
        spec: Dict[str, Any] = {"family": self.family.value, "a": self.a}
        if self.family is Family.ITERATED_LOG:
            spec["depth"] = self.depth
        return spec


def load_knots_csv(path: str) -> List[Tuple[float, float]]:
    """Read a two-column (r, v) knot file."""
    frame = pd.read_csv(path, names=["r", "v"], comment="#")
    frame = frame.apply(pd.to_numeric, errors="coerce").dropna()
    return list(zip(frame["r"].tolist(), frame["v"].tolist()))


def weight_from_dict(spec: Dict[str, Any]) -> Weight:
    """Build a Weight from its JSON form, e.g. {"family": "power", "a": 1.0}."""
    if "family" not in spec:
        raise ConfigurationError("weight spec is missing 'family'")
    try:
        family = Family(spec["family"])
    except ValueError:
        raise ConfigurationError(f"unknown weight family: {spec['family']}")
    try:
        if family is Family.TABULATED:
            knots = spec.get("knots")
            if knots is None and "file" in spec:
                knots = load_knots_csv(spec["file"])
            if knots is None:
                raise ConfigurationError("tabulated weight needs 'knots' or 'file'")
            return Weight.tabulated(knots)
        if "a" not in spec:
            raise ConfigurationError(f"{family.value} weight spec is missing 'a'")
        if family is Family.ITERATED_LOG:
            return Weight.iterated_log(spec["a"], spec.get("depth", 1))
        return Weight(family, a=float(spec["a"]))
    except (TypeError, KeyError) as e:
        raise ConfigurationError(f"bad weight spec {spec}: {e}")


def _check_radius(r: Optional[float], eps: Optional[float]) -> float:
    """Return eps = 1 - r after validating exactly one of r / eps."""
    if (r is None) == (eps is None):
        raise DomainError("give exactly one of r or eps")
    if eps is None:
        if not 0.0 <= r < 1.0:
            raise DomainError(f"r must lie in [0, 1), got {r}")
        return 1.0 - r
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"eps = 1 - r must lie in (0, 1], got {eps}")
    return eps


def eval_v(w: Weight, r: Optional[float] = None, *, eps: Optional[float] = None) -> float:
    """v(r), with r given directly or as eps = 1 - r."""
    return w.v_eps(_check_radius(r, eps))


def eval_g(w: Weight, x: float) -> float:
    if not x >= 1.0:
        raise DomainError(f"g is defined for x >= 1, got {x}")
    return w.g(x)


def log_g(w: Weight, log_x: ArrayLike) -> ArrayLike:
    """log g at x = exp(log_x); usable far beyond float range of x."""
    if np.any(np.asarray(log_x) < 0):
        raise DomainError("g is defined for x >= 1")
    return w.log_v_u(log_x)


def invert_v_eps(w: Weight, t: float) -> float:
    """eps = 1 - r for the unique r with v(r) = t."""
    if not t >= 1.0:
        raise DomainError(f"v takes values >= 1, got {t}")
    return math.exp(-w.u_of_log_v(math.log(t)))


def invert_v(w: Weight, t: float) -> float:
    if not t >= 1.0:
        raise DomainError(f"v takes values >= 1, got {t}")
    return -math.expm1(-w.u_of_log_v(math.log(t)))


@dataclass
class DoublingCertificate:
    """Grid estimates of the doubling constants of v and g."""

    d_hat: float
    grid: List[float]
    passed: bool
    d_g_hat: float
    ratios: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "D_hat": self.d_hat,
            "D_g_hat": self.d_g_hat,
            "passed": self.passed,
            "grid": self.grid,
            "ratios": self.ratios,
        }


def doubling_constant(w: Weight, d_grid: Sequence[float] = DEFAULT_D_GRID) -> DoublingCertificate:
    """D_hat = max v(1-d)/v(1-2d) over the grid; D_g_hat = max g(2x)/g(x) on x = 1/d."""
    d = np.asarray(list(d_grid), dtype=float)
    if d.size == 0:
        raise DomainError("doubling grid is empty")
    if np.any(d <= 0) or np.any(d > 0.5):
        raise DomainError("doubling grid values must lie in (0, 1/2]")

    u_near = -np.log(d)
    u_far = -np.log(2.0 * d)
    with np.errstate(over="ignore"):
        ratios = np.exp(np.asarray(w.log_v_u(u_near)) - np.asarray(w.log_v_u(u_far)))
        log_x = -np.log(d)
        g_ratios = np.exp(np.asarray(w.log_v_u(log_x + math.log(2.0))) - np.asarray(w.log_v_u(log_x)))
    d_hat = float(ratios.max())
    d_g_hat = float(g_ratios.max())
    passed = math.isfinite(d_hat) and math.isfinite(d_g_hat)
    if not passed:
        logger.warning(f"doubling certificate failed for {w.to_dict()}")
    return DoublingCertificate(d_hat, d.tolist(), passed, d_g_hat, ratios.tolist())


def regularity_check(w: Weight, q: float, y_grid: Sequence[float]) -> float:
    """A_hat = inf over the grid of g(q y) / g(y)."""
    if not q > 1.0:
        raise DomainError(f"q must exceed 1, got {q}")
    y = np.asarray(list(y_grid), dtype=float)
    if y.size == 0 or np.any(y < 1.0):
        raise DomainError("regularity grid must be nonempty with y >= 1")
    log_y = np.log(y)
    diff = np.asarray(w.log_v_u(log_y + math.log(q))) - np.asarray(w.log_v_u(log_y))
    return float(np.exp(diff.min()))


def split_multiplier(w: Weight, lam: float, d_hat: Optional[float] = None) -> int:
    """Smallest integer M with D_hat^2 * 2^(-M(lam-1)) <= 1/2, lam capped at 2."""
    lam_eff = min(lam, 2.0)
    if not lam_eff > 1.0:
        raise ConfigurationError(f"gap ratio must exceed 1, got {lam}")
    if d_hat is None:
        d_hat = doubling_constant(w).d_hat
    return max(1, math.ceil((1.0 + 2.0 * math.log2(d_hat)) / (lam_eff - 1.0) - 1e-12))


def check_integral_lemma(w: Weight, n: int, s: Optional[float] = None) -> float:
    """
    ratio = (int_0^s r^(n-1) / v(r) dr) * n v(s) / s^n

    With r = s exp(-t/n) this is int_0^inf e^-t v(s)/v(r(t)) dt, which is
    what gets integrated. s defaults to 1 - 1/n.
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if s is None:
        eps_s = 1.0 / n
        s = 1.0 - eps_s
    else:
        if not 0.0 < s <= 1.0 - 1.0 / n + 1e-15:
            raise DomainError(f"s must lie in (0, 1 - 1/n], got {s}")
        eps_s = 1.0 - s
    log_v_s = float(w.log_v_u(-math.log(eps_s)))

    def integrand(t: np.ndarray) -> np.ndarray:
        one_minus_r = eps_s - s * np.expm1(-t / n)
        return np.exp(-t + log_v_s - np.asarray(w.log_v_u(-np.log(one_minus_r))))

    upper = log_v_s + 40.0
    points = [0.0] + [p for p in 2.0 ** np.arange(-3, math.ceil(math.log2(upper)) + 1) if p < upper] + [upper]
    return integrate(integrand, points).value


def checked_split(w: Weight, lam: float, M: Optional[float] = None) -> Tuple[float, float]:
    """Default or validate the split multiplier; returns (M, D_hat)."""
    d_hat = doubling_constant(w).d_hat
    if M is None:
        return float(split_multiplier(w, lam, d_hat)), d_hat
    lam_eff = min(lam, 2.0)
    ratio = d_hat**2 * 2.0 ** (-M * (lam_eff - 1.0))
    if ratio >= 1.0:
        needed = 2.0 * math.log2(d_hat) / (lam_eff - 1.0)
        logger.error(f"split multiplier M={M} too small for D_hat={d_hat:.4g}, lambda={lam:.4g}")
        raise ConfigurationError(f"split multiplier M={M} gives geometric ratio {ratio:.3g}; need M > {needed:.3g}")
    return float(M), d_hat
