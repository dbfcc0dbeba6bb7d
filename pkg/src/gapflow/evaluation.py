"""Evaluation of gap series near the boundary: point values with exact
phase reduction, circle sampling and profiles, Fourier coefficient
recovery and certified tail bounds."""
import math
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np
import pandas as pd
from mpmath import mp

from gapflow import AliasingError
from gapflow import CIRCLE_SAMPLES_CAP
from gapflow import DomainError
from gapflow import NumericError
from gapflow.gapseries import coefficient_ratios
from gapflow.gapseries import GapSeries
from gapflow.utils import get_logger
from gapflow.weights import checked_split
from gapflow.weights import Weight

logger = get_logger(__name__)

PHASE_BITS = 128
_PHASE_ONE = 1 << PHASE_BITS
_TWO_PI = 2.0 * math.pi

with mp.workprec(PHASE_BITS + 64):
    # 1/(2 pi) as a 128-bit fixed-point fraction
    _INV_TWO_PI = int(mp.floor(mp.ldexp(1, PHASE_BITS) / (2 * mp.pi)))

CHUNK = 2**16


def phase_matrix(frequencies: Sequence[int], phis: Sequence[float]) -> np.ndarray:
    """
    n * phi mod 2 pi in [0, 2 pi) for every pair, shape (len(phis), len(frequencies)).

    phi is taken as the exact binary fraction it is; phi / 2 pi is formed as a
    128-bit fixed-point number of turns, multiplied by n in integers, and only
    the fractional part is kept.
    """
    out = np.empty((len(phis), len(frequencies)))
    for i, phi in enumerate(phis):
        p, q = float(phi).as_integer_ratio()
        turns = (p * _INV_TWO_PI) // q
        for k, n in enumerate(frequencies):
            out[i, k] = (int(n) * turns) % _PHASE_ONE
    return _TWO_PI * (out / _PHASE_ONE)


def log_radius(r: Optional[float] = None, eps: Optional[float] = None) -> float:
    """log r from r or eps = 1 - r; -inf at r = 0."""
    if (r is None) == (eps is None):
        raise DomainError("give exactly one of r or eps")
    if eps is not None:
        if not 0.0 < eps <= 1.0:
            raise DomainError(f"eps = 1 - r must lie in (0, 1], got {eps}")
        return math.log1p(-eps) if eps < 1.0 else -math.inf
    if not 0.0 <= r < 1.0:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    return math.log(r) if r > 0 else -math.inf


def _radial_factors(frequencies: Sequence[int], log_r: float) -> np.ndarray:
    n = np.array([float(k) for k in frequencies])
    with np.errstate(under="ignore", invalid="ignore"):
        out = np.exp(n * log_r)
    return np.nan_to_num(out, nan=0.0)


def eval_point(s: GapSeries, r: Optional[float] = None, phi: float = 0.0, *, eps: Optional[float] = None) -> float:
    """u(r e^{i phi}) = sum alpha_k r^n_k cos(n_k phi) + beta_k r^n_k sin(n_k phi)."""
    log_r = log_radius(r, eps)
    theta = phase_matrix(s.frequencies, [phi])[0]
    radial = _radial_factors(s.frequencies, log_r)
    return float(np.sum(radial * (s.alpha * np.cos(theta) + s.beta * np.sin(theta))))


def effective_degree(s: GapSeries, log_r: float) -> int:
    """Largest frequency whose term is above rounding level at this radius."""
    sizes = np.abs(s.coefficients) * _radial_factors(s.frequencies, log_r)
    total = sizes.sum()
    if total == 0:
        return 0
    visible = np.nonzero(sizes > 1e-16 * total)[0]
    return int(s.frequencies[visible[-1]])


def default_samples(s: GapSeries, log_r: float) -> int:
    """4x the Nyquist requirement, capped at 2**22."""
    return int(min(max(4 * (2 * effective_degree(s, log_r) + 1), 64), CIRCLE_SAMPLES_CAP))


def eval_circle(s: GapSeries, r: Optional[float] = None, m: int = 0, *, eps: Optional[float] = None) -> np.ndarray:
    """
    u at phi_j = 2 pi j / m, j = 0..m-1.

    Phases are reduced exactly in integers, n phi_j mod 2 pi = 2 pi ((n mod m) j mod m) / m.
    """
    log_r = log_radius(r, eps)
    if m < 1:
        raise DomainError(f"need at least one circle sample, got m={m}")
    degree = effective_degree(s, log_r)
    if m < 2 * degree + 1:
        logger.warning(f"m={m} samples alias frequencies up to {degree}; values at the nodes stay exact")

    radial = _radial_factors(s.frequencies, log_r)
    cos_coef = s.alpha * radial
    sin_coef = s.beta * radial
    residues = np.array([n % m for n in s.frequencies], dtype=np.int64)

    out = np.empty(m)
    for start in range(0, m, CHUNK):
        j = np.arange(start, min(start + CHUNK, m), dtype=np.int64)
        theta = (_TWO_PI / m) * ((j[:, None] * residues[None, :]) % m)
        out[start : start + j.size] = np.cos(theta) @ cos_coef + np.sin(theta) @ sin_coef
    return out


@dataclass
class CircleProfile:
    """Sampled statistics of u on circles |z| = r, compared against v(r)."""

    r_grid: List[float]
    eps_grid: List[float]
    sup_abs: List[float] = field(default_factory=list)
    max: List[float] = field(default_factory=list)
    min: List[float] = field(default_factory=list)
    mean_abs: List[float] = field(default_factory=list)
    l2: List[float] = field(default_factory=list)
    ratio_to_v: List[float] = field(default_factory=list)
    samples: List[int] = field(default_factory=list)
    aliased: List[bool] = field(default_factory=list)

    @property
    def k_hat(self) -> float:
        """measured sup of sup|u|/v over the grid"""
        return max(self.ratio_to_v) if self.ratio_to_v else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "r": self.r_grid,
                "sup_abs": self.sup_abs,
                "max": self.max,
                "min": self.min,
                "mean_abs": self.mean_abs,
                "l2": self.l2,
                "ratio_to_v": self.ratio_to_v,
            }
        )

    def to_dict(self) -> Dict[str, Any]:
        payload = self.to_frame().to_dict(orient="list")
        payload.update({"eps": self.eps_grid, "samples": self.samples, "aliased": self.aliased})
        return payload


def circle_profile(
    s: GapSeries,
    w: Weight,
    r_grid: Optional[Sequence[float]] = None,
    m: Optional[int] = None,
    *,
    eps_grid: Optional[Sequence[float]] = None,
) -> CircleProfile:
    """Per-radius sup/max/min/mean|u|/L2 and sup|u|/v(r)."""
    if (r_grid is None) == (eps_grid is None):
        raise DomainError("give exactly one of r_grid or eps_grid")
    if eps_grid is None:
        eps_values = []
        for r in r_grid or []:
            if not 0.0 <= r < 1.0:
                raise DomainError(f"radii must lie in [0, 1), got {r}")
            eps_values.append(1.0 - r)
    else:
        eps_values = [float(e) for e in eps_grid]

    profile = CircleProfile(r_grid=[1.0 - e for e in eps_values], eps_grid=eps_values)
    for eps in eps_values:
        log_r = log_radius(eps=eps)
        samples = m if m is not None else default_samples(s, log_r)
        u = eval_circle(s, eps=eps, m=samples)
        sup_abs = float(np.abs(u).max())
        profile.sup_abs.append(sup_abs)
        profile.max.append(float(u.max()))
        profile.min.append(float(u.min()))
        profile.mean_abs.append(float(np.abs(u).mean()))
        profile.l2.append(float(np.sqrt(np.mean(u**2))))
        profile.ratio_to_v.append(sup_abs / w.v_eps(eps))
        profile.samples.append(samples)
        profile.aliased.append(samples < 2 * effective_degree(s, log_r) + 1)
    return profile


def recover_coefficients(
    samples: Sequence[float], r: Optional[float] = None, freqs: Sequence[int] = (), *, eps: Optional[float] = None
) -> List[complex]:
    """
    a_n = (r^-n / pi) int u(r e^{i phi}) e^{-i n phi} d phi, by the trapezoid
    rule (an FFT), exact for trigonometric polynomials below the Nyquist degree.
    Frequency 0 returns the mean value.
    """
    values = np.asarray(samples, dtype=float)
    m = values.size
    if any(int(n) < 0 for n in freqs):
        raise DomainError("frequencies must be nonnegative")
    top = max((int(n) for n in freqs), default=0)
    if m <= 2 * top:
        raise AliasingError(f"{m} samples cannot resolve frequency {top}; need more than {2 * top}")
    log_r = log_radius(r, eps)

    spectrum = np.fft.fft(values)
    out: List[complex] = []
    for n in freqs:
        n = int(n)
        if n == 0:
            out.append(complex(spectrum[0].real / m))
            continue
        rescale = -n * log_r
        if rescale > 700.0:
            raise NumericError(
                f"r^-{n} overflows at this radius; use a larger r",
                {"frequency": n, "log_scale": rescale},
            )
        out.append(complex(2.0 * spectrum[n] / m * math.exp(rescale)))
    return out


def split_index(log_r: float) -> int:
    """N with r_N < r <= r_(N+1) for r_N = 2^(-1/N)."""
    if not log_r < 0:
        raise DomainError("radius must lie in (0, 1)")
    ratio = math.log(2.0) / -log_r
    return max(1, math.ceil(ratio) - 1)


def tail_bound(
    s: GapSeries,
    w: Weight,
    N: int,
    r: Optional[float] = None,
    M: Optional[float] = None,
    *,
    eps: Optional[float] = None,
) -> float:
    """
    C * sum_{n_k > N M} g(n_k) rho^(n_k) with C = sup |a_k|/g(n_k), rho = r if
    given and 2^(-1/N) otherwise. Dominates |t_N| wherever |z| <= rho.
    """
    if N < 1:
        raise DomainError(f"split index must be >= 1, got {N}")
    M, d_hat = checked_split(w, s.lam, M)
    ratio = d_hat**2 * 2.0 ** (-M * (min(s.lam, 2.0) - 1.0))

    if r is None and eps is None:
        log_rho = -math.log(2.0) / N
    else:
        log_rho = log_radius(r, eps)

    scores = coefficient_ratios(s, w)
    c = float(scores.max()) if scores.size else 0.0
    if c == 0.0:
        return 0.0
    total = 0.0
    for n in s.frequencies:
        if n > N * M:
            total += math.exp(math.log(c) + float(w.log_v_u(math.log(n))) + n * log_rho)
    logger.debug(f"tail bound {total:.3e} beyond N*M={N * M} with geometric ratio {ratio:.3g}")
    return total
