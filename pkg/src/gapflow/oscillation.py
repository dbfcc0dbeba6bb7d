"""Weighted radial averages I_u(R, phi), the moments c_j, law of the
iterated logarithm statistics and the oscillation experiments.

Moments are integrated in the variable w = log v(r), where the measure
dv / v^2 becomes e^-w dw. Sub-cap series use their true phases n_j phi;
b-chains past 2**62 switch to surrogate phases drawn from a seeded
generator, and every trace records which mode produced it.
"""
import math
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np
import pandas as pd

from gapflow import DEFAULT_SEED
from gapflow import DomainError
from gapflow import NumericError
from gapflow import QUADRATURE_MAX_PANELS
from gapflow import QUADRATURE_RTOL
from gapflow.evaluation import circle_profile
from gapflow.evaluation import phase_matrix
from gapflow.gapseries import build_b_chain
from gapflow.gapseries import GapSeries
from gapflow.gapseries import series_hash
from gapflow.quadrature import integrate
from gapflow.quadrature import integrate_to_infinity
from gapflow.utils import get_logger
from gapflow.weights import Weight

logger = get_logger(__name__)

DIRECT = "direct"
SURROGATE = "surrogate"

# u-offsets around u* = log n where r^n = exp(-n e^-u) turns on
MOMENT_OFFSETS = (-50.0, -20.0, -16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 20.0, 50.0)
COARSE_OFFSETS = (-8.0, -2.0, 0.0, 2.0, 8.0)

# prefixes with loglog B_N below this carry no LIL ratio
MIN_LOGLOG = 0.5
# normalizing I_u needs logloglog v >= 1
MIN_LOG_V = math.exp(math.e)

ABS_AVERAGE_SAMPLES = 4093
ABS_AVERAGE_RTOL = 1e-5
NODE_CHUNK = 512

LOG_HALF_U = math.log(2.0)


def _h(x: np.ndarray) -> np.ndarray:
    """-log(1 - x) / x, continuous at x = 0."""
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, -np.log1p(-safe) / safe, 1.0)


def _log_r(u: np.ndarray) -> np.ndarray:
    """log r for r = 1 - e^-u."""
    x = np.exp(-u)
    return -x * _h(x)


def _upper_u(R: Optional[float], eps_R: Optional[float]) -> Optional[float]:
    """u at the upper limit, None for R = 1."""
    if eps_R is not None:
        if not 0.0 < eps_R < 0.5:
            raise DomainError(f"eps_R = 1 - R must lie in (0, 1/2), got {eps_R}")
        return -math.log(eps_R)
    if R is None or R == 1.0:
        return None
    if not 0.5 < R < 1.0:
        raise DomainError(f"R must lie in (1/2, 1], got {R}")
    return -math.log1p(-R)


def _breakpoints(
    log_ns: Sequence[float], u_lo: float, u_hi: Optional[float], offsets: Sequence[float] = MOMENT_OFFSETS
) -> np.ndarray:
    top = u_hi if u_hi is not None else max(list(log_ns) + [u_lo]) + max(offsets)
    points = [u_lo, top]
    for log_n in log_ns:
        points.extend(log_n + d for d in offsets)
    u = np.unique(np.clip(np.asarray(points, dtype=float), u_lo, top))
    return u


def log_cj_moment(
    w: Weight, log_n: float, eps_R: Optional[float] = None, rtol: float = QUADRATURE_RTOL
) -> float:
    """
    log of c = int_{1/2}^R r^n dv/v^2 for n = exp(log_n), R = 1 - eps_R (R = 1
    when eps_R is None). Works for frequencies far beyond float range.
    """
    if not log_n >= 0:
        raise DomainError(f"frequency must be >= 1, got log n = {log_n}")
    u_hi = _upper_u(None, eps_R)
    w_ref = float(w.log_v_u(log_n))
    # below u* - 50 the factor r^n is below exp(-e^50)
    u_lo = max(LOG_HALF_U, log_n + MOMENT_OFFSETS[0])
    if u_hi is not None and u_lo >= u_hi:
        return -math.inf
    w_points = np.asarray(w.log_v_u(_breakpoints([log_n], u_lo, u_hi)))

    def integrand(wv: np.ndarray) -> np.ndarray:
        u = np.asarray(w.u_of_log_v(wv))
        x = np.exp(-u)
        return np.exp(-np.exp(log_n - u) * _h(x) - (wv - w_ref))

    if u_hi is None:
        result = integrate_to_infinity(
            integrand, w_points, tail_mass=lambda end: math.exp(-(end - w_ref)), step=8.0, rtol=rtol
        )
    else:
        result = integrate(integrand, w_points, rtol=rtol)
    if result.value <= 0.0:
        return -math.inf
    return math.log(result.value) - w_ref


def cj_moment(w: Weight, n: int, R: float = 1.0, *, eps_R: Optional[float] = None) -> float:
    """c = int_{1/2}^R r^n dv(r)/v(r)^2, R in (1/2, 1]."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    u_hi = _upper_u(R, eps_R)
    if u_hi is not None and eps_R is None:
        eps_R = 1.0 - R
    if n == 0:
        # antiderivative -1/v
        tail = 0.0 if u_hi is None else math.exp(-float(w.log_v_u(u_hi)))
        return math.exp(-float(w.log_v_u(LOG_HALF_U))) - tail
    return math.exp(log_cj_moment(w, math.log(n), eps_R))


def _term_coefficients(s: GapSeries, phi: float) -> np.ndarray:
    """alpha_k cos(n_k phi) + beta_k sin(n_k phi), phases reduced exactly."""
    theta = phase_matrix(s.frequencies, [phi])[0]
    return s.alpha * np.cos(theta) + s.beta * np.sin(theta)


def _radial_sum(coef: np.ndarray, frequencies: Sequence[int], u: np.ndarray) -> np.ndarray:
    """sum_k coef_k r^(n_k) at r = 1 - e^-u, any shape of u."""
    n = np.array([float(k) for k in frequencies])
    log_r = _log_r(u)[..., None]
    with np.errstate(under="ignore"):
        return np.exp(n * log_r) @ coef


def weighted_average(
    s: GapSeries,
    w: Weight,
    R: Optional[float] = None,
    phi: float = 0.0,
    *,
    eps_R: Optional[float] = None,
    method: str = "termwise",
    rtol: float = QUADRATURE_RTOL,
) -> float:
    """
    I_u(R, phi) = int_{1/2}^R u(r e^{i phi}) dv(r)/v(r)^2.

    method="termwise" sums alpha_j c_j(R) cos(n_j phi) + beta_j c_j(R) sin(n_j phi);
    method="direct" integrates u itself and serves as a cross-check.
    """
    if R == 0.5 or eps_R == 0.5:  # empty range
        return 0.0
    u_hi = _upper_u(R, eps_R)
    if u_hi is None:
        raise DomainError("I_u needs R < 1")
    eps = eps_R if eps_R is not None else 1.0 - R
    coef = _term_coefficients(s, phi)
    if method == "termwise":
        total = 0.0
        for n, c in zip(s.frequencies, coef):
            if c != 0.0:
                total += c * math.exp(log_cj_moment(w, math.log(n), eps, rtol=rtol))
        return float(total)
    if method != "direct":
        raise DomainError(f"unknown method {method!r}; use 'termwise' or 'direct'")

    log_ns = [math.log(n) for n in s.frequencies]
    w_points = np.asarray(w.log_v_u(_breakpoints(log_ns, LOG_HALF_U, u_hi)))

    def integrand(wv: np.ndarray) -> np.ndarray:
        u = np.asarray(w.u_of_log_v(wv))
        return _radial_sum(coef, s.frequencies, u) * np.exp(-wv)

    return integrate(integrand, w_points, rtol=rtol).value


@dataclass
class MomentSeries:
    """
    Products alpha_j c_j and beta_j c_j with c_j = c(n_j, R = 1).

    log_n -- log n_j (frequencies may exceed float range in surrogate mode)
    log_c -- log c_j
    mode -- "direct" when the true frequencies are available
    """

    log_n: np.ndarray
    log_c: np.ndarray
    alpha_c: np.ndarray
    beta_c: np.ndarray
    mode: str = DIRECT

    def __len__(self) -> int:
        return int(self.log_n.size)


def moment_series(s: GapSeries, w: Weight, rtol: float = QUADRATURE_RTOL) -> MomentSeries:
    log_n = np.log(np.array(s.frequencies, dtype=float))
    log_c = np.array([log_cj_moment(w, x, rtol=rtol) for x in log_n])
    c = np.exp(log_c)
    return MomentSeries(log_n, log_c, s.alpha * c, s.beta * c, DIRECT)


def chain_moment_series(
    w: Weight, A: float, count: int, seed: int = 1, rtol: float = QUADRATURE_RTOL
) -> MomentSeries:
    """
    Moments of the b-chain example (2^b_j, g(2^b_j)) without the frequency cap.

    alpha_c = g(n_j) c_j is formed in log domain; there are no sine parts.
    """
    chain = build_b_chain(w, A, count, seed=seed, cap_bits=None)
    log_n = np.array(chain.b, dtype=float) * math.log(2.0)
    log_c = np.array([log_cj_moment(w, x, rtol=rtol) for x in log_n])
    alpha_c = np.exp(np.asarray(w.log_v_u(log_n)) + log_c)
    logger.info(f"chain moments for {len(chain.b)} terms, top frequency 2^{chain.b[-1]}")
    return MomentSeries(log_n, log_c, alpha_c, np.zeros_like(alpha_c), SURROGATE)


def surrogate_phases(seed: int, trials: int, size: int) -> np.ndarray:
    """i.i.d. uniform phases on [0, 2 pi), one independent stream per trial."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return np.array([np.random.default_rng(child).uniform(0.0, 2.0 * math.pi, size) for child in children])


def partial_sums(m: MomentSeries, phases: np.ndarray) -> np.ndarray:
    """S_N for every N along the last axis, phases of shape (..., len(m))."""
    return np.cumsum(m.alpha_c * np.cos(phases) + m.beta_c * np.sin(phases), axis=-1)


def partial_sum(s: GapSeries, w: Weight, phi: float, N: int, *, seed: Optional[int] = None) -> float:
    """
    S_N(phi) = sum_{j <= N} alpha_j c_j cos(n_j phi) + beta_j c_j sin(n_j phi).

    With a seed the phases n_j phi are replaced by seeded uniform phases.
    """
    if not 0 <= N < len(s):
        raise DomainError(f"N must lie in [0, {len(s) - 1}], got {N}")
    m = moment_series(s, w)
    if seed is None:
        phases = phase_matrix(s.frequencies, [phi])[0]
    else:
        phases = surrogate_phases(seed, 1, len(m))[0]
    return float(partial_sums(m, phases)[N])


@dataclass
class LILStatistics:
    """Per-index moments and per-prefix B_N, M_N and sum (alpha_j c_j)^2 / log g(n_N)."""

    log_n: List[float]
    c: List[float]
    alpha_c: List[float]
    beta_c: List[float]
    B: List[float]
    M: List[float]
    ac_ratio: List[float]
    b_growing: bool = False
    mb_decaying: bool = False
    mode: str = DIRECT

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "j": range(len(self.log_n)),
                "n_log": self.log_n,
                "c": self.c,
                "alpha_c": self.alpha_c,
                "beta_c": self.beta_c,
                "B": self.B,
                "M": self.M,
                "ac_ratio": self.ac_ratio,
            }
        )

    def to_dict(self) -> Dict[str, Any]:
        payload = self.to_frame().to_dict(orient="list")
        payload.update({"b_growing": self.b_growing, "mb_decaying": self.mb_decaying, "mode": self.mode})
        return payload


def lil_statistics(
    source: Union[GapSeries, MomentSeries], w: Weight, min_loglog: float = MIN_LOGLOG
) -> LILStatistics:
    """
    B_N = (1/2 sum_{j <= N} (alpha_j c_j)^2 + (beta_j c_j)^2)^(1/2) and
    M_N = max_{j <= N} |(alpha_j c_j, beta_j c_j)|.

    mb_decaying compares M_N (loglog B_N)^(1/2) / B_N at the last prefix
    against its value where loglog B_N first reaches min_loglog.
    """
    m = moment_series(source, w) if isinstance(source, GapSeries) else source
    sizes = np.hypot(m.alpha_c, m.beta_c)
    B = np.sqrt(0.5 * np.cumsum(sizes**2))
    M = np.maximum.accumulate(sizes)
    log_g = np.asarray(w.log_v_u(m.log_n), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ac_ratio = np.where(log_g > 0, np.cumsum(m.alpha_c**2) / np.where(log_g > 0, log_g, 1.0), np.nan)

    b_growing = bool(B.size > 1 and B[-1] > B[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        loglog = np.log(np.log(B))
    ok = np.isfinite(loglog) & (loglog >= min_loglog)
    mb_decaying = False
    if ok.sum() >= 2:
        q = M[ok] * np.sqrt(loglog[ok]) / B[ok]
        mb_decaying = bool(q[-1] < q[0])

    return LILStatistics(
        log_n=m.log_n.tolist(),
        c=np.exp(m.log_c).tolist(),
        alpha_c=m.alpha_c.tolist(),
        beta_c=m.beta_c.tolist(),
        B=B.tolist(),
        M=M.tolist(),
        ac_ratio=ac_ratio.tolist(),
        b_growing=b_growing,
        mb_decaying=mb_decaying,
        mode=m.mode,
    )


@dataclass
class OscillationTrace:
    """
    One row per sampled phi (or surrogate trial), one column per prefix N.

    R_grid holds r_N = 1 - 1/n_N. I_values and normalized are NaN in
    surrogate mode and where the normalizer is undefined. lil_ratio is
    S_N / (2 B_N^2 loglog B_N)^(1/2), NaN on skipped prefixes.
    """

    mode: str
    log_n: List[float]
    R_grid: List[float]
    log_v: List[float]
    phi_set: List[float]
    seed: int
    partial_sums: np.ndarray
    lil_ratio: np.ndarray
    I_values: np.ndarray
    normalized: np.ndarray
    k_hat: Optional[float] = None
    skipped: List[int] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def running_max(self) -> np.ndarray:
        """running maximum of the LIL ratio over N, the limsup proxy"""
        return np.fmax.accumulate(self.lil_ratio, axis=1)

    @property
    def trivial_ratio(self) -> np.ndarray:
        """|I| / (K_hat log v(R))"""
        if self.k_hat is None or self.k_hat == 0.0:
            return np.full_like(self.I_values, np.nan)
        return np.abs(self.I_values) / (self.k_hat * np.asarray(self.log_v)[None, :])

    def to_frame(self) -> pd.DataFrame:
        rows, cols = self.partial_sums.shape
        long_i = self.partial_sums if self.mode == SURROGATE else self.I_values
        long_norm = self.lil_ratio if self.mode == SURROGATE else self.normalized
        return pd.DataFrame(
            {
                "R": np.tile(self.R_grid, rows),
                "phi_or_seed": np.repeat(self.phi_set, cols),
                "I": long_i.ravel(),
                "normalized": long_norm.ravel(),
                "mode": self.mode,
                "N": np.tile(np.arange(cols), rows),
                "S": self.partial_sums.ravel(),
                "lil_ratio": self.lil_ratio.ravel(),
            }
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "log_n": self.log_n,
            "R": self.R_grid,
            "log_v": self.log_v,
            "phi_or_seed": self.phi_set,
            "k_hat": self.k_hat,
            "skipped": self.skipped,
            "partial_sums": self.partial_sums.tolist(),
            "lil_ratio": self.lil_ratio.tolist(),
            "I": self.I_values.tolist(),
            "normalized": self.normalized.tolist(),
            "running_max_final": self.running_max[:, -1].tolist() if self.lil_ratio.size else [],
            **self.metadata,
        }


def _lil_normalizer(B: np.ndarray, min_loglog: float) -> Tuple[np.ndarray, List[int]]:
    with np.errstate(divide="ignore", invalid="ignore"):
        loglog = np.log(np.log(B))
    usable = np.isfinite(loglog) & (loglog >= min_loglog)
    norm = np.where(usable, np.sqrt(2.0 * B**2 * np.where(usable, loglog, 1.0)), np.nan)
    return norm, [int(i) for i in np.nonzero(~usable)[0]]


def measured_k(
    s: GapSeries,
    w: Weight,
    r_grid: Optional[Sequence[float]] = None,
    *,
    eps_grid: Optional[Sequence[float]] = None,
    m: Optional[int] = None,
) -> float:
    """K_hat = max over the grid of sampled sup|u| / v(r)."""
    return circle_profile(s, w, r_grid, m, eps_grid=eps_grid).k_hat


def lil_experiment(
    source: Union[GapSeries, MomentSeries],
    w: Weight,
    phi_samples: int,
    seed: int = DEFAULT_SEED,
    *,
    mode: Optional[str] = None,
    min_loglog: float = MIN_LOGLOG,
    k_samples: int = 4096,
    rtol: float = QUADRATURE_RTOL,
) -> OscillationTrace:
    """
    S_N(phi) / (2 B_N^2 loglog B_N)^(1/2) for every prefix and, in direct
    mode, I_u(r_N, phi) / (log v(r_N) logloglog v(r_N))^(1/2) with r_N = 1 - 1/n_N.

    Direct mode samples phi uniformly on (-pi, pi]; surrogate mode runs
    phi_samples independent phase trials. MomentSeries sources are always
    surrogate.
    """
    if phi_samples < 1:
        raise DomainError(f"phi_samples must be >= 1, got {phi_samples}")
    if isinstance(source, MomentSeries):
        if mode == DIRECT:
            raise DomainError("direct mode needs the series itself, not its moments")
        mode = SURROGATE
        moments = source
        series: Optional[GapSeries] = None
    else:
        mode = mode or DIRECT
        if mode not in (DIRECT, SURROGATE):
            raise DomainError(f"unknown mode {mode!r}")
        series = source
        moments = moment_series(source, w, rtol)

    J = len(moments)
    log_n = moments.log_n
    log_v = np.asarray(w.log_v_u(log_n), dtype=float)
    R_grid = (1.0 - np.exp(-log_n)).tolist()
    sizes = np.hypot(moments.alpha_c, moments.beta_c)
    B = np.sqrt(0.5 * np.cumsum(sizes**2))
    norm, skipped = _lil_normalizer(B, min_loglog)
    if skipped:
        logger.info(f"{len(skipped)} of {J} prefixes skipped: loglog B_N below {min_loglog}")

    I_values = np.full((phi_samples, J), np.nan)
    normalized = np.full((phi_samples, J), np.nan)
    k_hat = None
    metadata: Dict[str, Any] = {"weight": w.to_dict(), "r_N": "1 - 1/n_N", "min_loglog": min_loglog}

    if mode == SURROGATE:
        phases = surrogate_phases(seed, phi_samples, J)
        phi_set = [float(t) for t in range(phi_samples)]
    else:
        rng = np.random.default_rng(seed)
        phis = math.pi - rng.uniform(0.0, 2.0 * math.pi, phi_samples)
        phases = phase_matrix(series.frequencies, phis)
        phi_set = phis.tolist()

        # c_j(r_N) for every prefix N (rows) and term j (columns)
        moments_at = np.zeros((J, J))
        for N in range(J):
            eps_N = math.exp(-log_n[N])
            if not eps_N < 0.5:
                continue
            for j in range(J):
                moments_at[N, j] = math.exp(log_cj_moment(w, log_n[j], eps_N, rtol=rtol))
        I_values = (series.alpha * np.cos(phases) + series.beta * np.sin(phases)) @ moments_at.T
        guard = log_v >= MIN_LOG_V
        with np.errstate(invalid="ignore"):
            scale = np.sqrt(log_v * np.log(np.log(np.maximum(log_v, 1.0 + 1e-12))))
        normalized = np.where(guard[None, :], I_values / np.where(guard, scale, 1.0)[None, :], np.nan)

        usable = [math.exp(-x) for x in log_n if math.exp(-x) < 0.5]
        if usable:
            top, bottom = -math.log2(usable[0]), -math.log2(usable[-1])
            grid = sorted(set(usable) | {2.0 ** -(k / 4) for k in range(int(4 * top), int(4 * bottom) + 1)})
            k_hat = measured_k(series, w, eps_grid=[e for e in grid if e < 0.5], m=k_samples)
        metadata["series_hash"] = series_hash(series)

    S = partial_sums(moments, phases)
    lil_ratio = S / norm[None, :]
    metadata.update({"trials": phi_samples, "tolerance": rtol})
    trace = OscillationTrace(
        mode=mode,
        log_n=log_n.tolist(),
        R_grid=R_grid,
        log_v=log_v.tolist(),
        phi_set=phi_set,
        seed=seed,
        partial_sums=S,
        lil_ratio=lil_ratio,
        I_values=I_values,
        normalized=normalized,
        k_hat=k_hat,
        skipped=skipped,
        metadata=metadata,
    )
    logger.info(f"{mode} LIL experiment: {phi_samples} samples over {J} prefixes, seed {seed}")
    return trace


def trivial_bound_scan(trace: OscillationTrace) -> float:
    """Largest |I_u(R, phi)| / (K_hat log v(R)) in a trace; <= 1 up to tolerance."""
    ratios = trace.trivial_ratio
    finite = ratios[np.isfinite(ratios)]
    return float(finite.max()) if finite.size else 0.0


def _circle_tables(frequencies: Sequence[int], m: int) -> Tuple[np.ndarray, np.ndarray]:
    residues = np.array([n % m for n in frequencies], dtype=np.int64)
    j = np.arange(m, dtype=np.int64)
    theta = (2.0 * math.pi / m) * ((j[:, None] * residues[None, :]) % m)
    return np.cos(theta), np.sin(theta)


def abs_average(
    s: GapSeries,
    w: Weight,
    R_grid: Optional[Sequence[float]] = None,
    m: int = ABS_AVERAGE_SAMPLES,
    *,
    eps_grid: Optional[Sequence[float]] = None,
    rtol: float = ABS_AVERAGE_RTOL,
) -> List[Tuple[float, float, float]]:
    """
    (R, mean over phi of I_|u|(R, phi), that mean / log v(R)) per radius.

    The phi-mean is taken inside the integral over the m-point circle rule.
    """
    if (R_grid is None) == (eps_grid is None):
        raise DomainError("give exactly one of R_grid or eps_grid")
    eps_values = [1.0 - R for R in R_grid] if eps_grid is None else [float(e) for e in eps_grid]
    if m < 1:
        raise DomainError(f"need at least one circle sample, got m={m}")
    cos_table, sin_table = _circle_tables(s.frequencies, m)
    log_ns = [math.log(n) for n in s.frequencies]
    n = np.array([float(k) for k in s.frequencies])

    def integrand(wv: np.ndarray) -> np.ndarray:
        flat = np.asarray(w.u_of_log_v(wv)).ravel()
        out = np.empty(flat.size)
        for start in range(0, flat.size, NODE_CHUNK):
            log_r = _log_r(flat[start : start + NODE_CHUNK])[:, None]
            with np.errstate(under="ignore"):
                radial = np.exp(n[None, :] * log_r)
            u = (radial * s.alpha) @ cos_table.T + (radial * s.beta) @ sin_table.T
            out[start : start + radial.shape[0]] = np.abs(u).mean(axis=1)
        return out.reshape(np.shape(wv)) * np.exp(-wv)

    results = []
    for eps in eps_values:
        u_hi = _upper_u(None, eps)
        w_points = np.asarray(w.log_v_u(_breakpoints(log_ns, LOG_HALF_U, u_hi, COARSE_OFFSETS)))
        mean = integrate(integrand, w_points, rtol=rtol, max_panels=QUADRATURE_MAX_PANELS).value
        log_v = float(w.log_v_u(u_hi))
        results.append((1.0 - eps, mean, mean / log_v))
        logger.debug(f"I_|u| mean at eps={eps:.3g}: {mean:.6g}, ratio {mean / log_v:.4g}")
    return results


def abs_weighted_average(
    s: GapSeries, w: Weight, R: Optional[float] = None, phi: float = 0.0, *, eps_R: Optional[float] = None
) -> float:
    """I_|u|(R, phi) at a single angle."""
    u_hi = _upper_u(R, eps_R)
    if u_hi is None:
        raise DomainError("I_|u| needs R < 1")
    coef = _term_coefficients(s, phi)
    log_ns = [math.log(n) for n in s.frequencies]
    w_points = np.asarray(w.log_v_u(_breakpoints(log_ns, LOG_HALF_U, u_hi, COARSE_OFFSETS)))

    def integrand(wv: np.ndarray) -> np.ndarray:
        u = np.asarray(w.u_of_log_v(wv))
        return np.abs(_radial_sum(coef, s.frequencies, u)) * np.exp(-wv)

    return integrate(integrand, w_points, rtol=ABS_AVERAGE_RTOL).value


def exceedance_fraction(
    s: GapSeries,
    w: Weight,
    R: Optional[float],
    phis: Sequence[float],
    threshold: float,
    *,
    eps_R: Optional[float] = None,
) -> float:
    """Fraction of the sampled phi with I_|u|(R, phi) / log v(R) > threshold."""
    if not phis:
        raise DomainError("need at least one phi")
    u_hi = _upper_u(R, eps_R)
    if u_hi is None:
        raise DomainError("I_|u| needs R < 1")
    eps = eps_R if eps_R is not None else 1.0 - R
    log_v = float(w.log_v_u(u_hi))
    hits = sum(abs_weighted_average(s, w, phi=phi, eps_R=eps) / log_v > threshold for phi in phis)
    return hits / len(phis)


def sharpness_check(s: GapSeries, w: Weight) -> List[Tuple[int, float, float]]:
    """
    (j, c_j g(n_j), r_j^(n_j)) with r_j = 1 - 1/n_j, so g(n_j) = v(r_j).

    The last entry is the lower bound c_j v(r_j) >= r_j^(n_j).
    """
    out = []
    for j, n in enumerate(s.frequencies):
        log_n = math.log(n)
        product = math.exp(log_cj_moment(w, log_n) + float(w.log_v_u(log_n)))
        lower = math.exp(n * math.log1p(-1.0 / n)) if n >= 2 else 0.0
        if product < lower * (1.0 - 1e-9):
            raise NumericError(
                f"moment at j={j} falls below its lower bound", {"j": j, "product": product, "lower": lower}
            )
        out.append((j, product, lower))
    return out
