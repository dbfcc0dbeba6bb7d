"""Hadamard gap series, gap validation and the b-chain constructions."""
import json
import math
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Dict
from typing import Iterable
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np
import pandas as pd

from gapflow import CapacityError
from gapflow import ConfigurationError
from gapflow import DomainError
from gapflow import FREQUENCY_CAP
from gapflow import FREQUENCY_CAP_BITS
from gapflow import GapValidationError
from gapflow import SCHEMA
from gapflow.utils import get_logger
from gapflow.utils import sha256_hex
from gapflow.weights import Weight

logger = get_logger(__name__)

Term = Tuple[int, complex]

# ties in the b-chain inequality within this relative margin count as equality
CHAIN_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GapSeries:
    """
    Finite Hadamard gap series f(z) = sum a_k z^(n_k), u = Re f.

    terms -- (n_k, a_k) with n_k strictly increasing and <= 2**62
    lam -- certified minimal gap ratio min n_{k+1}/n_k (inf for one term)
    truncated -- the constructor stopped early at the frequency cap
    note -- why it stopped
    """

    terms: Tuple[Term, ...]
    lam: float
    truncated: bool = False
    note: str = ""

    @property
    def frequencies(self) -> List[int]:
        return [n for n, _ in self.terms]

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([a for _, a in self.terms], dtype=complex)

    @property
    def alpha(self) -> np.ndarray:
        """cosine coefficients Re a_k"""
        return self.coefficients.real.copy()

    @property
    def beta(self) -> np.ndarray:
        """sine coefficients -Im a_k"""
        return -self.coefficients.imag

    def __len__(self) -> int:
        return len(self.terms)

    def prefix(self, count: int) -> "GapSeries":
        """The first `count` terms."""
        if not 1 <= count <= len(self.terms):
            raise DomainError(f"prefix length must be in [1, {len(self.terms)}], got {count}")
        return validate_gap(self.terms[:count])

    def scaled(self, c: complex) -> "GapSeries":
        return GapSeries(tuple((n, complex(c) * a) for n, a in self.terms), self.lam, self.truncated, self.note)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "terms": [[n, a.real, a.imag] for n, a in self.terms],
            "lambda": self.lam if math.isfinite(self.lam) else None,
            "truncated": self.truncated,
            "note": self.note,
        }

    def to_json(self, config_hash: Optional[str] = None) -> str:
        payload: Dict[str, Any] = {"schema": SCHEMA}
        if config_hash is not None:
            payload["config_hash"] = config_hash
        payload.update(self.to_dict())
        return json.dumps(payload, indent=2)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "n": [n for n, _ in self.terms],
                "re": [a.real for _, a in self.terms],
                "im": [a.imag for _, a in self.terms],
            }
        )


@dataclass
class BIndexChain:
    """b_0 = seed and b_{n+1} = min{l : g(2^l) > A g(2^b_n)}."""

    A: float
    b: List[int] = field(default_factory=list)
    truncated: bool = False
    note: str = ""


def validate_gap(terms: Iterable[Tuple[int, Any]], truncated: bool = False, note: str = "") -> GapSeries:
    """Check frequencies and certify the minimal gap ratio."""
    checked: List[Term] = []
    for i, (n, a) in enumerate(terms):
        if isinstance(n, float):
            if not n.is_integer():
                raise GapValidationError(f"frequency at index {i} is not an integer: {n}", index=i)
            n = int(n)
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise GapValidationError(f"frequency at index {i} must be a positive integer, got {n}", index=i)
        n = int(n)
        if n > FREQUENCY_CAP:
            raise CapacityError(f"frequency at index {i} exceeds 2**{FREQUENCY_CAP_BITS}: use surrogate-phase mode")
        checked.append((n, complex(a)))
    if not checked:
        raise GapValidationError("a gap series needs at least one term")

    lam = math.inf
    for i in range(1, len(checked)):
        prev, cur = checked[i - 1][0], checked[i][0]
        if cur <= prev:
            raise GapValidationError(
                f"frequencies must be strictly increasing: n[{i}]={cur} <= n[{i - 1}]={prev}", index=i
            )
        lam = min(lam, cur / prev)
    return GapSeries(tuple(checked), lam, truncated, note)


def pad_series(s: GapSeries) -> GapSeries:
    """Insert zero terms at integer geometric midpoints until every ratio is in (1, 4]."""
    padded: List[Term] = [s.terms[0]]
    for n, a in s.terms[1:]:
        padded.extend((m, 0j) for m in _midpoints(padded[-1][0], n))
        padded.append((n, a))
    return validate_gap(padded, s.truncated, s.note)


def _midpoints(lo: int, hi: int) -> List[int]:
    if hi <= 4 * lo:
        return []
    mid = math.isqrt(lo * hi)
    return _midpoints(lo, mid) + [mid] + _midpoints(mid, hi)


def conjugate_series(s: GapSeries) -> GapSeries:
    """The series of Im f: Im(a z^n) = Re(-i a z^n)."""
    return s.scaled(-1j)


def build_b_chain(
    w: Weight, A: float, count: int, seed: int = 1, cap_bits: Optional[int] = FREQUENCY_CAP_BITS
) -> BIndexChain:
    """
    Linear scan for b_{n+1} = min{l : g(2^l) > A g(2^b_n)}, done on log g so
    it runs past machine range. cap_bits=None disables the frequency cap.
    """
    if not A > 1.0:
        raise ConfigurationError(f"A must exceed 1, got {A}")
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    if seed < 1:
        raise ConfigurationError(f"chain seed must be >= 1, got {seed}")

    chain = BIndexChain(A=A)
    log_a = math.log(A)
    log2 = math.log(2.0)
    b = seed
    while True:
        if cap_bits is not None and b > cap_bits:
            chain.truncated = True
            chain.note = f"stopped after {len(chain.b)} of {count} terms: 2^{b} exceeds the 2^{cap_bits} frequency cap"
            logger.warning(chain.note)
            break
        chain.b.append(b)
        if len(chain.b) == count:
            break
        threshold = log_a + float(w.log_v_u(b * log2))
        l = b + 1
        while float(w.log_v_u(l * log2)) - threshold <= CHAIN_TIE_TOLERANCE * max(1.0, abs(threshold)):
            l += 1
        b = l
    return chain


def construct_example(w: Weight, A: float, count: int, seed: int = 1) -> GapSeries:
    """Terms (2^b_k, g(2^b_k)) along the b-chain; a member of the growth space."""
    chain = build_b_chain(w, A, count, seed=seed)
    terms = [(2**b, w.g(2.0**b)) for b in chain.b]
    return validate_gap(terms, chain.truncated, chain.note)


def construct_counterexample(w: Weight, count: int) -> GapSeries:
    """Terms (2^k, g(2^k)) for k = 1..count; fails the membership test for slow g."""
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    last = min(count, FREQUENCY_CAP_BITS)
    truncated = last < count
    note = ""
    if truncated:
        note = f"stopped after {last} of {count} terms at the 2^{FREQUENCY_CAP_BITS} frequency cap"
        logger.warning(note)
    return validate_gap([(2**k, w.g(2.0**k)) for k in range(1, last + 1)], truncated, note)


def series_from_dict(payload: Dict[str, Any]) -> GapSeries:
    if "terms" not in payload:
        raise ConfigurationError("series JSON needs a 'terms' list")
    terms = [(int(n), complex(re, im)) for n, re, im in payload["terms"]]
    return validate_gap(terms, bool(payload.get("truncated", False)), payload.get("note", ""))


def load_series(path: str) -> GapSeries:
    """Load a series from JSON ({"terms": [[n, re, im], ...]}) or CSV (n, re, im)."""
    if path.endswith(".csv"):
        frame = pd.read_csv(path, comment="#")
        if not {"n", "re", "im"} <= set(frame.columns):
            frame = pd.read_csv(path, comment="#", names=["n", "re", "im"])
        return validate_gap(
            (int(n), complex(re, im)) for n, re, im in zip(frame["n"], frame["re"], frame["im"])
        )
    with open(path, "r") as f:
        return series_from_dict(json.load(f))


def series_hash(s: GapSeries) -> str:
    return sha256_hex(s.to_dict()["terms"])


def coefficient_ratios(s: GapSeries, w: Weight) -> np.ndarray:
    """|a_k| / g(n_k) for every term."""
    g = np.array([w.g(float(n)) for n in s.frequencies])
    return np.abs(s.coefficients) / g
