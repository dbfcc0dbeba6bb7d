"""tests for the gamma profile, majorant, Bloch test and KWW witness"""
import math

import numpy as np
import pytest

from gapflow import ConfigurationError
from gapflow import DomainError
from gapflow import UndefinedWitnessError
from gapflow.evaluation import eval_circle
from gapflow.gapseries import conjugate_series
from gapflow.gapseries import construct_counterexample
from gapflow.gapseries import construct_example
from gapflow.gapseries import validate_gap
from gapflow.membership import bloch_coefficient_score
from gapflow.membership import bloch_membership
from gapflow.membership import coefficient_bound
from gapflow.membership import fast_criterion
from gapflow.membership import gamma_profile
from gapflow.membership import kww_witness
from gapflow.membership import majorant_bound
from gapflow.membership import Trend
from gapflow.membership import Verdict
from gapflow.weights import eval_v
from gapflow.weights import Weight


def test_example_is_member(log_example):
    """b-chain example on log-power(1) stays bounded"""
    report = gamma_profile(log_example, Weight.log_power(1.0))
    assert report.gamma_sup <= 2.5
    assert report.trend is Trend.BOUNDED
    assert report.verdict is Verdict.MEMBER


def test_counterexample_is_not_member(log_counterexample, log_power1):
    """(2^k, g(2^k)) on log-power(1) grows like n/2"""
    report = gamma_profile(log_counterexample, log_power1)
    N, gamma = report.checkpoints[-1]
    assert N == 2**25
    log2 = math.log(2.0)
    expected = sum(1 + k * log2 for k in range(1, 26)) / (1 + 25 * log2)
    assert gamma == pytest.approx(expected, abs=1e-9)
    assert gamma >= 5.0
    assert report.trend is Trend.GROWING
    assert report.verdict is Verdict.NON_MEMBER


@pytest.mark.parametrize("name", ["power", "log-power"])
def test_example_sum_bound(name, power_example, log_example):
    """prefix sums stay below A/(A-1) g(N) at every checkpoint"""
    w = Weight.power(1.0) if name == "power" else Weight.log_power(1.0)
    s = power_example if name == "power" else log_example
    report = gamma_profile(s, w)
    for _, gamma in report.checkpoints:
        assert gamma <= 2.0 * (1 + 1e-12)


def test_separation(log_power1):
    """example and counterexample differ by at least 5x at count 30"""
    example = gamma_profile(construct_example(log_power1, 2.0, 30), log_power1)
    counter = gamma_profile(construct_counterexample(log_power1, 30), log_power1)
    assert counter.gamma_sup >= 5.0 * example.gamma_sup


def test_zero_series_is_member(zero_series, power1):
    """all-zero coefficients give gamma = 0"""
    report = gamma_profile(zero_series, power1)
    assert report.gamma_sup == 0.0
    assert all(g == 0.0 for _, g in report.checkpoints)
    assert report.verdict is Verdict.MEMBER
    assert coefficient_bound(zero_series, power1) == 0.0


def test_single_checkpoint_inconclusive(power1):
    """one nonzero term cannot show a trend"""
    report = gamma_profile(validate_gap([(4, 1.0)]), power1)
    assert report.trend is Trend.INCONCLUSIVE
    assert report.verdict is Verdict.INCONCLUSIVE


def test_scaling_and_symmetry(power_example, power1):
    """gamma scales with |c|; u and -u and Im f share the profile"""
    base = gamma_profile(power_example, power1)
    scaled = gamma_profile(power_example.scaled(3 + 4j), power1)
    for (_, g), (_, h) in zip(base.checkpoints, scaled.checkpoints):
        assert h == pytest.approx(5.0 * g, rel=1e-12)
    assert scaled.verdict is base.verdict
    negated = gamma_profile(power_example.scaled(-1.0), power1)
    assert negated.checkpoints == base.checkpoints
    conjugate = gamma_profile(conjugate_series(power_example), power1)
    assert [g for _, g in conjugate.checkpoints] == pytest.approx([g for _, g in base.checkpoints], rel=1e-15)


def test_profile_frame(power_example, power1):
    """two-column export"""
    frame = gamma_profile(power_example, power1).to_frame()
    assert list(frame.columns) == ["N", "gamma_N"]
    assert len(frame) == 31


def test_coefficient_bound(power1):
    """example scores 1; a_k = k g(n_k) scores the term count"""
    terms = [(2**b, power1.g(2.0**b)) for b in range(1, 20, 2)]
    assert coefficient_bound(validate_gap(terms), power1) == pytest.approx(1.0, rel=1e-15)
    growing = validate_gap([(n, (k + 1) * a) for k, (n, a) in enumerate(terms)])
    assert coefficient_bound(growing, power1) == pytest.approx(10.0, rel=1e-12)


def test_majorant_single_term(power1):
    """a single term inside the split contributes |a|"""
    s = validate_gap([(2, 3.0)])
    assert majorant_bound(s, power1, 0.9) == pytest.approx(3.0)


def test_majorant_dominates_circle(power_example, power1):
    """bound holds against 10^4 sampled phases"""
    eps = 2.0**-10
    bound = majorant_bound(power_example, power1, eps=eps)
    samples = eval_circle(power_example, eps=eps, m=10**4)
    assert np.abs(samples).max() <= bound


def test_majorant_against_v(power_example, power1):
    """bound / v(r) stays bounded across radii"""
    ratios = [majorant_bound(power_example, power1, eps=2.0**-k) / eval_v(power1, eps=2.0**-k) for k in range(4, 40, 4)]
    assert max(ratios) < 20.0


def test_majorant_small_multiplier(power_example, power1):
    """M too small for a geometric tail"""
    with pytest.raises(ConfigurationError):
        majorant_bound(power_example, power1, 0.9, M=1)


def test_bloch_membership_callable():
    """mu = 1 - r with a_k = 1/n_k: derived coefficients are 1"""
    s = validate_gap([(2**k, 1.0 / 2**k) for k in range(1, 21)])
    report = bloch_membership(s, lambda r: 1.0 - r)
    assert report.gamma_sup <= 2.0
    assert report.verdict is Verdict.MEMBER
    assert bloch_coefficient_score(s, Weight.power(1.0)) == pytest.approx(0.5, rel=1e-12)


def test_alpha_bloch():
    """mu = (1-r)^alpha with a_k = n_k^(alpha-1)"""
    alpha = 0.5
    s = validate_gap([(2**k, (2.0**k) ** (alpha - 1.0)) for k in range(1, 21)])
    assert bloch_membership(s, Weight.power(alpha)).verdict is Verdict.MEMBER


def test_bloch_zero_and_bad_mu(zero_series):
    """zero series is Bloch; an increasing mu is rejected"""
    assert bloch_membership(zero_series, Weight.power(1.0)).verdict is Verdict.MEMBER
    with pytest.raises(DomainError):
        bloch_membership(zero_series, lambda r: 1.0 + r)


def test_bloch_mu_with_positive_limit(zero_series):
    """mu must decrease to 0, not level off"""
    with pytest.raises(DomainError):
        bloch_membership(zero_series, lambda r: 1.5 - 0.5 * r)
    with pytest.raises(DomainError, match="decrease to 0"):
        bloch_membership(zero_series, lambda r: 1.0 + math.sqrt(1.0 - r))
    slow = bloch_membership(zero_series, lambda r: 1.0 / (1.0 - math.log1p(-r)))
    assert slow.verdict is Verdict.MEMBER


def test_fast_criterion(power_example, power1):
    """g(4y) = 4 g(y) caps gamma at 4/3"""
    fast = fast_criterion(power_example, power1)
    assert fast.a_hat == pytest.approx(4.0, rel=1e-12)
    assert fast.cap == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert gamma_profile(power_example, power1).gamma_sup <= fast.cap * (1 + 1e-12)


def test_kww_single_term(power1):
    """a lone cosine peaks at phi = 0"""
    phi, alpha = kww_witness(validate_gap([(4, 1.0)]), power1, 8, 256)
    assert alpha == pytest.approx(1.0, abs=1e-12)
    assert min(phi, 2 * math.pi - phi) < 1e-6


def test_kww_positive_coefficients(power1):
    """positive real coefficients align at phi = 0"""
    _, alpha = kww_witness(validate_gap([(2, 1.0), (8, 1.0)]), power1, 8, 256)
    assert alpha == pytest.approx(1.0, abs=1e-12)


def test_kww_random(random_series, power1):
    """random complex coefficients give a witness in (0, 1]"""
    _, alpha = kww_witness(random_series, power1, 2**12, 2**14)
    assert 0.05 <= alpha <= 1.0


def test_kww_degenerate(zero_series, power1):
    """all-zero prefix has no witness"""
    with pytest.raises(UndefinedWitnessError):
        kww_witness(zero_series, power1, 4, 64)
    with pytest.raises(DomainError):
        kww_witness(zero_series, power1, 0, 64)
