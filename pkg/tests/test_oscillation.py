"""tests for the radial moments, weighted averages and LIL experiments"""
import math

import numpy as np
import pytest

from gapflow import DomainError
from gapflow.gapseries import construct_counterexample
from gapflow.gapseries import construct_example
from gapflow.gapseries import validate_gap
from gapflow.oscillation import abs_average
from gapflow.oscillation import chain_moment_series
from gapflow.oscillation import cj_moment
from gapflow.oscillation import exceedance_fraction
from gapflow.oscillation import lil_experiment
from gapflow.oscillation import lil_statistics
from gapflow.oscillation import moment_series
from gapflow.oscillation import MomentSeries
from gapflow.oscillation import partial_sum
from gapflow.oscillation import partial_sums
from gapflow.oscillation import sharpness_check
from gapflow.oscillation import surrogate_phases
from gapflow.oscillation import trivial_bound_scan
from gapflow.oscillation import weighted_average
from gapflow.weights import Weight


@pytest.fixture(scope="module")
def direct_trace():
    """50 seeded phases over the full sub-cap example on 1/(1-r)"""
    w = Weight.power(1.0)
    return lil_experiment(construct_example(w, 2.0, 31), w, 50, seed=11, mode="direct")


@pytest.fixture(scope="module")
def chain_trace():
    """200 surrogate trials over 10^4 chain terms"""
    w = Weight.power(1.0)
    return lil_experiment(chain_moment_series(w, 2.0, 10**4), w, 200, seed=5)


def test_moment_at_zero_frequency(power1, log_power1):
    """c(0, R) = 1/v(1/2) - 1/v(R)"""
    assert cj_moment(power1, 0) == pytest.approx(0.5, rel=1e-14)
    assert cj_moment(log_power1, 0) == pytest.approx(1.0 / (1.0 + math.log(2.0)), rel=1e-14)
    assert cj_moment(power1, 0, 0.9) == pytest.approx(0.5 - 0.1, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 10, 1000, 2**40])
def test_moment_power_closed_form(power1, n):
    """dv/v^2 = dr for 1/(1-r)"""
    expected = (1.0 - 2.0 ** -(n + 1)) / (n + 1)
    assert cj_moment(power1, n) == pytest.approx(expected, rel=1e-8)


def test_moment_power_inner_radius(power1):
    """upper limit R < 1"""
    n = 10
    expected = (0.9 ** (n + 1) - 2.0 ** -(n + 1)) / (n + 1)
    assert cj_moment(power1, n, 0.9) == pytest.approx(expected, rel=1e-8)
    assert cj_moment(power1, n, eps_R=0.1) == pytest.approx(expected, rel=1e-8)


def test_moment_domain(power1):
    """negative n and R outside (1/2, 1] are rejected"""
    with pytest.raises(DomainError):
        cj_moment(power1, -1)
    with pytest.raises(DomainError):
        cj_moment(power1, 4, 0.4)
    with pytest.raises(DomainError):
        cj_moment(power1, 4, eps_R=0.5)


def test_moments_decrease(log_power1):
    """c_j is strictly decreasing along a gap sequence"""
    c = [cj_moment(log_power1, 2**k) for k in range(1, 30)]
    assert all(a > b for a, b in zip(c, c[1:]))


@pytest.mark.parametrize("name", ["power", "log-power"])
def test_sharpness_band(name):
    """c_j g(n_j) stays between (1 - 1/n)^n and a constant"""
    w = Weight.power(1.0) if name == "power" else Weight.log_power(1.0)
    rows = sharpness_check(construct_counterexample(w, 20), w)
    assert len(rows) == 20
    for _, product, lower in rows:
        assert lower <= product * (1 + 1e-9)
        assert product <= 10.0


def test_weighted_average_cancels():
    """a lone cosine averages to zero where it vanishes"""
    s = validate_gap([(4, 1.0)])
    assert weighted_average(s, Weight.power(1.0), 0.99, math.pi / 8) == pytest.approx(0.0, abs=1e-15)


def test_weighted_average_zero(zero_series, power1):
    """zero series, both methods"""
    assert weighted_average(zero_series, power1, eps_R=0.01) == 0.0
    assert weighted_average(zero_series, power1, eps_R=0.01, method="direct") == 0.0


def test_weighted_average_methods_agree(random_series, power1):
    """termwise moments match direct radial integration"""
    eps = 2.0**-20
    termwise = weighted_average(random_series, power1, phi=1.0, eps_R=eps)
    direct = weighted_average(random_series, power1, phi=1.0, eps_R=eps, method="direct")
    m = moment_series(random_series, power1)
    scale = float(np.sum(np.abs(m.alpha_c) + np.abs(m.beta_c)))
    assert abs(termwise - direct) <= 1e-7 * scale


def test_weighted_average_empty_range(random_series, power1):
    """R = 1/2 integrates over nothing"""
    assert weighted_average(validate_gap([(4, 1.0)]), power1, 0.5) == 0.0
    assert weighted_average(random_series, power1, eps_R=0.5, method="direct") == 0.0


def test_weighted_average_errors(random_series, power1):
    """R = 1 and unknown methods are refused"""
    with pytest.raises(DomainError):
        weighted_average(random_series, power1, 1.0)
    with pytest.raises(DomainError):
        weighted_average(random_series, power1, 0.9, method="simpson")


def test_partial_sum(power_example, power1):
    """S_0 at phi = 0 is g(2) c(2)"""
    assert partial_sum(power_example, power1, 0.0, 0) == pytest.approx(2.0 * (1.0 - 2.0**-3) / 3.0, rel=1e-8)
    with pytest.raises(DomainError):
        partial_sum(power_example, power1, 0.0, len(power_example))


def test_surrogate_determinism(power_example, power1):
    """same seed, same phases and sums"""
    assert np.array_equal(surrogate_phases(3, 4, 10), surrogate_phases(3, 4, 10))
    assert not np.array_equal(surrogate_phases(3, 4, 10), surrogate_phases(4, 4, 10))
    a = partial_sum(power_example, power1, 0.0, 10, seed=9)
    b = partial_sum(power_example, power1, 0.0, 10, seed=9)
    assert a == b
    phases = surrogate_phases(3, 4, len(power_example))
    m = moment_series(power_example, power1)
    assert partial_sums(m, phases).shape == (4, len(power_example))


def test_lil_statistics_single_term(power1):
    """one complex term: B = |c a| / sqrt 2 and M = |c a|"""
    c = cj_moment(power1, 4)
    stats = lil_statistics(validate_gap([(4, 1 + 1j)]), power1)
    assert stats.B[0] == pytest.approx(c, rel=1e-12)
    assert stats.M[0] == pytest.approx(math.sqrt(2.0) * c, rel=1e-12)
    assert not stats.b_growing


def test_lil_statistics_shape(random_series, power1):
    """B_N grows and M_N <= sqrt 2 B_N"""
    stats = lil_statistics(random_series, power1)
    B = np.array(stats.B)
    assert np.all(np.diff(B) >= 0)
    assert np.all(np.array(stats.M) <= math.sqrt(2.0) * B * (1 + 1e-12))
    assert list(stats.to_frame().columns) == ["j", "n_log", "c", "alpha_c", "beta_c", "B", "M", "ac_ratio"]


def test_difference_bounded(direct_trace):
    """max over phi of |I_u(r_N) - S_N| shows no growth while log v grows"""
    D = np.nanmax(np.abs(direct_trace.I_values - direct_trace.partial_sums), axis=0)
    half = D.size // 2
    assert D[-1] <= 2.0 * np.median(D[:half])
    assert direct_trace.log_v[-1] >= 10.0 * direct_trace.log_v[0]


def test_trivial_bound(direct_trace):
    """|I_u| <= K_hat log v(R) across the direct trace"""
    assert direct_trace.k_hat is not None and direct_trace.k_hat > 0
    assert trivial_bound_scan(direct_trace) <= 1.01


def test_direct_trace_frame(direct_trace):
    """long export carries one row per (phi, N)"""
    frame = direct_trace.to_frame()
    assert len(frame) == 50 * 31
    assert set(frame["mode"]) == {"direct"}
    assert direct_trace.to_dict()["series_hash"]


def test_lil_normalizer_band(chain_trace):
    """median final running max of the LIL ratio is near 1"""
    final = chain_trace.running_max[:, -1]
    assert 0.6 <= float(np.median(final)) <= 1.4


def test_b_squared_linear(power1):
    """B_N^2 / N stays in a fixed band"""
    stats = lil_statistics(chain_moment_series(power1, 2.0, 2000), power1)
    B = np.array(stats.B)
    N = np.arange(1, B.size + 1)
    ratio = B[99:] ** 2 / N[99:]
    assert np.all((ratio >= 0.1) & (ratio <= 10.0))
    assert stats.b_growing
    assert stats.mb_decaying


def _flat_moments(sizes):
    log_n = np.arange(1, len(sizes) + 1) * math.log(2.0)
    sizes = np.asarray(sizes, dtype=float)
    return MomentSeries(log_n, np.zeros_like(log_n), sizes, np.zeros_like(sizes), "surrogate")


def test_mb_decaying_starts_at_min_loglog(power1):
    """equal moments decay once loglog B_N reaches the cut; a late spike does not"""
    assert lil_statistics(_flat_moments(np.ones(2000)), power1).mb_decaying
    spiked = np.append(np.ones(2000), 100.0)
    assert not lil_statistics(_flat_moments(spiked), power1).mb_decaying


def test_rtol_reaches_moments(power1):
    """a looser tolerance is recorded and moves the moments very little"""
    m = chain_moment_series(power1, 2.0, 20)
    loose = chain_moment_series(power1, 2.0, 20, rtol=1e-6)
    assert np.allclose(loose.alpha_c, m.alpha_c, rtol=1e-5)
    trace = lil_experiment(loose, power1, 2, seed=1, rtol=1e-6)
    assert trace.to_dict()["tolerance"] == 1e-6


def test_partial_sums_decay_against_log_v(chain_trace):
    """max over trials of |S_N| / log v decays across the range"""
    scaled = np.abs(chain_trace.partial_sums).max(axis=0) / np.asarray(chain_trace.log_v)
    assert scaled[9] >= 5.0 * scaled[-1]


def test_abs_average_persists(power_example, power1):
    """mean over phi of I_|u| / log v does not vanish across the sub-cap range"""
    rows = abs_average(power_example, power1, eps_grid=[2.0**-k for k in range(4, 25, 4)])
    assert len(rows) == 6
    means = [mean for _, mean, _ in rows]
    ratios = [ratio for _, _, ratio in rows]
    assert means[0] > 0
    assert all(a < b for a, b in zip(means, means[1:]))
    assert all(ratio >= 0.5 * ratios[0] for ratio in ratios)


def test_exceedance_fraction(random_series, power1):
    """threshold zero counts every phi, a huge one none"""
    phis = [0.1, 1.0, 2.0]
    assert exceedance_fraction(random_series, power1, None, phis, 0.0, eps_R=2.0**-8) == 1.0
    assert exceedance_fraction(random_series, power1, None, phis, 1e6, eps_R=2.0**-8) == 0.0
    with pytest.raises(DomainError):
        exceedance_fraction(random_series, power1, None, [], 0.0, eps_R=2.0**-8)


def test_zero_series_trace(zero_series, power1):
    """zero series gives zero averages and zero sums"""
    trace = lil_experiment(zero_series, power1, 4, mode="direct")
    assert np.all(trace.I_values == 0.0)
    assert np.all(trace.partial_sums == 0.0)
    assert trace.skipped == [0, 1, 2]


def test_moment_source_is_surrogate(power1):
    """moment series cannot run in direct mode"""
    m = chain_moment_series(power1, 2.0, 20)
    with pytest.raises(DomainError):
        lil_experiment(m, power1, 2, mode="direct")
    trace = lil_experiment(m, power1, 2, seed=1)
    again = lil_experiment(m, power1, 2, seed=1)
    assert trace.mode == "surrogate"
    assert np.array_equal(trace.partial_sums, again.partial_sums)
