import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catdapbin.datagen import (
    BETA_SHAPE,
    SIM_CASES,
    TruncNormSpec,
    case_dataset,
    gen_csimb,
    gen_simb,
    run_simulation_study,
    sample_beta,
    sample_truncated_normal,
)

# mpmath quadrature of the truncated density
TN_MEAN = 3.415742465186247
TN_SD = 1.433792163719061
# a / (a + b) and sqrt(ab / ((a+b)^2 (a+b+1))) for Beta(3.45, 10)
BETA_MEAN = 0.2565055762081784
BETA_SD = 0.1148823576344955

N = 100_000


def within_3se(sample, mean, sd):
    return abs(sample.mean() - mean) < 3 * sd / np.sqrt(sample.size)


class TestTruncatedNormal:
    spec = TruncNormSpec(3, 1.75, 1, 10)

    def test_closed_form_moments(self):
        assert self.spec.mean() == pytest.approx(TN_MEAN, abs=1e-12)
        assert np.sqrt(self.spec.variance()) == pytest.approx(TN_SD, abs=1e-12)

    def test_sample_moments(self):
        x = sample_truncated_normal(self.spec, N, np.random.default_rng(0))
        assert within_3se(x, TN_MEAN, TN_SD)
        assert x.std() == pytest.approx(TN_SD, rel=0.02)

    def test_support(self):
        x = sample_truncated_normal(self.spec, N, np.random.default_rng(1))
        assert x.min() >= 1 and x.max() <= 10

    def test_far_tail(self):
        spec = TruncNormSpec(0, 1, 8, 9)
        x = sample_truncated_normal(spec, 5000, np.random.default_rng(2))
        assert np.all((x >= 8) & (x <= 9))
        # mpmath quadrature
        assert spec.mean() == pytest.approx(8.121188992979797, abs=1e-9)
        assert abs(x.mean() - spec.mean()) < 3 * np.sqrt(spec.variance() / x.size)

    def test_symmetric(self):
        x = sample_truncated_normal(TruncNormSpec(0, 1, -1, 1), N, np.random.default_rng(7))
        assert abs(x.mean()) < 0.01
        assert TruncNormSpec(0, 1, -1, 1).mean() == pytest.approx(0.0, abs=1e-15)

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            TruncNormSpec(0, 0, 1, 2)
        with pytest.raises(ValueError):
            TruncNormSpec(0, 1, 2, 2)


class TestBeta:
    def test_moments(self):
        x = sample_beta(*BETA_SHAPE, N, np.random.default_rng(3))
        assert within_3se(x, BETA_MEAN, BETA_SD)
        assert x.std() == pytest.approx(BETA_SD, rel=0.02)

    def test_uniform(self):
        x = sample_beta(1, 1, N, np.random.default_rng(8))
        assert abs(x.mean() - 0.5) < 0.01
        assert x.var() == pytest.approx(1 / 12, rel=0.02)

    def test_support(self):
        x = sample_beta(*BETA_SHAPE, N, np.random.default_rng(4))
        assert np.all((x > 0) & (x < 1))

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            sample_beta(0, 1, 10, np.random.default_rng(0))


class TestCsimb:
    @pytest.mark.parametrize(
        "value, code", [(3.0, 1), (4.0, 0), (2.0, 1), (5.0, 0), (7.9, 1), (8.0, 0)]
    )
    def test_case_one_rule(self, value, code):
        assert gen_csimb(1, [value]).codes.tolist() == [code]

    def test_case_two_rule(self):
        assert gen_csimb(2, [6.4, 6.5, 8.4, 8.5]).codes.tolist() == [0, 1, 1, 0]

    def test_case_three_rule(self):
        assert gen_csimb(3, [2.4, 2.5, 3.5, 7.0]).codes.tolist() == [0, 1, 0, 1]

    def test_unknown_case(self):
        with pytest.raises(ValueError):
            gen_csimb(4, [1.0])


class TestSimb:
    def test_size_and_support(self):
        for case in SIM_CASES.values():
            x = gen_simb(case, np.random.default_rng(case.case_id))
            assert x.size == 1000
            assert x.min() >= 1 and x.max() <= 10

    def test_case_three_bimodal(self):
        x = gen_simb(SIM_CASES[3], np.random.default_rng(6), 20000)
        counts, edges = np.histogram(x, bins=18, range=(1, 10))
        left, right = counts[:9].max(), counts[9:].max()
        trough = counts[(edges[:-1] >= 4.5) & (edges[:-1] < 5.5)].min()
        assert edges[np.argmax(counts[:9])] == pytest.approx(2.5)
        assert edges[9 + np.argmax(counts[9:])] == pytest.approx(6.5)
        # at 5 each component sits 2.67 sd from its mode: about 8% of a peak bin
        assert trough < 0.15 * min(left, right)

    def test_reproducible(self):
        a = case_dataset(SIM_CASES[2], np.random.default_rng(11))
        b = case_dataset(SIM_CASES[2], np.random.default_rng(11))
        for name in a.columns:
            assert np.array_equal(a.columns[name], b.columns[name])


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-5, 5),
    st.floats(0.1, 3),
    st.floats(-4, 4),
    st.floats(0.05, 4),
    st.integers(0, 2**32 - 1),
)
def test_truncated_samples_stay_in_support(mu, sigma, a, width, seed):
    spec = TruncNormSpec(mu, sigma, a, a + width)
    x = sample_truncated_normal(spec, 200, np.random.default_rng(seed))
    assert np.all((x >= spec.a) & (x <= spec.b))


def test_study_is_reproducible_and_small_runs_work():
    a = run_simulation_study(3, iterations=3, grid_size=10, cases=(1,))
    b = run_simulation_study(3, iterations=3, grid_size=10, cases=(1,))
    assert np.array_equal(a.cases[0].result.aics, b.cases[0].result.aics)
    outcome = a.cases[0]
    assert outcome.model_aic("Model 1") - outcome.model_aic("Model 1", total=False) == (
        pytest.approx(outcome.result.null_aic)
    )
    with pytest.raises(KeyError):
        outcome.model_aic("Model 9")
