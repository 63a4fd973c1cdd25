import numpy as np
import pytest

from garchvb.evaluation import (accuracy, aic_bic, kde, kde_on_grid, silverman_bandwidth,
                                summary_stats)
from garchvb.exceptions import DegenerateSeries, InsufficientSamples


class TestKde:
    def test_normal_peak(self):
        x = np.random.default_rng(0).standard_normal(100_000)
        assert kde_on_grid(x, np.array([0.0]))[0] == pytest.approx(0.398942, abs=0.02)

    def test_integrates_to_one(self):
        x = np.random.default_rng(1).gamma(2.0, size=5000)
        assert kde(x).integral() == pytest.approx(1.0, abs=0.02)

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            kde(np.ones(100))

    def test_too_few(self):
        with pytest.raises(InsufficientSamples):
            kde(np.arange(5.0))

    def test_bandwidth_rule(self):
        x = np.random.default_rng(2).standard_normal(1000)
        iqr = np.subtract(*np.percentile(x, [75, 25]))
        expected = 0.9 * min(x.std(ddof=1), iqr / 1.34) * 1000 ** (-0.2)
        assert silverman_bandwidth(x) == pytest.approx(expected, rel=1e-12)

    def test_csv(self, tmp_path):
        grid = kde(np.random.default_rng(3).standard_normal(500), grid_size=64)
        grid.to_csv(tmp_path / "d.csv")
        lines = (tmp_path / "d.csv").read_text().splitlines()
        assert lines[0] == "x,density" and len(lines) == 65


class TestAccuracy:
    def test_identical(self):
        x = np.random.default_rng(4).standard_normal(5000)
        assert accuracy(x, x) > 99.5

    def test_disjoint(self):
        rng = np.random.default_rng(5)
        assert accuracy(rng.standard_normal(5000), 100 + rng.standard_normal(5000)) < 0.5

    def test_independent_same_law(self):
        rng = np.random.default_rng(6)
        assert accuracy(rng.standard_normal(100_000), rng.standard_normal(100_000)) >= 98

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(7)
        a, b = rng.standard_normal(2000), rng.normal(0.5, 1.2, 2000)
        assert accuracy(a, b) == pytest.approx(accuracy(b, a), abs=1e-9)
        assert 0 <= accuracy(a, b) <= 100

    def test_known_shift(self):
        # L1 distance between N(0,1) and N(d,1) is 2 * (2 Phi(d/2) - 1)
        from scipy.stats import norm

        rng = np.random.default_rng(8)
        d = 1.0
        expected = 100 * (1 - (2 * norm.cdf(d / 2) - 1))
        assert accuracy(rng.standard_normal(100_000), d + rng.standard_normal(100_000)) == \
            pytest.approx(expected, abs=1.5)


class TestInformationCriteria:
    @pytest.mark.parametrize("ll, k, aic, bic", [
        (-1077.72, 5, 2165.44, 2189.98),
        (-1128.23, 3, 2262.46, 2277.18),
    ])
    def test_reference_rows(self, ll, k, aic, bic):
        a, b = aic_bic(ll, k, 1000)
        assert a == pytest.approx(aic, abs=1e-9)
        assert b == pytest.approx(bic, abs=0.01)

    def test_trivial(self):
        assert aic_bic(0.0, 1, 1) == (2.0, 0.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            aic_bic(0.0, 0, 10)


class TestSummaryStats:
    def test_constant(self):
        with pytest.raises(DegenerateSeries):
            summary_stats(np.ones(10))

    def test_two_point(self):
        s = summary_stats(np.tile([1.0, -1.0], 50))
        assert s.skewness == pytest.approx(0.0, abs=1e-12)
        assert s.kurtosis == pytest.approx(1.0)
        assert (s.min, s.max, s.median) == (-1.0, 1.0, 0.0)

    def test_normal(self):
        s = summary_stats(np.random.default_rng(9).standard_normal(1_000_000))
        assert abs(s.skewness) < 0.01 and abs(s.kurtosis - 3) < 0.03
