import numpy as np
import pytest

from garchvb.data import Source, load_returns, prices_to_returns, write_returns
from garchvb.exceptions import DegenerateSeries, ParseError


class TestPrices:
    def test_equal_prices(self):
        np.testing.assert_array_equal(prices_to_returns([100.0, 100.0]), [0.0])

    def test_percent_scaling(self):
        assert prices_to_returns([100.0, 101.0])[0] == pytest.approx(100 * np.log(1.01))
        assert prices_to_returns([100.0, 101.0])[0] == pytest.approx(0.995033, abs=1e-6)
        assert prices_to_returns([100.0, 101.0], scale_percent=False)[0] == pytest.approx(
            np.log(1.01))

    def test_non_positive(self):
        with pytest.raises(ValueError):
            prices_to_returns([1.0, 0.0])


class TestLoad:
    def write(self, tmp_path, text, name="r.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_returns_with_header(self, tmp_path):
        s = load_returns(self.write(tmp_path, "return\n0.1\n-0.2\n0.3\n"))
        np.testing.assert_allclose(s.values, [0.1, -0.2, 0.3])
        assert s.source is Source.RETURNS and s.label == "r"

    def test_headerless(self, tmp_path):
        assert len(load_returns(self.write(tmp_path, "1\n2\n3\n"))) == 3

    def test_price_header_converts(self, tmp_path):
        s = load_returns(self.write(tmp_path, "price\n100\n101\n102\n103\n"))
        assert s.source is Source.PRICES_CONVERTED and len(s) == 3
        assert s.values[0] == pytest.approx(100 * np.log(1.01))

    def test_prices_flag(self, tmp_path):
        s = load_returns(self.write(tmp_path, "100\n101\n102\n103\n"), prices=True,
                         scale_percent=False)
        assert s.values[0] == pytest.approx(np.log(1.01))

    def test_non_numeric_row_named(self, tmp_path):
        with pytest.raises(ParseError, match="row 3") as err:
            load_returns(self.write(tmp_path, "return\n0.1\nabc\n0.3\n"))
        assert err.value.row == 3

    def test_missing_value(self, tmp_path):
        with pytest.raises(ParseError, match="row 2"):
            load_returns(self.write(tmp_path, "0.1\n\n0.3\n0.4\n"))

    def test_nan_value(self, tmp_path):
        with pytest.raises(ParseError, match="row 2"):
            load_returns(self.write(tmp_path, "0.1\nnan\n0.3\n"))

    def test_extra_column(self, tmp_path):
        with pytest.raises(ParseError):
            load_returns(self.write(tmp_path, "0.1\n0.2,0.3\n0.3\n"))

    def test_too_short(self, tmp_path):
        with pytest.raises(DegenerateSeries):
            load_returns(self.write(tmp_path, "return\n0.1\n0.2\n"))

    def test_missing_file_named(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="nope.csv"):
            load_returns(tmp_path / "nope.csv")

    def test_write_round_trip(self, tmp_path):
        y = np.random.default_rng(0).standard_normal(20)
        write_returns(tmp_path / "sub" / "y.csv", y)
        np.testing.assert_array_equal(load_returns(tmp_path / "sub" / "y.csv").values, y)
