import math

import numpy as np
import pytest

from rislink import ElementPattern, PatternError, format_pattern_table, parse_pattern_table

BASIC = """\
m,azimuth_deg,gain_dbi
1,-90,-inf
1,0,5
1,90,-inf
m,smm_re,smm_im
1,0.1,-0.05
"""


class TestParse:
    def test_basic_table(self):
        patterns = parse_pattern_table(BASIC)
        assert len(patterns) == 1
        pat = patterns[0]
        assert pat.index_m == 1
        assert pat.gain(0.0) == pytest.approx(10 ** 0.5, rel=1e-12)
        assert pat.gain(math.radians(90)) == 0.0
        assert pat.s_mm == 0.1 - 0.05j

    def test_order_insensitive(self):
        shuffled = (
            "m,azimuth_deg,gain_dbi\n"
            "1,90,-inf\n1,-90,-inf\n1,0,5\n"
            "m,smm_re,smm_im\n1,0.1,-0.05\n"
        )
        a = parse_pattern_table(BASIC)[0]
        b = parse_pattern_table(shuffled)[0]
        assert np.array_equal(a.azimuth_rad, b.azimuth_rad)
        assert np.array_equal(a.gain_lin, b.gain_lin)

    def test_db_to_linear(self):
        text = "m,azimuth_deg,gain_dbi\n1,-90,-3.0103\n1,90,-3.0103\nm,smm_re,smm_im\n1,0,0\n"
        pat = parse_pattern_table(text)[0]
        # Oracle: 10^(dB/10).
        assert pat.gain(0.3) == pytest.approx(10 ** (-3.0103 / 10), rel=1e-12)
        assert pat.gain(0.3) == pytest.approx(0.5, abs=1e-6)

    def test_multiple_elements_sorted(self):
        text = (
            "m,azimuth_deg,gain_dbi\n"
            "2,-90,0\n2,90,0\n1,-90,3\n1,90,3\n"
            "m,smm_re,smm_im\n2,0,0\n1,0,0\n"
        )
        patterns = parse_pattern_table(text)
        assert [p.index_m for p in patterns] == [1, 2]

    def test_comments_and_blanks_ignored(self):
        text = "# pattern export\n\n" + BASIC
        assert parse_pattern_table(text)[0].index_m == 1


class TestParseErrors:
    def test_coverage_gap(self):
        text = "m,azimuth_deg,gain_dbi\n1,-45,0\n1,90,0\nm,smm_re,smm_im\n1,0,0\n"
        with pytest.raises(PatternError, match="covers"):
            parse_pattern_table(text)

    def test_duplicate_azimuth(self):
        text = "m,azimuth_deg,gain_dbi\n1,-90,0\n1,-90,1\n1,90,0\nm,smm_re,smm_im\n1,0,0\n"
        with pytest.raises(PatternError, match="duplicate azimuth"):
            parse_pattern_table(text)

    def test_missing_smm(self):
        text = "m,azimuth_deg,gain_dbi\n1,-90,0\n1,90,0\nm,smm_re,smm_im\n"
        with pytest.raises(PatternError, match="missing s_mm"):
            parse_pattern_table(text)

    def test_orphan_smm(self):
        text = "m,azimuth_deg,gain_dbi\n1,-90,0\n1,90,0\nm,smm_re,smm_im\n1,0,0\n7,0,0\n"
        with pytest.raises(PatternError, match="without gain"):
            parse_pattern_table(text)

    def test_duplicate_smm(self):
        text = "m,azimuth_deg,gain_dbi\n1,-90,0\n1,90,0\nm,smm_re,smm_im\n1,0,0\n1,0,0\n"
        with pytest.raises(PatternError, match="duplicate s_mm"):
            parse_pattern_table(text)

    def test_missing_header(self):
        with pytest.raises(PatternError, match="expected header"):
            parse_pattern_table("1,-90,0\n")

    def test_positive_infinite_gain_rejected(self):
        text = "m,azimuth_deg,gain_dbi\n1,-90,inf\n1,90,0\nm,smm_re,smm_im\n1,0,0\n"
        with pytest.raises(PatternError, match="inf"):
            parse_pattern_table(text)

    def test_bad_cell(self):
        text = "m,azimuth_deg,gain_dbi\n1,abc,0\nm,smm_re,smm_im\n1,0,0\n"
        with pytest.raises(PatternError, match="invalid numeric"):
            parse_pattern_table(text)

    def test_empty_table(self):
        with pytest.raises(PatternError, match="no gain rows"):
            parse_pattern_table("m,azimuth_deg,gain_dbi\nm,smm_re,smm_im\n")


class TestFormat:
    def test_round_trip(self):
        original = [
            ElementPattern(2, np.radians([-90.0, -10.0, 45.0, 90.0]), np.array([0.0, 1.2, 3.4, 0.5]), 0.2 + 0.1j),
            ElementPattern(1, np.radians([-90.0, 0.0, 90.0]), np.array([1.0, 2.0, 1.0]), -0.3j),
        ]
        again = parse_pattern_table(format_pattern_table(original))
        assert [p.index_m for p in again] == [1, 2]
        by_m = {p.index_m: p for p in again}
        for pat in original:
            back = by_m[pat.index_m]
            np.testing.assert_allclose(back.azimuth_rad, pat.azimuth_rad, rtol=1e-12)
            np.testing.assert_allclose(back.gain_lin, pat.gain_lin, rtol=1e-12, atol=1e-300)
            assert back.s_mm == pat.s_mm
