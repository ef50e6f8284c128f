"""Table ingestion, analysis reports, and their serialization."""

import math

import numpy as np
import pytest

from signedknockoff.analysis import (
    AnalysisReport,
    analyze,
    read_report,
    statistic_boundary,
    table_signed_p,
    write_curve_csv,
    write_report,
)
from signedknockoff.special import normal_quantile, t_quantile
from signedknockoff.tables import (
    MODE_PVALUES,
    MODE_STATISTICS,
    StatTable,
    TableParseError,
    read_stat_table,
)

STAT_CSV = """id,stat,df
gene1,2.3,4
gene2,-1.1,
gene3,0.5,4
"""

PVAL_CSV = """id,p,sign
a,0.01,+1
b,0.5,-1
c,0.9,1
"""


def write(tmp_path, text, name="table.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def toy_table(tmp_path):
    """20 mild null statistics plus one strong positive and one strong negative."""
    nulls = np.round(np.linspace(-1.5, 1.5, 20), 6)
    rows = ["id,stat"]
    rows += [f"g{i:02d},{v}" for i, v in enumerate(nulls)]
    rows += ["g20,10.0", "g21,-10.0"]
    return read_stat_table(write(tmp_path, "\n".join(rows) + "\n"))


class TestReadStatTable:
    def test_statistics_mode(self, tmp_path):
        table = read_stat_table(write(tmp_path, STAT_CSV))
        assert table.mode == MODE_STATISTICS
        assert table.ids == ("gene1", "gene2", "gene3")
        np.testing.assert_allclose(table.statistics, [2.3, -1.1, 0.5])
        np.testing.assert_allclose(table.df, [4.0, np.nan, 4.0])
        assert table.p_values is None

    def test_pvalue_mode(self, tmp_path):
        table = read_stat_table(write(tmp_path, PVAL_CSV))
        assert table.mode == MODE_PVALUES
        np.testing.assert_allclose(table.p_values, [0.01, 0.5, 0.9])
        np.testing.assert_array_equal(table.signs, [1, -1, 1])
        assert table.statistics is None

    def test_tab_delimited_identical(self, tmp_path):
        comma = read_stat_table(write(tmp_path, STAT_CSV, "a.csv"))
        tabbed = read_stat_table(write(tmp_path, STAT_CSV.replace(",", "\t"), "b.tsv"))
        assert comma.ids == tabbed.ids
        np.testing.assert_array_equal(comma.statistics, tabbed.statistics)
        np.testing.assert_array_equal(comma.df, tabbed.df)

    def test_explicit_delimiter_override(self, tmp_path):
        # a comma-free header would sniff wrong without the override
        path = write(tmp_path, "id\tstat\nx\t1.5\n")
        table = read_stat_table(path, delimiter="\t")
        assert table.ids == ("x",)

    def test_header_case_and_extra_columns(self, tmp_path):
        table = read_stat_table(write(tmp_path, "ID,Note,STAT\na,keep,1.0\n"))
        assert table.ids == ("a",)
        np.testing.assert_allclose(table.statistics, [1.0])

    def test_blank_rows_skipped(self, tmp_path):
        table = read_stat_table(write(tmp_path, "id,stat\na,1.0\n\nb,2.0\n"))
        assert table.ids == ("a", "b")

    def test_p_out_of_range_names_line(self, tmp_path):
        with pytest.raises(TableParseError, match="line 3") as info:
            read_stat_table(write(tmp_path, "id,p,sign\na,0.5,+1\nb,1.2,-1\n"))
        assert info.value.line == 3
        assert "1.2" in str(info.value)

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("stat,df\n1.0,4\n", "id"),
            ("id,stat,p,sign\na,1,0.5,+1\n", "both"),
            ("id,stat,sign\na,1,+1\n", "sign"),
            ("id,p\na,0.5\n", "sign"),
            ("id,p,sign,df\na,0.5,+1,4\n", "df"),
            ("id,value\na,1\n", "stat"),
            ("id,stat,stat\na,1,2\n", "duplicate"),
        ],
    )
    def test_header_errors(self, tmp_path, text, fragment):
        with pytest.raises(TableParseError, match=fragment):
            read_stat_table(write(tmp_path, text))

    @pytest.mark.parametrize(
        "text,line,fragment",
        [
            ("id,stat\na,1.0\nb\n", 3, "expected 2 fields"),
            ("id,stat\n,1.0\n", 2, "empty id"),
            ("id,stat\na,1.0\na,2.0\n", 3, "duplicate id 'a'"),
            ("id,stat\na,inf\n", 2, "finite"),
            ("id,stat\na,abc\n", 2, "not a number"),
            ("id,stat,df\na,1.0,0\n", 2, "df must be positive"),
            ("id,p,sign\na,0.5,2\n", 2, "sign"),
        ],
    )
    def test_row_errors_carry_line_numbers(self, tmp_path, text, line, fragment):
        with pytest.raises(TableParseError, match=fragment) as info:
            read_stat_table(write(tmp_path, text))
        assert info.value.line == line

    def test_duplicate_id_names_first_line(self, tmp_path):
        with pytest.raises(TableParseError, match="first seen on line 2"):
            read_stat_table(write(tmp_path, "id,stat\na,1.0\na,2.0\n"))

    def test_empty_and_header_only(self, tmp_path):
        with pytest.raises(TableParseError, match="empty"):
            read_stat_table(write(tmp_path, ""))
        with pytest.raises(TableParseError, match="no data rows"):
            read_stat_table(write(tmp_path, "id,stat\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(TableParseError, match="cannot read"):
            read_stat_table(tmp_path / "absent.csv")


class TestCommonDf:
    def test_all_normal_is_nan(self, tmp_path):
        table = read_stat_table(write(tmp_path, "id,stat\na,1\nb,2\n"))
        assert math.isnan(table.common_df())

    def test_shared_df(self, tmp_path):
        table = read_stat_table(write(tmp_path, "id,stat,df\na,1,4\nb,2,4\n"))
        assert table.common_df() == 4.0

    def test_mixed_is_none(self, tmp_path):
        table = read_stat_table(write(tmp_path, "id,stat,df\na,1,4\nb,2,\n"))
        assert table.common_df() is None
        table = read_stat_table(write(tmp_path, "id,stat,df\na,1,4\nb,2,6\n"))
        assert table.common_df() is None

    def test_pvalue_mode_is_none(self, tmp_path):
        table = read_stat_table(write(tmp_path, PVAL_CSV))
        assert table.common_df() is None


class TestTableSignedP:
    def test_statistics_mode(self, tmp_path):
        table = read_stat_table(write(tmp_path, STAT_CSV))
        p, q = table_signed_p(table)
        assert np.all((p > 0) & (p < 1))
        np.testing.assert_array_equal(np.sign(q), [1, -1, 1])
        np.testing.assert_allclose(np.abs(q), 1.0 - p)

    def test_pvalue_mode(self, tmp_path):
        table = read_stat_table(write(tmp_path, PVAL_CSV))
        p, q = table_signed_p(table)
        np.testing.assert_allclose(q, [0.99, -0.5, 0.1], atol=1e-12)

    def test_extreme_statistic_clamped_inside(self, tmp_path):
        table = read_stat_table(write(tmp_path, "id,stat\na,60\nb,-60\n"))
        p, q = table_signed_p(table)
        assert np.all(np.abs(q) < 1.0)
        assert np.all(p > 0.0)


class TestStatisticBoundary:
    def test_normal_scale(self):
        assert statistic_boundary(0.9, math.nan) == pytest.approx(normal_quantile(0.95))
        assert statistic_boundary(-0.9, math.nan) == pytest.approx(-normal_quantile(0.95))

    def test_t_scale(self):
        assert statistic_boundary(0.9, 4.0) == pytest.approx(t_quantile(0.95, 4.0))

    def test_degenerate_boundaries(self):
        assert statistic_boundary(1.0, math.nan) is None
        assert statistic_boundary(-1.0, 4.0) is None


class TestAnalyze:
    def test_toy_extremes_rejected(self, tmp_path):
        report = analyze(toy_table(tmp_path), alpha=0.5, strategy="nearest")
        ids = {row["id"]: row["side"] for row in report.rejected}
        assert ids["g20"] == "positive"
        assert ids["g21"] == "negative"
        assert report.stopped_by == "fdr_threshold"
        assert report.n_rejected == report.n_pos_rejected + report.n_neg_rejected

    def test_unreachable_level_reports_empty(self, tmp_path):
        report = analyze(toy_table(tmp_path), alpha=0.2, strategy="nearest")
        assert report.rejected == []
        assert report.n_rejected == 0
        assert report.stopped_by == "exhaustion"
        # still serializes round-trip
        assert AnalysisReport.from_json(report.to_json()) == report

    def test_left_skewed_boundaries(self):
        # signal mostly negative: the negative rejection threshold ends up
        # less extreme than the positive one on the statistic scale
        rng = np.random.default_rng(31)
        stats = np.concatenate(
            [rng.normal(-4, 0.5, 15), rng.normal(4, 0.5, 3), rng.normal(0, 1, 30)]
        )
        table = StatTable(
            ids=tuple(f"r{i:02d}" for i in range(stats.size)),
            mode=MODE_STATISTICS,
            statistics=stats,
            df=np.full(stats.size, np.nan),
        )
        report = analyze(table, alpha=0.2, strategy="lfdr")
        assert report.n_neg_rejected > report.n_pos_rejected
        bounds = report.stat_boundaries
        assert abs(bounds["neg"]) < bounds["pos"]

    def test_mixed_df_omits_stat_boundaries(self, tmp_path):
        table = read_stat_table(write(tmp_path, "id,stat,df\na,3,4\nb,-2,\nc,1,4\nd,-1,4\n"))
        report = analyze(table, alpha=0.5, strategy="nearest")
        assert report.stat_boundaries is None
        assert any("mixed reference" in note for note in report.warnings)

    def test_strategy_echo_and_seed(self, tmp_path):
        report = analyze(
            toy_table(tmp_path),
            alpha=0.5,
            strategy="lfdr",
            strategy_options={"refit_interval": math.inf},
            seed=7,
        )
        assert report.strategy == {"name": "lfdr", "refit_interval": "once"}
        assert report.seed == 7
        assert report.mixture is not None
        assert 0.0 <= report.mixture["pi0"] <= 1.0
        report.to_json()  # must not contain NaN/inf

    def test_boundary_consistency_random_tables(self):
        # the statistic-scale boundaries must reproduce the rejection set
        # (up to quantile round-trip noise at the boundary itself)
        rng = np.random.default_rng(77)
        for _ in range(100):
            stats = rng.normal(0, 2, 24)
            table = StatTable(
                ids=tuple(str(i) for i in range(24)),
                mode=MODE_STATISTICS,
                statistics=stats,
                df=np.full(24, np.nan),
            )
            alpha = float(rng.uniform(0.05, 0.8))
            report = analyze(table, alpha=alpha, strategy="nearest")
            rejected = {row["id"] for row in report.rejected}
            bounds = report.stat_boundaries
            hi = math.inf if bounds["pos"] is None else bounds["pos"]
            lo = -math.inf if bounds["neg"] is None else bounds["neg"]
            strict = {str(i) for i in range(24) if stats[i] > hi + 1e-9 or stats[i] < lo - 1e-9}
            loose = {str(i) for i in range(24) if stats[i] > hi - 1e-9 or stats[i] < lo + 1e-9}
            assert strict <= rejected <= loose

    def test_sweep_rows(self, tmp_path):
        alphas = np.linspace(0.05, 0.95, 20)
        report = analyze(toy_table(tmp_path), alpha=0.5, strategy="nearest", sweep_alphas=list(alphas))
        assert len(report.sweep) == 20
        np.testing.assert_allclose([row["alpha"] for row in report.sweep], alphas)
        for row in report.sweep:
            assert row["total"] == row["neg"] + row["pos"]


class TestSerialization:
    def test_write_read_write_byte_stable(self, tmp_path):
        report = analyze(toy_table(tmp_path), alpha=0.5, strategy="nearest", sweep_alphas=[0.2, 0.5])
        first = tmp_path / "report.json"
        write_report(report, first)
        loaded = read_report(first)
        assert loaded == report
        second = tmp_path / "again.json"
        write_report(loaded, second)
        assert first.read_bytes() == second.read_bytes()

    def test_curve_csv_schema(self, tmp_path):
        report = analyze(
            toy_table(tmp_path), alpha=0.5, strategy="nearest",
            sweep_alphas=list(np.linspace(0.05, 0.95, 20)),
        )
        path = tmp_path / "curves.csv"
        write_curve_csv(report.sweep, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "alpha,total,neg,pos"
        assert len(lines) == 21

    def test_write_errors_name_the_path(self, tmp_path):
        report = analyze(toy_table(tmp_path), alpha=0.5, strategy="nearest")
        target = tmp_path / "missing" / "report.json"
        with pytest.raises(OSError, match="report.json"):
            write_report(report, target)
        with pytest.raises(OSError, match="absent.json"):
            read_report(tmp_path / "absent.json")
