"""Tests for parameter sweeps and their output files."""

import csv
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.engine.sweep import (
    CSV_COLUMNS,
    figure_sweep,
    parse_values,
    rows_to_csv,
    rows_to_gnuplot,
    sweep,
    write_csv,
    write_gnuplot,
)
from src.utils.config import ConfigManager, ExperimentConfig
from src.utils.errors import ConfigError


@pytest.fixture
def base():
    """A config small enough to sweep in a test."""
    return ExperimentConfig(cr_count=12, pr_count=8, cmr_count=2, channels=2, slots=20, messages=2,
                            selection_slots=3, area_width=400.0, area_height=400.0, replications=1,
                            pr_data_rate=0.5, seed=9)


# every CR hears the single PR, which has data from the first slot on
TINY = dict(area_width=100.0, area_height=100.0, cr_count=3, pr_count=1, cmr_count=1, channels=2, slots=8,
            messages=1, selection_slots=1, pr_data_rate=1.0, replications=1)

AXIS_VALUES = st.one_of(
    st.tuples(st.just("ttl_init"), st.lists(st.integers(1, 6), min_size=1, max_size=3)),
    st.tuples(st.just("cmr_count"), st.lists(st.integers(1, 2), min_size=1, max_size=3)),
    st.tuples(st.just("channels"), st.lists(st.integers(1, 3), min_size=1, max_size=3)),
    st.tuples(st.just("occupancy_prob"), st.lists(st.sampled_from([0.0, 0.25, 0.5, 1.0]), min_size=1, max_size=3)),
    st.tuples(st.just("mode"), st.lists(st.sampled_from(["multi_hop", "single_hop"]), min_size=1, max_size=2)),
)


class TestParseValues:
    """Tests for sweep value lists."""

    def test_inclusive_range(self):
        assert parse_values("1:10") == [str(v) for v in range(1, 11)]

    def test_comma_list(self):
        assert parse_values(" surf, rd ") == ["surf", "rd"]

    @pytest.mark.parametrize("text", ["5:1", "a:b", " , "])
    def test_bad_values(self, text):
        with pytest.raises(ConfigError) as info:
            parse_values(text)
        assert info.value.field == "values"


class TestSweep:
    """Tests for sweep() and figure_sweep()."""

    @pytest.mark.parametrize("axis", ["speed", "seed", "replications"])
    def test_rejected_axis(self, base, axis):
        with pytest.raises(ConfigError) as info:
            sweep(base, axis, [1])
        assert info.value.field == "axis"

    def test_cmr_count_axis(self, base):
        rows = sweep(base, "cmr_count", parse_values("1:10"))
        assert [row.value for row in rows] == list(range(1, 11))
        assert all(row.config.seed == base.seed for row in rows)
        assert rows[0].series == "surf-2"

    def test_bad_value_for_axis(self, base):
        with pytest.raises(ConfigError) as info:
            sweep(base, "channels", ["0"])
        assert info.value.field == "channels"

    def test_figure_series(self, base):
        rows = figure_sweep(base, "cmr_count", ["1", "2"])
        assert [row.series for row in rows[::2]] == ["surf-5", "surf-15", "rd-5", "rd-15"]
        assert len(rows) == 8

    def test_deterministic(self, base):
        assert rows_to_csv(sweep(base, "ttl_init", ["1", "4"])) == rows_to_csv(sweep(base, "ttl_init", ["1", "4"]))

    def test_workers_do_not_change_rows(self, base):
        parallel = ConfigManager.with_updates(base, {"workers": 2})
        values = ["1", "2", "3"]
        assert rows_to_csv(sweep(parallel, "cmr_count", values)) == rows_to_csv(sweep(base, "cmr_count", values))

    def test_parallel_figure_sweep(self, base):
        parallel = ConfigManager.with_updates(base, {"workers": 3})
        rows = figure_sweep(parallel, "cmr_count", ["1", "2"], channel_counts=(2,))
        assert rows_to_csv(rows) == rows_to_csv(figure_sweep(base, "cmr_count", ["1", "2"], channel_counts=(2,)))


class TestOutputs:
    """Tests for the CSV and gnuplot writers."""

    def test_csv_columns(self, base):
        rows = sweep(base, "cmr_count", ["1", "3"])
        records = list(csv.DictReader(io.StringIO(rows_to_csv(rows))))
        assert list(records[0]) == CSV_COLUMNS
        assert [r["value"] for r in records] == ["1", "3"]
        assert records[0]["strategy"] == "surf"
        assert records[0]["mode"] == "multi_hop"
        for record in records:
            ratio = float(record["mean_delivery_ratio_cmr_neighbor"])
            assert 0.0 <= ratio <= 1.0
            assert float(record["sd_delivery_ratio_cmr_neighbor"]) == 0.0

    def test_gnuplot_table(self, base):
        rows = figure_sweep(base, "cmr_count", ["1", "2"], strategies=("surf", "rd"), channel_counts=(2,))
        lines = rows_to_gnuplot(rows).splitlines()
        assert lines[0] == "# delivery_ratio_cmr_neighbor"
        assert lines[1] == "# cmr_count surf-2_mean surf-2_sd rd-2_mean rd-2_sd"
        assert [line.split()[0] for line in lines[2:]] == ["1", "2"]
        assert all(len(line.split()) == 5 for line in lines[2:])

    def test_gnuplot_unknown_metric(self, base):
        with pytest.raises(ConfigError):
            rows_to_gnuplot([], metric="throughput")

    def test_files_written(self, base, tmp_path):
        rows = sweep(base, "cmr_count", ["2"])
        csv_path = write_csv(rows, tmp_path / "out" / "sweep.csv")
        dat_path = write_gnuplot(rows, tmp_path / "out" / "sweep.dat")
        assert csv_path.read_text() == rows_to_csv(rows)
        assert dat_path.read_text().startswith("# delivery_ratio_cmr_neighbor")


class TestSweepDeterminism:
    """A sweep is a pure function of its base config, axis and values."""

    @settings(max_examples=1000, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**31),
        strategy=st.sampled_from(["surf", "rd"]),
        axis_values=AXIS_VALUES,
    )
    def test_identical_csv(self, seed, strategy, axis_values):
        axis, values = axis_values
        base = ExperimentConfig(**{**TINY, "seed": seed, "strategy": strategy})
        raw = [str(v) for v in values]
        assert rows_to_csv(sweep(base, axis, raw)) == rows_to_csv(sweep(base, axis, raw))
