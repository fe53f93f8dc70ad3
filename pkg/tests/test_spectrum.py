"""Tests for channels, PR activity and spectrum sensing."""

import numpy as np
import pytest

from src.spectrum.channels import PrActivity, build_channels, uniform_channels
from src.spectrum.sensing import SpectrumModel, sense_spectrum
from src.utils.config import ExperimentConfig
from src.utils.errors import InvalidArgumentError
from src.utils.seeding import STREAM_PR_ACTIVITY, stream
from tests.helpers import deployment, node, pr_at


def observer_with_prs(prs, channels=5, seed=3):
    dep = deployment([node(0, "cr", x=500.0, y=500.0, range_m=100.0)] + list(prs), seed=seed)
    model = SpectrumModel(dep, uniform_channels(channels if isinstance(channels, list) else [0.0] * channels))
    return dep, model


class TestChannels:
    """Tests for the channel set."""

    def test_center_frequencies(self):
        """Channel i is centered at base + (i + 0.5) * bandwidth."""
        config = ExperimentConfig(channels=3, base_frequency_mhz=470.0, channel_bandwidth_mhz=6.0)
        channels = build_channels(config)
        assert [c.frequency_mhz for c in channels] == [473.0, 479.0, 485.0]
        assert channels[0].frequency_label == "473.0MHz"

    def test_per_channel_occupancy(self):
        config = ExperimentConfig(channels=2, occupancy_prob=[0.2, 0.8])
        assert [c.occupancy_prob for c in build_channels(config)] == [0.2, 0.8]


class TestPrActivity:
    """Tests for the per-slot ON/OFF process."""

    def test_replayable_from_seed(self):
        a = PrActivity(11, [4, 9], [0.5, 0.3]).matrix(500)
        b = PrActivity(11, [4, 9], [0.5, 0.3]).matrix(500)
        assert np.array_equal(a, b)

    def test_independent_of_draw_order(self):
        """Asking for slot 900 first gives the same value as walking up to it."""
        lazy = PrActivity(5, [7], [0.4])
        late = lazy.is_active(7, 900)
        eager = PrActivity(5, [7], [0.4]).matrix(2000)
        assert late == bool(eager[0, 900])

    def test_matches_direct_bernoulli_draws(self):
        """Slot t of PR n is the t-th draw of its own stream."""
        draws = stream(2, STREAM_PR_ACTIVITY, 13).random(1024)
        activity = PrActivity(2, [13], [0.5]).matrix(1024)[0]
        assert np.array_equal(activity, draws < 0.5)

    def test_monotone_in_occupancy(self):
        """Raising occupancy_prob only turns idle slots active."""
        low = PrActivity(8, [1, 2], [0.3, 0.3]).matrix(3000)
        high = PrActivity(8, [1, 2], [0.7, 0.7]).matrix(3000)
        assert not np.any(low & ~high)
        assert high.sum() > low.sum()

    def test_mismatched_lengths(self):
        with pytest.raises(InvalidArgumentError):
            PrActivity(1, [1, 2], [0.5])


class TestChannelBusy:
    """Tests for the busy predicate."""

    def test_zero_occupancy_never_busy(self):
        dep = deployment([node(0, "cr", 0.0), pr_at(1, 10.0, channel=0)])
        model = SpectrumModel(dep, uniform_channels([0.0]))
        assert not any(model.channel_busy(0, t, (0.0, 0.0), 100.0) for t in range(200))

    def test_out_of_range_pr_is_ignored(self):
        dep = deployment([node(0, "cr", 0.0), pr_at(1, 150.0, channel=0)])
        model = SpectrumModel(dep, uniform_channels([1.0]))
        assert not model.channel_busy(0, 5, (0.0, 0.0), 100.0)

    def test_in_range_saturated_pr_dominates(self):
        dep = deployment([node(0, "cr", 0.0), pr_at(1, 50.0, channel=0), pr_at(2, 900.0, channel=0)])
        model = SpectrumModel(dep, uniform_channels([1.0]))
        assert all(model.channel_busy(0, t, (0.0, 0.0), 100.0) for t in range(100))

    def test_other_channel_not_busy(self):
        dep = deployment([node(0, "cr", 0.0), pr_at(1, 50.0, channel=1)])
        model = SpectrumModel(dep, uniform_channels([1.0, 1.0]))
        assert not model.channel_busy(0, 3, (0.0, 0.0), 100.0)
        assert model.channel_busy(1, 3, (0.0, 0.0), 100.0)

    def test_unknown_channel(self):
        dep = deployment([node(0, "cr", 0.0)])
        model = SpectrumModel(dep, uniform_channels([0.5]))
        with pytest.raises(InvalidArgumentError):
            model.channel_busy(4, 0, (0.0, 0.0), 10.0)


class TestSenseSpectrum:
    """Tests for sense_spectrum."""

    def test_no_prs_in_range(self):
        dep, model = observer_with_prs([pr_at(1, 10.0, channel=2, y=10.0)], channels=[1.0] * 5)
        observations = sense_spectrum(model, dep.node(0), 0, 10)
        assert [o.utilization for o in observations] == [0.0] * 5

    def test_saturated_channel(self):
        dep, model = observer_with_prs([pr_at(1, 520.0, channel=3, y=500.0)], channels=[0.0, 0.0, 0.0, 1.0, 0.0])
        observations = sense_spectrum(model, dep.node(0), 0, 10)
        assert [o.utilization for o in observations] == [0.0, 0.0, 0.0, 1.0, 0.0]
        assert observations[3].busy_slots == 10
        assert observations[3].window == range(0, 10)

    def test_long_run_mean(self):
        dep, model = observer_with_prs([pr_at(1, 520.0, channel=0, y=500.0)], channels=[0.5])
        observation = sense_spectrum(model, dep.node(0), 0, 10_000)[0]
        assert observation.utilization == pytest.approx(0.5, abs=0.02)

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_equals_recount_of_channel_busy(self, seed):
        """Utilization is exactly the mean of channel_busy over the window."""
        prs = [pr_at(1, 540.0, channel=0, y=500.0), pr_at(2, 470.0, channel=1, y=520.0),
               pr_at(3, 505.0, channel=1, y=450.0)]
        dep, model = observer_with_prs(prs, channels=[0.4, 0.7], seed=seed)
        observer = dep.node(0)
        start, dwell = 37, 25
        for obs in sense_spectrum(model, observer, start, dwell):
            recount = sum(
                model.channel_busy(obs.channel_id, t, observer.position, observer.range_m)
                for t in range(start, start + dwell)
            )
            assert obs.utilization == recount / dwell

    def test_deterministic(self):
        prs = [pr_at(1, 540.0, channel=0, y=500.0)]
        first = sense_spectrum(observer_with_prs(prs, channels=[0.5], seed=9)[1], node(0, "cr", 500.0, 500.0), 0, 50)
        second = sense_spectrum(observer_with_prs(prs, channels=[0.5], seed=9)[1], node(0, "cr", 500.0, 500.0), 0, 50)
        assert first == second

    def test_zero_dwell(self):
        dep, model = observer_with_prs([])
        with pytest.raises(InvalidArgumentError):
            sense_spectrum(model, dep.node(0), 0, 0)

    def test_negative_slot(self):
        dep, model = observer_with_prs([])
        with pytest.raises(InvalidArgumentError):
            sense_spectrum(model, dep.node(0), -1, 5)


class TestDecisionWindow:
    """Tests for the pre-decision sensing window."""

    def test_first_slot(self):
        _, model = observer_with_prs([])
        assert model.decision_window(0, 10) == (0, 1)

    def test_short_history(self):
        _, model = observer_with_prs([])
        assert model.decision_window(4, 10) == (0, 4)

    def test_full_dwell(self):
        _, model = observer_with_prs([])
        assert model.decision_window(30, 10) == (20, 30)
