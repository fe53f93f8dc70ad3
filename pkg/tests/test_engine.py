"""Tests for the simulation loop and seeded replications."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.engine.simulation import Simulation, run, run_many, run_replication
from src.engine.sweep import SweepRow, rows_to_csv
from src.protocol.messages import TerminalState
from src.tracking.event_log import EventKind, EventLog
from src.tracking.replay import replay
from src.utils.config import ExperimentConfig
from src.utils.errors import UndefinedMetricError
from tests.helpers import deployment, line, node, pr_at

SMALL = dict(cr_count=12, pr_count=8, cmr_count=2, channels=2, slots=30, messages=2, selection_slots=5,
             area_width=400.0, area_height=400.0, replications=1, pr_data_rate=0.5)


def chain_config(**updates):
    """One CR next to one CMR next to the portal, a PR next to the CR, quiet spectrum."""
    values = dict(channels=1, occupancy_prob=0.0, pr_data_rate=1.0, messages=1, ttl_init=2, slots=50,
                  selection_slots=5, replications=1, cr_count=1, pr_count=1, cmr_count=1)
    values.update(updates)
    return ExperimentConfig(**values)


def chain():
    return line(["portal", "cmr", "cr"], extra=[pr_at(3, 200.0, channel=0)])


def csv_of(config, metrics):
    return rows_to_csv([SweepRow("none", "-", config, metrics)])


class TestSimulation:
    """Tests for single replications on hand-built deployments."""

    @pytest.mark.parametrize("mode", ["multi_hop", "single_hop"])
    def test_degenerate_chain_delivers(self, mode):
        result = Simulation(chain_config(mode=mode), seed=3, deployment=chain()).run()
        [message] = result.messages
        assert message.terminal == TerminalState.REACHED_PORTAL
        assert message.origin_pr == 3
        assert message.hops_to_cmr == 1
        assert result.metrics.injected == 1
        assert result.metrics.delivery_ratio_cmr_neighbor == 1.0
        assert result.metrics.delivery_ratio_cmr == 1.0
        assert result.metrics.delivery_ratio_portal == 1.0
        assert result.metrics.mean_hops_to_cmr == 1.0

    def test_injection_waits_for_selection(self):
        config = chain_config()
        result = Simulation(config, seed=3, deployment=chain()).run()
        assert result.messages[0].injected_slot == config.warmup_slots

    def test_cut_off_cmr_leaves_message_stuck(self):
        dep = deployment([node(0, "portal", 600.0), node(1, "cmr", 90.0), node(2, "cr", 170.0),
                          pr_at(3, 200.0, channel=0)])
        result = Simulation(chain_config(), seed=3, deployment=dep).run()
        [message] = result.messages
        assert message.terminal == TerminalState.STUCK_AT_CMR
        assert message.reached_cmr and not message.reached_portal

    def test_single_hop_without_home_cmr(self):
        dep = deployment([node(0, "portal", 10.0), node(1, "cmr", 90.0), node(2, "cr", 500.0),
                          pr_at(3, 530.0, channel=0)])
        result = Simulation(chain_config(mode="single_hop"), seed=3, deployment=dep).run()
        [message] = result.messages
        assert message.terminal == TerminalState.DIED_IN_NETWORK
        assert result.metrics.delivery_ratio_cmr_neighbor == 0.0

    def test_ttl_one_dies_one_hop_short(self):
        """cr4 -> cr3 spends the only hop; the CMR neighborhood is one hop further."""
        dep = line(["portal", "cmr", "cr", "cr", "cr"], extra=[pr_at(5, 360.0, y=20.0, channel=0)])
        result = Simulation(chain_config(ttl_init=1, cr_count=3), seed=1, deployment=dep).run()
        [message] = result.messages
        assert message.injector_cr == 4
        assert message.terminal == TerminalState.DIED_IN_NETWORK
        assert message.reached_cmr_neighbor is False

    def test_event_log_header(self):
        log = EventLog()
        Simulation(chain_config(), seed=3, deployment=chain(), log=log).run()
        assert log.header["seed"] == "3"
        assert log.header["mode"] == "multi_hop"
        assert log.header["delivery_ratio_portal"] == "1.000000"
        kinds = {e.kind for e in log}
        assert {EventKind.DISCOVER, EventKind.PICKUP, EventKind.INJECT, EventKind.TX, EventKind.CMR_RX,
                EventKind.RELAY, EventKind.PORTAL, EventKind.TERMINAL} <= kinds

    def test_coordinated_maps_collect_feedback(self):
        log = EventLog()
        Simulation(chain_config(mode="single_hop", cmr_map_mode="coordinated"), seed=3,
                   deployment=chain(), log=log).run()
        feedback = log.of_kind(EventKind.FEEDBACK)
        assert feedback and all(e.node == 2 and e.peer == 1 for e in feedback)

    def test_no_pr_data_means_no_injection(self):
        result = Simulation(ExperimentConfig(**{**SMALL, "pr_count": 0}), seed=2).run()
        assert result.messages == []
        assert result.metrics.injected == 0

    def test_interval_injection(self):
        config = chain_config(messages=3, injection_interval=10, slots=60)
        result = Simulation(config, seed=3, deployment=chain()).run()
        slots = [m.injected_slot - config.warmup_slots for m in result.messages]
        assert slots == [0, 10, 20]

    def test_mobile_run_replays_clean(self):
        config = ExperimentConfig(**{**SMALL, "cr_mobile": True, "cr_speed": 5.0})
        result = run_replication(config, 0, with_log=True)
        assert result.log.header["mobile"] == "1"
        assert replay(result.deployment, result.log).ok

    @settings(max_examples=1000, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**31),
        mode=st.sampled_from(["multi_hop", "single_hop"]),
        strategy=st.sampled_from(["surf", "rd"]),
        occupancy=st.sampled_from([0.0, 0.3, 0.8]),
    )
    def test_invariants_hold(self, seed, mode, strategy, occupancy):
        config = ExperimentConfig(**{**SMALL, "mode": mode, "strategy": strategy, "occupancy_prob": occupancy})
        log = EventLog()
        sim = Simulation(config, seed=seed, log=log)
        result = sim.run()
        metrics = result.metrics
        assert metrics.delivery_ratio_portal <= metrics.delivery_ratio_cmr <= metrics.delivery_ratio_cmr_neighbor

        for message in result.messages:
            assert message.terminal is not None
            senders = [hop.node_id for hop in message.hop_trace]
            assert len(senders) == len(set(senders))
            for hop in message.hop_trace:
                assert hop.ttl >= 1
                if hop.parent is not None:
                    assert hop.ttl == message.hop_trace[hop.parent].ttl - 1

        for event in log.of_kind(EventKind.RX, EventKind.CMR_RX):
            receiver = result.deployment.node(event.node)
            assert not sim.spectrum.channel_busy(event.channel, event.slot, receiver.position, receiver.range_m)

        assert replay(result.deployment, log).ok


class TestRun:
    """Tests for run() over replications."""

    def test_no_cmrs(self):
        config = ExperimentConfig(cr_count=30, pr_count=30, cmr_count=0, channels=2, slots=60, messages=3,
                                  pr_data_rate=1.0, replications=2)
        metrics = run(config)
        assert metrics.delivery_ratio_cmr_neighbor == 0.0
        assert metrics.delivery_ratio_portal == 0.0

    def test_deterministic(self):
        config = ExperimentConfig(**{**SMALL, "replications": 3, "seed": 11})
        assert csv_of(config, run(config)) == csv_of(config, run(config))

    def test_replication_seeds_differ(self):
        config = ExperimentConfig(**{**SMALL, "replications": 3})
        metrics = run(config)
        assert [r.replication for r in metrics.replications] == [0, 1, 2]
        assert len({r.seed for r in metrics.replications}) == 3

    def test_workers_do_not_change_results(self):
        serial = ExperimentConfig(**{**SMALL, "replications": 4, "seed": 5})
        parallel = ExperimentConfig(**{**SMALL, "replications": 4, "seed": 5, "workers": 2})
        assert csv_of(serial, run(serial)) == csv_of(parallel, run(parallel))

    def test_run_many_matches_run(self):
        first = ExperimentConfig(**{**SMALL, "replications": 2, "seed": 5, "workers": 2})
        second = ExperimentConfig(**{**SMALL, "replications": 3, "seed": 6, "cmr_count": 3})
        pooled = run_many([first, second])
        assert [csv_of(c, m) for c, m in zip([first, second], pooled)] == [csv_of(first, run(first)),
                                                                            csv_of(second, run(second))]
        assert [len(m.replications) for m in pooled] == [2, 3]

    def test_run_many_empty(self):
        assert run_many([]) == []

    def test_nothing_injected(self):
        with pytest.raises(UndefinedMetricError):
            run(ExperimentConfig(**{**SMALL, "pr_count": 0, "replications": 2}))
