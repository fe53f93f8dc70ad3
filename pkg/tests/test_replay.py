"""Tests for the event log format and log replay."""

import pytest

from src.engine.simulation import Simulation
from src.topology.deploy import dump_deployment
from src.tracking.event_log import Event, EventKind, EventLog
from src.tracking.replay import replay, replay_files
from src.utils.config import ExperimentConfig
from src.utils.errors import LogParseError
from tests.helpers import line, pr_at


def chain_run():
    """portal - cmr - cr with a PR beside the CR; one message reaches the portal."""
    dep = line(["portal", "cmr", "cr"], extra=[pr_at(3, 200.0, channel=0)])
    config = ExperimentConfig(channels=1, occupancy_prob=0.0, pr_data_rate=1.0, messages=1, ttl_init=2, slots=50,
                              selection_slots=5, replications=1, cr_count=1, pr_count=1, cmr_count=1)
    log = EventLog()
    Simulation(config, seed=3, deployment=dep, log=log).run()
    return dep, log


def edited(log, kind, change):
    """Serialize, rewrite the first line of the given kind, parse back; returns (log, line number)."""
    lines = log.dumps().splitlines()
    index = next(i for i, text in enumerate(lines) if not text.startswith("#") and text.split("\t")[1] == kind)
    lines[index] = change(lines[index].split("\t"))
    return EventLog.loads("\n".join(lines) + "\n"), index + 1


class TestEventLog:
    """Tests for the tab-separated log format."""

    def test_dumps_and_loads(self):
        _, log = chain_run()
        parsed = EventLog.loads(log.dumps())
        assert parsed.events == log.events
        assert parsed.header == log.header

    def test_empty_fields(self):
        event = Event(4, EventKind.GRANT, 2, channel=1)
        assert event.to_line() == "4\tGRANT\t2\t1\t-\t-\t-\t-"
        assert Event.from_line(event.to_line(), 1) == event

    def test_line_numbers(self):
        log = EventLog.loads("# seed=1\n\n0\tDISCOVER\t2\t0\t-\t-\t3\t-\n")
        assert log.line_of(0) == 3

    @pytest.mark.parametrize("text, line_number", [
        ("# seed=1\n0\tTX\t2\n", 2),
        ("# seed=1\n0\tDISCOVER\t2\t0\t-\t-\t3\t-\n5\tBOGUS\t2\t0\t-\t-\t-\t-\n", 3),
        ("# seed=1\n0\tTX\tx\t0\t1\t2\t-\t-\n", 2),
        ("# seed\n", 1),
    ])
    def test_malformed(self, text, line_number):
        with pytest.raises(LogParseError) as info:
            EventLog.loads(text, "run.tsv")
        assert info.value.line_number == line_number
        assert str(info.value).startswith(f"run.tsv:{line_number}:")


class TestReplay:
    """Tests for replay()."""

    def test_clean_run(self):
        dep, log = chain_run()
        report = replay(dep, log)
        assert report.ok
        assert report.messages == 1
        assert report.recount == report.reported == {
            "delivery_ratio_cmr": 1.0, "delivery_ratio_portal": 1.0, "delivery_ratio_cmr_neighbor": 1.0,
        }

    def test_corrupted_ttl_located(self):
        dep, log = chain_run()

        def bump(fields):
            fields[5] = str(int(fields[5]) + 1)
            return "\t".join(fields)

        corrupted, line_number = edited(log, "TX", bump)
        report = replay(dep, corrupted)
        assert any(v.line == line_number and v.check == "ttl" for v in report.violations)

    def test_reception_out_of_range(self):
        dep, log = chain_run()

        def move(fields):
            fields[2] = "0"
            return "\t".join(fields)

        corrupted, line_number = edited(log, "CMR_RX", move)
        report = replay(dep, corrupted)
        assert any(v.line == line_number and v.check == "reception" for v in report.violations)

    def test_duplicate_transmission(self):
        dep, log = chain_run()
        tx = log.of_kind(EventKind.TX)[0]
        log.events.append(Event(tx.slot + 1, EventKind.TX, tx.node, tx.channel, tx.msg, tx.ttl))
        report = replay(dep, log)
        assert [v.check for v in report.violations] == ["duplicate"]
        assert report.violations[0].line == len(log.events) + 1

    def test_two_grants_on_one_channel(self):
        dep, log = chain_run()
        log.record(90, EventKind.GRANT, 2, channel=0, peer=1)
        log.record(90, EventKind.GRANT, 2, channel=0, peer=1)
        report = replay(dep, log)
        assert [v.check for v in report.violations] == ["polling"]

    def test_reported_ratio_mismatch(self):
        dep, log = chain_run()
        log.header["delivery_ratio_portal"] = "0.500000"
        report = replay(dep, log)
        [violation] = report.violations
        assert (violation.line, violation.check) == (1, "delivery")

    def test_summary(self):
        dep, log = chain_run()
        text = replay(dep, log).summary()
        assert text.splitlines()[0].endswith("1 messages, 0 violation(s)")
        assert "delivery_ratio_portal: recount 1.000000 reported 1.000000" in text

    def test_from_files(self, tmp_path):
        dep, log = chain_run()
        (tmp_path / "deployment.txt").write_text(dump_deployment(dep))
        log.save(tmp_path / "events.tsv")
        assert replay_files(tmp_path / "deployment.txt", tmp_path / "events.tsv").ok
