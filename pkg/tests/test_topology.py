"""Tests for deployments and the neighbor relation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.topology.deploy import (
    RandomWaypoint,
    backbone_satisfied,
    cmr_neighborhood,
    deploy_random,
    dump_deployment,
    load_deployment,
    neighbors,
)
from src.topology.models import Role
from src.utils.config import ExperimentConfig
from src.utils.errors import DeploymentError, LogParseError, NotFoundError
from tests.helpers import deployment, line, node


class TestDeployRandom:
    """Tests for random deployments."""

    def test_single_cmr_next_to_portal(self):
        config = ExperimentConfig(cr_count=0, pr_count=0, cmr_count=1)
        dep = deploy_random(config, seed=4)
        assert len(dep.nodes) == 2
        portal, cmr = dep.by_role(Role.PORTAL)[0], dep.by_role(Role.CMR)[0]
        assert (portal.x, portal.y) == (500.0, 500.0)
        assert portal.distance_to(cmr) <= min(config.cmr_range, config.portal_range)

    def test_id_order_and_counts(self):
        config = ExperimentConfig(cr_count=7, pr_count=4, cmr_count=3, portal_count=2)
        dep = deploy_random(config, seed=1)
        roles = [n.role for n in sorted(dep.nodes, key=lambda n: n.node_id)]
        assert roles == [Role.PORTAL] * 2 + [Role.CMR] * 3 + [Role.CR_DEVICE] * 7 + [Role.PR_DEVICE] * 4
        assert all(0 <= n.channel < config.channels for n in dep.by_role(Role.PR_DEVICE))

    def test_cmrs_are_multi_radio(self):
        dep = deploy_random(ExperimentConfig(cmr_count=4, cmr_radios=3), seed=2)
        assert all(n.radio_count == 3 for n in dep.by_role(Role.CMR))

    @settings(max_examples=1000, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_deterministic(self, seed):
        config = ExperimentConfig(cr_count=5, pr_count=3, cmr_count=2)
        assert dump_deployment(deploy_random(config, seed)) == dump_deployment(deploy_random(config, seed))

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1), cmrs=st.integers(min_value=0, max_value=10))
    def test_backbone_invariant(self, seed, cmrs):
        dep = deploy_random(ExperimentConfig(cr_count=0, pr_count=0, cmr_count=cmrs), seed)
        assert backbone_satisfied(dep)

    def test_unsatisfiable_backbone(self):
        config = ExperimentConfig(cr_count=0, pr_count=0, cmr_count=1, area_width=1e6, area_height=1e6,
                                  cmr_range=1.0, portal_range=1.0, max_placement_attempts=1)
        with pytest.raises(DeploymentError):
            deploy_random(config, seed=0)

    def test_mean_degree_matches_disk_area(self):
        """Interior CR degree against pi r^2 density, counted pair by pair."""
        config = ExperimentConfig(cr_count=200, pr_count=0, cmr_count=0, cr_range=100.0, portal_range=1.0)
        density = config.cr_count / (config.area_width * config.area_height)
        degrees = []
        for seed in range(1000):
            dep = deploy_random(config, seed)
            crs = dep.by_role(Role.CR_DEVICE)
            xy = dep.positions([c.node_id for c in crs])
            interior = (xy.min(axis=1) > 100.0) & (xy.max(axis=1) < 900.0)
            gap = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
            counts = (gap <= 100.0).sum(axis=1) - 1
            degrees.extend(counts[interior].tolist())
            if seed < 5:
                for k, cr in enumerate(crs):
                    in_graph = sum(1 for v in dep.graph.neighbors(cr.node_id) if dep.node(v).role == Role.CR_DEVICE)
                    assert in_graph == counts[k]
        assert np.mean(degrees) == pytest.approx(math.pi * 100.0 ** 2 * density, rel=0.05)


class TestNeighbors:
    """Tests for the unit-disk neighbor relation."""

    def test_within_range(self):
        dep = deployment([node(0, "cr", 0.0), node(1, "cr", 90.0)])
        assert neighbors(dep, 0) == [1]
        assert neighbors(dep, 1) == [0]

    def test_beyond_range(self):
        dep = deployment([node(0, "cr", 0.0), node(1, "cr", 110.0)])
        assert neighbors(dep, 0) == []

    def test_line_graph(self):
        dep = line(["cr", "cr", "cr"], spacing=80.0)
        assert neighbors(dep, 1) == [0, 2]
        assert neighbors(dep, 0) == [1]
        assert neighbors(dep, 2) == [1]

    def test_limited_by_shorter_range(self):
        dep = deployment([node(0, "cmr", 0.0, range_m=250.0), node(1, "cr", 200.0, range_m=150.0)])
        assert neighbors(dep, 0) == []

    def test_unknown_node(self):
        dep = deployment([node(0, "cr", 0.0)])
        with pytest.raises(NotFoundError):
            neighbors(dep, 5)

    @settings(max_examples=1000, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_symmetric_and_irreflexive(self, seed):
        dep = deploy_random(ExperimentConfig(cr_count=15, pr_count=5, cmr_count=2, area_width=400.0,
                                             area_height=400.0), seed)
        for n in dep.nodes:
            around = neighbors(dep, n.node_id)
            assert n.node_id not in around
            for v in around:
                assert n.node_id in neighbors(dep, v)

    def test_cmr_neighborhood(self):
        dep = line(["portal", "cmr", "cr", "cr"])
        assert cmr_neighborhood(dep) == {0, 1, 2}


class TestBackbone:
    """Tests for backbone paths."""

    def test_chain_to_portal(self):
        dep = line(["portal", "cmr", "cmr", "cmr"])
        assert dep.backbone_path(3) == [3, 2, 1, 0]

    def test_nearest_portal(self):
        dep = line(["portal", "cmr", "cmr", "cmr", "portal"])
        assert dep.backbone_path(3) == [3, 4]

    def test_cut_off(self):
        dep = deployment([node(0, "portal", 0.0), node(1, "cmr", 500.0)])
        assert dep.backbone_path(1) is None
        assert not backbone_satisfied(dep)


class TestDeploymentFormat:
    """Tests for the text format."""

    def test_round_trip(self):
        dep = deploy_random(ExperimentConfig(cr_count=6, pr_count=4, cmr_count=2, cr_mobile=True), seed=12)
        text = dump_deployment(dep)
        again = load_deployment(text)
        assert dump_deployment(again) == text
        assert again.nodes == dep.nodes

    def test_malformed_line(self):
        text = "# area 100.0 100.0 seed 1\n0 portal 50.0 50.0 250.0 2 -\n1 cr 10.0 oops 150.0 1 -\n"
        with pytest.raises(LogParseError) as info:
            load_deployment(text)
        assert info.value.line_number == 3

    def test_missing_header(self):
        with pytest.raises(LogParseError):
            load_deployment("0 portal 50.0 50.0 250.0 2 -\n")


class TestRandomWaypoint:
    """Tests for CR mobility."""

    def test_only_mobile_nodes_move(self):
        dep = deploy_random(ExperimentConfig(cr_count=5, pr_count=3, cmr_count=1, cr_mobile=True), seed=3)
        moved = RandomWaypoint(dep, speed=5.0, seed=3).advance(dep, 40)
        for before in dep.nodes:
            after = moved.node(before.node_id)
            if before.role == Role.CR_DEVICE:
                assert before.distance_to(after) <= 5.0 * 40 + 1e-9
                assert 0.0 <= after.x <= dep.width and 0.0 <= after.y <= dep.height
            else:
                assert (after.x, after.y) == (before.x, before.y)

    def test_static_deployment_unchanged(self):
        dep = deploy_random(ExperimentConfig(cr_count=5, pr_count=0, cmr_count=1), seed=3)
        assert RandomWaypoint(dep, speed=5.0, seed=3).advance(dep, 40) is dep
